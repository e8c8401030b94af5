"""Convex hull of a support from moments.

With ``M'`` the moment matrix without its first row (``M'[a, b] = c[a+1, b]``)
the quotients ``v M' v* / v M v* = int z |p|^2 dmu / int |p|^2 dmu`` are
weighted averages of ``z`` over the support, and they fill its convex hull.
In the orthonormal polynomial basis, multiplication by ``z`` is an upper
Hessenberg matrix ``D``; the numerical ranges of its leading sections grow
towards the same hull.  The Christoffel function ``K_n(xi)`` bounds point
evaluations of polynomials of degree at most ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._numeric import ctx, mp_scalar, to_numpy
from .errors import ContractError, FiniteSupportError
from .matrices import _as_rows, _cholesky_rows, _forward_solve, pivot_tolerance
from .measures import Measure
from .raster import DEFAULT_MARGIN, DEFAULT_PIXELS, RegionMask
from .support import default_frame

__all__ = [
    "DEFAULT_ANGLES",
    "HessenbergSection",
    "hessenberg_section",
    "NumericalRangeBoundary",
    "numerical_range_boundary",
    "HullEstimate",
    "hull_estimate",
    "rayleigh_hull_samples",
    "christoffel_sequence",
    "christoffel_bound",
]

DEFAULT_ANGLES = 720


@dataclass(frozen=True, eq=False)
class HessenbergSection:
    """Leading ``(order+1) x (order+1)`` block of multiplication by ``z``.

    ``entries[j, k] = <z p_k, p_j>`` for the orthonormal polynomials ``p_k``
    with positive leading coefficients.
    """

    order: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.order + 1

    def leading(self, size: int) -> np.ndarray:
        return self.entries[:size, :size]


def _factor(mu: Measure, n: int, module: str):
    """Cholesky factor rows of ``M_n`` or a finite-support error naming the degree."""
    rows = _as_rows(mu.moments.section(n))
    L, good = _cholesky_rows(rows, pivot_tolerance(n + 1, mu.moments.eps))
    if good < n + 1:
        raise FiniteSupportError(good, mu.name, module)
    return L


def rank_order(mu: Measure, N: int) -> int:
    """Largest ``n <= N`` with a positive definite section ``M_n``."""
    rows = _as_rows(mu.moments.section(N))
    _, good = _cholesky_rows(rows, pivot_tolerance(N + 1, mu.moments.eps))
    if good == 0:
        raise FiniteSupportError(0, mu.name, "hull")
    return good - 1


def hessenberg_section(mu: Measure, n: int) -> HessenbergSection:
    """``D_n`` with ``d[j, k] = <z p_k, p_j>``, ``0 <= j, k <= n``.

    With ``M_n = L L^H`` the rows of ``V = L^{-1}`` are the coefficients of
    the orthonormal polynomials, and ``D_n`` is the transpose of
    ``V M'_n V^H``.  Requires ``M_n`` positive definite.
    """
    if n < 0:
        raise ContractError(f"order must be non-negative, got {n}")
    L = _factor(mu, n, "hull")
    big = mu.moments.section(n + 1)
    size = n + 1
    mprime_cols = [[big[a + 1, b] for a in range(size)] for b in range(size)]
    Z = _forward_solve(L, mprime_cols)  # columns of L^{-1} M'
    zh_cols = [[ctx.conj(Z[j][i]) for j in range(size)] for i in range(size)]
    Y = _forward_solve(L, zh_cols)  # columns of L^{-1} Z^H = (Z L^{-H})^H
    # X = V M' V^H = (L^{-1} Z^H)^H, so X[k][j] = conj(Y[k][j]); D = X^T
    D = np.zeros((size, size), dtype=np.complex128)
    for j in range(size):
        for k in range(size):
            if j > k + 1:
                continue
            if j == k + 1:
                D[j, k] = float(L[k + 1][k + 1] / L[k][k])
            else:
                D[j, k] = complex(ctx.conj(Y[k][j]))
    return HessenbergSection(n, D)


@dataclass(frozen=True, eq=False)
class NumericalRangeBoundary:
    """Boundary points of ``W(D)``, one per support angle, in angle order."""

    points: np.ndarray
    angles: np.ndarray
    support: np.ndarray
    order: int

    def max_modulus(self) -> float:
        return float(np.abs(self.points).max())

    def contains(self, z, tol: float = 1e-8) -> np.ndarray:
        """Membership in the polygon spanned by the boundary points, inflated by ``tol``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        pts = self.points
        if pts.size == 1 or np.ptp(pts.real) + np.ptp(pts.imag) <= tol:
            return np.abs(z - pts[0]) <= tol + np.abs(pts - pts[0]).max()
        inside = np.ones(z.shape, dtype=bool)
        ring = np.append(pts, pts[0])
        for a, b in zip(ring[:-1], ring[1:]):
            edge = b - a
            length = abs(edge)
            if length == 0:
                continue
            cross = (edge.conjugate() * (z - a)).imag / length
            inside &= cross >= -tol
        return inside

    def to_csv(self, subcommand: str = "numrange") -> str:
        lines = [
            f"# subcommand: {subcommand}",
            "theta [rad],re [z],im [z]",
        ]
        for t, p in zip(self.angles, self.points):
            lines.append(f"{float(t)!r},{float(p.real)!r},{float(p.imag)!r}")
        return "\n".join(lines) + "\n"


def numerical_range_boundary(D, angle_count: int = DEFAULT_ANGLES) -> NumericalRangeBoundary:
    """Boundary of the field of values of a square matrix.

    For each angle the top eigenvector ``x`` of the Hermitian part of
    ``exp(-i theta) D`` gives the boundary point ``x^H D x``; consecutive
    points trace the convex boundary counter-clockwise.
    """
    if angle_count < 8:
        raise ContractError("angle_count must be at least 8")
    D = np.asarray(D, dtype=np.complex128)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
        raise ContractError("D must be a non-empty square matrix")
    theta = 2 * np.pi * np.arange(angle_count) / angle_count
    rot = np.exp(-1j * theta)[:, None, None] * D[None, :, :]
    herm = (rot + np.conj(np.swapaxes(rot, 1, 2))) / 2
    w, v = np.linalg.eigh(herm)
    x = v[:, :, -1]
    points = np.einsum("ti,ij,tj->t", x.conj(), D, x)
    return NumericalRangeBoundary(points, theta, w[:, -1].copy(), D.shape[0] - 1)


@dataclass(frozen=True, eq=False)
class HullEstimate:
    """Union of the numerical ranges of the leading Hessenberg blocks."""

    mask: RegionMask
    boundaries: tuple[NumericalRangeBoundary, ...]
    sizes: tuple[int, ...]

    def contains(self, z, inflate: int = 1) -> np.ndarray:
        return self.mask.inflate(inflate).contains(z)

    def to_csv(self, subcommand: str = "hull") -> str:
        lines = [
            f"# subcommand: {subcommand}; size is the Hessenberg block size",
            "size [1],theta [rad],re [z],im [z]",
        ]
        for s, b in zip(self.sizes, self.boundaries):
            for t, p in zip(b.angles, b.points):
                lines.append(f"{s},{float(t)!r},{float(p.real)!r},{float(p.imag)!r}")
        return "\n".join(lines) + "\n"


def hull_estimate(
    mu: Measure,
    N: int = 40,
    angle_count: int = DEFAULT_ANGLES,
    frame: RegionMask | None = None,
    pixels: int = DEFAULT_PIXELS,
    margin: float = DEFAULT_MARGIN,
) -> HullEstimate:
    """Raster of the union of ``W(D)`` over leading blocks of sizes ``1..N``.

    For measures with ``k`` atoms the blocks stop at size ``k``, where the
    block is the full (normal) multiplication operator.
    """
    if N < 1:
        raise ContractError("N must be at least 1")
    top = min(N, rank_order(mu, N - 1) + 1)
    D = hessenberg_section(mu, top - 1).entries
    if frame is None:
        frame = default_frame(mu, pixels, margin)
    mask = frame.blank("hull")
    boundaries = []
    sizes = tuple(range(1, top + 1))
    for s in sizes:
        b = numerical_range_boundary(D[:s, :s], angle_count)
        boundaries.append(b)
        mask = mask.with_convex_polygon(b.points, provenance="hull")
    return HullEstimate(mask, tuple(boundaries), sizes)


def rayleigh_hull_samples(mu: Measure, vectors: Sequence[Sequence[complex]]) -> np.ndarray:
    """``v M' v* / v M v*`` for each coefficient vector ``v`` (lowest degree first)."""
    if not vectors:
        return np.zeros(0, dtype=complex)
    n = max(len(v) for v in vectors)
    if n == 0:
        raise ContractError("empty coefficient vector")
    sec = to_numpy(mu.moments.section(n))
    M = sec[:n, :n]
    Mp = sec[1:n + 1, :n]
    out = np.empty(len(vectors), dtype=complex)
    for t, v in enumerate(vectors):
        w = np.zeros(n, dtype=complex)
        w[: len(v)] = v
        if not np.any(w):
            raise ContractError("Rayleigh quotient of the zero vector")
        den = (w @ M @ w.conj()).real
        out[t] = (w @ Mp @ w.conj()) / den
    return out


def christoffel_sequence(mu: Measure, xi: complex, N: int) -> list[float]:
    """``K_n(xi) = sup |p(xi)|^2 / int |p|^2 dmu`` over ``deg p <= n``, for ``n = 0..N``.

    ``K_n(xi) = e^H M_n^{-1} e`` with ``e = (1, xi, ..., xi^n)``; one triangular
    solve with the Cholesky factor of ``M_N`` gives every order at once.
    """
    if N < 0:
        raise ContractError("N must be non-negative")
    L = _factor(mu, N, "hull")
    x = mp_scalar(complex(xi))
    e = [ctx.one]
    for _ in range(N):
        e.append(e[-1] * x)
    (y,) = _forward_solve(L, [e])
    out, acc = [], ctx.zero
    for t in y:
        acc += ctx.re(t * ctx.conj(t))
        out.append(float(acc))
    return out


def christoffel_bound(mu: Measure, xi: complex, n: int) -> float:
    return christoffel_sequence(mu, xi, n)[-1]

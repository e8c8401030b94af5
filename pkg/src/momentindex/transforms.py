"""Similarity maps ``z -> alpha z + beta`` and what they do to moment matrices.

If ``phi(z) = alpha z + beta`` then ``phi(z)**i`` expands binomially, so the
section of order ``n`` of the image measure is ``A M A^H`` with the lower
triangular ``A[i, k] = C(i, k) alpha**k beta**(i - k)``.  Because the same
``A`` acts on both members of a pencil, comparison indices are unchanged by a
common similarity, order by order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from ._exact import ExactMatrix, QQi, is_exact_like, to_exact
from ._numeric import ctx, mp_scalar, ordered_map, to_mp_matrix
from .errors import ContractError, FiniteSupportError, NotPositiveDefiniteError
from .measures import Atomic, CircleDensity, CircleUniform, Measure, Pushforward

__all__ = [
    "SimilarityMap",
    "similarity_matrix",
    "pushforward_moments",
    "pushforward",
    "InvarianceReport",
    "invariance_report",
    "pencil_invariance",
    "DensityPoint",
    "DensityVerdict",
    "completeness_necessary_sweep",
    "DEFAULT_DENSITY_GRID",
    "NOT_DENSE",
    "PASSED",
]

NOT_DENSE = "polynomials NOT dense in L2(mu)"
PASSED = "necessary condition passed (inconclusive for density)"

DEFAULT_DENSITY_GRID: tuple[tuple[str, str], ...] = tuple(
    (z0, r)
    for z0 in ("0", "1/2", "-1/2", "1", "-1", "1/2i", "-1/2i", "i", "-i")
    for r in ("1/4", "1/2", "1", "2")
)


@dataclass(frozen=True)
class SimilarityMap:
    """The affine map ``phi(z) = alpha * z + beta`` with ``alpha != 0``."""

    alpha: object = 1
    beta: object = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_exact(self.alpha))
        object.__setattr__(self, "beta", to_exact(self.beta))
        if not self.alpha:
            raise ContractError("similarity scale alpha must be nonzero")

    def __call__(self, z):
        if isinstance(z, QQi):
            return self.alpha * z + self.beta
        return complex(self.alpha) * z + complex(self.beta)

    def inverse(self) -> "SimilarityMap":
        inv = QQi(1) / self.alpha
        return SimilarityMap(inv, -self.beta * inv)

    def compose(self, inner: "SimilarityMap") -> "SimilarityMap":
        """``self o inner``: ``z -> alpha (alpha' z + beta') + beta``."""
        return SimilarityMap(self.alpha * inner.alpha, self.alpha * inner.beta + self.beta)

    def matrix(self, n: int, exact: bool = True):
        return similarity_matrix(self.alpha, self.beta, n, exact=exact)

    @property
    def is_positive_scaling(self) -> bool:
        return self.alpha.is_real() and self.alpha.re > 0


def similarity_matrix(alpha, beta, n: int, exact: bool | None = None):
    """Lower-triangular ``A_n(alpha, beta)`` of size ``n + 1``.

    Exact (:class:`ExactMatrix`) when the parameters convert without loss and
    ``exact`` is not false; otherwise an mpmath matrix.
    """
    if n < 0:
        raise ContractError(f"order must be non-negative, got {n}")
    if exact is None:
        exact = is_exact_like(alpha) and is_exact_like(beta)
    if exact:
        a, b = to_exact(alpha), to_exact(beta)
        one = QQi(1)
        apow, bpow = [one], [one]
        for _ in range(n):
            apow.append(apow[-1] * a)
            bpow.append(bpow[-1] * b)
        return ExactMatrix(
            [
                [apow[k] * bpow[i - k] * comb(i, k) if k <= i else QQi(0) for k in range(n + 1)]
                for i in range(n + 1)
            ]
        )
    a, b = mp_scalar(alpha), mp_scalar(beta)
    out = ctx.matrix(n + 1, n + 1)
    for i in range(n + 1):
        for k in range(i + 1):
            out[i, k] = comb(i, k) * a**k * b ** (i - k)
    return out


def pushforward_moments(section, alpha, beta):
    """Section of the image measure: ``A_n(alpha, beta) M_n A_n(alpha, beta)^H``.

    Exact for an :class:`ExactMatrix` section, otherwise computed in working
    precision.  The result is made exactly Hermitian.
    """
    if isinstance(section, ExactMatrix):
        n = section.shape[0] - 1
        A = similarity_matrix(alpha, beta, n, exact=True)
        return A @ section @ A.H
    m = to_mp_matrix(section)
    n = m.rows - 1
    A = similarity_matrix(alpha, beta, n, exact=False)
    out = A * m * A.H
    for i in range(n + 1):
        out[i, i] = ctx.re(out[i, i])
        for j in range(i + 1, n + 1):
            out[j, i] = ctx.conj(out[i, j])
    return out


def _exact_abs(a: QQi) -> Fraction | None:
    """``|a|`` when it is rational."""
    num, den = a.abs2().numerator, a.abs2().denominator
    rn, rd = _isqrt_exact(num), _isqrt_exact(den)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def _isqrt_exact(k: int) -> int | None:
    from math import isqrt

    s = isqrt(k)
    return s if s * s == k else None


def pushforward(mu: Measure, phi: SimilarityMap, label: str = "") -> Measure:
    """The image measure ``mu o phi^{-1}``.

    Closed-form families stay closed-form when the image parameters are
    rational; anything else is wrapped in :class:`Pushforward`.
    """
    kw = {"label": label} if label else {}
    if isinstance(mu, Atomic):
        return Atomic(tuple((phi(z), w) for z, w in mu.points), **kw)
    scale = _exact_abs(phi.alpha)
    if scale is not None and isinstance(mu, CircleUniform):
        return CircleUniform(phi(mu.center), mu.radius * scale, mu.mass, **kw)
    if scale is not None and isinstance(mu, CircleDensity):
        # the angle shifts by arg(alpha): a_k -> a_k * (conj(alpha)/|alpha|)**k
        rot = phi.alpha.conjugate() / QQi(scale)
        coeffs = tuple(a * rot**k for k, a in enumerate(mu.coefficients))
        return CircleDensity(phi(mu.center), mu.radius * scale, coeffs, **kw)
    if isinstance(mu, Pushforward):
        inner = SimilarityMap(mu.alpha, mu.beta)
        both = phi.compose(inner)
        return Pushforward(mu.base, both.alpha, both.beta, **kw)
    return Pushforward(mu, phi.alpha, phi.beta, **kw)


# ---------------------------------------------------------------------------
# invariance of indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceReport:
    """Per-order comparison of index sequences before and after a similarity."""

    phi: SimilarityMap
    lam_before: tuple[float, ...]
    lam_after: tuple[float, ...]
    beta_before: tuple[float, ...]
    beta_after: tuple[float, ...]

    @property
    def max_relative_discrepancy(self) -> float:
        worst = 0.0
        for xs, ys in ((self.lam_before, self.lam_after), (self.beta_before, self.beta_after)):
            for x, y in zip(xs, ys):
                scale = max(abs(x), abs(y))
                if scale > 0:
                    worst = max(worst, abs(x - y) / scale)
        return worst


def pencil_invariance(mu1: Measure, mu2: Measure, phi: SimilarityMap, N: int) -> InvarianceReport:
    """Compare ``(mu1, mu2)`` with ``(mu1 o phi^{-1}, mu2 o phi^{-1})`` order by order.

    Valid for any similarity; both sides are computed from their own moments.
    """
    from .indices import index_sequences

    before = index_sequences(mu1, mu2, N)
    after = index_sequences(pushforward(mu1, phi), pushforward(mu2, phi), N)
    return InvarianceReport(phi, before.lam, after.lam, before.beta, after.beta)


def invariance_report(mu: Measure, phi: SimilarityMap, N: int) -> InvarianceReport:
    """Compare ``(mu, m)`` with ``(mu o phi^{-1}, m_{beta; alpha})`` order by order.

    ``m`` is the uniform measure on the unit circle; ``phi`` must scale by a
    positive real ``alpha``, so that its image is the uniform measure on the
    circle of center ``beta`` and radius ``alpha``.
    """
    if not phi.is_positive_scaling:
        raise ContractError("the similarity must scale by a positive real number")
    from .indices import index_sequences

    unit = CircleUniform()
    target = CircleUniform(phi.beta, phi.alpha.re)
    before = index_sequences(mu, unit, N)
    after = index_sequences(pushforward(mu, phi), target, N)
    return InvarianceReport(phi, before.lam, after.lam, before.beta, after.beta)


# ---------------------------------------------------------------------------
# necessary condition for polynomial density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityPoint:
    """λ-classification of ``(mu, m_{z0; r})`` at one grid point."""

    center: QQi
    radius: Fraction
    estimate: object | None
    error: str | None = None

    @property
    def positive(self) -> bool:
        from .indices import Status

        return (
            self.estimate is not None
            and self.estimate.status is Status.CONVERGED
            and self.estimate.value > 0
        )


@dataclass(frozen=True)
class DensityVerdict:
    points: tuple[DensityPoint, ...]

    @property
    def verdict(self) -> str:
        return NOT_DENSE if any(p.positive for p in self.points) else PASSED

    @property
    def witnesses(self) -> tuple[DensityPoint, ...]:
        return tuple(p for p in self.points if p.positive)


def completeness_necessary_sweep(
    mu: Measure,
    grid: Iterable[tuple[object, object]] = DEFAULT_DENSITY_GRID,
    N: int = 40,
    thresholds=None,
) -> DensityVerdict:
    """λ-status of ``(mu, m_{z0; r})`` over a grid of circles.

    If polynomials are dense in ``L2(mu)`` then every such λ is zero, so a
    grid point whose λ converges to a positive value proves non-density.
    Finite-support failures are recorded per point instead of raised.
    """
    from .indices import estimate_index, index_sequences, positive_definite_order

    pts = [(to_exact(z0), to_exact(r)) for z0, r in grid]
    for _, r in pts:
        if r.im or r.re <= 0:
            raise ContractError(f"grid radius must be positive real, got {r}")
    singular = positive_definite_order(mu, N)
    if singular is not None:
        msg = str(FiniteSupportError(singular, mu.name, "transforms"))
        return DensityVerdict(tuple(DensityPoint(z0, r.re, None, msg) for z0, r in pts))

    def one(point):
        z0, r = point
        try:
            seq = index_sequences(mu, CircleUniform(z0, r.re), N)
        except NotPositiveDefiniteError as exc:
            if not isinstance(exc, FiniteSupportError):
                exc = FiniteSupportError(exc.pivot, mu.name, "transforms")
            return DensityPoint(z0, r.re, None, str(exc))
        return DensityPoint(z0, r.re, estimate_index(seq.lam, "lambda", thresholds))

    return DensityVerdict(tuple(ordered_map(one, pts)))

"""Generalized eigen-extremes of Hermitian pencils.

For Hermitian ``A`` and positive definite ``B`` the extreme generalized
eigenvalues are the extremes of the Rayleigh quotient ``v A v* / v B v*``.
They are computed by a Cholesky reduction ``C = L^{-1} A L^{-H}`` carried out
in the working mpmath precision, followed by a double-precision Hermitian
eigensolve of ``C``.  Only the largest eigenvalue of a reduced matrix is ever
read off, because that one is determined to relative accuracy ``n * eps``
regardless of how spread out the spectrum is; the smallest eigenvalue of
``(A, B)`` is taken as the reciprocal of the largest one of ``(B, A)``
whenever ``A`` is positive definite.

Coefficient vectors follow the row convention of the moment matrices: the
quadratic form is ``v M v* = sum v_i M_ij conj(v_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import ExactMatrix, QQi, extreme_real_roots, is_exact_like, pencil_charpoly, to_exact
from ._numeric import ctx, mp_scalar, to_mp_matrix
from .errors import ContractError, MomentRangeError, NotPositiveDefiniteError

__all__ = [
    "GenEigPair",
    "cholesky",
    "pivot_tolerance",
    "reduce_pencil",
    "top_eigenpairs",
    "extreme_generalized_eigs",
    "rayleigh_quotient",
    "canonical_vector",
]


@dataclass(frozen=True)
class GenEigPair:
    """Extreme generalized eigenvalues of one pencil, with optional witnesses.

    ``lambda_min`` and ``beta_max`` are floats, or Fractions in exact mode;
    ``exact`` tells whether those Fractions are certified roots.  Witness
    vectors have unit ``B``-norm and are refined in working precision.
    """

    lambda_min: float | Fraction
    beta_max: float | Fraction
    argmin: tuple | None = None
    argmax: tuple | None = None
    exact: bool = False


_DOUBLE_EPS = float(np.finfo(np.float64).eps)


def pivot_tolerance(size: int, data_eps: float = 0.0) -> float:
    """Relative pivot threshold below which a Hermitian matrix is declared singular."""
    return max(100.0 * size * data_eps, 10.0 ** (-(ctx.dps - 10)))


def _as_rows(a) -> list[list]:
    a = to_mp_matrix(a)
    return [[a[i, j] for j in range(a.cols)] for i in range(a.rows)]


def _check_hermitian(rows, what: str, rel: float = 0.0) -> None:
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ContractError(f"{what} must be square")
    scale = max((abs(rows[i][i]) for i in range(n)), default=0)
    tol = scale * max(ctx.mpf(10) ** (-(ctx.dps // 2)), 100 * n * rel)
    for i in range(n):
        if abs(ctx.im(rows[i][i])) > tol:
            raise ContractError(f"{what} has a non-real diagonal entry at {i}")
        for j in range(i + 1, n):
            if abs(rows[i][j] - ctx.conj(rows[j][i])) > tol:
                raise ContractError(f"{what} is not Hermitian at ({i}, {j})")


def _cholesky_rows(rows, rtol: float) -> tuple[list[list], int]:
    """Factor as far as possible; returns ``(L rows, number of good pivots)``."""
    n = len(rows)
    L = [[ctx.zero] * n for _ in range(n)]
    for k in range(n):
        s = ctx.re(rows[k][k])
        for t in range(k):
            lkt = L[k][t]
            s -= ctx.re(lkt * ctx.conj(lkt))
        if s <= rtol * abs(ctx.re(rows[k][k])) or s <= 0:
            return L, k
        d = ctx.sqrt(s)
        L[k][k] = d
        for i in range(k + 1, n):
            acc = rows[i][k]
            Li, Lk = L[i], L[k]
            for t in range(k):
                acc -= Li[t] * ctx.conj(Lk[t])
            L[i][k] = acc / d
    return L, n


def cholesky(h, rtol: float | None = None):
    """Lower-triangular ``L`` with positive diagonal such that ``h = L L^H``.

    Raises :class:`NotPositiveDefiniteError` carrying the index of the first
    pivot that is not larger than ``rtol`` times the matching diagonal entry.
    """
    rows = _as_rows(h)
    _check_hermitian(rows, "matrix")
    if rtol is None:
        rtol = pivot_tolerance(len(rows))
    L, good = _cholesky_rows(rows, rtol)
    if good < len(rows):
        raise NotPositiveDefiniteError(good)
    return ctx.matrix(L)


def _forward_solve(L, cols: list[list]) -> list[list]:
    """Solve ``L X = B`` for each column ``B`` (columns given as lists)."""
    n = len(L)
    out = []
    for b in cols:
        x = [ctx.zero] * n
        for i in range(n):
            acc = b[i]
            Li = L[i]
            for t in range(i):
                acc -= Li[t] * x[t]
            x[i] = acc / Li[i]
        out.append(x)
    return out


def _back_solve_h(L, y: list) -> list:
    """Solve ``L^H x = y``."""
    n = len(L)
    x = [ctx.zero] * n
    for i in reversed(range(n)):
        acc = y[i]
        for t in range(i + 1, n):
            acc -= ctx.conj(L[t][i]) * x[t]
        x[i] = acc / L[i][i]
    return x


def _reduce_rows(a_rows, L) -> list[list]:
    n = len(L)
    # columns of A are conjugated rows since A is Hermitian
    a_cols = [[a_rows[i][j] for i in range(n)] for j in range(n)]
    X = _forward_solve(L, a_cols)  # X[j] = column j of L^{-1} A
    # (L^{-1} A)^H has columns conj of rows of L^{-1} A, i.e. conj(X[.][j])
    xh_cols = [[ctx.conj(X[j][i]) for j in range(n)] for i in range(n)]
    Y = _forward_solve(L, xh_cols)  # Y[j] = column j of C
    return [[Y[j][i] for j in range(n)] for i in range(n)]


def reduce_pencil(a, L):
    """``C = L^{-1} A L^{-H}`` in working precision (``L`` from :func:`cholesky`)."""
    Lr = _as_rows(L)
    return ctx.matrix(_reduce_rows(_as_rows(a), Lr))


def _to_hermitian_numpy(rows) -> np.ndarray:
    n = len(rows)
    out = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            out[i, j] = complex(rows[i][j])
    if not np.all(np.isfinite(out)):
        raise MomentRangeError("reduced pencil exceeds double range")
    return (out + out.conj().T) / 2


def top_eigenpairs(c: np.ndarray, sizes: Sequence[int], vector_size: int | None = None):
    """Largest eigenvalue of each leading block ``c[:s, :s]``.

    Returns ``(values, vector)`` where ``vector`` is the canonical eigenvector
    of the block of size ``vector_size`` (or ``None``).
    """
    values = []
    vector = None
    for s in sizes:
        block = c[:s, :s]
        if s == vector_size:
            w, y = np.linalg.eigh(block)
            values.append(float(w[-1]))
            vector = _canonical_top(w, y)
        else:
            values.append(float(np.linalg.eigvalsh(block)[-1]))
    return values, vector


def _canonical_top(w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Deterministic unit vector in the top eigenspace.

    For a cluster of (numerically) equal top eigenvalues the vector is the
    projection of the first coordinate axis that has a non-negligible
    projection, which does not depend on the eigensolver's basis choice.
    """
    s = len(w)
    tol = 1e-12 * s * max(abs(w[-1]), abs(w[0]), 1e-300)
    cluster = y[:, w >= w[-1] - tol]
    for k in range(s):
        p = cluster @ cluster[k, :].conj()
        norm = np.linalg.norm(p)
        if norm > 1e-8:
            return p / norm
    return cluster[:, -1]


def canonical_vector(v: Sequence) -> list:
    """Rotate so the first nonzero coordinate is positive real."""
    for x in v:
        if x != 0:
            phase = ctx.conj(x) / abs(x)
            return [phase * t for t in v]
    return list(v)


def _refine(c_rows, y: np.ndarray, shift: float, steps: int = 2) -> list:
    """Inverse iteration in working precision from a double-precision eigenvector."""
    n = len(c_rows)
    vec = ctx.matrix([mp_scalar(complex(t)) for t in y])
    shifted = ctx.matrix(c_rows) - ctx.mpf(shift) * ctx.eye(n)
    for _ in range(steps):
        try:
            z = ctx.lu_solve(shifted, vec)
        except ZeroDivisionError:
            break
        norm = ctx.norm(z)
        if not norm:
            break
        vec = z / norm
    return [vec[i] for i in range(n)]


def _witness(L, c_rows, y: np.ndarray, shift: float, b_rows) -> tuple:
    y = _refine(c_rows, y, shift)
    # pencil eigenvector x = L^{-H} y; row convention uses conj(x)
    x = _back_solve_h(L, y)
    v = [ctx.conj(t) for t in x]
    norm = ctx.sqrt(ctx.re(_quad(b_rows, v)))
    v = canonical_vector([t / norm for t in v])
    return tuple(v)


def _quad(rows, v) -> object:
    n = len(v)
    acc = ctx.zero
    for i in range(n):
        if v[i] == 0:
            continue
        row = rows[i]
        s = ctx.zero
        for j in range(n):
            s += row[j] * ctx.conj(v[j])
        acc += v[i] * s
    return acc


def _is_diagonal_rows(rows) -> bool:
    return all(rows[i][j] == 0 for i in range(len(rows)) for j in range(len(rows)) if i != j)


def extreme_generalized_eigs(
    a, b, vectors: bool = False, data_eps: float = 0.0
) -> GenEigPair:
    """Smallest and largest generalized eigenvalue of the pencil ``(a, b)``.

    ``a`` must be Hermitian positive semidefinite and ``b`` Hermitian
    positive definite.  :class:`ExactMatrix` inputs select exact mode
    (characteristic polynomial and Sturm sequences; no vectors for
    non-diagonal pencils).  ``data_eps`` is the relative accuracy of the
    entries and sets the singularity threshold.
    """
    if isinstance(a, ExactMatrix) and isinstance(b, ExactMatrix):
        return _exact_extremes(a, b, vectors)
    a_rows, b_rows = _as_rows(a), _as_rows(b)
    n = len(a_rows)
    if len(b_rows) != n or n == 0:
        raise ContractError("pencil matrices must be square, non-empty and of equal size")
    # double-precision inputs are Hermitian only up to their rounding
    rel = max(data_eps, _DOUBLE_EPS if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else 0.0)
    _check_hermitian(a_rows, "A", rel)
    _check_hermitian(b_rows, "B", rel)
    rtol = pivot_tolerance(n, data_eps)
    Lb, good = _cholesky_rows(b_rows, rtol)
    if good < n:
        raise NotPositiveDefiniteError(good, f"B is not positive definite (pivot {good})")
    if _is_diagonal_rows(a_rows) and _is_diagonal_rows(b_rows):
        ratios = [ctx.re(a_rows[k][k]) / ctx.re(b_rows[k][k]) for k in range(n)]
        kmin = min(range(n), key=lambda k: ratios[k])
        kmax = max(range(n), key=lambda k: ratios[k])
        argmin = argmax = None
        if vectors:
            argmin = _unit(n, kmin, b_rows)
            argmax = _unit(n, kmax, b_rows)
        return GenEigPair(float(ratios[kmin]), float(ratios[kmax]), argmin, argmax)
    c_rows = _reduce_rows(a_rows, Lb)
    c = _to_hermitian_numpy(c_rows)
    (beta,), y = top_eigenpairs(c, [n], n if vectors else None)
    argmax = _witness(Lb, c_rows, y, beta, b_rows) if vectors else None
    La, good_a = _cholesky_rows(a_rows, rtol)
    argmin = None
    if good_a == n:
        cp_rows = _reduce_rows(b_rows, La)
        cp = _to_hermitian_numpy(cp_rows)
        (inv,), y2 = top_eigenpairs(cp, [n], n if vectors else None)
        lam = 1.0 / inv
        if vectors:
            argmin = _witness(La, cp_rows, y2, inv, b_rows)
    else:
        w, yy = np.linalg.eigh(c)
        lam = max(float(w[0]), 0.0)
        if vectors:
            y0 = _canonical_top(-w[::-1], yy[:, ::-1])
            argmin = _witness(Lb, c_rows, y0, float(w[0]), b_rows)
    return GenEigPair(lam, float(beta), argmin, argmax)


def _unit(n: int, k: int, b_rows) -> tuple:
    v = [ctx.zero] * n
    v[k] = 1 / ctx.sqrt(ctx.re(b_rows[k][k]))
    return tuple(v)


def _exact_extremes(a: ExactMatrix, b: ExactMatrix, vectors: bool) -> GenEigPair:
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n, n) or n == 0:
        raise ContractError("pencil matrices must be square, non-empty and of equal size")
    if not (a.is_hermitian() and b.is_hermitian()):
        raise ContractError("pencil matrices must be Hermitian")
    if a.is_diagonal() and b.is_diagonal():
        if any(d.re <= 0 for d in b.diagonal()):
            raise NotPositiveDefiniteError(
                next(k for k, d in enumerate(b.diagonal()) if d.re <= 0)
            )
        ratios = [x.re / y.re for x, y in zip(a.diagonal(), b.diagonal())]
        kmin = min(range(n), key=lambda k: ratios[k])
        kmax = max(range(n), key=lambda k: ratios[k])
        argmin = argmax = None
        if vectors:
            argmin = tuple(QQi(1) if k == kmin else QQi(0) for k in range(n))
            argmax = tuple(QQi(1) if k == kmax else QQi(0) for k in range(n))
        return GenEigPair(ratios[kmin], ratios[kmax], argmin, argmax, exact=True)
    from ._exact import ldl_pivots

    piv = ldl_pivots(b)
    if len(piv) < n or piv[-1] <= 0:
        raise NotPositiveDefiniteError(len(piv) - 1)
    (lo, lo_exact), (hi, hi_exact) = extreme_real_roots(pencil_charpoly(a, b))
    return GenEigPair(lo, hi, None, None, exact=lo_exact and hi_exact)


def rayleigh_quotient(a, b, v: Sequence):
    """``v A v* / v B v*`` for a nonzero row coefficient vector ``v``.

    Both matrices are Hermitian, so the quotient is real: a Fraction when all
    inputs are exact, otherwise a real mpmath number.
    """
    if isinstance(a, ExactMatrix) and isinstance(b, ExactMatrix) and all(
        is_exact_like(x) for x in v
    ):
        w = [to_exact(x) for x in v]
        if not any(w):
            raise ContractError("Rayleigh quotient of the zero vector")
        num = _exact_quad(a, w)
        den = _exact_quad(b, w)
        return num.re / den.re
    a_rows, b_rows = _as_rows(a), _as_rows(b)
    w = [mp_scalar(x) for x in v]
    if len(w) != len(a_rows):
        raise ContractError("vector length does not match the pencil size")
    if all(x == 0 for x in w):
        raise ContractError("Rayleigh quotient of the zero vector")
    den = ctx.re(_quad(b_rows, w))
    if den <= 0:
        raise ContractError("B-norm of the vector is not positive")
    return ctx.re(_quad(a_rows, w)) / den


def _exact_quad(m: ExactMatrix, w: list[QQi]) -> QQi:
    acc = QQi(0)
    for i, wi in enumerate(w):
        if not wi:
            continue
        for j, wj in enumerate(w):
            if wj:
                acc = acc + wi * m.rows[i][j] * wj.conjugate()
    return acc

"""Comparison indices between two measures.

For measures ``mu1`` and ``mu2`` with moment sections ``A_n`` and ``B_n``,
``lambda_n`` and ``beta_n`` are the smallest and largest generalized
eigenvalues of the pencil ``(A_n, B_n)``.  Since the sections nest,
``lambda_n`` is non-increasing and ``beta_n`` non-decreasing; their limits
are the indices ``lambda(mu1, mu2)`` and ``beta(mu1, mu2)``.  Only finitely
many orders can be computed, so limits are classified by the explicit rules
in :class:`Thresholds`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from ._exact import ExactMatrix, QQi
from ._numeric import ctx, ordered_map
from .errors import ContractError, FiniteSupportError
from .matrices import (
    _as_rows,
    _cholesky_rows,
    _reduce_rows,
    _to_hermitian_numpy,
    extreme_generalized_eigs,
    pivot_tolerance,
    rayleigh_quotient,
    top_eigenpairs,
)
from .measures import Measure

__all__ = [
    "Status",
    "Thresholds",
    "DEFAULT_THRESHOLDS",
    "IndexSequences",
    "IndexEstimate",
    "index_sequences",
    "pencil_sequences",
    "estimate_index",
    "ReciprocityReport",
    "reciprocity_check",
    "DominationVerdict",
    "domination_witness",
    "positive_definite_order",
    "MONOTONE_SLACK",
]

MONOTONE_SLACK = 1e-10


class Status(str, enum.Enum):
    CONVERGED = "converged"
    TENDS_TO_ZERO = "tends_to_zero"
    DIVERGES_TO_INFINITY = "diverges_to_infinity"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Thresholds:
    """Finite-order limit classification rules.

    Over the last ``window`` values: converged when the relative spread is
    at most ``eps_conv``; tending to zero when the last value is at most
    ``zero_last`` and every consecutive ratio is at most ``zero_ratio``;
    diverging when the last value is at least ``inf_last`` or every ratio is
    at least ``inf_ratio``.  Algebraic (power-law) trends are caught by the
    local log-log slope against ``n + 1``: at least ``power_slope`` at every
    step means divergence, at most ``-power_slope`` means decay to zero.
    """

    window: int = 5
    eps_conv: float = 1e-6
    zero_last: float = 1e-10
    zero_ratio: float = 0.9
    inf_last: float = 1e10
    inf_ratio: float = 1.1
    power_slope: float = 1.0

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_THRESHOLDS = Thresholds()


class IndexSequences(NamedTuple):
    lam: tuple
    beta: tuple
    lam_monotone: bool
    beta_monotone: bool
    exact: bool = False

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(range(len(self.lam)))


@dataclass(frozen=True)
class IndexEstimate:
    """A classified limit of an index sequence.

    ``value`` is the last element when ``status`` is converged and ``None``
    otherwise; infinity is never stored as a number.  ``extrapolated`` holds
    an accelerated limit estimate when the producer computed one.
    """

    kind: str
    values: tuple
    status: Status
    value: float | None
    orders: tuple[int, ...]
    extrapolated: float | None = None

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status.value,
            "value": self.value,
            "extrapolated": self.extrapolated,
            "last": float(self.values[-1]) if self.values else None,
            "orders": [self.orders[0], self.orders[-1]] if self.orders else [],
        }


def _monotone(values: Sequence, increasing: bool) -> bool:
    for a, b in zip(values, values[1:]):
        a, b = float(a), float(b)
        slack = MONOTONE_SLACK * max(abs(a), abs(b))
        if increasing and b < a - slack:
            return False
        if not increasing and b > a + slack:
            return False
    return True


def positive_definite_order(mu: Measure, N: int) -> int | None:
    """First order ``n <= N`` whose section of ``mu`` is singular, else ``None``."""
    rows = _as_rows(mu.moments.section(N))
    _, good = _cholesky_rows(rows, pivot_tolerance(N + 1, mu.moments.eps))
    return None if good == N + 1 else good


def index_sequences(
    mu1: Measure,
    mu2: Measure,
    N: int = 40,
    exact: bool = False,
    lambda_route: str = "reciprocal",
) -> IndexSequences:
    """``lambda_n`` and ``beta_n`` of ``(M_n(mu1), M_n(mu2))`` for ``n = 0..N``.

    ``exact`` switches to rational arithmetic (diagonal pencils give exact
    Fractions; other pencils use characteristic polynomials and get slow
    beyond order 10 or so).  ``lambda_route`` selects how the smallest
    eigenvalue is obtained in float mode: ``"reciprocal"`` inverts the
    largest eigenvalue of the swapped pencil, ``"direct"`` takes the smallest
    eigenvalue of the reduced pencil in working precision.

    Raises :class:`FiniteSupportError` naming the order at which ``mu2``
    stops being positive definite.
    """
    if N < 0:
        raise ContractError(f"N must be non-negative, got {N}")
    if exact:
        A = mu1.moments.section(N, exact=True)
        B = mu2.moments.section(N, exact=True)
        lam, beta = _exact_sequences(A, B, mu2.name)
        return IndexSequences(tuple(lam), tuple(beta), True, True, exact=True)
    A = mu1.moments.section(N)
    B = mu2.moments.section(N)
    data_eps = max(mu1.moments.eps, mu2.moments.eps)
    lam, beta = pencil_sequences(
        A, B, data_eps=data_eps, lambda_route=lambda_route,
        exact_singular=mu1.exact, measure=mu2.name,
    )
    return IndexSequences(
        tuple(lam), tuple(beta), _monotone(lam, False), _monotone(beta, True)
    )


def pencil_sequences(
    A,
    B,
    data_eps: float = 0.0,
    lambda_route: str = "reciprocal",
    exact_singular: bool = True,
    measure: str = "mu2",
    module: str = "indices",
) -> tuple[list[float], list[float]]:
    """Extremes of every leading pencil ``(A[:n+1, :n+1], B[:n+1, :n+1])``.

    ``B`` is reduced once by a Cholesky factor ``L`` of the full section;
    the leading blocks of ``L^{-1} A L^{-H}`` are exactly the reduced pencils
    of the leading sections, because ``L`` is lower triangular.
    """
    if lambda_route not in ("reciprocal", "direct"):
        raise ContractError(f"unknown lambda route {lambda_route!r}")
    a_rows, b_rows = _as_rows(A), _as_rows(B)
    size = len(b_rows)
    if _is_diagonal(a_rows) and _is_diagonal(b_rows):
        return _diagonal_sequences(
            [ctx.re(a_rows[k][k]) for k in range(size)],
            [ctx.re(b_rows[k][k]) for k in range(size)],
            float, measure, module,
        )
    rtol = pivot_tolerance(size, data_eps)
    Lb, good_b = _cholesky_rows(b_rows, rtol)
    if good_b < size:
        raise FiniteSupportError(good_b, measure, module)
    c_mp = _reduce_rows(a_rows, Lb)
    c = _to_hermitian_numpy(c_mp)
    sizes = list(range(1, size + 1))
    beta, _ = top_eigenpairs(c, sizes)
    if lambda_route == "direct":
        lam = ordered_map(lambda s: _mp_min_eig(c_mp, s), sizes)
        return [max(x, 0.0) for x in lam], beta
    La, good_a = _cholesky_rows(a_rows, rtol)
    lam: list[float] = []
    if good_a:
        # only the positive definite leading block of A can be factored
        La_g = [row[:good_a] for row in La[:good_a]]
        b_g = [row[:good_a] for row in b_rows[:good_a]]
        cp = _to_hermitian_numpy(_reduce_rows(b_g, La_g))
        inv, _ = top_eigenpairs(cp, sizes[:good_a])
        lam = [1.0 / x for x in inv]
    for s in sizes[good_a:]:
        if exact_singular:
            # A's section is exactly singular from here on
            lam.append(0.0)
        else:
            lam.append(max(float(np.linalg.eigvalsh(c[:s, :s])[0]), 0.0))
    return lam, beta


def _mp_min_eig(c_rows, s: int) -> float:
    block = ctx.matrix([row[:s] for row in c_rows[:s]])
    for i in range(s):
        block[i, i] = ctx.re(block[i, i])
        for j in range(i + 1, s):
            block[j, i] = ctx.conj(block[i, j])
    if all(ctx.im(block[i, j]) == 0 for i in range(s) for j in range(s)):
        w = ctx.eigsy(ctx.matrix([[ctx.re(block[i, j]) for j in range(s)] for i in range(s)]),
                      eigvals_only=True)
    else:
        w = ctx.eighe(block, eigvals_only=True)
    return float(min(ctx.re(x) for x in w))


def _is_diagonal(rows) -> bool:
    n = len(rows)
    return all(rows[i][j] == 0 for i in range(n) for j in range(n) if i != j)


def _diagonal_sequences(a_diag, b_diag, convert, measure, module):
    lam, beta = [], []
    lo = hi = None
    for k, (a, b) in enumerate(zip(a_diag, b_diag)):
        if b <= 0:
            raise FiniteSupportError(k, measure, module)
        r = a / b
        lo = r if lo is None or r < lo else lo
        hi = r if hi is None or r > hi else hi
        lam.append(convert(lo))
        beta.append(convert(hi))
    return lam, beta


def _exact_sequences(A: ExactMatrix, B: ExactMatrix, measure: str):
    size = A.shape[0]
    if A.is_diagonal() and B.is_diagonal():
        return _diagonal_sequences(
            [d.re for d in A.diagonal()], [d.re for d in B.diagonal()],
            lambda x: x, measure, "indices",
        )
    lam, beta = [], []
    for s in range(1, size + 1):
        try:
            pair = extreme_generalized_eigs(A.leading(s), B.leading(s))
        except ArithmeticError as exc:
            raise FiniteSupportError(s - 1, measure, "indices") from exc
        lam.append(pair.lambda_min)
        beta.append(pair.beta_max)
    return lam, beta


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def _slopes(values: Sequence[float], orders: Sequence[int]) -> list[float] | None:
    out = []
    for (n0, a), (n1, b) in zip(zip(orders, values), zip(orders[1:], values[1:])):
        if a <= 0 or b <= 0:
            return None
        out.append(math.log(b / a) / math.log((n1 + 1) / (n0 + 1)))
    return out


def classify(values: Sequence[float], orders: Sequence[int], th: Thresholds) -> Status:
    if len(values) < th.window or th.window < 2:
        return Status.INCONCLUSIVE
    w = [float(v) for v in values[-th.window:]]
    o = list(orders[-th.window:])
    last = w[-1]
    if last == 0.0:
        return Status.TENDS_TO_ZERO
    if last < 0 or not math.isfinite(last):
        return Status.INCONCLUSIVE
    if (max(w) - min(w)) <= th.eps_conv * abs(last):
        return Status.CONVERGED
    ratios = [b / a if a > 0 else math.inf for a, b in zip(w, w[1:])]
    if last <= th.zero_last and all(r <= th.zero_ratio for r in ratios):
        return Status.TENDS_TO_ZERO
    if last >= th.inf_last or all(r >= th.inf_ratio for r in ratios):
        return Status.DIVERGES_TO_INFINITY
    slopes = _slopes(w, o)
    if slopes:
        if all(s >= th.power_slope for s in slopes):
            return Status.DIVERGES_TO_INFINITY
        if all(s <= -th.power_slope for s in slopes):
            return Status.TENDS_TO_ZERO
    return Status.INCONCLUSIVE


def estimate_index(
    values: Sequence,
    kind: str = "beta",
    thresholds: Thresholds | None = None,
    orders: Sequence[int] | None = None,
    extrapolated: float | None = None,
) -> IndexEstimate:
    """Classify the limit of a λ- or β-sequence (see :class:`Thresholds`)."""
    if kind not in ("lambda", "beta"):
        raise ContractError(f"kind must be 'lambda' or 'beta', got {kind!r}")
    th = thresholds or DEFAULT_THRESHOLDS
    orders = tuple(orders) if orders is not None else tuple(range(len(values)))
    status = classify(values, orders, th)
    value = float(values[-1]) if status is Status.CONVERGED else None
    return IndexEstimate(kind, tuple(values), status, value, orders, extrapolated)


# ---------------------------------------------------------------------------
# reciprocity and domination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReciprocityReport:
    lam: tuple[float, ...]
    beta_swapped: tuple[float, ...]

    @property
    def products(self) -> tuple[float, ...]:
        return tuple(a * b for a, b in zip(self.lam, self.beta_swapped))

    @property
    def max_relative_discrepancy(self) -> float:
        return max((abs(p - 1.0) for p in self.products), default=0.0)


def reciprocity_check(mu1: Measure, mu2: Measure, N: int = 30) -> ReciprocityReport:
    """Pair ``lambda_n(mu1, mu2)`` with ``beta_n(mu2, mu1)`` at every order.

    The two sides are computed independently: the smallest eigenvalue of the
    pencil reduced by ``M(mu2)`` against the largest one of the pencil
    reduced by ``M(mu1)``.
    """
    forward = index_sequences(mu1, mu2, N, lambda_route="direct")
    swapped = index_sequences(mu2, mu1, N)
    return ReciprocityReport(forward.lam, swapped.beta)


@dataclass(frozen=True)
class DominationVerdict:
    """Outcome of testing ``int |p|^2 dmu1 <= c int |p|^2 dmu2`` for ``deg p <= N``.

    When violated, ``coefficients`` are those of a polynomial ``p`` (lowest
    degree first) with ``int |p|^2 dmu1 / int |p|^2 dmu2 = ratio > c``.
    """

    satisfied: bool
    constant: float
    betas: tuple[float, ...]
    order: int | None = None
    coefficients: tuple[complex, ...] | None = None
    ratio: float | None = None


def domination_witness(mu1: Measure, mu2: Measure, N: int, c: float) -> DominationVerdict:
    if c <= 0:
        raise ContractError("domination constant must be positive")
    seq = index_sequences(mu1, mu2, N)
    for n, b in enumerate(seq.beta):
        if b > c:
            A = mu1.moments.section(n)
            B = mu2.moments.section(n)
            pair = extreme_generalized_eigs(A, B, vectors=True, data_eps=mu2.moments.eps)
            v = pair.argmax
            ratio = float(ctx.re(rayleigh_quotient(A, B, v)))
            coeffs = tuple(_clean(complex(x)) for x in v)
            return DominationVerdict(False, c, seq.beta, n, coeffs, ratio)
    return DominationVerdict(True, c, seq.beta)


def _clean(z: complex, tol: float = 1e-14) -> complex:
    scale = abs(z)
    re = z.real if abs(z.real) > tol * scale else 0.0
    im = z.imag if abs(z.imag) > tol * scale else 0.0
    return complex(re, im)

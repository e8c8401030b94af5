"""Exact Gaussian-rational scalars, matrices and real-root isolation.

Everything here works on :class:`fractions.Fraction`, so results are exact
and independent of any floating-point path.  It backs the rational mode of
the moment generators and the characteristic-polynomial/Sturm oracle used
to cross-check the extended-precision eigen solver.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

__all__ = [
    "QQi",
    "ExactMatrix",
    "to_exact",
    "determinant",
    "ldl_pivots",
    "is_exact_like",
    "poly_eval",
    "pencil_charpoly",
    "extreme_real_roots",
]


_REAL_RE = re.compile(r"^[+-]?(?:[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?(?:/[0-9]+)?)$")


def _parse_real(txt: str, original: str) -> Fraction:
    if not _REAL_RE.match(txt):
        raise ValueError(f"cannot parse {original!r} as an exact complex number")
    return Fraction(txt)


def _parse_complex(x: str) -> "QQi":
    s = x.replace(" ", "").replace("*", "").replace("j", "i")
    if not s:
        raise ValueError("empty string is not a number")
    if not s.endswith("i"):
        return QQi(_parse_real(s, x))
    body = s[:-1]
    split = 0
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            split = k
            break
    re_txt, im_txt = body[:split], body[split:]
    re_part = _parse_real(re_txt, x) if re_txt else Fraction(0)
    if im_txt in ("", "+"):
        im_part = Fraction(1)
    elif im_txt == "-":
        im_part = Fraction(-1)
    else:
        im_part = _parse_real(im_txt, x)
    return QQi(re_part, im_part)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r} has no exact form")
        return Fraction(x)
    if isinstance(x, str):
        return _parse_real(x.strip(), x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class QQi:
    """A Gaussian rational ``re + im*i`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = to_exact(other)
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = to_exact(other)
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return to_exact(other) - self

    def __mul__(self, other):
        o = to_exact(other)
        if not self.im and not o.im:
            return QQi(self.re * o.re)
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = to_exact(other)
        if not o.im:
            if not o.re:
                raise ZeroDivisionError("division by exact zero")
            return QQi(self.re / o.re, self.im / o.re)
        d = o.re * o.re + o.im * o.im
        return QQi(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        return to_exact(other) / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result, base = QQi(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "QQi":
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparison / conversion ---------------------------------------------
    def __eq__(self, other):
        try:
            o = to_exact(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def is_exact_like(x) -> bool:
    """True for values that :func:`to_exact` converts without loss."""
    return isinstance(x, (QQi, int, Fraction, Rational, float, complex, str))


def to_exact(x) -> QQi:
    """Convert ``x`` to a :class:`QQi` without rounding.

    Python floats are taken at their exact binary value.  Strings accept
    ``"3"``, ``"-1/2"``, ``"0.25"``, ``"1/2+3/4i"``, ``"-2i"`` and ``"i"``.
    """
    if isinstance(x, QQi):
        return x
    if isinstance(x, complex):
        return QQi(_frac(x.real), _frac(x.imag))
    if isinstance(x, str):
        return _parse_complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return QQi(_frac(x[0]), _frac(x[1]))
    return QQi(_frac(x))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Immutable dense matrix of :class:`QQi` entries."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(to_exact(v) for v in row) for row in rows)
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("ragged rows")

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"ExactMatrix({[[str(v) for v in r] for r in self.rows]})"

    @property
    def H(self) -> "ExactMatrix":
        n, m = self.shape
        return ExactMatrix([[self.rows[i][j].conjugate() for i in range(n)] for j in range(m)])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = [[other.rows[t][j] for t in range(k)] for j in range(m)]
        out = []
        for i in range(n):
            row = self.rows[i]
            out.append([_dot(row, cols[j]) for j in range(m)])
        return ExactMatrix(out)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )

    def scale(self, c) -> "ExactMatrix":
        c = to_exact(c)
        return ExactMatrix([[c * v for v in r] for r in self.rows])

    def leading(self, n: int) -> "ExactMatrix":
        """Leading ``n x n`` block."""
        return ExactMatrix([r[:n] for r in self.rows[:n]])

    def is_diagonal(self) -> bool:
        return all(not v for i, r in enumerate(self.rows) for j, v in enumerate(r) if i != j)

    def is_hermitian(self) -> bool:
        n, m = self.shape
        return n == m and all(
            self.rows[i][j] == self.rows[j][i].conjugate() for i in range(n) for j in range(i, n)
        )

    def diagonal(self) -> list[QQi]:
        return [self.rows[i][i] for i in range(min(self.shape))]

    def to_complex(self) -> list[list[complex]]:
        return [[complex(v) for v in r] for r in self.rows]


def _dot(a: Sequence[QQi], b: Sequence[QQi]) -> QQi:
    re = Fraction(0)
    im = Fraction(0)
    for x, y in zip(a, b):
        if not x or not y:
            continue
        re += x.re * y.re - x.im * y.im
        im += x.re * y.im + x.im * y.re
    return QQi(re, im)


def determinant(a: ExactMatrix) -> QQi:
    """Exact determinant by Gaussian elimination with nonzero pivoting."""
    n, m = a.shape
    if n != m:
        raise ValueError("determinant of a non-square matrix")
    work = [list(r) for r in a.rows]
    det = QQi(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            return QQi(0)
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            det = -det
        p = work[col][col]
        det = det * p
        for r in range(col + 1, n):
            f = work[r][col]
            if not f:
                continue
            f = f / p
            work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return det


def ldl_pivots(a: ExactMatrix) -> list[Fraction]:
    """Pivots ``d_k`` of the exact ``L D L*`` factorization of a Hermitian matrix.

    Stops after the first non-positive pivot (it is the last element returned).
    """
    n = a.shape[0]
    work = [list(r) for r in a.rows]
    pivots: list[Fraction] = []
    for k in range(n):
        d = work[k][k]
        if d.im:
            raise ValueError("matrix is not Hermitian")
        pivots.append(d.re)
        if d.re <= 0:
            break
        for i in range(k + 1, n):
            f = work[i][k] / d
            if not f:
                continue
            row_k = work[k]
            work[i] = [x - f * y for x, y in zip(work[i], row_k)]
    return pivots


# ---------------------------------------------------------------------------
# univariate polynomials over Q (coefficient lists, ascending degree)
# ---------------------------------------------------------------------------


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    while len(a) - 1 >= db and a:
        f = a[-1] / lead
        shift = len(a) - 1 - db
        for k in range(db + 1):
            a[shift + k] -= f * b[k]
        a.pop()
        _trim(a)
    return a


def _poly_quo(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db = len(b) - 1
    q = [Fraction(0)] * max(len(a) - db, 1)
    while len(a) - 1 >= db and a:
        f = a[-1] / b[-1]
        shift = len(a) - 1 - db
        q[shift] = f
        for k in range(db + 1):
            a[shift + k] -= f * b[k]
        a.pop()
        _trim(a)
    return _trim(q)


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_rem(a, b)
    return [c / a[-1] for c in a]


def _derivative(p: Sequence[Fraction]) -> list[Fraction]:
    return _trim([k * p[k] for k in range(1, len(p))])


def _interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients of the interpolating polynomial (Newton form expanded)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    poly[0] = coef[-1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * n
        for d in range(deg + 1):
            new[d + 1] += poly[d]
            new[d] -= xs[k] * poly[d]
        new[0] += coef[k]
        poly = new
        deg += 1
    return _trim(poly)


def pencil_charpoly(a: ExactMatrix, b: ExactMatrix) -> list[Fraction]:
    """Coefficients of ``det(A - t B)`` in ascending powers of ``t``.

    Both matrices must be Hermitian, so the polynomial has real coefficients;
    it is recovered by exact interpolation at ``t = 0, 1, ..., n``.
    """
    n = a.shape[0]
    xs = [Fraction(t) for t in range(n + 1)]
    ys = []
    for t in xs:
        d = determinant(a - b.scale(t))
        if d.im:
            raise ValueError("pencil determinant is not real; inputs are not Hermitian")
        ys.append(d.re)
    return _interpolate(xs, ys)


def _sturm_chain(p: list[Fraction]) -> list[list[Fraction]]:
    chain = [p, _derivative(p)]
    while chain[-1] and len(chain[-1]) > 1:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return [c for c in chain if c]


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for q in chain:
        v = poly_eval(q, x)
        if v:
            signs.append(v > 0)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _exact_candidate(p, lo: Fraction, hi: Fraction) -> Fraction | None:
    mid = (lo + hi) / 2
    for limit in (10**3, 10**6, 10**12, 10**24, 10**48):
        c = mid.limit_denominator(limit)
        if lo < c <= hi and poly_eval(p, c) == 0:
            return c
    return None


def _isolate(p, chain, lo, hi, want_smallest, rel_bits) -> tuple[Fraction, bool]:
    """Bisect (lo, hi] (which holds the wanted extreme root) down to rel_bits."""
    floor = Fraction(1, 2 ** (2 * rel_bits)) * max(abs(lo), abs(hi), Fraction(1))
    v_lo = _sign_changes(chain, lo)
    v_hi = _sign_changes(chain, hi)
    while True:
        width = hi - lo
        scale = max(abs(lo), abs(hi))
        if width <= scale / 2**rel_bits or width <= floor:
            break
        mid = (lo + hi) / 2
        v_mid = _sign_changes(chain, mid)
        if want_smallest:
            if v_lo - v_mid >= 1:
                hi, v_hi = mid, v_mid
            else:
                lo, v_lo = mid, v_mid
        else:
            if v_mid - v_hi >= 1:
                lo, v_lo = mid, v_mid
            else:
                hi, v_hi = mid, v_mid
    if poly_eval(p, hi) == 0:
        return hi, True
    c = _exact_candidate(p, lo, hi)
    if c is not None:
        return c, True
    return (lo + hi) / 2, False


def extreme_real_roots(poly: Sequence[Fraction], rel_bits: int = 160):
    """Smallest and largest real roots of a real polynomial.

    Returns ``((min_root, min_exact), (max_root, max_exact))``.  A root flagged
    exact is certified by exact evaluation; otherwise it is the midpoint of an
    isolating interval of relative width ``2**-rel_bits``.
    """
    p = _trim([Fraction(c) for c in poly])
    if len(p) < 2:
        raise ValueError("polynomial has no roots")
    g = _poly_gcd(p, _derivative(p))
    sq = _poly_quo(p, g) if len(g) > 1 else p
    chain = _sturm_chain(sq)
    cauchy = 1 + max(abs(c / sq[-1]) for c in sq[:-1])
    # a dyadic bound keeps every bisection point dyadic
    bound = Fraction(2) ** (int(cauchy).bit_length())
    lo, hi = -bound, bound
    total = _sign_changes(chain, lo) - _sign_changes(chain, hi)
    if total < 1:
        raise ValueError("polynomial has no real roots")
    if poly_eval(sq, Fraction(0)) == 0:
        below = _sign_changes(chain, lo) - _sign_changes(chain, Fraction(0))
        above = _sign_changes(chain, Fraction(0)) - _sign_changes(chain, hi)
    else:
        below = above = None
    # exact zero roots are common (singular A); short-circuit them
    if below == 1:
        smallest = (Fraction(0), True)
    else:
        smallest = _isolate(sq, chain, lo, hi, True, rel_bits)
    if above == 0:
        largest = (Fraction(0), True)
    else:
        largest = _isolate(sq, chain, lo, hi, False, rel_bits)
    return smallest, largest

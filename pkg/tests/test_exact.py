"""Exact rational arithmetic: Gaussian rationals, determinants, Sturm roots."""

from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from momentindex._exact import (
    ExactMatrix,
    QQi,
    determinant,
    extreme_real_roots,
    ldl_pivots,
    pencil_charpoly,
    to_exact,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1/2", QQi(Fraction(1, 2))),
        ("-3", QQi(-3)),
        ("i", QQi(0, 1)),
        ("-i", QQi(0, -1)),
        ("1+i", QQi(1, 1)),
        ("1/3-2/5i", QQi(Fraction(1, 3), Fraction(-2, 5))),
        ("0.25", QQi(Fraction(1, 4))),
    ],
)
def test_parse_exact_numbers(text, expected):
    assert to_exact(text) == expected


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        to_exact("one half")


@given(small, small, small, small)
def test_qqi_field_operations_match_complex(a, b, c, d):
    x, y = QQi(a, b), QQi(c, d)
    zx, zy = complex(x), complex(y)
    assert complex(x + y) == pytest.approx(zx + zy)
    assert complex(x * y) == pytest.approx(zx * zy)
    if y:
        assert complex(x / y) == pytest.approx(zx / zy)
        assert (x / y) * y == x
    assert x.abs2() == a * a + b * b


def _sym(rows):
    return sympy.Matrix([[sympy.Rational(v.re.numerator, v.re.denominator)
                          + sympy.I * sympy.Rational(v.im.numerator, v.im.denominator)
                          for v in r] for r in rows])


def _hermitian(draw, n):
    rows = [[QQi(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = QQi(draw(small))
        for j in range(i + 1, n):
            v = QQi(draw(small), draw(small))
            rows[i][j], rows[j][i] = v, v.conjugate()
    return ExactMatrix(rows)


@st.composite
def hermitian(draw, n=None):
    n = n or draw(st.integers(1, 4))
    return _hermitian(draw, n)


@given(hermitian())
def test_determinant_matches_sympy(m):
    rows = [[m[i, j] for j in range(m.shape[0])] for i in range(m.shape[0])]
    expected = sympy.nsimplify(_sym(rows).det())
    assert complex(determinant(m)) == pytest.approx(complex(expected), abs=1e-12)


@st.composite
def hpd(draw):
    """Gram matrices ``G G^H + I`` are positive definite."""
    n = draw(st.integers(1, 4))
    g = _hermitian(draw, n)
    prod = g @ g.H
    return ExactMatrix([[prod[i, j] + (QQi(1) if i == j else QQi(0)) for j in range(n)]
                        for i in range(n)])


@given(hpd())
def test_ldl_pivots_multiply_to_determinant(m):
    piv = ldl_pivots(m)
    assert len(piv) == m.shape[0] and all(p > 0 for p in piv)
    prod = Fraction(1)
    for p in piv:
        prod *= p
    assert determinant(m) == QQi(prod)


@given(hermitian(), hpd())
def test_pencil_extremes_match_independent_eigensolver(a, b):
    if a.shape != b.shape:
        b = ExactMatrix.identity(a.shape[0])
    poly = pencil_charpoly(a, b)
    (lo, _), (hi, _) = extreme_real_roots(poly)
    # oracle: scipy-free, numpy generalized problem via B^{-1} A
    A = np.array(a.to_complex())
    B = np.array(b.to_complex())
    w = np.linalg.eigvals(np.linalg.solve(B, A)).real
    assert float(lo) == pytest.approx(w.min(), abs=1e-9)
    assert float(hi) == pytest.approx(w.max(), abs=1e-9)


def test_sturm_roots_certified_when_rational():
    # (t - 1/3)(t - 2)(t + 5)
    t = sympy.symbols("t")
    coeffs = sympy.Poly((t - sympy.Rational(1, 3)) * (t - 2) * (t + 5), t).all_coeffs()[::-1]
    (lo, lo_exact), (hi, hi_exact) = extreme_real_roots([Fraction(str(c)) for c in coeffs])
    assert (lo, hi) == (Fraction(-5), Fraction(2))
    assert lo_exact and hi_exact


def test_sturm_irrational_root_to_high_relative_accuracy():
    (lo, _), (hi, _) = extreme_real_roots([Fraction(-2), Fraction(0), Fraction(1)])
    assert abs(float(hi) - 2 ** 0.5) < 1e-15
    assert abs(hi * hi - 2) < Fraction(1, 2**100)
    assert lo == -hi or abs(lo + hi) < Fraction(1, 2**100)

"""Hessenberg sections, numerical ranges, hull rasters and Christoffel bounds."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentindex import (
    Atomic,
    CircleDensity,
    CircleUniform,
    CurveQuadrature,
    christoffel_sequence,
    hessenberg_section,
    hull_estimate,
)
from momentindex._exact import QQi
from momentindex._numeric import to_numpy
from momentindex.hull import numerical_range_boundary, rayleigh_hull_samples

TRIANGLE = Atomic(((1, 1), (QQi(Fraction(-1, 2), Fraction(3, 4)), 2), (QQi(Fraction(-1, 3), -1), 1)))


def shift(s):
    return np.diag(np.ones(s - 1), -1)


@pytest.mark.parametrize(
    "mu, expected",
    [
        (CircleUniform(), shift(6)),
        (CircleUniform(1, 1), np.eye(6) + shift(6)),
        (CircleUniform(0, Fraction(1, 2)), 0.5 * shift(6)),
    ],
)
def test_circle_hessenberg_sections(mu, expected):
    D = hessenberg_section(mu, 5).entries
    assert np.allclose(D, expected, atol=1e-14)


def gram_schmidt_hessenberg(mu, n):
    """Oracle: orthonormalize monomials in double precision, then project z p_k."""
    M = to_numpy(mu.moments.section(n + 1))
    L = np.linalg.cholesky(M[: n + 1, : n + 1])  # M = L L^H, so V = L^{-1} has V M V^H = I
    V = np.linalg.inv(L)  # row k: coefficients of p_k
    Mz = M[1 : n + 2, : n + 1]
    # <z p_k, p_j> = sum_{a,b} V[k,a] conj(V[j,b]) c_{a+1,b}
    return np.array([[V[k] @ Mz @ V[j].conj() for k in range(n + 1)] for j in range(n + 1)])


def test_hessenberg_matches_gram_schmidt_oracle():
    mu = CircleDensity(QQi(Fraction(1, 2), Fraction(1, 3)), Fraction(3, 4), (1, QQi(Fraction(1, 4), Fraction(1, 8))))
    D = hessenberg_section(mu, 6).entries
    oracle = gram_schmidt_hessenberg(mu, 6)
    assert np.allclose(D, oracle, atol=1e-9)
    assert np.allclose(np.tril(D, -2), 0)
    assert np.all(np.diag(D, -1).real > 0)


def test_atomic_section_has_atoms_as_eigenvalues():
    D = hessenberg_section(TRIANGLE, 2).entries
    eig = np.sort_complex(np.linalg.eigvals(D))
    atoms = np.sort_complex(np.array([complex(z) for z, _ in TRIANGLE.points]))
    assert np.allclose(eig, atoms, atol=1e-12)


@pytest.mark.parametrize("s", [2, 5, 17])
def test_shift_numerical_range_radius(s):
    b = numerical_range_boundary(shift(s), 720)
    assert b.max_modulus() == pytest.approx(np.cos(np.pi / (s + 1)), abs=1e-12)


def test_hermitian_matrix_range_is_spectral_interval():
    H = np.array([[2, 1j], [-1j, -1]])
    b = numerical_range_boundary(H, 64)
    w = np.linalg.eigvalsh(H)
    assert np.allclose(b.points.imag, 0, atol=1e-12)
    assert b.points.real.min() == pytest.approx(w[0]) and b.points.real.max() == pytest.approx(w[-1])


@given(st.integers(0, 2**32 - 1))
def test_random_rayleigh_points_inside_numerical_range(seed):
    rng = np.random.default_rng(seed)
    D = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = numerical_range_boundary(D, 720)
    x = rng.normal(size=(50, 4)) + 1j * rng.normal(size=(50, 4))
    z = np.einsum("ti,ij,tj->t", x.conj(), D, x) / np.einsum("ti,ti->t", x.conj(), x).real
    # the polygon inscribed at 720 angles misses at most a thin sliver
    assert b.contains(z, tol=1e-3 * np.abs(D).max()).all()


def test_triangle_hull_matches_triangle():
    est = hull_estimate(TRIANGLE, 10, pixels=128)
    assert est.sizes == (1, 2, 3)
    tri = np.array([complex(z) for z, _ in TRIANGLE.points])
    ref = est.mask.blank().with_convex_polygon(tri)
    assert est.mask.subset_of(ref.inflate(1)) and ref.subset_of(est.mask.inflate(1))


@pytest.mark.parametrize("mu", [CircleUniform(QQi(0, 1), Fraction(1, 2)), TRIANGLE,
                                CircleDensity(0, 1, (1, Fraction(1, 2)))])
def test_rayleigh_samples_fall_in_hull(mu):
    rng = np.random.default_rng(7)
    est = hull_estimate(mu, 12, pixels=128)
    vecs = [rng.normal(size=k) + 1j * rng.normal(size=k) for k in rng.integers(1, 8, size=200)]
    z = rayleigh_hull_samples(mu, vecs)
    assert est.contains(z, inflate=1).all()


def test_christoffel_on_unit_circle_closed_form():
    xi = 0.3 + 0.4j
    seq = christoffel_sequence(CircleUniform(), xi, 15)
    expected = np.cumsum([abs(xi) ** (2 * k) for k in range(16)])
    assert np.allclose(seq, expected, rtol=1e-13)


@given(st.sampled_from([CircleUniform(1, 1), CircleDensity(0, 1, (1, Fraction(1, 2))), TRIANGLE]),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_christoffel_non_decreasing(mu, xi):
    n = 2 if mu is TRIANGLE else 12
    seq = christoffel_sequence(mu, xi, n)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(seq, seq[1:]))


def test_christoffel_separates_inside_and_outside_of_segment():
    seg = CurveQuadrature.segment(-1, 1, nodes=64)
    # extended-precision nodes resolve the Legendre moment sections up to order ~27
    inside = christoffel_sequence(seg, 0.0, 20)
    outside = christoffel_sequence(seg, 2.0, 20)
    assert inside[-1] < 20
    assert outside[-1] / outside[-11] > 1e5

"""Support radius and support containment."""

import math
from fractions import Fraction

import numpy as np
import pytest

from momentindex import (
    Atomic,
    CircleDensity,
    CircleUniform,
    CurveQuadrature,
    Status,
    containment_verdict,
    support_mask,
    support_radius,
)
from momentindex._exact import QQi
from momentindex.support import Verdict, beta_hat_radius, default_frame, richardson


def test_diagonal_roots_follow_stirling():
    # c_nn = C(2n, n) for the unit circle centered at 1
    est = support_radius(CircleUniform(1, 1), 40)
    for n, v in list(zip(est.orders, est.values))[3:]:
        stirling = 4**n / math.sqrt(math.pi * n) * (1 - 1 / (8 * n) + 1 / (128 * n * n))
        assert v == pytest.approx(stirling ** (1 / (2 * n)), rel=1e-5)
    assert est.monotone
    assert est.radius == pytest.approx(2.0, abs=1e-3)


def test_richardson_is_exact_for_first_order_tails():
    seq = [Fraction(3) + Fraction(5, n + 1) for n in range(10)]
    acc = richardson(seq)
    assert acc[-1] == 3 and all(x == 3 for x in acc[2:])


def test_atomic_radius_is_largest_modulus():
    mu = Atomic(((QQi(0, Fraction(1, 2)), 1), (QQi(Fraction(3, 5), Fraction(4, 5)), Fraction(1, 10)),
                 (Fraction(-1, 3), 2)))
    est = support_radius(mu, 40)
    assert est.radius == pytest.approx(1.0, abs=1e-9)


def test_origin_support_has_zero_radius():
    assert support_radius(Atomic(((0, 1),)), 5).radius == 0.0


def test_beta_hat_exact_for_centered_circle():
    est = beta_hat_radius(CircleUniform(0, Fraction(3, 2)), 10)
    assert est.status is Status.CONVERGED
    assert est.value == pytest.approx(2.25, rel=1e-15)


def test_beta_hat_increases_towards_squared_radius():
    est = beta_hat_radius(CircleUniform(QQi(0, 1), Fraction(1, 2)), 30)
    v = est.values
    assert all(b >= a * (1 - 1e-12) for a, b in zip(v, v[1:]))
    assert v[-1] < 2.25 + 1e-9
    assert est.extrapolated == pytest.approx(2.25, abs=5e-3)


def test_support_mask_covers_circle():
    mu = CircleUniform(QQi(0, 1), Fraction(1, 2))
    m = support_mask(mu)
    pts = 1j + 0.5 * np.exp(2j * np.pi * np.arange(997) / 997)
    assert m.contains(pts).all()
    assert not m.contains(np.array([1j])).any()
    assert m.provenance == "analytic"
    q = CurveQuadrature.circle(1j, 0.5, nodes=512)
    assert support_mask(q, default_frame(mu)).provenance == "sampled"


def test_containment_holds_for_smaller_concentric_circle():
    rep = containment_verdict(CircleUniform(0, Fraction(1, 2)), CircleUniform(), 30)
    assert rep.verdict is Verdict.HOLDS and rep.pixel_inclusion


def test_containment_indeterminate_when_beta_diverges():
    rep = containment_verdict(CircleUniform(), CircleDensity(0, 1, (1, Fraction(1, 2))), 30)
    assert rep.verdict is Verdict.INDETERMINATE
    assert rep.beta.status is Status.DIVERGES_TO_INFINITY


def test_equivalent_measures_report_curve_and_coincidence():
    h = CircleDensity(0, 1, (1, Fraction(1, 4)))
    rep = containment_verdict(h, h, 30)
    assert rep.verdict is Verdict.HOLDS
    assert rep.curve_in_support is True
    seg = CurveQuadrature.segment(-1, 1, nodes=64)
    rep = containment_verdict(seg, seg, 20)
    assert rep.verdict is Verdict.HOLDS and rep.supports_coincide is True


def test_containment_contradiction_is_reported_as_failure():
    # a hand-made geometry that misses supp mu1 although beta converges
    mu1 = CircleUniform(0, Fraction(1, 2))
    mu2 = CircleUniform()
    frame = default_frame(mu2, pixels=96)
    wrong = frame.blank().with_disk(0.6 + 0.6j, 0.1)
    rep = containment_verdict(mu1, mu2, 20, geometry2=wrong)
    assert rep.verdict is Verdict.FAILS

"""Acceptance criteria.

Each test prints one ``PASS``/``FAIL`` line (visible with ``pytest -v`` and
when the module is run as a script) before asserting.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from momentindex import (
    Atomic,
    CircleDensity,
    CircleUniform,
    Status,
    containment_verdict,
    estimate_index,
    extreme_generalized_eigs,
    hull_estimate,
    index_sequences,
    reciprocity_check,
    support_radius,
)
from momentindex._exact import QQi
from momentindex.hull import numerical_range_boundary, rayleigh_hull_samples
from momentindex.support import beta_hat_radius, default_frame, pc_hull, support_mask
from momentindex.transforms import (
    DEFAULT_DENSITY_GRID,
    NOT_DENSE,
    SimilarityMap,
    completeness_necessary_sweep,
    invariance_report,
    pencil_invariance,
)

M = CircleUniform()
HALF = CircleUniform(0, Fraction(1, 2))
DOUBLE = CircleUniform(0, 2)
SHIFTED = CircleUniform(1, 1)
UPPER = CircleUniform(QQi(0, 1), Fraction(1, 2))
COSINE = CircleDensity(0, 1, (1, Fraction(1, 2)))  # (1 + cos theta) dtheta / 2pi
TRIANGLE = Atomic(((1, 1), (QQi(Fraction(-1, 2), Fraction(3, 4)), 1), (QQi(Fraction(-1, 3), -1), 1)))
CLOSED_FORM = [M, HALF, DOUBLE, SHIFTED, UPPER, COSINE, TRIANGLE]


def report(capsys, label, ok, detail):
    line = f"{label} {'PASS' if ok else 'FAIL'}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def test_ac01_concentric_circles(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for r, statuses in ((Fraction(1, 2), (Status.TENDS_TO_ZERO, Status.CONVERGED)),
                        (Fraction(2), (Status.CONVERGED, Status.DIVERGES_TO_INFINITY))):
        mu = CircleUniform(0, r)
        lam_cf = [min(Fraction(1), r ** (2 * n)) for n in range(41)]
        beta_cf = [max(Fraction(1), r ** (2 * n)) for n in range(41)]
        ex = index_sequences(mu, M, 40, exact=True)
        ok &= list(ex.lam) == lam_cf and list(ex.beta) == beta_cf
        fl = index_sequences(mu, M, 40)
        for got, want in ((fl.lam, lam_cf), (fl.beta, beta_cf)):
            worst = max(worst, max(abs(g - float(w)) / float(w) for g, w in zip(got, want)))
        lam = estimate_index(fl.lam, "lambda")
        beta = estimate_index(fl.beta, "beta")
        ok &= (lam.status, beta.status) == statuses
        for est in (lam, beta):
            if est.status is Status.CONVERGED:
                ok &= est.value == 1.0
    elapsed = time.perf_counter() - t0
    ok &= worst <= 1e-12 and elapsed < 5.0
    report(capsys, "AC1", ok, f"exact closed forms, float rel err {worst:.1e}, {elapsed:.2f} s")


def test_ac02_pascal_pencil(capsys):
    sec = SHIFTED.moments.section(80, exact=True)
    binomial = all(sec[i, j] == QQi(math.comb(i + j, i))
                   for i in range(81) for j in range(81 - i))
    seq = index_sequences(SHIFTED, M, 40)
    decreasing = all(b < a for a, b in zip(seq.lam, seq.lam[1:]))
    dominates = all(b >= math.comb(2 * n, n) * (1 - 1e-12) for n, b in enumerate(seq.beta))
    status = estimate_index(seq.beta, "beta").status
    ok = binomial and decreasing and seq.lam[-1] <= 1e-6 and dominates \
        and status is Status.DIVERGES_TO_INFINITY
    report(capsys, "AC2", ok, f"binomial moments {binomial}, lambda_40 = {seq.lam[-1]:.2e}, "
           f"beta {status.value}")


RECIPROCITY_PAIRS = [(HALF, M), (M, DOUBLE), (SHIFTED, M), (UPPER, COSINE), (COSINE, SHIFTED),
                     (UPPER, DOUBLE)]


def test_ac03_reciprocity(capsys):
    worst = max(reciprocity_check(a, b, 30).max_relative_discrepancy for a, b in RECIPROCITY_PAIRS)
    report(capsys, "AC3", worst <= 1e-8,
           f"max |lambda_n(mu1,mu2) beta_n(mu2,mu1) - 1| = {worst:.1e} over 6 pairs")


def test_ac04_support_radius(capsys):
    ok = True
    errs = []
    for z0, r in ((0, Fraction(1, 2)), (0, 2), (1, 1), (QQi(0, 1), Fraction(1, 2))):
        mu = CircleUniform(z0, r)
        R = abs(complex(to_qqi(z0))) + float(r)
        rad = support_radius(mu, 40)
        hat = beta_hat_radius(mu, 40)
        hat_monotone = all(b >= a * (1 - 1e-12) for a, b in zip(hat.values, hat.values[1:]))
        e1, e2 = abs(rad.radius - R), abs(hat.values[-1] - R * R)
        errs.append(max(e1, e2))
        ok &= e1 <= 1e-2 and e2 <= 2e-2 and rad.monotone and hat_monotone
    report(capsys, "AC4", ok, f"max radius / squared-radius error {max(errs):.1e}")


def to_qqi(z):
    return z if isinstance(z, QQi) else QQi(z)


def test_ac05_containment(capsys):
    rep = containment_verdict(HALF, M, 40)
    frame = default_frame(M)
    inclusion = support_mask(HALF, frame).subset_of(pc_hull(support_mask(M, frame)))
    converse = estimate_index(index_sequences(M, COSINE, 40).beta, "beta").status
    ok = (rep.beta.status is Status.CONVERGED and rep.beta.value == pytest.approx(1.0)
          and inclusion and rep.pixel_inclusion and converse is Status.DIVERGES_TO_INFINITY)
    report(capsys, "AC5", ok, f"beta(m_1/2, m) {rep.beta.status.value}, inclusion {inclusion}, "
           f"beta(m, 1+cos) {converse.value}")


def test_ac06_shift_numerical_range(capsys):
    worst = 0.0
    for s in range(2, 41):
        b = numerical_range_boundary(np.diag(np.ones(s - 1), -1), 720)
        worst = max(worst, abs(b.max_modulus() - math.cos(math.pi / (s + 1))))
    est = hull_estimate(M, 40)
    disk = est.mask.blank().with_disk(0, 1.0)
    diff = est.mask.symmetric_difference(disk)
    band = max(est.mask.pixel_size, 1 - math.cos(math.pi / 41))
    dist = np.abs(np.abs(est.mask.pixel_centers()[diff]) - 1)
    width = float(dist.max()) if dist.size else 0.0
    ok = worst <= 1e-9 and width <= band
    report(capsys, "AC6", ok, f"max modulus error {worst:.1e}; raster differences within "
           f"{width:.2e} of the circle (band {band:.2e})")


def test_ac07_rayleigh_points_in_hull(capsys):
    rng = np.random.default_rng(20240611)
    ok = True
    outside = 0
    for mu in CLOSED_FORM:
        est = hull_estimate(mu, 40)
        top = est.sizes[-1]
        vecs = [rng.normal(size=k) + 1j * rng.normal(size=k) for k in rng.integers(1, top + 1, 1000)]
        inside = est.contains(rayleigh_hull_samples(mu, vecs), inflate=1)
        outside += int((~inside).sum())
        ok &= bool(inside.all())
    est = hull_estimate(TRIANGLE, 40)
    tri = est.mask.blank().with_convex_polygon([complex(z) for z, _ in TRIANGLE.points])
    match = est.mask.subset_of(tri.inflate(1)) and tri.subset_of(est.mask.inflate(1))
    ok &= match
    report(capsys, "AC7", ok, f"{outside} of {1000 * len(CLOSED_FORM)} Rayleigh points outside; "
           f"triangle hull within one pixel {match}")


def test_ac08_similarity_invariance(capsys):
    worst = 0.0
    for mu in (HALF, COSINE, UPPER):
        for z0, r in DEFAULT_DENSITY_GRID:
            worst = max(worst, invariance_report(mu, SimilarityMap(r, z0), 25).max_relative_discrepancy)
    general = SimilarityMap(QQi(Fraction(1, 2), Fraction(3, 2)), QQi(1, -1))
    worst = max(worst, pencil_invariance(SHIFTED, COSINE, general, 25).max_relative_discrepancy)
    report(capsys, "AC8", worst <= 1e-8,
           f"max relative discrepancy {worst:.1e} over {3 * len(DEFAULT_DENSITY_GRID) + 1} maps")


def test_ac09_density_sweep(capsys):
    res = completeness_necessary_sweep(HALF, N=40)
    by_point = {(str(p.center), str(p.radius)): p for p in res.points}
    witness = by_point[("0", "1/2")]
    unit = by_point[("0", "1")]
    ok = (res.verdict == NOT_DENSE and witness.positive
          and all(v == 1.0 for v in witness.estimate.values)
          and unit.estimate.status is Status.TENDS_TO_ZERO)
    report(capsys, "AC9", ok, f"verdict '{res.verdict}', witness (0, 1/2) lambda = 1, "
           f"(0, 1) {unit.estimate.status.value}")


def test_ac10_float_matches_exact_oracle(capsys):
    worst = 0.0
    count = 0
    for mu1 in CLOSED_FORM:
        for mu2 in CLOSED_FORM:
            top = 2 if mu2 is TRIANGLE else 5  # B must stay positive definite
            for n in range(top + 1):
                ea = mu1.moments.section(n, exact=True)
                eb = mu2.moments.section(n, exact=True)
                ex = extreme_generalized_eigs(ea, eb)
                fl = extreme_generalized_eigs(mu1.moments.section(n), mu2.moments.section(n))
                scale = float(ex.beta_max)
                for got, want in ((fl.lambda_min, ex.lambda_min), (fl.beta_max, ex.beta_max)):
                    want = float(want)
                    err = abs(got - want) / (abs(want) if want else scale)
                    worst = max(worst, err)
                count += 1
    report(capsys, "AC10", worst <= 1e-10, f"{count} pencils up to size 6, max relative error "
           f"{worst:.1e}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_ac"):
            try:
                fn(None)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

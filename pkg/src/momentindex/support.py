"""Locating the support of a measure from its moments.

The diagonal moments ``c_nn = int |z|^(2n) dmu`` give the support radius as
``lim c_nn^(1/2n)``; the same limit squared is the largest eigenvalue index
of the pencil formed by the moment matrix with its first row and column
removed against the moment matrix itself.  Comparison indices also bound
supports: a finite ``beta(mu1, mu2)`` forces ``supp mu1`` into the
polynomially convex hull of ``supp mu2``, which in the plane is ``supp mu2``
with its holes filled.  Hulls are computed on rasters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import ndimage

from ._numeric import ctx
from .errors import ContractError
from .indices import (
    DEFAULT_THRESHOLDS,
    IndexEstimate,
    Status,
    Thresholds,
    classify,
    estimate_index,
    index_sequences,
    pencil_sequences,
)
from .measures import Measure
from .raster import DEFAULT_MARGIN, DEFAULT_PIXELS, RegionMask

__all__ = [
    "RadiusEstimate",
    "support_radius",
    "beta_hat_radius",
    "richardson",
    "support_mask",
    "default_frame",
    "pc_hull",
    "is_polynomially_convex",
    "Verdict",
    "ContainmentReport",
    "containment_verdict",
    "RegionMask",
]


@dataclass(frozen=True)
class RadiusEstimate:
    """Per-order values ``|c_nn|^(1/2n)`` (orders ``1..N``) and the limit estimate.

    ``radius`` is the square root of the twice Richardson-extrapolated ratio
    sequence ``c_nn / c_{n-1,n-1}``; ``status`` classifies that extrapolated
    sequence.
    """

    values: tuple[float, ...]
    orders: tuple[int, ...]
    radius: float
    status: Status
    extrapolated: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        v = self.values
        up = all(b >= a * (1 - 1e-12) for a, b in zip(v, v[1:]))
        down = all(b <= a * (1 + 1e-12) for a, b in zip(v, v[1:]))
        return up or down

    def summary(self) -> dict:
        return {
            "radius": self.radius,
            "status": self.status.value,
            "last_root": self.values[-1] if self.values else None,
            "orders": [self.orders[0], self.orders[-1]] if self.orders else [],
        }


def richardson(seq: Sequence, start: int = 0) -> list:
    """Two rounds of Richardson extrapolation assuming errors in powers of ``1/n``.

    ``seq[k]`` is the term of order ``n = start + k``.  Entries for which the
    extrapolation is not yet defined are copied from the input.  Works on
    Fractions without rounding.
    """
    s = list(seq)
    if len(s) < 3:
        return s
    r1 = s[:1] + [(start + k + 1) * s[k] - (start + k) * s[k - 1] for k in range(1, len(s))]
    r2 = r1[:2]
    for k in range(2, len(s)):
        n = start + k
        r2.append(((n + 1) ** 2 * r1[k] - n**2 * r1[k - 1]) / (2 * n + 1))
    return r2


def _diag(mu: Measure, N: int) -> list:
    if mu.exact:
        sec = mu.moments.section(N, exact=True)
        return [d.re for d in sec.diagonal()]
    sec = mu.moments.section(N)
    return [ctx.re(sec[k, k]) for k in range(N + 1)]


def support_radius(mu: Measure, N: int = 40, thresholds: Thresholds | None = None) -> RadiusEstimate:
    """Radius of the smallest origin-centered disk containing ``supp mu``."""
    if N < 2:
        raise ContractError("support radius needs N >= 2")
    th = thresholds or DEFAULT_THRESHOLDS
    diag = _diag(mu, N)
    values = [0.0 if diag[n] == 0 else math.exp(_log(diag[n]) / (2 * n)) for n in range(1, N + 1)]
    orders = tuple(range(1, N + 1))
    if any(d == 0 for d in diag[1:]):
        # the support is the origin (any later zero forces this)
        return RadiusEstimate(tuple(values), orders, 0.0, Status.CONVERGED, tuple(values))
    ratios = [diag[n] / diag[n - 1] for n in range(1, N + 1)]
    acc = richardson(ratios, start=1)
    ext = [math.sqrt(max(float(x), 0.0)) for x in acc]
    status = classify(ext, orders, th)
    return RadiusEstimate(tuple(values), orders, ext[-1], status, tuple(ext))


def _log(c) -> float:
    """Natural log of a positive Fraction or mpmath number of any size."""
    if isinstance(c, Fraction):
        return math.log(c.numerator) - math.log(c.denominator)
    return float(ctx.log(c))


def beta_hat_radius(mu: Measure, N: int = 40, thresholds: Thresholds | None = None) -> IndexEstimate:
    """β-sequence of the pencil (moment matrix without its first row and column, moment matrix).

    Its limit is the squared support radius.  ``extrapolated`` carries the
    Richardson-accelerated limit.
    """
    sec = mu.moments.section(N + 1)
    hat = sec[1:N + 2, 1:N + 2]
    base = sec[0:N + 1, 0:N + 1]
    _, beta = pencil_sequences(hat, base, data_eps=mu.moments.eps, measure=mu.name,
                               module="support")
    acc = richardson(beta)
    return estimate_index(beta, "beta", thresholds, extrapolated=float(acc[-1]))


# ---------------------------------------------------------------------------
# rasters
# ---------------------------------------------------------------------------


def default_frame(mu: Measure, pixels: int = DEFAULT_PIXELS, margin: float = DEFAULT_MARGIN) -> RegionMask:
    """Empty frame around ``supp mu`` (10% margin by default)."""
    coarse = mu.support_points(spacing=0.01 * max(1e-9, _extent_hint(mu)))
    return RegionMask.frame_for(coarse, pixels, margin)


def _extent_hint(mu: Measure) -> float:
    pts = mu.support_points(spacing=1e9)
    if pts.size < 2:
        return max(1.0, float(np.abs(pts).max()) if pts.size else 1.0)
    ext = max(np.ptp(pts.real), np.ptp(pts.imag))
    return ext if ext > 0 else 1.0


def support_mask(mu: Measure, frame: RegionMask | None = None, dilate: int = 1) -> RegionMask:
    """Raster of ``supp mu``: support sampled at half-pixel spacing, grown by ``dilate`` pixels."""
    frame = frame if frame is not None else default_frame(mu)
    pts = mu.support_points(spacing=0.5 / frame.resolution)
    provenance = "analytic" if mu.exact else "sampled"
    return frame.blank(provenance).with_points(pts, dilate=dilate, provenance=provenance)


def _bfs_exterior(grid: np.ndarray) -> np.ndarray:
    labels, _ = ndimage.label(~grid)  # default structure is 4-connectivity
    border = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    border = border[border != 0]
    return np.isin(labels, border)


def pc_hull(mask: RegionMask) -> RegionMask:
    """Fill every bounded component of the complement (4-connected) of ``mask``."""
    g = mask.grid
    if g.shape[0] < 5 or g.shape[1] < 5:
        raise ContractError("mask too small for a two-pixel margin")
    rim = np.concatenate([g[:2].ravel(), g[-2:].ravel(), g[:, :2].ravel(), g[:, -2:].ravel()])
    if rim.any():
        raise ContractError("mask reaches within two pixels of the frame; enlarge the box")
    exterior = _bfs_exterior(g)
    return mask.with_grid(~exterior, "derived")


def is_polynomially_convex(mask: RegionMask) -> bool:
    return bool(np.array_equal(pc_hull(mask).grid, mask.grid))


# ---------------------------------------------------------------------------
# containment
# ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ContainmentReport:
    """Outcome of comparing ``supp mu1`` with the hole-filled ``supp mu2``.

    ``verdict`` is ``holds`` when β converged (the inclusion then follows),
    ``indeterminate`` for any other β status, and ``fails`` only if a pixel
    check contradicts a converged β.  ``supports_coincide`` and
    ``curve_in_support`` report the two-sided consequences available when
    λ is also positive; ``None`` means not applicable.
    """

    beta: IndexEstimate
    lam: IndexEstimate
    verdict: Verdict
    pixel_inclusion: bool | None
    supports_coincide: bool | None
    curve_in_support: bool | None
    reason: str

    def summary(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "beta": self.beta.summary(),
            "lambda": self.lam.summary(),
            "pixel_inclusion": self.pixel_inclusion,
            "supports_coincide": self.supports_coincide,
            "curve_in_support": self.curve_in_support,
        }


def containment_verdict(
    mu1: Measure,
    mu2: Measure,
    N: int = 40,
    geometry2: RegionMask | None = None,
    geometry1: RegionMask | None = None,
    thresholds: Thresholds | None = None,
) -> ContainmentReport:
    """Three-valued verdict on ``supp mu1`` inside the hole-filled ``supp mu2``.

    ``geometry2`` defaults to the known support raster of ``mu2``; the
    support raster of ``mu1`` is drawn on the same frame unless given.
    """
    seq = index_sequences(mu1, mu2, N)
    beta = estimate_index(seq.beta, "beta", thresholds)
    lam = estimate_index(seq.lam, "lambda", thresholds)
    if beta.status is not Status.CONVERGED:
        why = {
            Status.DIVERGES_TO_INFINITY: "beta diverges; no inclusion can be inferred",
            Status.INCONCLUSIVE: "beta status inconclusive at this order",
        }.get(beta.status, f"beta status {beta.status.value}")
        return ContainmentReport(beta, lam, Verdict.INDETERMINATE, None, None, None, why)
    g2 = geometry2 if geometry2 is not None else support_mask(mu2)
    hull2 = pc_hull(g2)
    try:
        g1 = geometry1 if geometry1 is not None else support_mask(mu1, frame=g2)
        inclusion = g1.subset_of(hull2)
    except ContractError:
        # mu1's support leaves the frame of mu2's hull
        inclusion = False
    if not inclusion:
        return ContainmentReport(beta, lam, Verdict.FAILS, False, None, None,
                                 "beta converged but the support raster leaves the filled hull")
    two_sided = lam.status is Status.CONVERGED and lam.value is not None and lam.value > 0
    coincide = None
    curve = None
    if two_sided:
        if mu1.atom_count is None and mu2.atom_count is None:
            if is_polynomially_convex(g2) and is_polynomially_convex(g1):
                coincide = True
        if mu2.is_jordan_curve:
            curve = True
    return ContainmentReport(beta, lam, Verdict.HOLDS, True, coincide, curve,
                             "beta converged; support lies in the filled hull")

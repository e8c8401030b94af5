"""Measure descriptions and their moment matrices.

A measure ``mu`` on the complex plane is summarized by the infinite Hermitian
matrix ``c[i, j] = integral of z**i * conj(z)**j dmu``.  Closed-form families
(atomic, uniform and trigonometric-density measures on circles, and their
similarity images) produce their moments in exact Gaussian-rational
arithmetic; quadrature measures use 80-bit extended precision.  Either way
the values are rounded once into the working mpmath context.
"""

from __future__ import annotations

import csv
import io
import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, ClassVar, Sequence

import numpy as np

from ._exact import ExactMatrix, QQi, to_exact
from ._numeric import ctx, mp_from_longdouble, to_mp_matrix
from .errors import ContractError, MomentRangeError

__all__ = [
    "Measure",
    "Atomic",
    "CircleUniform",
    "CircleDensity",
    "CurveQuadrature",
    "Pushforward",
    "MomentMatrix",
    "moment",
    "moment_section",
    "section_to_csv",
    "section_to_json",
    "DEFAULT_QUADRATURE_NODES",
]

DEFAULT_QUADRATURE_NODES = 4096
LONGDOUBLE_EPS = float(np.finfo(np.longdouble).eps)


def _positive(value, what: str) -> Fraction:
    q = to_exact(value)
    if q.im or q.re <= 0:
        raise ContractError(f"{what} must be a positive real number, got {value!r}")
    return q.re


class MomentMatrix:
    """Lazily materialized moment matrix with a nested section cache.

    Sections nest, so only the largest one computed so far is kept (one exact
    copy and one rounded copy per working precision).  Fills happen under a
    lock and are idempotent, so concurrent readers always see a complete
    section.
    """

    def __init__(self, measure: "Measure"):
        self.measure = measure
        self._lock = threading.RLock()
        self._exact: ExactMatrix | None = None
        self._rounded: dict[int, object] = {}

    @property
    def exact(self) -> bool:
        return self.measure.exact

    @property
    def eps(self) -> float:
        """Relative accuracy of the entries before rounding to working precision."""
        return 0.0 if self.exact else LONGDOUBLE_EPS

    @property
    def structure(self) -> str:
        return self.measure.structure

    def section(self, n: int, exact: bool = False):
        """Leading ``(n+1) x (n+1)`` section.

        Returns an :class:`ExactMatrix` when ``exact`` is true, otherwise an
        mpmath matrix at the working precision.
        """
        if n < 0:
            raise ContractError(f"section order must be non-negative, got {n}")
        size = n + 1
        if exact:
            if not self.exact:
                raise ContractError(f"{self.measure.name} has no exact moments")
            with self._lock:
                if self._exact is None or self._exact.shape[0] < size:
                    self._exact = ExactMatrix(self.measure._exact_section(n))
                full = self._exact
            return full if full.shape[0] == size else full.leading(size)
        dps = ctx.dps
        with self._lock:
            full = self._rounded.get(dps)
            if full is None or full.rows < size:
                if self.exact:
                    full = to_mp_matrix(self.section(n, exact=True))
                else:
                    full = self.measure._float_section(n)
                self._rounded[dps] = full
        return full[0:size, 0:size]

    def entry(self, i: int, j: int, exact: bool = False):
        if i < 0 or j < 0:
            raise ContractError(f"moment indices must be non-negative, got ({i}, {j})")
        k = max(i, j)
        if exact:
            return self.section(k, exact=True)[i, j]
        return self.section(k)[i, j]


@dataclass(frozen=True, eq=False)
class Measure:
    """Base class for positive, compactly supported Borel measures."""

    label: str = field(default="", kw_only=True, compare=False)

    exact: ClassVar[bool] = True

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "_moments", MomentMatrix(self))

    def _validate(self) -> None:
        pass

    @property
    def moments(self) -> MomentMatrix:
        return self._moments

    @property
    def name(self) -> str:
        return self.label or type(self).__name__

    @property
    def structure(self) -> str:
        """Declared symmetry class: ``"diagonal"``, ``"toeplitz"`` or ``"general"``."""
        return "general"

    @property
    def atom_count(self) -> int | None:
        """Number of support points if the support is finite, else ``None``."""
        return None

    @property
    def is_jordan_curve(self) -> bool:
        """Whether the support is (assumed to be) a Jordan curve."""
        return False

    def support_points(self, spacing: float) -> np.ndarray:
        """Points of the support sampled at most ``spacing`` apart."""
        raise NotImplementedError

    def _exact_section(self, n: int) -> list[list[QQi]]:
        raise NotImplementedError

    def _float_section(self, n: int):
        raise NotImplementedError


def _hermitian_from_upper(n: int, upper: Callable[[int, int], QQi]) -> list[list[QQi]]:
    rows = [[QQi(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(i, n + 1):
            v = upper(i, j)
            rows[i][j] = v
            rows[j][i] = v.conjugate()
        if rows[i][i].im:
            raise ArithmeticError("diagonal moment with nonzero imaginary part")
    return rows


def _powers(z: QQi, n: int) -> list[QQi]:
    out = [QQi(1)]
    for _ in range(n):
        out.append(out[-1] * z)
    return out


@dataclass(frozen=True, eq=False)
class Atomic(Measure):
    """Finite sum of weighted point masses ``sum w_t * delta(z_t)``."""

    points: tuple = ()

    def _validate(self):
        if not self.points:
            raise ContractError("an atomic measure needs at least one point")
        atoms = []
        for entry in self.points:
            try:
                z, w = entry
            except (TypeError, ValueError):
                raise ContractError(f"atom {entry!r} is not a (location, weight) pair") from None
            atoms.append((to_exact(z), _positive(w, "atom weight")))
        object.__setattr__(self, "points", tuple(atoms))

    @property
    def atom_count(self) -> int:
        return len({(z.re, z.im) for z, _ in self.points})

    def support_points(self, spacing: float) -> np.ndarray:
        return np.array([complex(z) for z, _ in self.points])

    def _exact_section(self, n):
        pw = [(_powers(z, n), w) for z, w in self.points]

        def upper(i, j):
            acc = QQi(0)
            for p, w in pw:
                acc = acc + p[i] * p[j].conjugate() * w
            return acc

        return _hermitian_from_upper(n, upper)


@dataclass(frozen=True, eq=False)
class CircleUniform(Measure):
    """Uniform (normalized arc-length) measure on ``|z - center| = radius``."""

    center: object = 0
    radius: object = 1
    mass: object = 1

    def _validate(self):
        object.__setattr__(self, "center", to_exact(self.center))
        object.__setattr__(self, "radius", _positive(self.radius, "radius"))
        object.__setattr__(self, "mass", _positive(self.mass, "mass"))

    @property
    def structure(self) -> str:
        if not self.center:
            return "diagonal"
        return "general"

    @property
    def is_jordan_curve(self) -> bool:
        return True

    def support_points(self, spacing: float) -> np.ndarray:
        return _circle_points(complex(self.center), float(self.radius), spacing)

    def _exact_section(self, n):
        z0 = self.center
        r2 = self.radius * self.radius
        mass = self.mass
        if not z0:
            return [
                [QQi(mass * r2**i) if i == j else QQi(0) for j in range(n + 1)]
                for i in range(n + 1)
            ]
        # integer Gaussian arithmetic: z0 = (gr + gi*i)/d, r**2 = u/v
        d = math.lcm(z0.re.denominator, z0.im.denominator)
        gr, gi = int(z0.re * d), int(z0.im * d)
        u, v = r2.numerator, r2.denominator
        gpow = [(1, 0)]
        for _ in range(n):
            a, b = gpow[-1]
            gpow.append((a * gr - b * gi, a * gi + b * gr))
        dpow = [d**k for k in range(2 * n + 1)]
        upow = [u**k for k in range(n + 1)]
        vpow = [v**k for k in range(n + 1)]

        def upper(i, j):
            kmax = min(i, j)
            sr = si = 0
            for k in range(kmax + 1):
                a, b = gpow[i - k]
                c, e = gpow[j - k]
                # g**(i-k) * conj(g)**(j-k)
                pr, pi = a * c + b * e, b * c - a * e
                f = comb(i, k) * comb(j, k) * dpow[2 * k] * upow[k] * vpow[kmax - k]
                sr += f * pr
                si += f * pi
            den = dpow[i + j] * vpow[kmax]
            return QQi(mass * Fraction(sr, den), mass * Fraction(si, den))

        return _hermitian_from_upper(n, upper)


@dataclass(frozen=True, eq=False)
class CircleDensity(Measure):
    """Measure ``w(theta) dtheta / (2 pi)`` on ``z = center + radius * exp(i theta)``.

    ``coefficients`` lists ``a_0, a_1, ..., a_m`` of the trigonometric
    polynomial ``w(theta) = sum_{|k| <= m} a_k exp(i k theta)``; negative
    indices follow from ``a_{-k} = conj(a_k)``, so ``w`` is real.  The total
    mass is ``a_0``.
    """

    center: object = 0
    radius: object = 1
    coefficients: tuple = (1,)

    def _validate(self):
        object.__setattr__(self, "center", to_exact(self.center))
        object.__setattr__(self, "radius", _positive(self.radius, "radius"))
        coeffs = tuple(to_exact(a) for a in self.coefficients)
        if not coeffs or coeffs[0].im or coeffs[0].re <= 0:
            raise ContractError("density needs a real positive constant term a_0")
        object.__setattr__(self, "coefficients", coeffs)
        theta = np.linspace(-np.pi, np.pi, 8192, endpoint=False)
        w = np.full_like(theta, float(coeffs[0].re))
        scale = float(coeffs[0].re)
        for k, a in enumerate(coeffs[1:], start=1):
            w += 2 * np.real(complex(a) * np.exp(1j * k * theta))
            scale += 2 * abs(complex(a))
        if w.min() < -1e-12 * scale:
            raise ContractError(f"density takes negative values (min {w.min():.3g})")

    @property
    def structure(self) -> str:
        if not self.center and self.radius == 1:
            return "toeplitz"
        return "general"

    @property
    def is_jordan_curve(self) -> bool:
        return True

    def support_points(self, spacing: float) -> np.ndarray:
        # zeros of a nonnegative trigonometric polynomial are isolated
        return _circle_points(complex(self.center), float(self.radius), spacing)

    def coefficient(self, k: int) -> QQi:
        m = len(self.coefficients) - 1
        if abs(k) > m:
            return QQi(0)
        return self.coefficients[k] if k >= 0 else self.coefficients[-k].conjugate()

    def _exact_section(self, n):
        z0, r = self.center, QQi(self.radius)
        m = len(self.coefficients) - 1
        zp = _powers(z0, n)
        rp = _powers(r, n)
        # F[i][k] = C(i,k) z0^(i-k) r^k; c_ij = sum_{k,l} F[i][k] conj(F[j][l]) a_{l-k}
        F = [[zp[i - k] * rp[k] * comb(i, k) for k in range(i + 1)] for i in range(n + 1)]

        def upper(i, j):
            acc = QQi(0)
            for k, fik in enumerate(F[i]):
                if not fik:
                    continue
                for l in range(max(0, k - m), min(j, k + m) + 1):
                    fjl = F[j][l]
                    if fjl:
                        acc = acc + fik * fjl.conjugate() * self.coefficient(l - k)
            return acc

        return _hermitian_from_upper(n, upper)


@dataclass(frozen=True, eq=False)
class CurveQuadrature(Measure):
    """Discrete measure on quadrature nodes along a curve.

    The moments are those of ``sum weights[t] * delta(nodes[t])`` and are
    accumulated in 80-bit extended precision.  Use the constructors to build
    the nodes from a parametrization.
    """

    nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    closed: bool = True

    exact: ClassVar[bool] = False

    def _validate(self):
        nodes = np.asarray(self.nodes, dtype=np.clongdouble).ravel()
        weights = np.asarray(self.weights, dtype=np.longdouble).ravel()
        if nodes.size == 0 or nodes.shape != weights.shape:
            raise ContractError("nodes and weights must be non-empty and of equal length")
        if not np.all(weights > 0):
            raise ContractError("quadrature weights must be strictly positive")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise ContractError("quadrature nodes and weights must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_curve(
        cls,
        gamma: Callable,
        nodes: int = DEFAULT_QUADRATURE_NODES,
        density: Callable | None = None,
        closed: bool = True,
        **kw,
    ) -> "CurveQuadrature":
        """Push ``density(t) dt`` on ``[0, 1]`` forward through ``gamma``.

        Closed (periodic) curves use the composite trapezoid rule on
        ``t = k / nodes``; open arcs use Gauss-Legendre nodes.
        """
        if nodes < 1:
            raise ContractError("need at least one quadrature node")
        if closed:
            t = np.arange(nodes, dtype=float) / nodes
            w = np.full(nodes, 1.0 / nodes)
        else:
            x, wl = np.polynomial.legendre.leggauss(nodes)
            t = (x + 1) / 2
            w = wl / 2
        z = _apply(gamma, t)
        if density is not None:
            w = w * np.asarray(_apply(density, t), dtype=float).real
        return cls(nodes=z, weights=w, closed=closed, **kw)

    @classmethod
    def circle(cls, center=0, radius=1, nodes: int = DEFAULT_QUADRATURE_NODES, mass=1, **kw):
        c, r = complex(center), float(radius)
        q = cls.from_curve(lambda t: c + r * np.exp(2j * np.pi * t), nodes=nodes, **kw)
        return cls(nodes=q.nodes, weights=q.weights * np.longdouble(mass), closed=True, **kw)

    @classmethod
    def segment(cls, a=-1, b=1, nodes: int = 64, **kw):
        """Arc-length (Lebesgue) measure on the segment ``[a, b]``; mass ``|b - a|``."""
        a, b = complex(a), complex(b)
        length = abs(b - a)
        return cls.from_curve(
            lambda t: a + (b - a) * t, nodes=nodes, density=lambda t: np.full_like(t, length),
            closed=False, **kw,
        )

    @property
    def atom_count(self) -> None:
        # the nodes discretize a continuum; finiteness is not a property of the model
        return None

    @property
    def is_jordan_curve(self) -> bool:
        return self.closed

    def support_points(self, spacing: float) -> np.ndarray:
        return self.nodes.astype(np.complex128)

    def _float_section(self, n):
        z = self.nodes
        powers = np.empty((z.size, n + 1), dtype=np.clongdouble)
        powers[:, 0] = 1
        for k in range(1, n + 1):
            powers[:, k] = powers[:, k - 1] * z
        block = (powers * self.weights[:, None]).T @ np.conj(powers)
        if not np.all(np.isfinite(block)):
            raise MomentRangeError(f"{self.name}: moments of order {n} overflow extended precision")
        out = ctx.matrix(n + 1, n + 1)
        for i in range(n + 1):
            out[i, i] = mp_from_longdouble(np.longdouble(block[i, i].real))
            for j in range(i + 1, n + 1):
                v = mp_from_longdouble(block[i, j])
                out[i, j] = v
                out[j, i] = ctx.conj(v)
        return out


@dataclass(frozen=True, eq=False)
class Pushforward(Measure):
    """Image ``base o phi^{-1}`` of a measure under ``phi(z) = alpha z + beta``."""

    base: Measure = None
    alpha: object = 1
    beta: object = 0

    def _validate(self):
        if not isinstance(self.base, Measure):
            raise ContractError("pushforward needs a base measure")
        object.__setattr__(self, "alpha", to_exact(self.alpha))
        object.__setattr__(self, "beta", to_exact(self.beta))
        if not self.alpha:
            raise ContractError("similarity scale alpha must be nonzero")

    @property
    def exact(self) -> bool:  # type: ignore[override]
        return self.base.exact

    @property
    def atom_count(self) -> int | None:
        return self.base.atom_count

    @property
    def is_jordan_curve(self) -> bool:
        return self.base.is_jordan_curve

    def support_points(self, spacing: float) -> np.ndarray:
        scale = abs(complex(self.alpha))
        pts = self.base.support_points(spacing / scale)
        return complex(self.alpha) * pts + complex(self.beta)

    def _exact_section(self, n):
        from .transforms import pushforward_moments

        return pushforward_moments(
            self.base.moments.section(n, exact=True), self.alpha, self.beta
        ).rows

    def _float_section(self, n):
        from .transforms import pushforward_moments

        return pushforward_moments(self.base.moments.section(n), self.alpha, self.beta)


def _apply(fn: Callable, t: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(t))
        if out.shape == t.shape:
            return out
    except TypeError:
        pass
    return np.array([fn(x) for x in t])


def _circle_points(center: complex, radius: float, spacing: float) -> np.ndarray:
    count = max(16, int(math.ceil(2 * math.pi * radius / spacing)))
    theta = 2 * np.pi * np.arange(count) / count
    return center + radius * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# functional interface and exports
# ---------------------------------------------------------------------------


def moment(mu: Measure, i: int, j: int, exact: bool = False):
    """The moment ``c[i, j]``.

    Returns a :class:`QQi` in exact mode, otherwise a Python ``complex``;
    a value outside double range raises :class:`MomentRangeError` instead
    of becoming infinite.
    """
    value = mu.moments.entry(i, j, exact=exact)
    if exact:
        return value
    try:
        out = complex(value)
    except OverflowError as exc:
        raise MomentRangeError(f"{mu.name}: moment ({i}, {j}) exceeds double range") from exc
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise MomentRangeError(f"{mu.name}: moment ({i}, {j}) exceeds double range")
    return out


def moment_section(mu: Measure, n: int, exact: bool = False):
    """Section of order ``n`` (size ``n+1``); see :meth:`MomentMatrix.section`."""
    return mu.moments.section(n, exact=exact)


def _cell(v) -> tuple[str, str]:
    if isinstance(v, QQi):
        return str(v.re), str(v.im)
    re, im = ctx.re(v), ctx.im(v)
    return ctx.nstr(re, 17), ctx.nstr(im, 17)


def _rows(section):
    if isinstance(section, ExactMatrix):
        return [list(r) for r in section.rows]
    return [[section[i, j] for j in range(section.cols)] for i in range(section.rows)]


def section_to_csv(section, subcommand: str = "moments") -> str:
    """Row-major CSV; each entry occupies a ``re,im`` column pair."""
    rows = _rows(section)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write(f"# subcommand: {subcommand}; c<j>.re/.im are the real and imaginary parts of c_ij [mass * length^(i+j)]\n")
    header = ["row"]
    for j in range(len(rows)):
        header += [f"c{j}.re", f"c{j}.im"]
    writer.writerow(header)
    for i, row in enumerate(rows):
        cells = [str(i)]
        for v in row:
            cells.extend(_cell(v))
        writer.writerow(cells)
    return buf.getvalue()


def section_to_json(section) -> dict:
    rows = _rows(section)
    return {
        "order": len(rows) - 1,
        "exact": isinstance(section, ExactMatrix),
        "entries": [[list(_cell(v)) for v in row] for row in rows],
    }


def section_from_json(data: dict | str) -> ExactMatrix:
    """Inverse of :func:`section_to_json` for exact dumps."""
    if isinstance(data, str):
        data = json.loads(data)
    if not data.get("exact"):
        raise ContractError("only exact dumps round-trip losslessly")
    return ExactMatrix([[QQi(re, im) for re, im in row] for row in data["entries"]])

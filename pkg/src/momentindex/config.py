"""Run configuration files (TOML).

A configuration names measures under ``[measures.<name>]`` and lists
analyses as ``[[analysis]]`` entries; ``[run]`` overrides defaults and
``[thresholds]`` overrides the limit classifier.  Numbers that should stay
exact (centers, radii, weights, coefficients) may be given as strings such as
``"1/2"``, ``"1+2i"`` or ``"-i"``.  See the README for the full schema.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ._exact import to_exact
from ._numeric import DEFAULT_DPS
from .errors import ConfigError, ContractError
from .indices import DEFAULT_THRESHOLDS, Thresholds
from .measures import (
    DEFAULT_QUADRATURE_NODES,
    Atomic,
    CircleDensity,
    CircleUniform,
    CurveQuadrature,
    Measure,
    Pushforward,
)
from .raster import DEFAULT_MARGIN, DEFAULT_PIXELS
from .transforms import DEFAULT_DENSITY_GRID

__all__ = [
    "DEFAULTS",
    "COMMANDS",
    "RunSettings",
    "Analysis",
    "RunConfig",
    "load_config",
    "parse_config",
]

COMMANDS = (
    "moments",
    "indices",
    "radius",
    "pc-hull",
    "containment",
    "hull",
    "numrange",
    "christoffel",
    "pushforward",
    "invariance",
    "density-test",
)

# every default in one place; echoed verbatim into each run summary
DEFAULTS: dict[str, Any] = {
    "max_order": 40,
    "hard_cap": 120,
    "angle_count": 720,
    "pixels": DEFAULT_PIXELS,
    "margin": DEFAULT_MARGIN,
    "quadrature_nodes": DEFAULT_QUADRATURE_NODES,
    "format": "csv",
    "precision_digits": DEFAULT_DPS,
    "thresholds": DEFAULT_THRESHOLDS.as_dict(),
    "density_grid": [list(p) for p in DEFAULT_DENSITY_GRID],
}

_MEASURE_KEYS = {
    "atomic": {"points"},
    "circle-uniform": {"center", "radius", "mass"},
    "circle-density": {"center", "radius", "coefficients"},
    "curve-quadrature": {"curve", "center", "radius", "a", "b", "nodes", "mass", "points"},
    "pushforward": {"base", "alpha", "beta"},
}

_ANALYSIS_KEYS = {
    "moments": {"measure", "exact"},
    "indices": {"mu1", "mu2", "exact"},
    "radius": {"measure"},
    "pc-hull": {"measure"},
    "containment": {"mu1", "mu2"},
    "hull": {"measure"},
    "numrange": {"measure", "matrix", "size"},
    "christoffel": {"measure", "points"},
    "pushforward": {"measure", "alpha", "beta"},
    "invariance": {"measure", "alpha", "beta", "grid"},
    "density-test": {"measure", "grid"},
}
_COMMON_KEYS = {"command", "max_order", "angle_count", "pixels", "margin", "name"}


@dataclass(frozen=True)
class RunSettings:
    max_order: int = DEFAULTS["max_order"]
    hard_cap: int = DEFAULTS["hard_cap"]
    angle_count: int = DEFAULTS["angle_count"]
    pixels: int = DEFAULTS["pixels"]
    margin: float = DEFAULTS["margin"]
    quadrature_nodes: int = DEFAULTS["quadrature_nodes"]
    format: str = DEFAULTS["format"]
    precision_digits: int = DEFAULTS["precision_digits"]
    out: str | None = None


@dataclass(frozen=True)
class Analysis:
    command: str
    params: dict
    where: str  # config path of this entry, for diagnostics

    def get(self, key: str, default=None):
        return self.params.get(key, default)


@dataclass(frozen=True)
class RunConfig:
    measures: dict[str, Measure]
    analyses: tuple[Analysis, ...]
    settings: RunSettings
    thresholds: Thresholds
    source_hash: str
    source: str = ""

    def measure(self, name: Any, where: str) -> Measure:
        if not isinstance(name, str):
            raise ConfigError(f"{where}: expected a measure name, got {name!r}")
        if name not in self.measures:
            raise ConfigError(f"{where}: unknown measure {name!r}")
        return self.measures[name]


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message names line and column
        raise ConfigError(f"config parse error: {exc}") from exc
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    unknown = set(raw) - {"run", "thresholds", "measures", "analysis"}
    if unknown:
        raise ConfigError(f"unknown top-level table(s): {', '.join(sorted(unknown))}")
    settings = _settings(raw.get("run", {}))
    thresholds = _thresholds(raw.get("thresholds", {}))
    measures = _measures(raw.get("measures", {}), settings)
    analyses = _analyses(raw.get("analysis", []), measures, settings)
    return RunConfig(measures, analyses, settings, thresholds, digest, text)


def _settings(table: dict) -> RunSettings:
    if not isinstance(table, dict):
        raise ConfigError("run: must be a table")
    known = {f.name: f for f in fields(RunSettings)}
    values = {}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"run.{key}: unknown setting")
        values[key] = value
    s = RunSettings(**values)
    for key in ("max_order", "hard_cap", "angle_count", "pixels", "quadrature_nodes",
                "precision_digits"):
        v = getattr(s, key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"run.{key}: must be a positive integer, got {v!r}")
    if s.max_order > s.hard_cap:
        raise ConfigError(f"run.max_order: {s.max_order} exceeds hard_cap {s.hard_cap}")
    if s.angle_count < 8:
        raise ConfigError("run.angle_count: must be at least 8")
    if s.precision_digits < 20:
        raise ConfigError("run.precision_digits: must be at least 20")
    if not isinstance(s.margin, (int, float)) or not 0 < s.margin < 1:
        raise ConfigError(f"run.margin: must lie in (0, 1), got {s.margin!r}")
    if s.format not in ("csv", "json"):
        raise ConfigError(f"run.format: must be 'csv' or 'json', got {s.format!r}")
    return s


def _thresholds(table: dict) -> Thresholds:
    if not isinstance(table, dict):
        raise ConfigError("thresholds: must be a table")
    known = {f.name for f in fields(Thresholds)}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"thresholds.{key}: unknown threshold")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"thresholds.{key}: must be a number")
    th = replace(DEFAULT_THRESHOLDS, **table)
    if not isinstance(th.window, int) or th.window < 2:
        raise ConfigError("thresholds.window: must be an integer >= 2")
    return th


def _number(value, where: str):
    try:
        return to_exact(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a number: {value!r}") from exc


def _real(value, where: str):
    q = _number(value, where)
    if q.im:
        raise ConfigError(f"{where}: must be real, got {value!r}")
    return q.re


def _measures(table: dict, settings: RunSettings) -> dict[str, Measure]:
    if not isinstance(table, dict):
        raise ConfigError("measures: must be a table of named measures")
    out: dict[str, Measure] = {}
    pending = dict(table)
    # pushforwards may reference measures defined later in the file
    while pending:
        progressed = False
        for name in list(pending):
            decl = pending[name]
            where = f"measures.{name}"
            if not isinstance(decl, dict):
                raise ConfigError(f"{where}: must be a table")
            if decl.get("kind") == "pushforward" and decl.get("base") in pending:
                continue
            out[name] = _measure(name, decl, where, out, settings)
            del pending[name]
            progressed = True
        if not progressed:
            names = ", ".join(sorted(pending))
            raise ConfigError(f"measures: circular or unknown pushforward base among {names}")
    return out


def _measure(name: str, decl: dict, where: str, known: dict, settings: RunSettings) -> Measure:
    kind = decl.get("kind")
    if kind not in _MEASURE_KEYS:
        raise ConfigError(f"{where}.kind: expected one of {sorted(_MEASURE_KEYS)}, got {kind!r}")
    extra = set(decl) - _MEASURE_KEYS[kind] - {"kind"}
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}: not a field of kind {kind!r}")
    try:
        if kind == "atomic":
            pts = decl.get("points")
            if not isinstance(pts, list) or not pts:
                raise ConfigError(f"{where}.points: must be a non-empty list of [location, weight]")
            atoms = []
            for i, p in enumerate(pts):
                if not isinstance(p, list) or len(p) != 2:
                    raise ConfigError(f"{where}.points[{i}]: must be [location, weight]")
                atoms.append((_number(p[0], f"{where}.points[{i}]"),
                              _real(p[1], f"{where}.points[{i}]")))
            return Atomic(tuple(atoms), label=name)
        if kind == "circle-uniform":
            return CircleUniform(
                _number(decl.get("center", 0), f"{where}.center"),
                _real(decl.get("radius", 1), f"{where}.radius"),
                _real(decl.get("mass", 1), f"{where}.mass"),
                label=name,
            )
        if kind == "circle-density":
            coeffs = decl.get("coefficients")
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError(f"{where}.coefficients: must be a non-empty list a_0, a_1, ...")
            return CircleDensity(
                _number(decl.get("center", 0), f"{where}.center"),
                _real(decl.get("radius", 1), f"{where}.radius"),
                tuple(_number(c, f"{where}.coefficients[{i}]") for i, c in enumerate(coeffs)),
                label=name,
            )
        if kind == "curve-quadrature":
            return _quadrature(name, decl, where, settings)
        base = decl.get("base")
        if base not in known:
            raise ConfigError(f"{where}.base: unknown measure {base!r}")
        return Pushforward(
            known[base],
            _number(decl.get("alpha", 1), f"{where}.alpha"),
            _number(decl.get("beta", 0), f"{where}.beta"),
            label=name,
        )
    except ContractError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _quadrature(name: str, decl: dict, where: str, settings: RunSettings) -> Measure:
    curve = decl.get("curve", "circle")
    nodes = decl.get("nodes", settings.quadrature_nodes)
    if not isinstance(nodes, int) or nodes < 1:
        raise ConfigError(f"{where}.nodes: must be a positive integer")
    if curve == "circle":
        return CurveQuadrature.circle(
            complex(_number(decl.get("center", 0), f"{where}.center")),
            float(_real(decl.get("radius", 1), f"{where}.radius")),
            nodes=nodes,
            mass=float(_real(decl.get("mass", 1), f"{where}.mass")),
            label=name,
        )
    if curve == "segment":
        return CurveQuadrature.segment(
            complex(_number(decl.get("a", -1), f"{where}.a")),
            complex(_number(decl.get("b", 1), f"{where}.b")),
            nodes=nodes,
            label=name,
        )
    if curve == "points":
        pts = decl.get("points")
        if not isinstance(pts, list) or not pts:
            raise ConfigError(f"{where}.points: must be a non-empty list of [node, weight]")
        z = [complex(_number(p[0], f"{where}.points[{i}]")) for i, p in enumerate(pts)]
        w = [float(_real(p[1], f"{where}.points[{i}]")) for i, p in enumerate(pts)]
        return CurveQuadrature(nodes=z, weights=w, closed=False, label=name)
    raise ConfigError(f"{where}.curve: expected 'circle', 'segment' or 'points', got {curve!r}")


def _analyses(entries, measures: dict, settings: RunSettings) -> tuple[Analysis, ...]:
    if not isinstance(entries, list):
        raise ConfigError("analysis: must be an array of tables ([[analysis]])")
    out = []
    for i, entry in enumerate(entries):
        where = f"analysis[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: must be a table")
        out.append(validate_analysis(entry, measures, settings, where))
    return tuple(out)


def validate_analysis(entry: dict, measures: dict, settings: RunSettings, where: str) -> Analysis:
    command = entry.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"{where}.command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    allowed = _ANALYSIS_KEYS[command] | _COMMON_KEYS
    for key in entry:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: not a parameter of {command!r}")
    for key in ("measure", "mu1", "mu2"):
        if key in _ANALYSIS_KEYS[command] and key in entry:
            if entry[key] not in measures:
                raise ConfigError(f"{where}.{key}: unknown measure {entry[key]!r}")
    needs = [k for k in ("measure", "mu1", "mu2") if k in _ANALYSIS_KEYS[command]]
    if command == "numrange":
        if "measure" not in entry and "matrix" not in entry:
            raise ConfigError(f"{where}: numrange needs 'measure' or 'matrix'")
        needs = []
    for key in needs:
        if key not in entry:
            raise ConfigError(f"{where}.{key}: missing")
    n = entry.get("max_order", settings.max_order)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError(f"{where}.max_order: must be a positive integer")
    if n > settings.hard_cap:
        raise ConfigError(f"{where}.max_order: {n} exceeds hard_cap {settings.hard_cap}")
    params = dict(entry)
    params.pop("command")
    params["max_order"] = n
    return Analysis(command, params, where)

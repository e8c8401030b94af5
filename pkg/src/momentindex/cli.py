"""Command-line entry point.

Every invocation reads one TOML configuration (``--config``), runs the
selected analyses and writes tables, rasters and a ``summary.json`` into the
output directory.  ``momentindex run`` executes all ``[[analysis]]`` entries;
``momentindex <subcommand>`` runs the entries with that command, or a single
ad-hoc analysis when measure names are passed on the command line.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
1 anything else (including I/O errors).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from ._exact import QQi, to_exact
from ._numeric import set_precision
from .config import COMMANDS, DEFAULTS, Analysis, RunConfig, load_config, validate_analysis
from .errors import ConfigError, ContractError, MomentIndexError
from .hull import hessenberg_section, hull_estimate, numerical_range_boundary, christoffel_sequence
from .indices import estimate_index, index_sequences
from .measures import Measure, section_to_csv, section_to_json
from .support import beta_hat_radius, containment_verdict, pc_hull, support_mask, support_radius
from .transforms import (
    DEFAULT_DENSITY_GRID,
    SimilarityMap,
    completeness_necessary_sweep,
    invariance_report,
    pushforward,
    pushforward_moments,
)

__all__ = ["main", "build_parser", "execute"]

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (Fraction, QQi)):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return f"{complex(v).real!r}{complex(v).imag:+.17g}i"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (Fraction, QQi)):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


class Outputs:
    """Collects the files of one analysis under a common prefix."""

    def __init__(self, prefix: str, fmt: str):
        self.prefix = prefix
        self.fmt = fmt
        self.files: dict[str, bytes] = {}

    def table(self, name: str, subcommand: str, columns: list[tuple[str, str]], rows: list[list]):
        if self.fmt == "json":
            doc = {
                "subcommand": subcommand,
                "columns": [{"name": n, "unit": u} for n, u in columns],
                "rows": [[_fmt(v) for v in r] for r in rows],
            }
            self.files[f"{self.prefix}-{name}.json"] = _dumps(doc)
            return
        lines = [f"# subcommand: {subcommand}",
                 ",".join(f"{n} [{u}]" for n, u in columns)]
        lines += [",".join(_fmt(v) for v in r) for r in rows]
        self.files[f"{self.prefix}-{name}.csv"] = ("\n".join(lines) + "\n").encode()

    def text(self, name: str, content: str):
        self.files[f"{self.prefix}-{name}"] = content.encode()

    def raw(self, name: str, content: bytes):
        self.files[f"{self.prefix}-{name}"] = content

    def mask(self, name: str, mask):
        self.raw(f"{name}.pgm", mask.to_pgm())
        self.files[f"{self.prefix}-{name}.rle.json"] = _dumps(mask.to_rle())


def _dumps(doc) -> bytes:
    return (json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n").encode()


# ---------------------------------------------------------------------------
# analyses
# ---------------------------------------------------------------------------


def _moments(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    n = a.get("max_order")
    exact = bool(a.get("exact", mu.exact)) and mu.exact
    sec = mu.moments.section(n, exact=exact)
    if out.fmt == "json":
        out.files[f"{out.prefix}-moments.json"] = _dumps(
            {"subcommand": "moments", "unit": "c_ij in mass * length^(i+j)", **section_to_json(sec)})
    else:
        out.text("moments.csv", section_to_csv(sec, "moments"))
    return {"measure": mu.name, "order": n, "exact": exact}


def _indices(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu1 = cfg.measure(a.get("mu1"), f"{a.where}.mu1")
    mu2 = cfg.measure(a.get("mu2"), f"{a.where}.mu2")
    n = a.get("max_order")
    exact = bool(a.get("exact", False)) and mu1.exact and mu2.exact
    seq = index_sequences(mu1, mu2, n, exact=exact)
    rows = [[k, l, b] for k, (l, b) in enumerate(zip(seq.lam, seq.beta))]
    out.table("indices", "indices", [("order", "1"), ("lambda_n", "ratio"), ("beta_n", "ratio")], rows)
    return {
        "mu1": mu1.name,
        "mu2": mu2.name,
        "exact": exact,
        "lambda": estimate_index(seq.lam, "lambda", cfg.thresholds).summary(),
        "beta": estimate_index(seq.beta, "beta", cfg.thresholds).summary(),
        "lambda_monotone": seq.lam_monotone,
        "beta_monotone": seq.beta_monotone,
    }


def _radius(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    n = a.get("max_order")
    rad = support_radius(mu, n, cfg.thresholds)
    hat = beta_hat_radius(mu, n, cfg.thresholds)
    rows = [[k, rad.values[k - 1], rad.extrapolated[k - 1], hat.values[k]] for k in rad.orders]
    out.table("radius", "radius",
              [("order", "1"), ("diag_root", "length"), ("extrapolated_radius", "length"),
               ("beta_hat_n", "length^2")], rows)
    return {"measure": mu.name, "support_radius": rad.summary(),
            "monotone": rad.monotone, "beta_hat": hat.summary()}


def _frame_pixels(a: Analysis, cfg: RunConfig) -> tuple[int, float]:
    return a.get("pixels", cfg.settings.pixels), a.get("margin", cfg.settings.margin)


def _pc_hull(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    from .support import default_frame

    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    pixels, margin = _frame_pixels(a, cfg)
    raster = support_mask(mu, default_frame(mu, pixels, margin))
    hull = pc_hull(raster)
    out.mask("support", raster)
    out.mask("pc-hull", hull)
    return {"measure": mu.name, "pixels": pixels, "support_pixels": int(raster.grid.sum()),
            "hull_pixels": int(hull.grid.sum()), "hull_area": hull.area, "box": list(hull.box)}


def _containment(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    from .support import default_frame

    mu1 = cfg.measure(a.get("mu1"), f"{a.where}.mu1")
    mu2 = cfg.measure(a.get("mu2"), f"{a.where}.mu2")
    pixels, margin = _frame_pixels(a, cfg)
    geometry2 = support_mask(mu2, default_frame(mu2, pixels, margin))
    rep = containment_verdict(mu1, mu2, a.get("max_order"), geometry2, thresholds=cfg.thresholds)
    rows = [[k, l, b] for k, (l, b) in enumerate(zip(rep.lam.values, rep.beta.values))]
    out.table("indices", "containment", [("order", "1"), ("lambda_n", "ratio"), ("beta_n", "ratio")], rows)
    return {"mu1": mu1.name, "mu2": mu2.name, **rep.summary()}


def _hull(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    from .support import default_frame

    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    pixels, margin = _frame_pixels(a, cfg)
    angles = a.get("angle_count", cfg.settings.angle_count)
    est = hull_estimate(mu, a.get("max_order"), angles, default_frame(mu, pixels, margin))
    if out.fmt == "json":
        rows = [[s, float(t), complex(p)] for s, b in zip(est.sizes, est.boundaries)
                for t, p in zip(b.angles, b.points)]
        out.table("boundaries", "hull", [("size", "1"), ("theta", "rad"), ("point", "z")], rows)
    else:
        out.text("boundaries.csv", est.to_csv("hull"))
    out.mask("hull", est.mask)
    last = est.boundaries[-1]
    return {"measure": mu.name, "sizes": [est.sizes[0], est.sizes[-1]],
            "max_modulus": last.max_modulus(), "hull_area": est.mask.area}


def _numrange(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    angles = a.get("angle_count", cfg.settings.angle_count)
    if "matrix" in a.params:
        rows = a.get("matrix")
        try:
            D = np.array([[complex(to_exact(x)) for x in r] for r in rows], dtype=complex)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{a.where}.matrix: {exc}") from exc
        source = "matrix"
    else:
        mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
        size = a.get("size", a.get("max_order"))
        if not isinstance(size, int) or size < 1:
            raise ConfigError(f"{a.where}.size: must be a positive integer")
        D = hessenberg_section(mu, size - 1).entries
        source = mu.name
    b = numerical_range_boundary(D, angles)
    if out.fmt == "json":
        out.table("boundary", "numrange", [("theta", "rad"), ("point", "z")],
                  [[float(t), complex(p)] for t, p in zip(b.angles, b.points)])
    else:
        out.text("boundary.csv", b.to_csv("numrange"))
    return {"source": source, "size": int(D.shape[0]), "max_modulus": b.max_modulus()}


def _christoffel(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    n = a.get("max_order")
    pts = a.get("points", ["0"])
    if not isinstance(pts, list) or not pts:
        raise ConfigError(f"{a.where}.points: must be a non-empty list")
    xis = [complex(to_exact(p)) for p in pts]
    seqs = [christoffel_sequence(mu, xi, n) for xi in xis]
    cols = [("order", "1")] + [(f"K_n({p})", "1/mass") for p in pts]
    out.table("christoffel", "christoffel", cols, [[k] + [s[k] for s in seqs] for k in range(n + 1)])
    return {"measure": mu.name, "points": [str(p) for p in pts],
            "last": [s[-1] for s in seqs]}


def _pushforward(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    n = a.get("max_order")
    try:
        phi = SimilarityMap(a.get("alpha", 1), a.get("beta", 0))
    except (ContractError, ValueError, TypeError) as exc:
        raise ConfigError(f"{a.where}: {exc}") from exc
    image = pushforward(mu, phi, label=f"{mu.name}@phi")
    exact = mu.exact
    via_matrix = pushforward_moments(mu.moments.section(n, exact=exact), phi.alpha, phi.beta)
    direct = image.moments.section(n, exact=exact)
    if exact:
        agree = via_matrix == direct
    else:
        agree = bool(np.allclose(_np(via_matrix), _np(direct), rtol=1e-12, atol=0))
    if out.fmt == "json":
        out.files[f"{out.prefix}-moments.json"] = _dumps(
            {"subcommand": "pushforward", "unit": "c_ij in mass * length^(i+j)",
             **section_to_json(via_matrix)})
    else:
        out.text("moments.csv", section_to_csv(via_matrix, "pushforward"))
    return {"measure": mu.name, "alpha": str(phi.alpha), "beta": str(phi.beta),
            "image": type(image).__name__, "closed_form_agrees": agree}


def _np(sec):
    from ._numeric import to_numpy

    return to_numpy(sec)


def _grid(a: Analysis, default) -> list:
    grid = a.get("grid", [list(p) for p in default])
    if not isinstance(grid, list) or not all(isinstance(p, list) and len(p) == 2 for p in grid):
        raise ConfigError(f"{a.where}.grid: must be a list of [center, radius] pairs")
    return grid


def _invariance(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    n = a.get("max_order")
    if "alpha" in a.params or "beta" in a.params:
        grid = [[a.get("beta", 0), a.get("alpha", 1)]]
    else:
        grid = _grid(a, DEFAULT_DENSITY_GRID)
    rows, worst = [], 0.0
    for z0, r in grid:
        try:
            phi = SimilarityMap(r, z0)
        except (ContractError, ValueError, TypeError) as exc:
            raise ConfigError(f"{a.where}: {exc}") from exc
        if not phi.is_positive_scaling:
            raise ConfigError(f"{a.where}: scale {r!r} must be a positive real number")
        rep = invariance_report(mu, phi, n)
        worst = max(worst, rep.max_relative_discrepancy)
        for k in range(n + 1):
            rows.append([str(phi.beta), str(phi.alpha), k, rep.lam_before[k], rep.lam_after[k],
                         rep.beta_before[k], rep.beta_after[k]])
    out.table("invariance", "invariance",
              [("center", "z"), ("radius", "length"), ("order", "1"), ("lambda_before", "ratio"),
               ("lambda_after", "ratio"), ("beta_before", "ratio"), ("beta_after", "ratio")], rows)
    return {"measure": mu.name, "grid_points": len(grid), "max_relative_discrepancy": worst}


def _density(a: Analysis, cfg: RunConfig, out: Outputs) -> dict:
    mu = cfg.measure(a.get("measure"), f"{a.where}.measure")
    grid = _grid(a, DEFAULT_DENSITY_GRID)
    try:
        res = completeness_necessary_sweep(mu, [tuple(p) for p in grid], a.get("max_order"),
                                           cfg.thresholds)
    except (ContractError, ValueError) as exc:
        raise ConfigError(f"{a.where}.grid: {exc}") from exc
    rows = []
    for p in res.points:
        if p.estimate is None:
            rows.append([str(p.center), str(p.radius), "error", "", p.error])
        else:
            rows.append([str(p.center), str(p.radius), p.estimate.status.value,
                         p.estimate.values[-1], ""])
    out.table("density", "density-test",
              [("center", "z"), ("radius", "length"), ("lambda_status", "-"),
               ("lambda_last", "ratio"), ("error", "-")], rows)
    return {
        "measure": mu.name,
        "verdict": res.verdict,
        "witnesses": [[str(p.center), str(p.radius)] for p in res.witnesses],
        "errors": sorted({p.error for p in res.points if p.error}),
    }


EXECUTORS: dict[str, Callable[[Analysis, RunConfig, Outputs], dict]] = {
    "moments": _moments,
    "indices": _indices,
    "radius": _radius,
    "pc-hull": _pc_hull,
    "containment": _containment,
    "hull": _hull,
    "numrange": _numrange,
    "christoffel": _christoffel,
    "pushforward": _pushforward,
    "invariance": _invariance,
    "density-test": _density,
}


def execute(a: Analysis, cfg: RunConfig, prefix: str, fmt: str) -> tuple[dict, dict[str, bytes]]:
    out = Outputs(prefix, fmt)
    try:
        summary = EXECUTORS[a.command](a, cfg, out)
    except ConfigError:
        raise
    except (MomentIndexError, ArithmeticError) as exc:
        names = {k: a.params[k] for k in ("measure", "mu1", "mu2") if k in a.params}
        where = ", ".join(f"{k}={v}" for k, v in names.items())
        raise NumericalFailure(f"{a.command} ({where}): {exc}") from exc
    summary = {"command": a.command, "where": a.where, "files": sorted(out.files), **summary}
    return summary, out.files


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentindex",
        description="Comparison indices and support localization from moment matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides run.out)")
        p.add_argument("--max-order", type=int, help="maximal section order N")
        p.add_argument("--format", choices=("csv", "json"), help="table format")

    common(sub.add_parser("run", help="run every [[analysis]] entry of the config"))
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the '{name}' analysis")
        common(p)
        if name in ("indices", "containment"):
            p.add_argument("--mu1", help="first measure name")
            p.add_argument("--mu2", help="second measure name")
        else:
            p.add_argument("--measure", help="measure name")
    return parser


def _selected(args, cfg: RunConfig) -> list[Analysis]:
    if args.command == "run":
        if not cfg.analyses:
            raise ConfigError("analysis: the config lists no [[analysis]] entries")
        return list(cfg.analyses)
    adhoc = {k: getattr(args, k) for k in ("measure", "mu1", "mu2") if getattr(args, k, None)}
    if adhoc:
        entry = {"command": args.command, **adhoc}
        return [validate_analysis(entry, cfg.measures, cfg.settings, f"command line ({args.command})")]
    chosen = [a for a in cfg.analyses if a.command == args.command]
    if not chosen:
        flag = "--mu1/--mu2" if args.command in ("indices", "containment") else "--measure"
        raise ConfigError(f"analysis: no entry with command {args.command!r} and no {flag} given")
    return chosen


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        settings = cfg.settings
        if args.format:
            settings = replace(settings, format=args.format)
        if args.max_order is not None:
            if not 1 <= args.max_order <= settings.hard_cap:
                raise ConfigError(f"--max-order: must lie in [1, {settings.hard_cap}]")
            settings = replace(settings, max_order=args.max_order)
        cfg = replace(cfg, settings=settings)
        analyses = _selected(args, cfg)
        if args.max_order is not None:
            analyses = [replace(a, params={**a.params, "max_order": args.max_order}) for a in analyses]
        set_precision(settings.precision_digits)
        out_dir = Path(args.out or settings.out or "momentindex-out")
        results, files = [], {}
        for i, a in enumerate(analyses):
            summary, produced = execute(a, cfg, f"{i:02d}-{a.command}", settings.format)
            results.append(summary)
            files.update(produced)
    except ConfigError as exc:
        print(f"momentindex: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"momentindex: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    summary = {
        "software": "momentindex",
        "version": __version__,
        "config_sha256": cfg.source_hash,
        "defaults": DEFAULTS,
        "settings": asdict(cfg.settings),
        "thresholds": cfg.thresholds.as_dict(),
        "analyses": results,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(files):
            (out_dir / name).write_bytes(files[name])
        (out_dir / "summary.json").write_bytes(_dumps(summary))
    except OSError as exc:
        print(f"momentindex: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for r in results:
        print(f"{r['command']}: {', '.join(r['files'])}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

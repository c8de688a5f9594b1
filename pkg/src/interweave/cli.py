"""Command-line entry point: sweeps, region grids, ROC overlays and simulator runs.

Exit codes: 0 success, 1 configuration error, 2 invariant breach,
3 statistical check failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from typing import Callable, Optional, Sequence

from . import __version__, svg
from .admissibility import (full_admissible_point, region_grid, strong_pfa_bound,
                            weak_boundary)
from .channel import capacity_constants
from .config import ConfigDocument, ConfigError, load
from .detectors import admissible_arc, logit_grid, roc_curve
from .ratemodel import eta_ideal_or_inf, ideal_rate_region, nonideal_rate_region
from .simulator import SimulationConfig, check_interference, compare_with_analytic, run
from .specfun import DomainError
from .tables import OutputTable, dump_json

EXIT_OK, EXIT_CONFIG, EXIT_BREACH, EXIT_STAT = 0, 1, 2, 3
Z_LIMIT = 4.0


class InvariantBreach(RuntimeError):
    pass


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered map; results come back in input order whatever finishes first."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _prepare_out(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path!r}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path!r} is not writable")
    return path


def provenance(cfg: ConfigDocument, command: str) -> dict:
    return {"tool": "interweave", "version": __version__, "command": command,
            "config_sha256": cfg.sha256, "seed": cfg.seed}


def _consts(cfg: ConfigDocument, p: Optional[float] = None, rs_db: Optional[float] = None):
    params = cfg.scenario.params(p, rs_db)
    return params, capacity_constants(params, cfg.fading)


def cmd_eta_sweep(cfg: ConfigDocument, out: str, workers: int = 1, emit_svg: bool = False) -> int:
    p_grid = cfg.axis("p")
    if p_grid is None:
        raise ConfigError("missing field 'sweep.p'")
    rs_grid = cfg.axis("rs_db") or [None]
    # the scenario needs a p to resolve; the sweep value replaces it
    consts_by_rs = [_consts(cfg, p_grid[0], rs) for rs in rs_grid]

    def one(job):
        (params, consts), p = job
        return eta_ideal_or_inf(consts, p)

    jobs = [(pc, p) for pc in consts_by_rs for p in p_grid]
    results = _pool_map(one, jobs, workers)

    table = OutputTable(["p", "RS_db", "eta"], provenance=provenance(cfg, "eta-sweep"))
    series = []
    k = 0
    for params, _ in consts_by_rs:
        etas = []
        for p in p_grid:
            eta, saturated = results[k]
            k += 1
            if saturated:
                _warn(f"p = 1 at RS = {params.rs_db:g} dB: eta is unbounded, written as inf")
            table.add(p, params.rs_db, eta)
            etas.append(eta)
        finite = [e for e in etas if math.isfinite(e)]
        if any(b < a for a, b in zip(finite, finite[1:])):
            raise InvariantBreach(f"eta not monotone in p at RS = {params.rs_db:g} dB")
        series.append((f"RS = {params.rs_db:g} dB", p_grid, etas))

    table.write(os.path.join(out, "eta_sweep.csv"))
    if emit_svg:
        svg.write(os.path.join(out, "eta_sweep.svg"),
                  svg.line_plot(series, "spectral efficiency vs occupancy", "p", "eta"))
    return EXIT_OK


def cmd_rate_region(cfg: ConfigDocument, out: str, workers: int = 1, emit_svg: bool = False) -> int:
    if not cfg.cases:
        raise ConfigError("missing field 'cases'")
    params, consts = _consts(cfg)
    p = params.p
    ideal = ideal_rate_region(consts, p)
    polys = _pool_map(lambda err: nonideal_rate_region(consts, p, err), cfg.cases, workers)

    table = OutputTable(["case", "p_fa", "p_md", "kind", "vertex", "R_c", "R_p", "inside_ideal"],
                        provenance=provenance(cfg, "rate-region"))
    for i, (rc, rp) in enumerate(ideal.vertices):
        table.add("ideal", None, None, ideal.kind.value, i, rc, rp, None)
    breaches = []
    for n, (err, poly) in enumerate(zip(cfg.cases, polys)):
        for i, (rc, rp) in enumerate(poly.vertices):
            inside = ideal.contains((rc, rp))
            if not inside:
                breaches.append((n, i))
            table.add(n, err.p_fa, err.p_md, poly.kind.value, i, rc, rp, inside)

    table.write(os.path.join(out, "rate_region.csv"))
    if emit_svg:
        series = [("ideal", [v[0] for v in ideal.vertices], [v[1] for v in ideal.vertices])]
        for err, poly in zip(cfg.cases, polys):
            series.append((f"p_fa={err.p_fa:g}, p_md={err.p_md:g}",
                           [v[0] for v in poly.vertices], [v[1] for v in poly.vertices]))
        svg.write(os.path.join(out, "rate_region.svg"),
                  svg.line_plot(series, f"rate regions at p = {p:g}", "R_c", "R_p", closed=True))
    if breaches:
        raise InvariantBreach(
            f"{len(breaches)} non-ideal vertices lie outside the ideal region "
            f"(first: case {breaches[0][0]}, vertex {breaches[0][1]}); see inside_ideal column")
    return EXIT_OK


def cmd_admissible_grid(cfg: ConfigDocument, out: str, workers: int = 1,
                        emit_svg: bool = False) -> int:
    p_list = cfg.axis("p") or ([cfg.scenario.p] if cfg.scenario.p is not None else None)
    if p_list is None:
        raise ConfigError("missing field 'sweep.p' (or 'scenario.p')")
    rs_list = cfg.axis("rs_db") or [None]
    gamma_list = cfg.axis("gamma") or [cfg.gamma]
    jobs = []
    for rs in rs_list:
        for p in p_list:
            params, consts = _consts(cfg, p, rs)
            if p == 0.0:
                _warn(f"p = 0 at RS = {params.rs_db:g} dB: the CR only transmits in collision "
                      "slots, so the weak region is the p_fa = 0 edge unless A_p - B_p - B_c < 0")
            jobs.extend((params, consts, g) for g in gamma_list)
    grids = _pool_map(lambda job: region_grid(job[1], job[0].p, job[2], cfg.grid_resolution),
                      jobs, workers)

    prov = provenance(cfg, "admissible-grid")
    table = OutputTable(["p", "RS_db", "gamma", "p_fa", "p_md", "eta_hat", "weak", "strong_gamma"],
                        provenance=prov)
    summary = OutputTable(["p", "RS_db", "gamma", "weak_fraction", "strong_gamma_fraction",
                           "strong_pfa_bound", "full_admissible_point"], provenance=prov)
    for k, ((params, consts, gamma), grid) in enumerate(zip(jobs, grids)):
        for pfa, pmd, eta, weak, strong in grid.rows():
            table.add(params.p, params.rs_db, gamma, pfa, pmd, eta, weak, strong)
        summary.add(params.p, params.rs_db, gamma, grid.weak_fraction,
                    float(grid.strong_gamma.mean()), strong_pfa_bound(consts, gamma),
                    full_admissible_point(consts))
        if emit_svg:
            svg.write(os.path.join(out, f"admissible_grid_{k}.svg"), svg.heatmap(
                grid.weak.astype(float).tolist(), list(grid.p_fa), list(grid.p_md),
                f"weakly admissible, p = {params.p:g}, RS = {params.rs_db:g} dB", "p_fa", "p_md"))
    table.write(os.path.join(out, "admissible_grid.csv"))
    summary.write(os.path.join(out, "admissible_summary.csv"))
    return EXIT_OK


def cmd_detector_roc(cfg: ConfigDocument, out: str, workers: int = 1,
                     emit_svg: bool = False) -> int:
    if not cfg.detectors:
        raise ConfigError("missing field 'detectors'")
    params, consts = _consts(cfg)
    grid = logit_grid(cfg.roc_points)
    curves = _pool_map(
        lambda blk: admissible_arc(roc_curve(blk.params(), grid), consts, params.p),
        cfg.detectors, workers)

    prov = provenance(cfg, "detector-roc")
    table = OutputTable(["detector", "p_fa", "p_md", "admissible"], provenance=prov)
    summary = OutputTable(["detector", "admissible_fraction"], provenance=prov)
    for blk, curve in zip(cfg.detectors, curves):
        for pfa, pmd, ok in zip(curve.p_fa, curve.p_md, curve.admissible_mask):
            table.add(blk.label, float(pfa), float(pmd), bool(ok))
        summary.add(blk.label, curve.admissible_fraction)
    table.write(os.path.join(out, "detector_roc.csv"))
    summary.write(os.path.join(out, "detector_summary.csv"))
    if emit_svg:
        series = [(blk.label, list(c.p_fa), list(c.p_md)) for blk, c in zip(cfg.detectors, curves)]
        series.append(("weak boundary", list(grid),
                       [weak_boundary(consts, params.p, float(x)) for x in grid]))
        svg.write(os.path.join(out, "detector_roc.svg"),
                  svg.line_plot(series, "ROC and admissible boundary", "p_fa", "p_md"))
    return EXIT_OK


def cmd_simulate(cfg: ConfigDocument, out: str, workers: int = 1, emit_svg: bool = False) -> int:
    if cfg.simulation is None:
        raise ConfigError("missing field 'simulation'")
    params, _ = _consts(cfg)
    sim = SimulationConfig(params, cfg.simulation.err(), cfg.fading,
                           cfg.simulation.n_slots, cfg.seed)
    result = run(sim, workers=workers)
    rows = compare_with_analytic(result)
    interf = check_interference(result, Z_LIMIT)

    prov = provenance(cfg, "simulate")
    record = {"provenance": prov, "result": result.to_dict(), "comparison": rows,
              "interference_check": asdict(interf)}
    with open(os.path.join(out, "simulate.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_json(record))
    table = OutputTable(["quantity", "empirical", "stderr", "analytic", "z"], provenance=prov)
    for r in rows:
        table.add(r["quantity"], r["empirical"], r["stderr"], r["analytic"], r["z"])
    table.write(os.path.join(out, "simulate_comparison.csv"))

    failed = [r["quantity"] for r in rows if not abs(r["z"]) <= Z_LIMIT]
    if not interf.skipped and not interf.passed:
        failed.append("interference_power")
    if failed:
        print(f"statistical check failed (|z| > {Z_LIMIT:g}): {', '.join(failed)}",
              file=sys.stderr)
        return EXIT_STAT
    return EXIT_OK


COMMANDS = {
    "eta-sweep": (cmd_eta_sweep, "spectral efficiency over an occupancy x relative-power grid"),
    "rate-region": (cmd_rate_region, "ideal and imperfect-sensing rate-region polygons"),
    "admissible-grid": (cmd_admissible_grid, "weak/strong admissibility over the (p_fa, p_md) square"),
    "detector-roc": (cmd_detector_roc, "detector ROC curves with admissibility masks"),
    "simulate": (cmd_simulate, "slot-level Monte Carlo checked against the analytic model"),
}


def _add_common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file")
    parser.add_argument("--out", default=default, help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, default=default, help="RNG seed (overrides config)")
    parser.add_argument("--svg", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="also write SVG plots")
    parser.add_argument("--workers", type=int, default=default,
                        help="worker threads for sweep points (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interweave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        _add_common(sub.add_parser(name, help=help_text), suppress=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        if args.config is None:
            raise ConfigError("--config is required")
        cfg = load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out = _prepare_out(args.out or cfg.output_dir or ".")
        workers = args.workers or 1
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return fn(cfg, out, workers, args.svg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())

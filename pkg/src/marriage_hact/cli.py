"""Command line: ``marriage-hact {solve,path,calibrate,bench}``.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 benchmark
timeout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from marriage_hact.config import RunConfig, load_config, provenance_log
from marriage_hact.errors import ConfigError, ModelError, SolverFailure
from marriage_hact.experiments import (
    METHODS,
    calibrate_ou,
    run_benchmark,
    simulate_path,
    solve_year,
)
from marriage_hact.plotting import plot_benchmark, plot_flow_rates, plot_share_and_gap

EXIT_CONFIG, EXIT_SOLVER, EXIT_TIMEOUT = 2, 3, 4

EQUILIBRIUM_COLUMNS = [
    "year",
    "method",
    "married_share",
    "prob_marriage",
    "prob_divorce",
    "utility_gap",
    "b_star",
    "n_grid",
    "solve_ms",
]
BENCH_COLUMNS = ["method", "n", "median_time_s", "peak_bytes", "repeats"]
TRACE_COLUMNS = ["iteration", "loss"]
SCHEMA_VERSION = "v1"
RATE_NOTE = (
    "prob_marriage and prob_divorce are annual probabilities; continuous-time "
    "hazards r are converted with 1 - exp(-r)"
)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_csv(path: Path, kind: str, columns, rows, notes=()):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema: {kind}/{SCHEMA_VERSION}\n")
        for note in notes:
            fh.write(f"# {note}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _equilibrium_record(row, timing=True):
    return [
        row.year,
        row.method,
        row.married_share,
        row.prob_marriage,
        row.prob_divorce,
        row.utility_gap,
        row.b_star,
        row.n_grid,
        row.solve_ms if timing else None,
    ]


def _write_provenance(config: RunConfig):
    path = config.output_dir / "provenance.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(provenance_log(config), encoding="utf-8")


def cmd_solve(config: RunConfig, year: int, method: str, timing: bool = True) -> Path:
    row, _ = solve_year(config.params, config.trend, year, method, config.grid, config.solver)
    out = config.output_dir / f"solve_{year}_{method}.csv"
    _write_csv(out, "equilibrium", EQUILIBRIUM_COLUMNS, [_equilibrium_record(row, timing)], [RATE_NOTE])
    print(f"{method.upper()} equilibrium, {year} (N = {row.n_grid})")
    print(f"  married share      {row.married_share:.4f}")
    print(f"  prob. marriage     {row.prob_marriage:.4f}")
    print(f"  prob. divorce      {row.prob_divorce:.4f}")
    print(f"  utility gap        {row.utility_gap:.4f}")
    if row.b_star is not None:
        print(f"  threshold b*       {row.b_star:.4f}")
    print(f"  solve time         {row.solve_ms:.1f} ms")
    print(f"wrote {out}")
    return out


def cmd_path(config: RunConfig, method: str, timing: bool = True):
    methods = METHODS if method == "both" else (method,)
    rows = []
    for m in methods:
        rows.extend(simulate_path(config.params, config.trend, m, config.grid, config.solver))
    rows.sort(key=lambda r: (r.year, r.method))
    out = config.output_dir / "path.csv"
    _write_csv(out, "equilibrium", EQUILIBRIUM_COLUMNS, [_equilibrium_record(r, timing) for r in rows], [RATE_NOTE])
    figs = [
        plot_share_and_gap(rows, config.output_dir / "path_share_gap.svg"),
        plot_flow_rates(rows, config.output_dir / "path_rates.svg"),
    ]
    first, last = config.trend.first_year, config.trend.last_year
    for m in methods:
        series = {r.year: r for r in rows if r.method == m}
        print(
            f"{m.upper()}: married share {series[first].married_share:.3f} ({first}) -> "
            f"{series[last].married_share:.3f} ({last})"
        )
    print(f"wrote {out}, " + ", ".join(str(f) for f in figs))
    return out, figs


def cmd_calibrate(config: RunConfig):
    cal = config.calibration
    result = calibrate_ou(
        cal.targets,
        cal.start,
        config.params,
        config.trend,
        grid=config.grid,
        solver=config.solver,
        tol=cal.tol,
        max_iter=cal.max_iter,
    )
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    estimate = {"ou": {"mu_m": result.ou.mu_m, "sigma_m2": result.ou.sigma_m2, "eta": result.ou.eta}}
    est_path = out_dir / "calibrated_ou.json"
    est_path.write_text(json.dumps(estimate, indent=2) + "\n", encoding="utf-8")
    trace_path = _write_csv(
        out_dir / "calibration_trace.csv",
        "calibration-trace",
        TRACE_COLUMNS,
        list(enumerate(result.trace)),
        ["best loss after each simplex iteration; row 0 is the start point"],
    )
    years = cal.targets.years
    summary = {
        "start": {"mu_m": cal.start.mu_m, "sigma_m2": cal.start.sigma_m2, "eta": cal.start.eta},
        "estimate": estimate["ou"],
        "start_loss": result.start_loss,
        "loss": result.loss,
        "converged": result.converged,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "moments": {
            str(y): dict(
                zip(("married_share", "prob_divorce", "prob_marriage"), result.moments[3 * i : 3 * i + 3].tolist())
            )
            for i, y in enumerate(years)
        },
    }
    (out_dir / "calibration_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    ou = result.ou
    print(f"estimated OU: mu_m={ou.mu_m:.4f} sigma_m2={ou.sigma_m2:.4f} eta={ou.eta:.4f}")
    print(f"loss {result.start_loss:.4f} -> {result.loss:.4f} in {result.iterations} iterations")
    print(f"wrote {est_path}, {trace_path}")
    return est_path, trace_path


def cmd_bench(config: RunConfig, methods=METHODS):
    b = config.bench

    def progress(cell):
        status = "timeout" if cell.timed_out else f"{cell.median_time_s:.4g} s, {cell.peak_bytes} B"
        print(f"  {cell.method} N={cell.n}: {status}", flush=True)

    cells, slopes = run_benchmark(
        b.n_values, methods, b.repeats, config.params, config.trend, b.timeout_s, progress
    )
    rows = [
        [c.method, c.n, None if c.timed_out else c.median_time_s, c.peak_bytes or None, c.repeats]
        for c in cells
    ]
    for method, sl in slopes.items():
        rows.append([method, "slope", sl.time, sl.memory, None])
    out = _write_csv(
        config.output_dir / "bench.csv",
        "bench",
        BENCH_COLUMNS,
        rows,
        ["rows with n=slope hold log-log slopes: time in median_time_s, memory in peak_bytes"],
    )
    fig = plot_benchmark(cells, slopes, config.output_dir / "bench.svg")
    for method, sl in slopes.items():
        print(f"{method.upper()} slopes: time {sl.time:.2f}, memory {sl.memory:.2f}")
    print(f"wrote {out}, {fig}")
    return out, fig, any(c.timed_out for c in cells)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marriage-hact", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="JSON configuration file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--grid-n", type=int, help="number of grid points")
    parser.add_argument("--seed", type=int, help="seed for the Monte Carlo oracles")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one stationary equilibrium")
    p.add_argument("--year", type=int, default=1950)
    p.add_argument("--method", choices=METHODS, default="ct")
    p.add_argument("--no-timing", action="store_true", help="leave solve_ms empty")

    p = sub.add_parser("path", help="sequence of stationary equilibria over the trend path")
    p.add_argument("--method", choices=METHODS + ("both",), default="both")
    p.add_argument("--no-timing", action="store_true", help="leave solve_ms empty")

    sub.add_parser("calibrate", help="re-estimate the OU parameters")

    p = sub.add_parser("bench", help="time/memory scaling benchmark")
    p.add_argument("--method", choices=METHODS + ("both",), default="both")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    if args.grid_n is not None:
        overrides["grid.n"] = args.grid_n
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_provenance(config)

    try:
        if args.command == "solve":
            cmd_solve(config, args.year, args.method, timing=not args.no_timing)
        elif args.command == "path":
            cmd_path(config, args.method, timing=not args.no_timing)
        elif args.command == "calibrate":
            cmd_calibrate(config)
        elif args.command == "bench":
            methods = METHODS if args.method == "both" else (args.method,)
            _, _, timed_out = cmd_bench(config, methods)
            if timed_out:
                print("TimeoutExceeded: at least one benchmark cell timed out", file=sys.stderr)
                return EXIT_TIMEOUT
    except SolverFailure as exc:
        name = type(exc.cause).__name__ if exc.cause is not None else type(exc).__name__
        print(f"{name}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ModelError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return 0


if __name__ == "__main__":
    sys.exit(main())

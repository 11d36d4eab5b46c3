"""Acceptance suite. Each test prints one PASS/FAIL line and then asserts it."""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from marriage_hact.experiments import (
    CalibrationTargets,
    calibrate_ou,
    calibration_loss,
    model_moments,
    run_benchmark,
    simulate_path,
    solve_year,
)
from marriage_hact.params import ESTIMATED_OU, NAIVE_OU, TrendPath

PATH = TrendPath()
TESTS = Path(__file__).parent

# (married share, prob divorce, prob marriage) by method and year
TABLE = {
    "dt": {1950: (0.794, 0.011, 0.127), 2000: (0.673, 0.025, 0.095)},
    "ct": {1950: (0.807, 0.012, 0.131), 2000: (0.677, 0.026, 0.096)},
}
RUNTIME_S = {"dt": 30.0, "ct": 5.0}

PROPERTY_TESTS = [
    "test_processes.py::test_generator_conservation_and_signs",
    "test_processes.py::test_stationary_kernel_is_gaussian",
    "test_continuous.py::test_variational_inequality",
    "test_continuous.py::test_complementarity_on_unclamped_value",
    "test_continuous.py::test_mass_conservation",
    "test_discrete.py::test_stationary_fixed_point_residual",
    "test_discrete.py::test_stationary_modes_agree",
    "test_discrete.py::test_agent_simulation_matches_stationary_singles",
    "test_continuous.py::test_simulation_matches_singles_share",
    "test_numerics.py::test_tridiag_agrees_with_dense_solve",
    "test_continuous.py::test_flux_cross_check",
]


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n{label}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def table_check(params, method):
    lines, ok = [], True
    for year, (share, divorce, marriage) in TABLE[method].items():
        solve_year(params, PATH, year, method)  # compile and warm caches outside the clock
        t0 = time.perf_counter()
        row, _ = solve_year(params, PATH, year, method)
        elapsed = time.perf_counter() - t0
        year_ok = (
            abs(row.married_share - share) <= 0.02
            and abs(row.prob_divorce - divorce) <= 0.005
            and abs(row.prob_marriage - marriage) <= 0.005
            and elapsed < RUNTIME_S[method]
        )
        ok &= year_ok
        lines.append(
            f"{year}: share {row.married_share:.3f} (ref {share}), divorce {row.prob_divorce:.4f} "
            f"(ref {divorce}), marriage {row.prob_marriage:.4f} (ref {marriage}), {elapsed:.2f}s"
        )
    return ok, "; ".join(lines)


def test_ac1_discrete_time_table(params, capsys):
    report(capsys, "AC1 DT table replication", *table_check(params, "dt"))


def test_ac2_continuous_time_table(params, capsys):
    report(capsys, "AC2 CT table replication", *table_check(params, "ct"))


def test_ac3_path_shape(params, capsys):
    paths = {m: simulate_path(params, PATH, m) for m in ("ct", "dt")}
    ok, notes = True, []
    for method, rows in paths.items():
        share = np.array([r.married_share for r in rows])
        method_ok = (
            bool(np.all(np.diff(share) < 0))
            and abs(share[0] - 0.80) <= 0.02
            and share[-1] < 0.72
            and rows[-1].prob_divorce > rows[0].prob_divorce
            and rows[-1].prob_marriage < rows[0].prob_marriage
        )
        ok &= method_ok
        notes.append(f"{method}: {share[0]:.3f} -> {share[-1]:.3f}")
    gap = max(abs(c.married_share - d.married_share) for c, d in zip(paths["ct"], paths["dt"]))
    ok &= gap <= 0.03
    report(capsys, "AC3 path shape", ok, f"{', '.join(notes)}, max CT-DT gap {gap:.4f}")


def test_ac4_complexity_slopes(params, capsys):
    t0 = time.perf_counter()
    _, slopes = run_benchmark([400, 800, 1600, 3200, 6400], ("ct", "dt"), repeats=5, params=params)
    wall = time.perf_counter() - t0
    ct, dt = slopes.get("ct"), slopes.get("dt")
    ok = (
        ct is not None
        and dt is not None
        and 0.7 <= ct.time <= 1.3
        and 1.6 <= dt.time <= 2.4
        and 0.8 <= ct.memory <= 1.2
        and 1.8 <= dt.memory <= 2.2
        and wall < 600
    )
    detail = (
        f"CT time {ct.time:.2f} mem {ct.memory:.2f}; DT time {dt.time:.2f} mem {dt.memory:.2f}; wall {wall:.0f}s"
        if ct and dt
        else f"missing slopes: {sorted(slopes)}"
    )
    report(capsys, "AC4 complexity slopes", ok, detail)


def test_ac5_continuous_monitoring(params, capsys):
    naive, _ = solve_year(params.with_ou(NAIVE_OU), PATH, 1950, "ct")
    estimated, _ = solve_year(params.with_ou(ESTIMATED_OU), PATH, 1950, "ct")
    ok = naive.prob_divorce > estimated.prob_divorce
    detail = f"1950 divorce naive {naive.prob_divorce:.4f} vs estimated {estimated.prob_divorce:.4f}"
    report(capsys, "AC5 continuous monitoring", ok, detail)


def test_ac6_property_suites(capsys):
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, cwd=TESTS, capture_output=True, text=True)
    wall = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and wall < 60
    report(capsys, "AC6 property suites", ok, f"{summary} ({wall:.1f}s wall)")


def test_ac7_calibration_recovery(params, capsys):
    targets = CalibrationTargets()
    result = calibrate_ou(targets, NAIVE_OU, params)
    loss_at_estimate = calibration_loss(model_moments(params, ESTIMATED_OU, PATH, targets.years), targets)
    got = np.array([result.ou.mu_m, result.ou.sigma_m2, result.ou.eta])
    ref = np.array([ESTIMATED_OU.mu_m, ESTIMATED_OU.sigma_m2, ESTIMATED_OU.eta])
    ok = result.loss <= loss_at_estimate and bool(np.all(np.abs(got / ref - 1) <= 0.15))
    detail = (
        f"loss {result.loss:.4f} vs {loss_at_estimate:.4f} at estimate; "
        f"recovered ({got[0]:.3f}, {got[1]:.3f}, {got[2]:.3f}) vs ({ref[0]}, {ref[1]}, {ref[2]})"
    )
    report(capsys, "AC7 calibration recovery", ok, detail)

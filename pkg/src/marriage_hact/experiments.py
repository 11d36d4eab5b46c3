"""Quantitative exercises built on the two solvers.

* a 1950-2020 sequence of stationary equilibria under trending wages and
  home-goods prices;
* minimum-distance re-estimation of the OU block against six vital-statistics
  moments;
* a wall-time / memory scaling benchmark of both solvers.
"""

from __future__ import annotations

import logging
import math
import statistics
import time
import tracemalloc
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from marriage_hact.continuous import CT_N_STD, DAMPING, HJB_TOL, PSEUDO_STEP, solve_ct
from marriage_hact.discrete import DT_N_STD, VFI_MAX_ITER, VFI_TOL, solve_dt
from marriage_hact.errors import InvalidInput, InvalidParameter, ModelError, SolverFailure
from marriage_hact.household import indirect_utility
from marriage_hact.numerics import loglog_slope, minimize_simplex
from marriage_hact.params import ModelParams, OuProcess, TrendPath

log = logging.getLogger(__name__)

METHODS = ("ct", "dt")


def prices_at(path: TrendPath, year: int):
    """Wage and home-goods price in ``year``: returns ``(w, p)``."""
    if year < path.first_year:
        raise InvalidInput(f"year {year} precedes the path start {path.first_year}")
    t = year - path.first_year
    if path.form == "geometric":
        return path.w_1950 * (1.0 + path.dw) ** t, path.p_1950 * (1.0 + path.dp) ** (-t)
    w = path.w_1950 * (1.0 + path.dw * t)
    p = path.p_1950 * (1.0 - path.dp * t)
    if p <= 0.0:
        raise InvalidParameter(f"linear price trend turns nonpositive in {year}")
    return w, p


@dataclass(frozen=True)
class GridSettings:
    n: int = 501
    n_std: float = CT_N_STD
    dt_n_std: float = DT_N_STD


@dataclass(frozen=True)
class SolverSettings:
    tol: float = HJB_TOL
    max_iter: int = VFI_MAX_ITER
    pseudo_step: float = PSEUDO_STEP
    damping: float = DAMPING
    dt_tol: float = VFI_TOL


@dataclass
class EquilibriumRow:
    year: int
    method: str
    married_share: float
    prob_marriage: float
    prob_divorce: float
    utility_gap: float
    solve_ms: float
    n_grid: int
    b_star: float | None = None


def solve_method(
    params: ModelParams,
    method: str,
    p: float,
    w: float,
    grid: GridSettings = GridSettings(),
    solver: SolverSettings = SolverSettings(),
    v1: float | None = None,
    v2: float | None = None,
    stationary_mode: str = "closed_form",
):
    if method == "ct":
        return solve_ct(
            params, p, w, n=grid.n, n_std=grid.n_std, tol=solver.tol,
            pseudo_step=solver.pseudo_step, damping=solver.damping,
            max_iter=min(solver.max_iter, 100_000), v1=v1, v2=v2,
        )
    if method == "dt":
        return solve_dt(
            params, p, w, n=grid.n, n_std=grid.dt_n_std, tol=solver.dt_tol,
            max_iter=solver.max_iter, stationary_mode=stationary_mode, v1=v1, v2=v2,
        )
    raise InvalidInput(f"unknown method {method!r}; expected one of {METHODS}")


def solve_year(
    params: ModelParams,
    path: TrendPath,
    year: int,
    method: str,
    grid: GridSettings = GridSettings(),
    solver: SolverSettings = SolverSettings(),
):
    """One year's stationary equilibrium. Returns ``(row, solution)``."""
    if method not in METHODS:
        raise InvalidInput(f"unknown method {method!r}; expected one of {METHODS}")
    w, p = prices_at(path, year)
    try:
        v1 = indirect_utility(params.prefs, params.tech, p, w, 1)
        v2 = indirect_utility(params.prefs, params.tech, p, w, 2)
        t0 = time.perf_counter()
        sol = solve_method(params, method, p, w, grid, solver, v1=v1, v2=v2)
        elapsed = time.perf_counter() - t0
    except ModelError as exc:
        raise SolverFailure(f"{type(exc).__name__} in {year} ({method}): {exc}", year, exc) from exc
    row = EquilibriumRow(
        year=year,
        method=method,
        married_share=sol.married_share,
        prob_marriage=sol.prob_marriage,
        prob_divorce=sol.prob_divorce,
        utility_gap=v2 - v1,
        solve_ms=1e3 * elapsed,
        n_grid=grid.n,
        b_star=sol.b_star if method == "ct" else None,
    )
    return row, sol


def _row_job(args):
    return solve_year(*args)[0]


def simulate_path(
    params: ModelParams,
    path: TrendPath,
    method: str,
    grid: GridSettings = GridSettings(),
    solver: SolverSettings = SolverSettings(),
    parallel: bool = False,
) -> list[EquilibriumRow]:
    """Solve an independent stationary equilibrium for every year of ``path``."""
    jobs = [(params, path, year, method, grid, solver) for year in path.years]
    if parallel:
        with ProcessPoolExecutor() as pool:
            return list(pool.map(_row_job, jobs))
    return [_row_job(job) for job in jobs]


# calibration ---------------------------------------------------------------

MOMENT_NAMES = ("married_share", "prob_divorce", "prob_marriage")


@dataclass(frozen=True)
class CalibrationTargets:
    """Fraction married, divorce and marriage probabilities, keyed by year."""

    values: dict = field(
        default_factory=lambda: {1950: (0.816, 0.011, 0.211), 2000: (0.625, 0.023, 0.082)}
    )

    def __post_init__(self):
        for year, moments in self.values.items():
            if len(moments) != 3 or min(moments) <= 0:
                raise InvalidParameter(f"targets for {year} must be three positive numbers")

    @property
    def vector(self) -> np.ndarray:
        return np.array([x for year in sorted(self.values) for x in self.values[year]])

    @property
    def years(self) -> list[int]:
        return sorted(self.values)


@dataclass
class CalibrationResult:
    ou: OuProcess
    loss: float
    start_loss: float
    moments: np.ndarray
    converged: bool
    iterations: int
    evaluations: int
    trace: list


PENALTY = 1e6


def model_moments(
    params: ModelParams,
    ou: OuProcess,
    path: TrendPath,
    years,
    grid: GridSettings = GridSettings(),
    solver: SolverSettings = SolverSettings(),
) -> np.ndarray:
    trial = params.with_ou(ou)
    out = []
    for year in years:
        row, _ = solve_year(trial, path, year, "ct", grid, solver)
        out.extend([row.married_share, row.prob_divorce, row.prob_marriage])
    return np.array(out)


def calibration_loss(moments, targets: CalibrationTargets, weights=None) -> float:
    target = targets.vector
    weights = np.ones_like(target) if weights is None else np.asarray(weights, dtype=float)
    return float(weights @ ((moments - target) / target) ** 2)


def calibrate_ou(
    targets: CalibrationTargets,
    start: OuProcess,
    params: ModelParams,
    path: TrendPath = TrendPath(),
    weights=None,
    grid: GridSettings = GridSettings(),
    solver: SolverSettings = SolverSettings(),
    tol: float = 1e-5,
    max_iter: int = 2000,
    step: float = 0.05,
) -> CalibrationResult:
    """Minimum-distance estimate of (mu_m, sigma_m2, eta) for the CT model.

    Loss is the weighted sum of squared relative deviations from ``targets``;
    each evaluation solves the CT equilibrium in every target year. Points
    where the solver fails are penalized rather than aborting the search.
    """
    years = targets.years
    # the parameter scales differ; search in units of the start point
    x0 = np.array([start.mu_m, start.sigma_m2, start.eta])
    unit = np.where(np.abs(x0) > 0, np.abs(x0), 1.0)

    def objective(x):
        mu_m, sigma_m2, eta = x * unit
        if sigma_m2 <= 0 or eta <= 0:
            return PENALTY
        try:
            ou = OuProcess(mu_m=mu_m, sigma_m2=sigma_m2, eta=eta)
            moments = model_moments(params, ou, path, years, grid, solver)
        except (ModelError, FloatingPointError) as exc:
            log.debug("calibration point %s failed: %s", x * unit, exc)
            return PENALTY
        loss = calibration_loss(moments, targets, weights)
        return loss if math.isfinite(loss) else PENALTY

    res = minimize_simplex(objective, x0 / unit, np.full(3, step), tol=tol, max_iter=max_iter)
    mu_m, sigma_m2, eta = res.x * unit
    ou = OuProcess(mu_m=float(mu_m), sigma_m2=float(sigma_m2), eta=float(eta))
    try:
        moments = model_moments(params, ou, path, years, grid, solver)
    except ModelError:
        moments = np.full(3 * len(years), np.nan)
    return CalibrationResult(
        ou=ou,
        loss=res.fun,
        start_loss=res.trace[0],
        moments=moments,
        converged=res.converged,
        iterations=res.iterations,
        evaluations=res.evaluations,
        trace=res.trace,
    )


# benchmark -----------------------------------------------------------------


@dataclass
class BenchCell:
    method: str
    n: int
    median_time_s: float
    peak_bytes: int
    repeats: int
    timed_out: bool = False


@dataclass
class BenchSlopes:
    time: float
    memory: float


def _peak_bytes(fn) -> int:
    tracemalloc.start()
    try:
        fn()
        return tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()


def run_benchmark(
    n_values,
    methods=METHODS,
    repeats: int = 5,
    params: ModelParams | None = None,
    path: TrendPath = TrendPath(),
    timeout_s: float = 120.0,
    progress=None,
):
    """Time and measure each solver over ``n_values`` at base-year prices.

    Each cell runs one untimed warm-up, one traced run for peak memory and
    ``repeats`` timed runs; the median is reported. The household step does
    not depend on N and is excluded. The DT solver uses the iterative
    stationary distribution. Returns ``(cells, slopes)`` with slopes keyed by
    method.
    """
    n_values = list(n_values)
    if len(n_values) < 4 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidInput("n_values must be increasing with at least four entries")
    if repeats < 3:
        raise InvalidInput("repeats must be at least 3")
    params = params or ModelParams()
    w, p = prices_at(path, path.first_year)
    v1 = indirect_utility(params.prefs, params.tech, p, w, 1)
    v2 = indirect_utility(params.prefs, params.tech, p, w, 2)

    cells = []
    slopes = {}
    for method in methods:

        def run(n, method=method):
            return solve_method(
                params, method, p, w, GridSettings(n=n), v1=v1, v2=v2, stationary_mode="iterate"
            )

        run(n_values[0])  # triggers JIT compilation outside every measurement
        for n in n_values:
            t0 = time.perf_counter()
            run(n)
            if time.perf_counter() - t0 > timeout_s:
                cell = BenchCell(method, n, math.nan, 0, 0, timed_out=True)
            else:
                peak = _peak_bytes(lambda: run(n))
                times = []
                for _ in range(repeats):
                    t0 = time.perf_counter()
                    run(n)
                    times.append(time.perf_counter() - t0)
                cell = BenchCell(method, n, statistics.median(times), peak, repeats)
            cells.append(cell)
            if progress:
                progress(cell)
        ok = [c for c in cells if c.method == method and not c.timed_out]
        if len(ok) >= 2:
            slopes[method] = BenchSlopes(
                time=loglog_slope([c.n for c in ok], [c.median_time_s for c in ok]),
                memory=loglog_slope([c.n for c in ok], [c.peak_bytes for c in ok]),
            )
    return cells, slopes

"""Discrete-time equilibrium: Tauchen + value function iteration + dense
stationary distribution.

State ``N`` (0-based, the last one) of the transition matrix P is the single
state; states ``0 .. N-1`` are married couples at each grid point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from marriage_hact.errors import (
    AllReject,
    DegenerateMass,
    InvalidInput,
    MaxIterationsExceeded,
    NonMonotoneValue,
)
from marriage_hact.household import indirect_utility
from marriage_hact.numerics import dense_solve
from marriage_hact.params import ModelParams
from marriage_hact.processes import Grid, build_grid, discretize_singles, tauchen

VFI_TOL = 1e-9
VFI_MAX_ITER = 100_000
STATIONARY_TOL = 1e-12
DT_N_STD = 4.0


@dataclass
class DtSolution:
    grid: Grid
    v: np.ndarray
    w_single: float
    iota: int
    omega: float
    s: float
    m: np.ndarray
    prob_marriage: float
    prob_divorce: float
    iterations: int
    v1: float
    v2: float
    solve_seconds: float = float("nan")

    @property
    def married_share(self) -> float:
        return 1.0 - self.s

    @property
    def b_star(self) -> float:
        """Threshold implied by the split bin (for reporting only)."""
        if self.iota == 0:
            return float(self.grid.points[0])
        return float(self.grid.points[self.iota - 1] + self.omega * self.grid.db)


def dt_grid(params: ModelParams, n: int, n_std: float = DT_N_STD) -> Grid:
    """Grid wide enough to hold both the married process and the singles draw."""
    f = params.singles
    return build_grid(
        params.ar1.mu_m,
        params.ar1.sigma_m,
        n_std,
        f.mu_s - n_std * f.sigma_s,
        n,
        hi_extend=f.mu_s + n_std * f.sigma_s,
    )


def solve_vfi(
    beta: float,
    grid: Grid,
    g: np.ndarray,
    f_vec: np.ndarray,
    v1: float,
    v2: float,
    tol: float = VFI_TOL,
    max_iter: int = VFI_MAX_ITER,
):
    """Iterate on the discretized Bellman pair, updating V and W together.

    Returns ``(v, w_single, iterations)``.
    """
    flow = v2 + grid.points
    v = flow / (1.0 - beta)
    w = v1 / (1.0 - beta)
    diff = np.inf
    for it in range(1, max_iter + 1):
        cont = np.maximum(v, w)
        v_new = flow + beta * (g @ cont)
        w_new = v1 + beta * (f_vec @ cont)
        diff = max(np.max(np.abs(v_new - v)), abs(w_new - w))
        v, w = v_new, w_new
        if diff < tol:
            return v, float(w), it
    raise MaxIterationsExceeded(
        f"value function iteration did not converge in {max_iter} sweeps", diff, (v, w)
    )


def dt_threshold(v: np.ndarray, w_single: float):
    """Split index and weight: V[iota-1] < W <= V[iota], omega = share of bin iota rejected."""
    v = np.asarray(v)
    if np.any(np.diff(v) < -1e-9):
        raise NonMonotoneValue("married value is decreasing in match quality")
    if w_single > v[-1]:
        raise AllReject("no grid point is worth marrying at")
    iota = int(np.argmax(v >= w_single))
    if iota == 0:
        return 0, 0.0
    lo, hi = v[iota - 1], v[iota]
    omega = (w_single - lo) / (hi - lo) if hi > lo else 1.0
    return iota, float(min(max(omega, 0.0), 1.0))


def _split(x: np.ndarray, iota: int, omega: float):
    """(mass rejected, mass accepted at bin iota) along the last axis of x."""
    rejected = x[..., :iota].sum(axis=-1) + omega * x[..., iota]
    return rejected, (1.0 - omega) * x[..., iota]


def build_transition(g: np.ndarray, f_vec: np.ndarray, iota: int, omega: float) -> np.ndarray:
    """Column-stochastic (N+1)x(N+1) matrix; column j is where state j goes next period."""
    n = g.shape[0]
    p = np.zeros((n + 1, n + 1))
    p[iota + 1 : n, :n] = g[:, iota + 1 :].T
    rejected, kept = _split(g, iota, omega)
    p[iota, :n] = kept
    p[n, :n] = rejected
    p[iota + 1 : n, n] = f_vec[iota + 1 :]
    f_rej, f_kept = _split(f_vec, iota, omega)
    p[iota, n] = f_kept
    p[n, n] = f_rej
    return p


def dt_stationary(
    p_mat: np.ndarray,
    delta: float,
    mode: str = "closed_form",
    tol: float = STATIONARY_TOL,
    max_iter: int = 1_000_000,
):
    """Fixed point of x = (1 - delta) P x + delta e_single. Returns ``(m, s)``."""
    size = p_mat.shape[0]
    entry = np.zeros(size)
    entry[-1] = delta
    if mode == "closed_form":
        x = dense_solve(np.eye(size) - (1.0 - delta) * p_mat, entry)
    elif mode == "iterate":
        x = np.zeros(size)
        x[-1] = 1.0
        survive = 1.0 - delta
        for _ in range(max_iter):
            x_new = p_mat @ x
            x_new *= survive
            x_new[-1] += delta
            diff = np.max(np.abs(x_new - x))
            x = x_new
            if diff < tol:
                break
        else:
            raise MaxIterationsExceeded("stationary iteration did not converge", diff, x)
    else:
        raise InvalidInput(f"unknown stationary mode {mode!r}")
    x = x / x.sum()
    return x[:-1], float(x[-1])


def dt_rates(g, f_vec, iota: int, omega: float, m: np.ndarray, s: float):
    """Per-period (marriage, divorce) probabilities at the stationary distribution.

    Marriage: share of draws accepted by a single. Divorce: share of surviving
    couples whose next match quality falls in the rejected region.
    """
    if 1.0 - s < 1e-12:
        raise DegenerateMass("no married households to compute a divorce rate on")
    f_rej, _ = _split(np.asarray(f_vec), iota, omega)
    prob_marriage = 1.0 - f_rej
    g_rej, _ = _split(g, iota, omega)
    prob_divorce = float(m @ g_rej) / (1.0 - s)
    return float(prob_marriage), prob_divorce


def solve_dt(
    params: ModelParams,
    p: float,
    w: float,
    n: int = 501,
    n_std: float = DT_N_STD,
    tol: float = VFI_TOL,
    max_iter: int = VFI_MAX_ITER,
    stationary_mode: str = "closed_form",
    v1: float | None = None,
    v2: float | None = None,
) -> DtSolution:
    """Stationary equilibrium of the discrete-time model at prices (p, w).

    Passing precomputed indirect utilities ``v1``/``v2`` skips the household
    step, which is how the benchmark times only the grid-dependent work.
    """
    if v1 is None:
        v1 = indirect_utility(params.prefs, params.tech, p, w, 1)
    if v2 is None:
        v2 = indirect_utility(params.prefs, params.tech, p, w, 2)
    t0 = time.perf_counter()
    demo = params.demographics
    grid = dt_grid(params, n, n_std)
    g = tauchen(params.ar1, grid)
    f_vec = discretize_singles(params.singles, grid)
    v, w_single, iterations = solve_vfi(demo.beta, grid, g, f_vec, v1, v2, tol, max_iter)
    iota, omega = dt_threshold(v, w_single)
    p_mat = build_transition(g, f_vec, iota, omega)
    m, s = dt_stationary(p_mat, demo.delta, stationary_mode)
    del p_mat
    prob_marriage, prob_divorce = dt_rates(g, f_vec, iota, omega, m, s)
    return DtSolution(
        grid=grid,
        v=v,
        w_single=w_single,
        iota=iota,
        omega=omega,
        s=s,
        m=m,
        prob_marriage=prob_marriage,
        prob_divorce=prob_divorce,
        iterations=iterations,
        v1=float(v1),
        v2=float(v2),
        solve_seconds=time.perf_counter() - t0,
    )

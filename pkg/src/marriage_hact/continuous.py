"""Continuous-time equilibrium: implicit HJB with a variational inequality,
then a Kolmogorov forward solve for the stationary distribution.

Every linear system is tridiagonal. The implicit matrix
B = (1/step + rho) I - A is factored once per solve and reused by every
inner iteration.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from marriage_hact.errors import (
    AllAccept,
    AllReject,
    DegenerateMass,
    MaxIterationsExceeded,
    NegativeDensity,
    NonMonotoneUnclamped,
    TailMassWarning,
)
from marriage_hact.household import indirect_utility
from marriage_hact.numerics import (
    TriDiag,
    normal_cdf,
    normal_pdf,
    thomas_solve_into,
    tridiag_factor,
)
from marriage_hact.params import ModelParams, SinglesDraw
from marriage_hact.processes import TAIL_MASS_LIMIT, Grid, build_grid, ou_generator

HJB_TOL = 1e-9
PSEUDO_STEP = 100.0
DAMPING = 0.5
MAX_INNER = 10_000
MAX_OUTER = 10_000
CT_N_STD = 5.0


_SQRT2 = math.sqrt(2.0)

# kernel status codes
_OK, _INNER_CAP, _OUTER_CAP, _ALL_REJECT = 0, 1, 2, 3


@numba.njit(cache=True)
def _inner_loop(lower, inv_denom, cp, u_m, v, w, inv_step, tol, max_iter, rhs, v_tilde):
    # holds W fixed: v <- max(B^-1 (u_m + v/step), W) until the sup-change < tol
    n = v.shape[0]
    diff = np.inf
    for it in range(max_iter):
        for i in range(n):
            rhs[i] = u_m[i] + inv_step * v[i]
        thomas_solve_into(lower, inv_denom, cp, rhs, v_tilde)
        diff = 0.0
        for i in range(n):
            new = v_tilde[i] if v_tilde[i] > w else w
            d = abs(new - v[i])
            if d > diff:
                diff = d
            v[i] = new
        if diff < tol:
            return it + 1, diff
    return -1, diff


@numba.njit(cache=True)
def _threshold(points, db, v_unclamped, w):
    # -> (iota, omega, b_star, clipped); iota == -1 when nothing is accepted
    n = v_unclamped.shape[0]
    iota = -1
    for i in range(n):
        if v_unclamped[i] >= w:
            iota = i
            break
    if iota == -1:
        return -1, 0.0, np.nan, False
    if iota == 0:
        return 1, 0.0, points[0], True
    lo = v_unclamped[iota - 1]
    omega = (w - lo) / (v_unclamped[iota] - lo)
    omega = min(max(omega, 0.0), 1.0)
    return iota, omega, points[iota - 1] + omega * db, False


@numba.njit(cache=True)
def _acceptance_integral(v, f_pdf, db, iota, omega):
    total = (1.0 - omega) * v[iota - 1] * f_pdf[iota - 1]
    for k in range(iota, v.shape[0]):
        total += v[k] * f_pdf[k]
    return total * db


@numba.njit(cache=True)
def _hjb_kernel(
    lower, inv_denom, cp, u_m, f_pdf, points, db, v1, rho, lam, mu_s, sigma_s,
    inv_step, tol, damping, max_inner, max_outer, v, v_tilde, rhs,
):
    w = v1 / rho
    for i in range(v.shape[0]):
        v[i] = u_m[i] / rho
    inner_total = 0
    gap = np.inf
    for outer in range(1, max_outer + 1):
        its, diff = _inner_loop(lower, inv_denom, cp, u_m, v, w, inv_step, tol, max_inner, rhs, v_tilde)
        if its < 0:
            return w, inner_total, outer, _INNER_CAP, diff
        inner_total += its
        iota, omega, b_star, clipped = _threshold(points, db, v_tilde, w)
        if iota < 0:
            return w, inner_total, outer, _ALL_REJECT, gap
        accept = 0.5 * math.erfc((b_star - mu_s) / (sigma_s * _SQRT2))
        integral = _acceptance_integral(v, f_pdf, db, iota, omega)
        w_new = (v1 + lam * integral) / (rho + lam * accept)
        gap = abs(w_new - w)
        if gap < tol:
            return w, inner_total, outer, _OK, gap
        w = damping * w_new + (1.0 - damping) * w
    return w, inner_total, max_outer, _OUTER_CAP, gap


@dataclass
class HjbResult:
    v: np.ndarray
    v_unclamped: np.ndarray
    w_single: float
    b_star: float
    iota: int
    omega: float
    inner_iterations: int
    outer_iterations: int
    clipped: bool = False  # threshold at or below the first grid point


def locate_threshold(grid: Grid, v_unclamped: np.ndarray, w_single: float):
    """(iota, omega, b_star, clipped) from the unclamped value.

    b_star = b[iota-1] + omega*db with v~[iota-1] < W <= v~[iota]. A threshold
    at or below the first grid point is clipped to (1, 0).
    """
    iota, omega, b_star, clipped = _threshold(
        grid.points, grid.db, np.ascontiguousarray(v_unclamped, dtype=np.float64), float(w_single)
    )
    if iota < 0:
        raise AllReject("unclamped married value lies below W on the whole grid")
    return int(iota), float(omega), float(b_star), bool(clipped)


def acceptance_integral(grid: Grid, v: np.ndarray, f_pdf: np.ndarray, iota: int, omega: float):
    """Integral of V f over [b*, inf) on the grid, with the boundary cell weighted by 1 - omega."""
    return float(_acceptance_integral(v, f_pdf, grid.db, iota, omega))


def solve_hjb(
    params: ModelParams,
    grid: Grid,
    a: TriDiag,
    u_m: np.ndarray,
    v1: float,
    tol: float = HJB_TOL,
    pseudo_step: float = PSEUDO_STEP,
    damping: float = DAMPING,
    max_inner: int = MAX_INNER,
    max_outer: int = MAX_OUTER,
) -> HjbResult:
    """Nested HJB iteration with the divorce option.

    Inner loop: W fixed, V <- max(B^-1 (u_m + V/step), W) to convergence.
    Outer loop: locate b* on the unclamped solution, recompute W in closed
    form and move halfway (``damping``) toward it, until W stops changing.
    """
    demo = params.demographics
    rho, lam = demo.rho, demo.lam
    f = params.singles
    f_pdf = normal_pdf(grid.points, f.mu_s, f.sigma_s)
    fac = tridiag_factor(a.shifted(-1.0, 1.0 / pseudo_step + rho))

    u_m = np.ascontiguousarray(u_m, dtype=np.float64)
    v = np.empty_like(u_m)
    v_tilde = np.empty_like(u_m)
    rhs = np.empty_like(u_m)
    w, inner_total, outer, status, resid = _hjb_kernel(
        fac.matrix.lower, fac.inv_denom, fac.cp, u_m, f_pdf, grid.points, grid.db,
        float(v1), rho, lam, f.mu_s, f.sigma_s, 1.0 / pseudo_step, tol, damping,
        max_inner, max_outer, v, v_tilde, rhs,
    )
    if status == _INNER_CAP:
        raise MaxIterationsExceeded(
            f"inner HJB loop did not converge in {max_inner} steps (outer {outer})", resid
        )
    if status == _OUTER_CAP:
        raise MaxIterationsExceeded(f"outer W loop did not converge in {max_outer} updates", resid)
    if status == _ALL_REJECT:
        raise AllReject("unclamped married value lies below W on the whole grid")

    if np.any(np.diff(v_tilde) < -1e-9):
        raise NonMonotoneUnclamped("unclamped married value is decreasing in match quality")
    iota, omega, b_star, clipped = locate_threshold(grid, v_tilde, w)
    if clipped and lam > 0.0:
        raise AllAccept(
            f"threshold lies at or below the grid's lower edge {grid.lo:.4f}; widen the grid"
        )
    return HjbResult(
        v=v,
        v_unclamped=v_tilde,
        w_single=float(w),
        b_star=b_star,
        iota=iota,
        omega=omega,
        inner_iterations=int(inner_total),
        outer_iterations=int(outer),
        clipped=clipped,
    )


@dataclass
class KfeResult:
    m: np.ndarray  # married density on the full grid, zero below the boundary
    s: float
    s_lo: float  # solve with boundary at b[iota-1]
    s_hi: float  # solve with boundary at b[iota]
    m_lo: np.ndarray
    m_hi: np.ndarray


def _kfe_block(a: TriDiag, f_pdf: np.ndarray, nu: float, lam: float, db: float, start: int):
    t_mat = a.block(start).transpose().shifted(1.0, -nu)
    z = tridiag_factor(t_mat).solve(f_pdf[start:])
    s = 1.0 / (1.0 - lam * db * z.sum())
    m = np.zeros(a.n)
    m[start:] = -lam * s * z
    return s, m


def solve_kfe(
    a: TriDiag, grid: Grid, f: SinglesDraw, nu: float, lam: float, iota: int, omega: float
) -> KfeResult:
    """Stationary married density and singles mass.

    Solves the forward equation twice, with the absorbing boundary on each grid
    point bracketing the threshold, and blends the two by ``omega``.
    """
    f_pdf = normal_pdf(grid.points, f.mu_s, f.sigma_s)
    j_lo = max(iota - 1, 0)
    s_lo, m_lo = _kfe_block(a, f_pdf, nu, lam, grid.db, j_lo)
    s_hi, m_hi = _kfe_block(a, f_pdf, nu, lam, grid.db, iota)
    s = (1.0 - omega) * s_lo + omega * s_hi
    m = (1.0 - omega) * m_lo + omega * m_hi
    if np.min(m) < -1e-8:
        raise NegativeDensity(f"married density reaches {np.min(m):.3e}")
    return KfeResult(m=m, s=float(s), s_lo=float(s_lo), s_hi=float(s_hi), m_lo=m_lo, m_hi=m_hi)


def annualize(rate: float, dt: float = 1.0) -> float:
    return 1.0 - math.exp(-rate * dt)


def ct_rates(f: SinglesDraw, lam: float, nu: float, b_star: float, s: float, dt: float = 1.0):
    """Marriage and divorce hazards plus their per-period probabilities.

    The divorce hazard comes from stationary accounting: inflow of new
    marriages equals divorce plus exit outflow of the married stock.
    Returns ``(hazard_marriage, hazard_divorce, prob_marriage, prob_divorce)``.
    """
    if 1.0 - s < 1e-12:
        raise DegenerateMass("no married households to compute a divorce rate on")
    accept = 1.0 - float(normal_cdf(b_star, f.mu_s, f.sigma_s))
    hazard_marriage = lam * accept
    hazard_divorce = max((lam * s * accept - nu * (1.0 - s)) / (1.0 - s), 0.0)
    return (
        hazard_marriage,
        hazard_divorce,
        annualize(hazard_marriage, dt),
        annualize(hazard_divorce, dt),
    )


def boundary_flux_hazard(a: TriDiag, grid: Grid, kfe: KfeResult, iota: int, omega: float) -> float:
    """Divorce hazard measured as the probability flux into the absorbing cell.

    Independent of :func:`ct_rates`; used as a consistency check.
    """
    j_lo = max(iota - 1, 0)
    flux_lo = a.lower[j_lo - 1] * kfe.m_lo[j_lo] * grid.db if j_lo > 0 else 0.0
    flux_hi = a.lower[iota - 1] * kfe.m_hi[iota] * grid.db
    return ((1.0 - omega) * flux_lo + omega * flux_hi) / (1.0 - kfe.s)


@dataclass
class CtSolution:
    grid: Grid
    v: np.ndarray
    v_unclamped: np.ndarray
    w_single: float
    b_star: float
    iota: int
    omega: float
    s: float
    m: np.ndarray
    s_lo: float
    s_hi: float
    hazard_marriage: float
    hazard_divorce: float
    prob_marriage: float
    prob_divorce: float
    inner_iterations: int
    outer_iterations: int
    v1: float
    v2: float
    solve_seconds: float = float("nan")

    @property
    def married_share(self) -> float:
        return 1.0 - self.s


def ct_grid(params: ModelParams, n: int, n_std: float = CT_N_STD) -> Grid:
    grid = build_grid(params.ou.mu_m, params.ou.sigma_m, n_std, None, n)
    f = params.singles
    upper_tail = 1.0 - float(normal_cdf(grid.hi + 0.5 * grid.db, f.mu_s, f.sigma_s))
    if upper_tail > TAIL_MASS_LIMIT:
        warnings.warn(
            f"grid misses {upper_tail:.4f} of the singles' upper tail; widen the grid",
            TailMassWarning,
            stacklevel=2,
        )
    return grid


def solve_ct(
    params: ModelParams,
    p: float,
    w: float,
    n: int = 501,
    n_std: float = CT_N_STD,
    tol: float = HJB_TOL,
    pseudo_step: float = PSEUDO_STEP,
    damping: float = DAMPING,
    max_iter: int = MAX_INNER,
    v1: float | None = None,
    v2: float | None = None,
) -> CtSolution:
    """Stationary equilibrium of the continuous-time model at prices (p, w)."""
    if v1 is None:
        v1 = indirect_utility(params.prefs, params.tech, p, w, 1)
    if v2 is None:
        v2 = indirect_utility(params.prefs, params.tech, p, w, 2)
    t0 = time.perf_counter()
    demo = params.demographics
    grid = ct_grid(params, n, n_std)
    a = ou_generator(params.ou, grid)
    hjb = solve_hjb(
        params,
        grid,
        a,
        v2 + grid.points,
        v1,
        tol=tol,
        pseudo_step=pseudo_step,
        damping=damping,
        max_inner=max_iter,
        max_outer=max_iter,
    )
    kfe = solve_kfe(a, grid, params.singles, demo.nu, demo.lam, hjb.iota, hjb.omega)
    if demo.lam == 0.0:
        hm = hd = pm = pd = 0.0
    else:
        hm, hd, pm, pd = ct_rates(params.singles, demo.lam, demo.nu, hjb.b_star, kfe.s, demo.dt)
    return CtSolution(
        grid=grid,
        v=hjb.v,
        v_unclamped=hjb.v_unclamped,
        w_single=hjb.w_single,
        b_star=hjb.b_star,
        iota=hjb.iota,
        omega=hjb.omega,
        s=kfe.s,
        m=kfe.m,
        s_lo=kfe.s_lo,
        s_hi=kfe.s_hi,
        hazard_marriage=hm,
        hazard_divorce=hd,
        prob_marriage=pm,
        prob_divorce=pd,
        inner_iterations=hjb.inner_iterations,
        outer_iterations=hjb.outer_iterations,
        v1=float(v1),
        v2=float(v2),
        solve_seconds=time.perf_counter() - t0,
    )

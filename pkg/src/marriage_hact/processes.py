"""Match-quality processes on a uniform grid.

* singles' draw distribution N(mu_s, sigma_s2), discretized into bin masses;
* married AR(1) discretized by Tauchen's method into a dense row-stochastic G;
* married OU process discretized by an upwind finite-difference generator A
  (tridiagonal, zero row sums, reflecting ends).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from marriage_hact.errors import InvalidInput, InvalidParameter, TailMassWarning
from marriage_hact.numerics import TriDiag
from marriage_hact.params import Ar1Process, OuProcess, SinglesDraw

TAIL_MASS_LIMIT = 0.01


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    db: float

    def __post_init__(self):
        if self.points.ndim != 1 or self.points.size < 3:
            raise InvalidInput("a grid needs at least three points")
        if not self.db > 0:
            raise InvalidInput(f"grid spacing must be positive, got {self.db}")

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def lo(self) -> float:
        return float(self.points[0])

    @property
    def hi(self) -> float:
        return float(self.points[-1])

    def edges(self) -> np.ndarray:
        """Interior cell boundaries (midpoints between neighbours), length N-1."""
        return 0.5 * (self.points[:-1] + self.points[1:])


def build_grid(
    center: float,
    sigma: float,
    n_std: float,
    lo_extend: float | None,
    n: int,
    hi_extend: float | None = None,
) -> Grid:
    """Uniform grid on [min(center - n_std*sigma, lo_extend), max(center + n_std*sigma, hi_extend)]."""
    if n < 3:
        raise InvalidInput(f"grid needs n >= 3, got {n}")
    lo = center - n_std * sigma
    hi = center + n_std * sigma
    if lo_extend is not None:
        lo = min(lo, lo_extend)
    if hi_extend is not None:
        hi = max(hi, hi_extend)
    if not hi > lo:
        raise InvalidInput(f"degenerate grid interval [{lo}, {hi}]")
    points = np.linspace(lo, hi, n)
    return Grid(points=points, db=(hi - lo) / (n - 1))


def _bin_masses(cdf_at_edges: np.ndarray) -> np.ndarray:
    """Turn CDF values at interior edges (..., N-1) into bin masses (..., N).

    The first bin takes the lower tail and the last bin the remainder, so
    every mass vector sums to one.
    """
    shape = cdf_at_edges.shape[:-1] + (cdf_at_edges.shape[-1] + 1,)
    out = np.empty(shape)
    out[..., 0] = cdf_at_edges[..., 0]
    np.subtract(cdf_at_edges[..., 1:], cdf_at_edges[..., :-1], out=out[..., 1:-1])
    out[..., -1] = 1.0 - out[..., :-1].sum(axis=-1)
    return out


def tauchen(ar1: Ar1Process, grid: Grid) -> np.ndarray:
    """Row-stochastic G with G[j, i] ~ Pr(b' in bin i | b = b_j)."""
    cond_mean = (1.0 - ar1.rho_ar) * ar1.mu_m + ar1.rho_ar * grid.points
    sd = ar1.innovation_sd
    z = (grid.edges()[None, :] - cond_mean[:, None]) / sd
    special.ndtr(z, out=z)
    return _bin_masses(z)


def discretize_singles(f: SinglesDraw, grid: Grid) -> np.ndarray:
    edges = grid.edges()
    cdf = special.ndtr((edges - f.mu_s) / f.sigma_s)
    tail = special.ndtr((grid.lo - 0.5 * grid.db - f.mu_s) / f.sigma_s) + special.ndtr(
        -(grid.hi + 0.5 * grid.db - f.mu_s) / f.sigma_s
    )
    if tail > TAIL_MASS_LIMIT:
        warnings.warn(
            f"singles draw puts {tail:.4f} of its mass outside the grid; widen the grid",
            TailMassWarning,
            stacklevel=2,
        )
    return _bin_masses(cdf)


def ou_generator(ou: OuProcess, grid: Grid) -> TriDiag:
    """Upwind finite-difference generator of the OU process.

    Drift uses the forward difference where it points up and the backward
    difference where it points down; diffusion is centred. Rows 0 and N-1
    drop the outward link (reflecting), so every row still sums to zero.
    """
    b, db = grid.points, grid.db
    drift = ou.eta * (ou.mu_m - b)
    diffusion = ou.eta * ou.sigma_m2 / db**2
    up = np.maximum(drift, 0.0) / db + diffusion  # A[i, i+1]
    down = -np.minimum(drift, 0.0) / db + diffusion  # A[i, i-1]
    up[-1] = 0.0
    down[0] = 0.0
    return TriDiag(lower=down[1:], diag=-(up + down), upper=up[:-1])


def map_dt_to_ct(delta: float, beta_tilde: float, rho_ar: float, dt: float):
    """Map per-period probabilities to rates: (nu, rho_tilde, naive eta)."""
    if not 0.0 < delta < 1.0:
        raise InvalidParameter(f"delta must lie in (0,1), got {delta}")
    if not 0.0 < beta_tilde < 1.0:
        raise InvalidParameter(f"beta_tilde must lie in (0,1), got {beta_tilde}")
    if not 0.0 < rho_ar < 1.0:
        raise InvalidParameter(f"rho_ar must lie in (0,1), got {rho_ar}")
    if not dt > 0.0:
        raise InvalidParameter(f"dt must be positive, got {dt}")
    nu = -math.log(1.0 - delta) / dt
    rho_tilde = -math.log(beta_tilde) / dt
    eta = -math.log(rho_ar) / dt
    return nu, rho_tilde, eta


def naive_ou(ar1: Ar1Process, dt: float = 1.0) -> OuProcess:
    """OU process matching the AR(1)'s mean, variance and autocorrelation."""
    return OuProcess(mu_m=ar1.mu_m, sigma_m2=ar1.sigma_m2, eta=-math.log(ar1.rho_ar) / dt)

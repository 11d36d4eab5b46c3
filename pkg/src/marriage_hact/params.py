"""Structural parameters.

Defaults reproduce the Greenwood-Guner (2009) calibration for tastes,
technology, shocks and prices, and the re-estimated OU block for the
continuous-time model. Variances are stored as variances; use the ``sigma_*``
properties for standard deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from marriage_hact.errors import InvalidParameter


@dataclass(frozen=True)
class Preferences:
    alpha: float = 0.278
    zeta: float = -1.901
    cbar: float = 0.131
    phi: float = 0.766

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidParameter(f"alpha must lie in (0,1), got {self.alpha}")
        if not self.zeta < 1.0 or self.zeta == 0.0:
            raise InvalidParameter(f"zeta must be < 1 and nonzero, got {self.zeta}")
        if self.cbar < 0.0:
            raise InvalidParameter(f"cbar must be nonnegative, got {self.cbar}")


@dataclass(frozen=True)
class HomeTechnology:
    theta: float = 0.206
    kappa: float = 0.189

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise InvalidParameter(f"theta must lie in (0,1), got {self.theta}")
        if not self.kappa < 1.0 or self.kappa == 0.0:
            raise InvalidParameter(f"kappa must be < 1 and nonzero, got {self.kappa}")


@dataclass(frozen=True)
class SinglesDraw:
    """Match quality drawn by a single on meeting a partner: N(mu_s, sigma_s2)."""

    mu_s: float = -4.252
    sigma_s2: float = 8.063

    def __post_init__(self):
        if not self.sigma_s2 > 0.0:
            raise InvalidParameter(f"sigma_s2 must be positive, got {self.sigma_s2}")

    @property
    def sigma_s(self) -> float:
        return math.sqrt(self.sigma_s2)


@dataclass(frozen=True)
class Ar1Process:
    """Married match quality in discrete time, unconditional law N(mu_m, sigma_m2)."""

    mu_m: float = 0.521
    sigma_m2: float = 0.680
    rho_ar: float = 0.896

    def __post_init__(self):
        if not self.sigma_m2 > 0.0:
            raise InvalidParameter(f"sigma_m2 must be positive, got {self.sigma_m2}")
        if not -1.0 < self.rho_ar < 1.0:
            raise InvalidParameter(f"rho_ar must lie in (-1,1), got {self.rho_ar}")

    @property
    def sigma_m(self) -> float:
        return math.sqrt(self.sigma_m2)

    @property
    def innovation_sd(self) -> float:
        return self.sigma_m * math.sqrt(1.0 - self.rho_ar**2)


@dataclass(frozen=True)
class OuProcess:
    """db = eta (mu_m - b) dt + sigma_m sqrt(2 eta) dB; stationary law N(mu_m, sigma_m2)."""

    mu_m: float = 0.951
    sigma_m2: float = 0.83
    eta: float = 0.113

    def __post_init__(self):
        if not self.sigma_m2 > 0.0:
            raise InvalidParameter(f"sigma_m2 must be positive, got {self.sigma_m2}")
        if not self.eta > 0.0:
            raise InvalidParameter(f"eta must be positive, got {self.eta}")

    @property
    def sigma_m(self) -> float:
        return math.sqrt(self.sigma_m2)


NAIVE_OU = OuProcess(mu_m=0.521, sigma_m2=0.680, eta=0.11)
ESTIMATED_OU = OuProcess()


@dataclass(frozen=True)
class Demographics:
    """Discrete-time primitives and the continuous-time rates they map to."""

    delta: float
    nu: float
    beta_tilde: float
    beta: float
    rho_tilde: float
    rho: float
    lam: float
    dt: float


@dataclass(frozen=True)
class ModelParams:
    prefs: Preferences = field(default_factory=Preferences)
    tech: HomeTechnology = field(default_factory=HomeTechnology)
    singles: SinglesDraw = field(default_factory=SinglesDraw)
    ar1: Ar1Process = field(default_factory=Ar1Process)
    ou: OuProcess = field(default_factory=OuProcess)
    beta_tilde: float = 0.96
    delta: float = 1.0 / 47.0
    lam: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta_tilde < 1.0:
            raise InvalidParameter(f"beta_tilde must lie in (0,1), got {self.beta_tilde}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameter(f"delta must lie in (0,1), got {self.delta}")
        if not self.lam >= 0.0:
            raise InvalidParameter(f"lam must be nonnegative, got {self.lam}")
        if not self.dt > 0.0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}")

    @property
    def demographics(self) -> Demographics:
        nu = -math.log(1.0 - self.delta) / self.dt
        rho_tilde = -math.log(self.beta_tilde) / self.dt
        return Demographics(
            delta=self.delta,
            nu=nu,
            beta_tilde=self.beta_tilde,
            beta=self.beta_tilde * (1.0 - self.delta),
            rho_tilde=rho_tilde,
            rho=rho_tilde + nu,
            lam=self.lam,
            dt=self.dt,
        )

    def with_ou(self, ou: OuProcess) -> "ModelParams":
        return replace(self, ou=ou)


def default_params() -> ModelParams:
    return ModelParams()


@dataclass(frozen=True)
class TrendPath:
    w_1950: float = 1.000
    dw: float = 0.022
    p_1950: float = 9.959
    dp: float = 0.059
    first_year: int = 1950
    last_year: int = 2020
    form: str = "geometric"

    def __post_init__(self):
        if self.last_year < self.first_year:
            raise InvalidParameter("trend path has no years")
        if self.form not in ("geometric", "linear"):
            raise InvalidParameter(f"unknown trend form {self.form!r}")
        if not (self.w_1950 > 0 and self.p_1950 > 0):
            raise InvalidParameter("base-year wage and price must be positive")

    @property
    def years(self) -> range:
        return range(self.first_year, self.last_year + 1)

"""Run configuration: a JSON document of sections and keys.

Omitted keys take their defaults; unknown keys and out-of-domain values are
rejected. Variances are given as variances (``sigma_s2``, ``sigma_m2``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from marriage_hact.errors import DomainError, ParseError, UnknownKey
from marriage_hact.experiments import CalibrationTargets, GridSettings, SolverSettings
from marriage_hact.params import (
    Ar1Process,
    HomeTechnology,
    ModelParams,
    OuProcess,
    Preferences,
    SinglesDraw,
    TrendPath,
)

GG09_PRIOR = "Greenwood-Guner (2009) calibration, set a priori"
GG09_EST = "Greenwood-Guner (2009) calibration, estimated"
GG09_DATA = "Greenwood-Guner (2009) calibration, data"
CT_EST = "continuous-time OU block, re-estimated by minimum distance"
CT_SETTING = "continuous-time setting (one meeting per period)"
NAIVE = "naive OU block matched to the AR(1)"
VITAL = "vital-statistics targets (Greenwood-Guner 2009)"
LOCAL = "solver default"


def _pos(x):
    return x > 0


def _open01(x):
    return 0 < x < 1


def _lt1_nonzero(x):
    return x < 1 and x != 0


def _nonneg(x):
    return x >= 0


def _any(x):
    return True


def _int_ge3(x):
    return isinstance(x, int) and x >= 3


def _int_ge1(x):
    return isinstance(x, int) and x >= 1


def _int_ge3_reps(x):
    return isinstance(x, int) and x >= 3


def _life(x):
    return x > 1


def _form(x):
    return x in ("geometric", "linear")


def _year(x):
    return isinstance(x, int)


def _n_values(x):
    return (
        isinstance(x, list)
        and len(x) >= 4
        and all(isinstance(v, int) and v >= 3 for v in x)
        and all(b > a for a, b in zip(x, x[1:]))
    )


def _targets(x):
    return isinstance(x, dict) and all(
        isinstance(v, list) and len(v) == 3 and all(isinstance(t, (int, float)) and t > 0 for t in v)
        for v in x.values()
    )


def _text(x):
    return isinstance(x, str) and bool(x)


# section -> key -> (default, predicate, bound description, provenance)
SCHEMA = {
    "tastes": {
        "beta_tilde": (0.96, _open01, "in (0, 1)", GG09_PRIOR),
        "phi": (0.766, _any, "real", GG09_PRIOR),
        "alpha": (0.278, _open01, "in (0, 1)", GG09_EST),
        "zeta": (-1.901, _lt1_nonzero, "< 1 and != 0", GG09_EST),
        "cbar": (0.131, _nonneg, ">= 0", GG09_EST),
    },
    "technology": {
        "theta": (0.206, _open01, "in (0, 1)", GG09_PRIOR),
        "kappa": (0.189, _lt1_nonzero, "< 1 and != 0", GG09_PRIOR),
    },
    "demographics": {
        "life_span": (47.0, _life, "> 1 (periods)", GG09_PRIOR),
        "lam": (1.0, _nonneg, ">= 0", CT_SETTING),
        "dt": (1.0, _pos, "> 0", CT_SETTING),
    },
    "singles": {
        "mu_s": (-4.252, _any, "real", GG09_EST),
        "sigma_s2": (8.063, _pos, "> 0", GG09_EST),
    },
    "ar1": {
        "mu_m": (0.521, _any, "real", GG09_EST),
        "sigma_m2": (0.680, _pos, "> 0", GG09_EST),
        "rho_ar": (0.896, lambda x: -1 < x < 1, "in (-1, 1)", GG09_EST),
    },
    "ou": {
        "mu_m": (0.951, _any, "real", CT_EST),
        "sigma_m2": (0.83, _pos, "> 0", CT_EST),
        "eta": (0.113, _pos, "> 0", CT_EST),
    },
    "trend": {
        "w_1950": (1.000, _pos, "> 0", GG09_DATA),
        "dw": (0.022, _any, "real", GG09_DATA),
        "p_1950": (9.959, _pos, "> 0", GG09_EST),
        "dp": (0.059, _any, "real", GG09_EST),
        "first_year": (1950, _year, "integer", LOCAL),
        "last_year": (2020, _year, "integer", LOCAL),
        "form": ("geometric", _form, "'geometric' or 'linear'", LOCAL),
    },
    "grid": {
        "n": (501, _int_ge3, "integer >= 3", LOCAL),
        "n_std": (5.0, _pos, "> 0", LOCAL),
        "dt_n_std": (4.0, _pos, "> 0", LOCAL),
    },
    "solver": {
        "tol": (1e-9, _pos, "> 0", LOCAL),
        "dt_tol": (1e-9, _pos, "> 0", LOCAL),
        "max_iter": (100_000, _int_ge1, "integer >= 1", LOCAL),
        "pseudo_step": (100.0, _pos, "> 0", LOCAL),
        "damping": (0.5, lambda x: 0 < x <= 1, "in (0, 1]", LOCAL),
    },
    "bench": {
        "n_values": ([400, 800, 1600, 3200, 6400], _n_values, "at least four increasing integers >= 3", LOCAL),
        "repeats": (5, _int_ge3_reps, "integer >= 3", LOCAL),
        "timeout_s": (120.0, _pos, "> 0", LOCAL),
    },
    "calibration": {
        "start_mu_m": (0.521, _any, "real", NAIVE),
        "start_sigma_m2": (0.680, _pos, "> 0", NAIVE),
        "start_eta": (0.11, _pos, "> 0", NAIVE),
        "targets": (
            {"1950": [0.816, 0.011, 0.211], "2000": [0.625, 0.023, 0.082]},
            _targets,
            "year -> [married share, divorce prob, marriage prob], all > 0",
            VITAL,
        ),
        "tol": (1e-5, _pos, "> 0", LOCAL),
        "max_iter": (2000, _int_ge1, "integer >= 1", LOCAL),
    },
}
TOP_LEVEL = {
    "output_dir": ("out", _text, "nonempty path", LOCAL),
    "seed": (0, lambda x: isinstance(x, int), "integer", LOCAL),
}


@dataclass(frozen=True)
class BenchSettings:
    n_values: tuple = (400, 800, 1600, 3200, 6400)
    repeats: int = 5
    timeout_s: float = 120.0


@dataclass(frozen=True)
class CalibrationSettings:
    start: OuProcess = OuProcess(mu_m=0.521, sigma_m2=0.680, eta=0.11)
    targets: CalibrationTargets = field(default_factory=CalibrationTargets)
    tol: float = 1e-5
    max_iter: int = 2000


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    grid: GridSettings = field(default_factory=GridSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    trend: TrendPath = field(default_factory=TrendPath)
    bench: BenchSettings = field(default_factory=BenchSettings)
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)
    output_dir: Path = Path("out")
    seed: int = 0
    provenance: tuple = ()  # (dotted key, value, source, overridden)


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check(key, value, default, pred, bound):
    if isinstance(default, float) and _is_number(value):
        value = float(value)
    elif isinstance(default, (int, float)) and not isinstance(default, bool):
        if not _is_number(value):
            raise DomainError(key, bound, value)
    try:
        ok = pred(value)
    except TypeError:
        ok = False
    if not ok:
        raise DomainError(key, bound, value)
    return value


def _load(text: str) -> dict:
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    return doc


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Build a :class:`RunConfig` from a JSON document.

    ``overrides`` maps dotted keys (``"grid.n"``) to values and is applied on
    top of the document, e.g. for command-line flags.
    """
    doc = _load(text)
    for dotted, value in (overrides or {}).items():
        head, _, tail = dotted.partition(".")
        if tail:
            doc.setdefault(head, {})
            if not isinstance(doc[head], dict):
                raise DomainError(head, "an object of keys", doc[head])
            doc[head][tail] = value
        else:
            doc[head] = value

    values = {}
    provenance = []
    for name, section in doc.items():
        if name in TOP_LEVEL:
            continue
        if name not in SCHEMA:
            raise UnknownKey(name)
        if not isinstance(section, dict):
            raise DomainError(name, "an object of keys", section)
        for key in section:
            if key not in SCHEMA[name]:
                raise UnknownKey(f"{name}.{key}")

    for name, keys in SCHEMA.items():
        section = doc.get(name, {})
        for key, (default, pred, bound, source) in keys.items():
            dotted = f"{name}.{key}"
            given = key in section
            value = _check(dotted, section[key], default, pred, bound) if given else default
            values[dotted] = value
            provenance.append((dotted, value, "override" if given else source, given))
    for key, (default, pred, bound, source) in TOP_LEVEL.items():
        given = key in doc
        value = _check(key, doc[key], default, pred, bound) if given else default
        values[key] = value
        provenance.append((key, value, "override" if given else source, given))

    if values["trend.last_year"] < values["trend.first_year"]:
        raise DomainError("trend.last_year", ">= trend.first_year", values["trend.last_year"])

    v = values
    params = ModelParams(
        prefs=Preferences(alpha=v["tastes.alpha"], zeta=v["tastes.zeta"], cbar=v["tastes.cbar"], phi=v["tastes.phi"]),
        tech=HomeTechnology(theta=v["technology.theta"], kappa=v["technology.kappa"]),
        singles=SinglesDraw(mu_s=v["singles.mu_s"], sigma_s2=v["singles.sigma_s2"]),
        ar1=Ar1Process(mu_m=v["ar1.mu_m"], sigma_m2=v["ar1.sigma_m2"], rho_ar=v["ar1.rho_ar"]),
        ou=OuProcess(mu_m=v["ou.mu_m"], sigma_m2=v["ou.sigma_m2"], eta=v["ou.eta"]),
        beta_tilde=v["tastes.beta_tilde"],
        delta=1.0 / v["demographics.life_span"],
        lam=v["demographics.lam"],
        dt=v["demographics.dt"],
    )
    targets = {int(year): tuple(map(float, moments)) for year, moments in v["calibration.targets"].items()}
    return RunConfig(
        params=params,
        grid=GridSettings(n=v["grid.n"], n_std=v["grid.n_std"], dt_n_std=v["grid.dt_n_std"]),
        solver=SolverSettings(
            tol=v["solver.tol"],
            max_iter=v["solver.max_iter"],
            pseudo_step=v["solver.pseudo_step"],
            damping=v["solver.damping"],
            dt_tol=v["solver.dt_tol"],
        ),
        trend=TrendPath(
            w_1950=v["trend.w_1950"],
            dw=v["trend.dw"],
            p_1950=v["trend.p_1950"],
            dp=v["trend.dp"],
            first_year=v["trend.first_year"],
            last_year=v["trend.last_year"],
            form=v["trend.form"],
        ),
        bench=BenchSettings(
            n_values=tuple(v["bench.n_values"]),
            repeats=v["bench.repeats"],
            timeout_s=v["bench.timeout_s"],
        ),
        calibration=CalibrationSettings(
            start=OuProcess(
                mu_m=v["calibration.start_mu_m"],
                sigma_m2=v["calibration.start_sigma_m2"],
                eta=v["calibration.start_eta"],
            ),
            targets=CalibrationTargets(targets),
            tol=v["calibration.tol"],
            max_iter=v["calibration.max_iter"],
        ),
        output_dir=Path(v["output_dir"]),
        seed=v["seed"],
        provenance=tuple(provenance),
    )


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    text = Path(path).read_text(encoding="utf-8") if path else ""
    return parse_config(text, overrides)


def provenance_log(config: RunConfig) -> str:
    lines = ["# key = value  [source]"]
    for dotted, value, source, _ in config.provenance:
        lines.append(f"{dotted} = {json.dumps(value)}  [{source}]")
    return "\n".join(lines) + "\n"

"""Discrete- and continuous-time equilibrium solvers for a marriage/divorce
search model with stochastic match quality."""

from marriage_hact.params import ModelParams, TrendPath, default_params
from marriage_hact.discrete import DtSolution, solve_dt
from marriage_hact.continuous import CtSolution, solve_ct

__all__ = [
    "ModelParams",
    "TrendPath",
    "default_params",
    "DtSolution",
    "solve_dt",
    "CtSolution",
    "solve_ct",
]

__version__ = "0.1.0"

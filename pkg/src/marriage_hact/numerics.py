"""Numerical kernels shared by the solvers.

Tridiagonal systems are handled by a Thomas factorization that is computed
once and applied many times; the generators built in :mod:`processes` are
diagonally dominant, so no pivoting is done (a pivot-magnitude guard catches
misuse). Everything else is a thin, validated wrapper around numpy/scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import optimize, special

from marriage_hact.errors import (
    InvalidInput,
    InvalidParameter,
    NonFiniteObjective,
    SingularMatrix,
)

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class TriDiag:
    """Banded storage of an N x N tridiagonal matrix.

    ``lower[i]`` is entry (i+1, i), ``upper[i]`` is entry (i, i+1).
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        for name in ("lower", "diag", "upper"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
        n = self.diag.shape[0]
        if n < 1 or self.lower.shape != (n - 1,) or self.upper.shape != (n - 1,):
            raise InvalidInput(
                f"inconsistent band lengths: lower={self.lower.shape}, "
                f"diag={self.diag.shape}, upper={self.upper.shape}"
            )

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def nbytes(self) -> int:
        return self.lower.nbytes + self.diag.nbytes + self.upper.nbytes

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def row_sums(self) -> np.ndarray:
        return self.matvec(np.ones(self.n))

    def transpose(self) -> "TriDiag":
        return TriDiag(self.upper, self.diag, self.lower)

    def shifted(self, scale: float, shift: float) -> "TriDiag":
        """Return ``shift * I + scale * self``."""
        return TriDiag(scale * self.lower, shift + scale * self.diag, scale * self.upper)

    def block(self, start: int) -> "TriDiag":
        """Trailing principal submatrix on indices ``start .. N-1``."""
        if not 0 <= start < self.n:
            raise InvalidInput(f"block start {start} outside 0..{self.n - 1}")
        return TriDiag(self.lower[start:], self.diag[start:], self.upper[start:])

    def to_dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        out[idx + 1, idx] = self.lower
        out[idx, idx + 1] = self.upper
        return out


@numba.njit(cache=True)
def _thomas_factor(lower, diag, upper, inv_denom, cp):
    # returns the index of the first bad pivot, or -1
    n = diag.shape[0]
    denom = diag[0]
    if abs(denom) < 1e-14:
        return 0
    inv_denom[0] = 1.0 / denom
    for i in range(1, n):
        cp[i - 1] = upper[i - 1] * inv_denom[i - 1]
        denom = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(denom) < 1e-14:
            return i
        inv_denom[i] = 1.0 / denom
    return -1


@numba.njit(cache=True)
def thomas_solve_into(lower, inv_denom, cp, rhs, out):
    """Forward/back substitution with a precomputed Thomas factorization."""
    n = rhs.shape[0]
    out[0] = rhs[0] * inv_denom[0]
    for i in range(1, n):
        out[i] = (rhs[i] - lower[i - 1] * out[i - 1]) * inv_denom[i]
    for i in range(n - 2, -1, -1):
        out[i] -= cp[i] * out[i + 1]


@dataclass(frozen=True)
class TriDiagFactorization:
    matrix: TriDiag
    inv_denom: np.ndarray = field(repr=False)
    cp: np.ndarray = field(repr=False)

    @property
    def nbytes(self) -> int:
        return self.matrix.nbytes + self.inv_denom.nbytes + self.cp.nbytes

    def solve(self, rhs: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        rhs = np.ascontiguousarray(rhs, dtype=np.float64)
        if rhs.shape != (self.matrix.n,):
            raise InvalidInput(f"rhs shape {rhs.shape} does not match N={self.matrix.n}")
        if out is None:
            out = np.empty_like(rhs)
        thomas_solve_into(self.matrix.lower, self.inv_denom, self.cp, rhs, out)
        return out


def tridiag_factor(m: TriDiag) -> TriDiagFactorization:
    """Factor ``m`` once so each later solve costs O(N)."""
    inv_denom = np.empty(m.n)
    cp = np.zeros(max(m.n - 1, 0))
    bad = _thomas_factor(m.lower, m.diag, m.upper, inv_denom, cp)
    if bad >= 0:
        raise SingularMatrix(f"pivot {bad} has magnitude below {PIVOT_TOL:g}")
    return TriDiagFactorization(m, inv_denom, cp)


def tridiag_solve(m: TriDiag, rhs: np.ndarray) -> np.ndarray:
    return tridiag_factor(m).solve(rhs)


def dense_solve(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = rhs`` by LU with partial pivoting (LAPACK gesv)."""
    a = np.asarray(a, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"matrix must be square, got shape {a.shape}")
    if rhs.shape[0] != a.shape[0]:
        raise InvalidInput(f"rhs length {rhs.shape[0]} does not match {a.shape[0]}")
    try:
        x = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("solution is not finite")
    return x


def _check_sigma(sigma):
    if not np.all(np.asarray(sigma) > 0):
        raise InvalidParameter(f"sigma must be positive, got {sigma}")


def normal_cdf(x, mu=0.0, sigma=1.0):
    _check_sigma(sigma)
    return special.ndtr((np.asarray(x, dtype=np.float64) - mu) / sigma)


def normal_pdf(x, mu=0.0, sigma=1.0):
    _check_sigma(sigma)
    z = (np.asarray(x, dtype=np.float64) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def minimize_scalar(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Bounded 1-D minimization (golden section with parabolic steps)."""
    if not lo < hi:
        raise InvalidInput(f"empty bracket [{lo}, {hi}]")

    def checked(x):
        y = f(x)
        if not np.isfinite(y):
            raise NonFiniteObjective(f"objective is {y} at x={x!r}")
        return y

    res = optimize.minimize_scalar(
        checked, bounds=(lo, hi), method="bounded", options={"xatol": tol, "maxiter": 1000}
    )
    return float(res.x)


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int
    trace: list = field(default_factory=list)  # best loss after each iteration
    message: str = ""


def minimize_simplex(f, x0, scale, tol: float = 1e-6, max_iter: int = 1000) -> SimplexResult:
    """Nelder-Mead minimization started from the simplex ``x0 + diag(scale)``.

    Convergence is declared when every vertex lies within ``tol`` of the best
    one. Hitting ``max_iter`` is reported through ``converged=False`` and the
    best point found is still returned.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    if x0.shape != scale.shape or x0.ndim != 1:
        raise InvalidInput("x0 and scale must be 1-D with equal length")
    f0 = f(x0)
    if not np.isfinite(f0):
        raise NonFiniteObjective(f"objective is {f0} at the starting point")

    simplex = np.vstack([x0, x0 + np.diag(scale)])
    trace = [float(f0)]

    def record(intermediate_result):
        trace.append(float(intermediate_result.fun))

    res = optimize.minimize(
        f,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={
            "initial_simplex": simplex,
            "xatol": tol,
            "fatol": np.inf,
            "maxiter": max_iter,
            "maxfev": 50 * max_iter,
        },
    )
    x, fun = res.x, float(res.fun)
    if fun > f0:
        x, fun = x0, float(f0)
    return SimplexResult(
        x=x,
        fun=fun,
        converged=bool(res.success),
        iterations=int(res.nit),
        evaluations=int(res.nfev),
        trace=trace,
        message=str(res.message),
    )


def loglog_slope(xs, ys) -> float:
    """OLS slope of log(ys) on log(xs)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.size < 2:
        raise InvalidInput("need at least two paired observations")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InvalidInput("log-log regression needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    return float(lx_c @ (ly - ly.mean()) / (lx_c @ lx_c))

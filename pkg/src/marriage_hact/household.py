"""Static household allocation and indirect utility v(p, w, z).

The household picks consumption c, home goods d and home hours h to maximize

    alpha*log((c - cbar)/z**phi) + (1 - alpha)/zeta * (n/z**phi)**zeta

subject to c + w*p*d = w*(z - h) and the CES home technology
n = (theta*d**kappa + (1 - theta)*h**kappa)**(1/kappa).

Cost minimization inside the home pins down the ratio d/h, and the budget
pins down c, so the problem reduces to a bracketed search over h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from marriage_hact.errors import InfeasibleBudget, NoInteriorOptimum
from marriage_hact.numerics import minimize_scalar
from marriage_hact.params import HomeTechnology, Preferences

H_TOL = 1e-10


@dataclass(frozen=True)
class Allocation:
    c: float
    d: float
    h: float
    l: float  # noqa: E741
    n: float
    value: float
    boundary: bool = False


def goods_hours_ratio(tech: HomeTechnology, p: float) -> float:
    """Cost-minimizing d/h at relative price p."""
    return (p * (1.0 - tech.theta) / tech.theta) ** (1.0 / (tech.kappa - 1.0))


def utility(prefs: Preferences, tech: HomeTechnology, c, d, h, z):
    n = (tech.theta * d**tech.kappa + (1.0 - tech.theta) * h**tech.kappa) ** (1.0 / tech.kappa)
    scale = z**prefs.phi
    return prefs.alpha * math.log((c - prefs.cbar) / scale) + (1.0 - prefs.alpha) / prefs.zeta * (
        n / scale
    ) ** prefs.zeta


def solve_allocation(
    prefs: Preferences, tech: HomeTechnology, p: float, w: float, z: int
) -> Allocation:
    if p <= 0 or w <= 0:
        raise InfeasibleBudget(f"prices must be positive (p={p}, w={w})")
    if w * z <= prefs.cbar:
        raise InfeasibleBudget(f"full income w*z={w * z} does not exceed cbar={prefs.cbar}")

    ratio = goods_hours_ratio(tech, p)
    spend = 1.0 + p * ratio  # market hours forgone per unit of h, including goods
    # n is linear in h along the optimal ray
    n_per_h = (tech.theta * ratio**tech.kappa + 1.0 - tech.theta) ** (1.0 / tech.kappa)
    h_hi = min(float(z), (z - prefs.cbar / w) / spend)
    if h_hi <= 0.0:
        raise NoInteriorOptimum(
            f"no h in (0, {z}) leaves consumption above cbar (upper bound {h_hi:g})"
        )

    scale = z**prefs.phi
    a, zeta = prefs.alpha, prefs.zeta

    def neg_u(h):
        c = w * (z - spend * h)
        return -(
            a * math.log((c - prefs.cbar) / scale) + (1.0 - a) / zeta * (n_per_h * h / scale) ** zeta
        )

    h = minimize_scalar(neg_u, 0.0, h_hi, tol=H_TOL)
    boundary = h < H_TOL or h > h_hi - H_TOL
    d = ratio * h
    c = w * (z - h) - w * p * d
    return Allocation(
        c=c,
        d=d,
        h=h,
        l=z - h,
        n=n_per_h * h,
        value=-neg_u(h),
        boundary=boundary,
    )


def indirect_utility(prefs: Preferences, tech: HomeTechnology, p: float, w: float, z: int) -> float:
    return solve_allocation(prefs, tech, p, w, z).value


def utility_gap(prefs: Preferences, tech: HomeTechnology, p: float, w: float) -> float:
    """v(p, w, 2) - v(p, w, 1)."""
    return indirect_utility(prefs, tech, p, w, 2) - indirect_utility(prefs, tech, p, w, 1)

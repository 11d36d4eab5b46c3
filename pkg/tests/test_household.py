import numpy as np
import pytest
from oracles import household_grid_oracle

from marriage_hact.errors import InfeasibleBudget
from marriage_hact.experiments import prices_at
from marriage_hact.household import (
    goods_hours_ratio,
    indirect_utility,
    solve_allocation,
    utility,
    utility_gap,
)
from marriage_hact.params import HomeTechnology, Preferences, TrendPath

P0, W0 = 9.959, 1.0


def budget_gap(a, p, w, z):
    return abs(a.c + w * p * a.d - w * (z - a.h))


def test_foc_ratio_at_interior_optimum(params):
    a = solve_allocation(params.prefs, params.tech, P0, W0, 1)
    assert not a.boundary
    th, ka = params.tech.theta, params.tech.kappa
    assert a.d / a.h == pytest.approx((P0 * (1 - th) / th) ** (1 / (ka - 1)), rel=1e-8)
    assert budget_gap(a, P0, W0, 1) <= 1e-10
    assert a.l == pytest.approx(1 - a.h)
    assert 0 < a.h < 1 and a.c > params.prefs.cbar


@pytest.mark.parametrize("z", [1, 2])
def test_value_matches_grid_oracle(params, z):
    a = solve_allocation(params.prefs, params.tech, P0, W0, z)
    oracle, _, _ = household_grid_oracle(params.prefs, params.tech, P0, W0, z)
    assert a.value >= oracle - 1e-4
    assert a.value == pytest.approx(oracle, abs=1e-3)


def test_marriage_gain_positive_and_confirmed_by_oracle(params):
    gap = utility_gap(params.prefs, params.tech, P0, W0)
    o1, _, _ = household_grid_oracle(params.prefs, params.tech, P0, W0, 1)
    o2, _, _ = household_grid_oracle(params.prefs, params.tech, P0, W0, 2)
    assert gap > 0 and o2 - o1 > 0
    assert gap == pytest.approx(o2 - o1, abs=2e-3)


def test_grid_oracle_dominance_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(100):
        prefs = Preferences(
            alpha=rng.uniform(0.1, 0.9),
            zeta=rng.uniform(-3.0, -0.2),
            cbar=rng.uniform(0.0, 0.3),
            phi=rng.uniform(0.3, 1.0),
        )
        tech = HomeTechnology(theta=rng.uniform(0.1, 0.9), kappa=rng.uniform(0.05, 0.8))
        p, w, z = rng.uniform(0.5, 15.0), rng.uniform(0.5, 5.0), int(rng.integers(1, 3))
        a = solve_allocation(prefs, tech, p, w, z)
        oracle, _, _ = household_grid_oracle(prefs, tech, p, w, z, n_h=300, n_d=300)
        assert a.value >= oracle - 1e-4
        assert budget_gap(a, p, w, z) <= 1e-10
        assert 0 <= a.h <= z and a.c > prefs.cbar
        assert a.value == pytest.approx(utility(prefs, tech, a.c, a.d, a.h, z), abs=1e-12)


def test_increasing_in_wage(params):
    values = [indirect_utility(params.prefs, params.tech, P0, w, 1) for w in np.linspace(0.5, 5, 10)]
    assert np.all(np.diff(values) > 0)


def test_nonincreasing_in_price(params):
    values = [indirect_utility(params.prefs, params.tech, p, W0, 2) for p in np.linspace(1, 20, 10)]
    assert np.all(np.diff(values) <= 0)


def test_gap_shrinks_along_trend(params):
    path = TrendPath()
    gaps = [utility_gap(params.prefs, params.tech, *prices_at(path, y)[::-1]) for y in path.years]
    assert np.all(np.diff(gaps) < 0)


def test_goods_hours_ratio_formula(params):
    th, ka = params.tech.theta, params.tech.kappa
    assert goods_hours_ratio(params.tech, 2.0) == pytest.approx((2 * (1 - th) / th) ** (1 / (ka - 1)))


@pytest.mark.parametrize("p, w", [(P0, 0.1), (P0, 0.131), (0.0, 1.0), (P0, -1.0)])
def test_infeasible_budget(params, p, w):
    with pytest.raises(InfeasibleBudget):
        solve_allocation(params.prefs, params.tech, p, w, 1)

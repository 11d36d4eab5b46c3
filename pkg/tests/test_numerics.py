import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import erf_series_cdf

from marriage_hact.errors import InvalidInput, InvalidParameter, NonFiniteObjective, SingularMatrix
from marriage_hact.numerics import (
    TriDiag,
    dense_solve,
    loglog_slope,
    minimize_scalar,
    minimize_simplex,
    normal_cdf,
    normal_pdf,
    tridiag_factor,
    tridiag_solve,
)


def random_dominant(n, rng):
    lower = rng.uniform(-1, 1, n - 1)
    upper = rng.uniform(-1, 1, n - 1)
    off = np.zeros(n)
    off[1:] += np.abs(lower)
    off[:-1] += np.abs(upper)
    diag = (off + rng.uniform(0.5, 2.0, n)) * rng.choice([-1.0, 1.0], n)
    return TriDiag(lower, diag, upper)


# tridiagonal ----------------------------------------------------------------


def test_identity_factorization_solves_to_rhs():
    eye = TriDiag(np.zeros(2), np.ones(3), np.zeros(2))
    np.testing.assert_array_equal(tridiag_factor(eye).solve(np.array([1.0, 2.0, 3.0])), [1, 2, 3])


def test_second_difference_system():
    m = TriDiag(-np.ones(2), 2 * np.ones(3), -np.ones(2))
    x = tridiag_solve(m, np.array([1.0, 0.0, 1.0]))
    np.testing.assert_allclose(x, [1, 1, 1], atol=1e-14)
    np.testing.assert_allclose(m.to_dense() @ x, [1, 0, 1], atol=1e-14)


def test_random_200_matches_dense_elimination():
    rng = np.random.default_rng(0)
    m = random_dominant(200, rng)
    rhs = rng.normal(size=200)
    np.testing.assert_allclose(tridiag_solve(m, rhs), np.linalg.solve(m.to_dense(), rhs), atol=1e-10, rtol=0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 500), seed=st.integers(0, 2**32 - 1))
def test_tridiag_agrees_with_dense_solve(n, seed):
    rng = np.random.default_rng(seed)
    m = random_dominant(n, rng)
    rhs = rng.normal(size=n)
    np.testing.assert_allclose(tridiag_solve(m, rhs), dense_solve(m.to_dense(), rhs), atol=1e-10, rtol=0)


def test_factor_once_solve_many_is_bitwise_identical():
    rng = np.random.default_rng(1)
    m = random_dominant(50, rng)
    fac = tridiag_factor(m)
    for _ in range(5):
        rhs = rng.normal(size=50)
        assert np.array_equal(fac.solve(rhs), tridiag_solve(m, rhs))


def test_zero_pivot_is_singular():
    with pytest.raises(SingularMatrix):
        tridiag_factor(TriDiag(np.ones(1), np.array([0.0, 1.0]), np.ones(1)))


def test_inconsistent_bands_rejected():
    with pytest.raises(InvalidInput):
        TriDiag(np.ones(3), np.ones(3), np.ones(2))


def test_tridiag_helpers_match_dense():
    rng = np.random.default_rng(2)
    m = random_dominant(7, rng)
    d = m.to_dense()
    x = rng.normal(size=7)
    np.testing.assert_allclose(m.matvec(x), d @ x)
    np.testing.assert_allclose(m.row_sums(), d.sum(axis=1))
    np.testing.assert_allclose(m.transpose().to_dense(), d.T)
    np.testing.assert_allclose(m.shifted(-2.0, 3.0).to_dense(), 3 * np.eye(7) - 2 * d)
    np.testing.assert_allclose(m.block(3).to_dense(), d[3:, 3:])


# dense ----------------------------------------------------------------------


def test_dense_identity():
    np.testing.assert_array_equal(dense_solve(np.eye(2), np.array([5.0, -2.0])), [5, -2])


def test_dense_hand_elimination():
    np.testing.assert_allclose(dense_solve(np.array([[2.0, 1.0], [1.0, 3.0]]), np.array([3.0, 4.0])), [1, 1])


def test_dense_random_residual():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(50, 50)) + 50 * np.eye(50)
    rhs = rng.normal(size=50)
    x = dense_solve(a, rhs)
    assert np.max(np.abs(a @ x - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_dense_singular():
    with pytest.raises(SingularMatrix):
        dense_solve(np.zeros((2, 2)), np.ones(2))


# normal ---------------------------------------------------------------------


def test_cdf_at_mean_is_half():
    assert normal_cdf(1.3, 1.3, 0.7) == 0.5


@given(x=st.floats(-50, 50), mu=st.floats(-5, 5), s=st.floats(0.01, 10))
def test_cdf_reflection(x, mu, s):
    assert normal_cdf(x, mu, s) + normal_cdf(2 * mu - x, mu, s) == pytest.approx(1.0, abs=1e-14)


def test_cdf_975_quantile_against_series():
    mu, s = -4.252, math.sqrt(8.063)
    x = mu + 1.959964 * s
    assert float(normal_cdf(x, mu, s)) == pytest.approx(0.975, abs=1e-6)
    assert float(normal_cdf(x, mu, s)) == pytest.approx(erf_series_cdf(x, mu, s), abs=1e-12)


@given(x=st.floats(-3.9, 3.9))
def test_cdf_matches_series_oracle(x):
    assert float(normal_cdf(x)) == pytest.approx(erf_series_cdf(x), abs=1e-12)


def test_cdf_monotone_and_pdf_integrates():
    x = np.linspace(-8, 8, 20001)
    assert np.all(np.diff(normal_cdf(x)) >= 0)
    pdf = normal_pdf(x)
    assert np.all(pdf >= 0)
    assert np.trapezoid(pdf, x) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_nonpositive_sigma(sigma):
    with pytest.raises(InvalidParameter):
        normal_cdf(0.0, 0.0, sigma)
    with pytest.raises(InvalidParameter):
        normal_pdf(0.0, 0.0, sigma)


# scalar minimization --------------------------------------------------------


def test_scalar_quadratic_vertex():
    assert minimize_scalar(lambda x: (x - 2) ** 2, 0, 5, 1e-8) == pytest.approx(2, abs=1e-6)


def test_scalar_cosine_minimum():
    assert minimize_scalar(math.cos, 0, 2 * math.pi, 1e-8) == pytest.approx(math.pi, abs=1e-6)


def test_scalar_nonfinite_objective():
    with pytest.raises(NonFiniteObjective):
        minimize_scalar(lambda x: math.nan, 0, 1)


def test_scalar_empty_bracket():
    with pytest.raises(InvalidInput):
        minimize_scalar(lambda x: x, 1, 1)


# simplex --------------------------------------------------------------------


def test_simplex_sphere():
    res = minimize_simplex(lambda x: float(x @ x), np.ones(3), np.full(3, 0.5), tol=1e-8, max_iter=5000)
    assert res.converged
    np.testing.assert_allclose(res.x, 0, atol=1e-4)


def test_simplex_rosenbrock():
    def rosen(x):
        return 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2

    res = minimize_simplex(rosen, np.array([-1.2, 1.0]), np.array([0.1, 0.1]), tol=1e-10, max_iter=5000)
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-3)
    assert res.fun <= 1e-6


def test_simplex_trace_nonincreasing_and_budget_flag():
    res = minimize_simplex(lambda x: float(np.sum((x - 3) ** 2)), np.zeros(3), np.ones(3), max_iter=5)
    assert not res.converged
    assert np.all(np.diff(res.trace) <= 0)
    assert res.fun <= res.trace[0]


def test_simplex_nonfinite_start():
    with pytest.raises(NonFiniteObjective):
        minimize_simplex(lambda x: math.inf, np.zeros(2), np.ones(2))


# log-log slope --------------------------------------------------------------


def test_slope_linear_law():
    xs = np.array([400, 800, 1600, 3200])
    assert loglog_slope(xs, 3 * xs) == pytest.approx(1.0, abs=1e-12)


def test_slope_quadratic_law():
    xs = np.array([400, 800, 1600, 3200])
    assert loglog_slope(xs, 0.5 * xs**2) == pytest.approx(2.0, abs=1e-12)


@given(st.lists(st.floats(-0.05, 0.05), min_size=6, max_size=6))
def test_slope_noisy_power_law(eps):
    xs = np.array([100, 200, 400, 800, 1600, 3200], dtype=float)
    assert 1.35 <= loglog_slope(xs, xs**1.5 * (1 + np.array(eps))) <= 1.65


def test_slope_rejects_nonpositive():
    with pytest.raises(InvalidInput):
        loglog_slope([1, 2], [1, 0])

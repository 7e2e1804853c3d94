import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kkt_oracle, random_standardized
from srmlasso.data import Dataset, SimulationConfig, simulate_dgp, standardize
from srmlasso.errors import RankDeficient
from srmlasso.grid import GridSpec, LINEAR, validate_lambdas
from srmlasso.solvers import (
    KKT_TOL,
    fsr_fit,
    kkt_violation,
    lambda_max,
    lasso_fit,
    lasso_path,
    ols_fit,
    soft_threshold,
)


def test_ols_exact_interpolation():
    cfg = SimulationConfig(n=40, p=10, noise_sd=0.0, seed=1)
    raw, beta = simulate_dgp(cfg)
    # regress on raw columns: the noiseless model has no intercept and is recovered exactly
    d = Dataset(raw.y, raw.X, standardized=True)
    np.testing.assert_allclose(ols_fit(d).coefficients, beta, atol=1e-8)


def test_ols_univariate_closed_form(rng):
    d = random_standardized(rng, 30, 1)
    b = ols_fit(d).coefficients[0]
    assert b == pytest.approx(d.X[:, 0] @ d.y / d.n, abs=1e-12)


def test_ols_normal_equations(design_200):
    d, _ = design_200
    fit = ols_fit(d)
    r = d.y - d.X @ fit.coefficients
    assert np.max(np.abs(d.X.T @ r / d.n)) < 1e-8
    assert fit.training_error == pytest.approx(r @ r / d.n, abs=1e-10)


def test_ols_rank_deficient():
    d, _ = simulate_dgp(SimulationConfig(n=250, p=300, seed=0))
    with pytest.raises(RankDeficient):
        ols_fit(standardize(d)[0])


def test_lasso_zero_above_lambda_max(design_200):
    d, _ = design_200
    lmax = lambda_max(d)
    assert lmax == pytest.approx(2 * np.max(np.abs(d.X.T @ d.y)) / d.n)
    for lam in (lmax, 1.5 * lmax):
        assert not np.any(lasso_fit(d, lam).coefficients)
    assert np.any(lasso_fit(d, 0.99 * lmax).coefficients)


def test_lasso_zero_penalty_is_ols(rng):
    d = random_standardized(rng, 60, 8, corr=0.5)
    np.testing.assert_allclose(lasso_fit(d, 0.0).coefficients, ols_fit(d).coefficients, atol=1e-6)


def test_orthonormal_design_soft_thresholds():
    n = 4
    X = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    y = np.array([3.0, 1.0, -0.5, -2.5])
    y = (y - y.mean()) / y.std()
    d = Dataset(y, X, standardized=True)
    for lam in (0.1, 0.5, 1.2):
        expect = soft_threshold(X.T @ y / n, lam / 2)
        got = lasso_fit(d, lam).coefficients
        np.testing.assert_allclose(got, expect, atol=1e-12)
        np.testing.assert_allclose(got, kkt_oracle(X, y, lam), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 3), frac=st.floats(0.01, 1.1))
def test_lasso_matches_sign_pattern_oracle(seed, p, frac):
    rng = np.random.default_rng(seed)
    d = random_standardized(rng, 20, p, corr=0.6)
    lam = frac * lambda_max(d)
    oracle = kkt_oracle(d.X, d.y, lam)
    np.testing.assert_allclose(lasso_fit(d, lam).coefficients, oracle, atol=1e-6)
    # the plain sweeps reach the same point without the exact solve
    plain = lasso_fit(d, lam, tol=1e-10, polish=False)
    np.testing.assert_allclose(plain.coefficients, oracle, atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(0.001, 0.9))
def test_objective_never_increases(seed, frac):
    rng = np.random.default_rng(seed)
    d = random_standardized(rng, 40, 25, corr=0.8)
    fit = lasso_fit(d, frac * lambda_max(d), polish=False, record_history=True)
    h = fit.objective_history
    assert h.size == fit.iterations
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]).max())


def test_kkt_on_path(design_200):
    d, _ = design_200
    path = lasso_path(d)
    assert all(f.converged for f in path)
    assert max(kkt_violation(f.coefficients, d, f.lambda_) for f in path) <= KKT_TOL


def test_path_shape_and_monotonicity(design_200):
    d, _ = design_200
    path = lasso_path(d)
    lams = np.array([f.lambda_ for f in path])
    assert lams.size == 101 and lams[-1] == 0.0 and lams[0] == lambda_max(d)
    assert np.all(np.diff(lams) < 0)
    assert not np.any(path[0].coefficients)
    te = np.array([f.training_error for f in path])
    l1 = np.array([f.l1_norm for f in path])
    assert np.all(np.diff(te) <= 1e-8)  # error grows with the penalty
    assert np.all(np.diff(l1) >= -1e-8)
    ols_l1 = np.abs(ols_fit(d).coefficients).sum()
    assert np.all(l1 <= ols_l1 + 1e-8)


def test_warm_path_equals_cold_starts(design_200):
    d, _ = design_200
    lams = lambda_max(d) * np.array([0.5, 0.1, 0.02, 0.004])
    path = lasso_path(d, lams)
    for f, lam in zip(path, lams):
        np.testing.assert_allclose(f.coefficients, lasso_fit(d, lam).coefficients, atol=1e-6)


def test_fit_result_invariants(design_200):
    d, _ = design_200
    fit = lasso_fit(d, 0.05)
    assert fit.support == tuple(np.flatnonzero(fit.coefficients))
    r = d.y - d.X @ fit.coefficients
    assert fit.training_error == pytest.approx(r @ r / d.n, abs=1e-10)
    with pytest.raises(ValueError):
        fit.coefficients[0] = 1.0


def test_max_iter_flags_nonconvergence(design_200):
    d, _ = design_200
    fit = lasso_fit(d, 1e-4, max_iter=2, polish=False)
    assert not fit.converged and fit.iterations == 2


def test_grid_modes():
    g = GridSpec()
    lams = g.lambdas(2.0, 100, 10)
    assert lams.size == 101 and lams[0] == 2.0 and lams[-1] == 0.0
    assert lams[-2] == pytest.approx(2e-3)
    assert GridSpec().lambdas(2.0, 10, 10).size == 100  # no zero when n <= p
    lin = GridSpec(mode=LINEAR, num_points=5).lambdas(2.0, 100, 10)
    np.testing.assert_allclose(lin, [2.0, 1.5, 1.0, 0.5, 0.0])
    with pytest.raises(ValueError):
        validate_lambdas([1.0, 1.0])


def test_fsr_picks_dominant_column(rng):
    n = 100
    X = rng.standard_normal((n, 6))
    y = 3 * X[:, 0] + 1e-3 * rng.standard_normal(n)
    d = standardize(Dataset(y, X))[0]
    fit = fsr_fit(d)
    assert fit.selection_order[0] == 0
    assert fsr_fit(d, max_vars=1).support == (0,)


def test_fsr_threshold_and_cap(design_200):
    d, _ = design_200
    assert fsr_fit(d, corr_threshold=1.0).support == ()
    for k in (1, 5, 20):
        assert len(fsr_fit(d, max_vars=k).support) <= k
    with pytest.raises(ValueError):
        fsr_fit(d, max_vars=0)


def test_fsr_deterministic_and_skips_collinear(rng):
    X = rng.standard_normal((30, 4))
    X = np.column_stack([X, X[:, 0] + X[:, 1]])
    y = X[:, 0] + X[:, 1] + 0.1 * rng.standard_normal(30)
    d = standardize(Dataset(y, X))[0]
    a, b = fsr_fit(d), fsr_fit(d)
    assert a.selection_order == b.selection_order
    assert len(set(a.selection_order) & {0, 1, 4}) <= 2


def test_fsr_refit_is_least_squares_on_selected(design_200):
    d, _ = design_200
    fit = fsr_fit(d, max_vars=12)
    S = list(fit.support)
    r = d.y - d.X @ fit.coefficients
    assert np.max(np.abs(d.X[:, S].T @ r / d.n)) < 1e-8


def test_fsr_wide_design_stays_below_n():
    d, _ = simulate_dgp(SimulationConfig(n=60, p=120, seed=3))
    fit = fsr_fit(standardize(d)[0])
    assert len(fit.support) <= 59

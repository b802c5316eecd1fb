import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcpr import (
    Dataset,
    InputError,
    ModelSpec,
    RankDeficientError,
    TrendTerm,
    detrend,
    fit_at_theta,
    fit_gcpr,
    fit_gcpr_multistart,
    ols_given_theta,
    profile_rss,
    rss_profile_stochastic_power,
)
from gcpr.core import GAP_TOL
from gcpr.nls import GridSpec, feasible_grid

T_FREE = ModelSpec((TrendTerm.free(0.05, 10.0),), ())


def test_exact_linear_trend():
    T = 20
    t = np.arange(1, T + 1.0)
    r = ols_given_theta(ModelSpec((TrendTerm.at(0), TrendTerm.at(1)), ()), Dataset.from_arrays(3 + 2 * t), [0, 1])
    np.testing.assert_allclose(r.tau, [3, 2], atol=1e-10)
    assert r.rss < 1e-18


def test_pseudoinverse_oracle(rng):
    T = 30
    x = np.cumsum(rng.standard_normal(T))
    y = rng.standard_normal(T) + 0.3 * x
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.at(1.7)), (2,))
    r = ols_given_theta(spec, Dataset.from_arrays(y, x), [0, 1, 1.7])
    t = np.arange(1, T + 1.0)
    Z = np.column_stack([np.ones(T), t, t**1.7, x, x**2])
    oracle = np.linalg.pinv(Z) @ y
    np.testing.assert_allclose(np.r_[r.tau, r.phi], oracle, rtol=1e-8, atol=1e-10)


def test_rank_deficiency_detected():
    spec = ModelSpec((TrendTerm.at(1), TrendTerm.at(1.0 + 1e-14)), (), gap=1e-15)
    with pytest.raises(RankDeficientError):
        ols_given_theta(spec, Dataset.from_arrays(np.arange(10.0)), [1, 1.0 + 1e-14])


@given(st.integers(0, 10_000), st.floats(0.2, 3.0))
def test_ols_orthogonality(seed, theta):
    g = np.random.default_rng(seed)
    T = 60
    x = np.cumsum(g.standard_normal(T))
    y = g.standard_normal(T) + x
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.at(theta + 1.1)), (2,))
    r = ols_given_theta(spec, Dataset.from_arrays(y, x), [0, theta + 1.1])
    Z = r.design.Z
    assert np.max(np.abs(Z.T @ r.residuals)) <= 1e-8 * np.linalg.norm(y) * np.sqrt(T)


def test_noise_free_power_recovery():
    t = np.arange(1, 101.0)
    fit = fit_gcpr(T_FREE, Dataset.from_arrays(t**1.7))
    assert fit.theta[0] == pytest.approx(1.7, abs=1e-4)
    assert fit.rss <= 1e-12 * np.sum((t**1.7) ** 2)


def test_theta_consistency_seeded_runs():
    T = 500
    t = np.arange(1, T + 1.0)
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.free()), ())
    grid = GridSpec(step=0.01, lower=1.5, upper=2.5)
    hits = 0
    for s in range(200):
        u = np.random.default_rng(s).normal(0, 0.1, T)
        fit = fit_gcpr(spec, Dataset.from_arrays(7 + 0.05 * t - 5e-4 * t**2 + u), grid)
        hits += 1.95 <= fit.theta[2] <= 2.05
    assert hits >= 198


def test_profile_optimality_and_concentration(trend_data, m3_spec):
    fit = fit_gcpr(m3_spec, trend_data, keep_profile=True)
    prof = fit.theta_profile
    assert fit.objective <= np.nanmin(prof.rss)
    assert fit.rss <= np.nanmin(prof.rss) * (1 + 1e-12)
    ols = ols_given_theta(m3_spec, trend_data, fit.theta)
    np.testing.assert_array_equal(fit.tau, ols.tau)
    np.testing.assert_array_equal(fit.phi, ols.phi)
    assert fit.theta[2] == pytest.approx(2.0, abs=0.1)


@given(st.integers(0, 10_000))
def test_profile_optimality_property(seed):
    g = np.random.default_rng(seed)
    T = 80
    t = np.arange(1, T + 1.0)
    x = np.cumsum(g.standard_normal(T))
    y = 1 + 0.01 * t**1.5 + x + g.standard_normal(T)
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.free(0.05, 4.0)), (1,))
    fit = fit_gcpr(spec, Dataset.from_arrays(y, x), GridSpec(step=0.05), keep_profile=True)
    assert fit.objective <= np.nanmin(fit.theta_profile.rss)
    assert not 0 < abs(fit.theta[1]) < 0.05 - 1e-12


def test_refinement_respects_gap():
    T = 200
    t = np.arange(1, T + 1.0)
    y = 2 + 0.5 * t + np.random.default_rng(0).normal(0, 0.01, T)
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.free()), ())
    grid = feasible_grid(spec, GridSpec())
    assert not np.any((grid > 0.95 + 1e-9) & (grid < 1.05 - 1e-9))
    fit = fit_gcpr(spec, Dataset.from_arrays(y), GridSpec())
    assert abs(fit.theta[2] - 1.0) >= 0.05 - 1e-12
    assert abs(fit.theta[2]) >= 0.05 - 1e-12


def test_profile_rss_matches_per_point_ols(trend_data, m3_spec):
    pts = [0.5, 1.6, 2.3]
    prof = profile_rss(m3_spec, trend_data, pts)
    for th, r in zip(pts, prof.rss):
        oracle = ols_given_theta(m3_spec, trend_data, [0, 1, th]).rss
        assert r == pytest.approx(oracle, rel=1e-10)


def test_profile_threads_identical(trend_data, m3_spec):
    pts = np.linspace(1.1, 4, 50)
    a = profile_rss(m3_spec, trend_data, pts, threads=1).rss
    b = profile_rss(m3_spec, trend_data, pts, threads=3).rss
    np.testing.assert_array_equal(a, b)


def test_empty_grid_rejected(trend_data, m3_spec):
    with pytest.raises(InputError):
        fit_gcpr(m3_spec, trend_data, GridSpec(points=(0.97, 1.0)))


def test_fit_at_theta_fixes_powers(trend_data, m3_spec):
    fit = fit_at_theta(m3_spec, trend_data, [0, 1, 2])
    assert fit.spec.n_free == 0
    assert fit.gamma().size == 5
    assert fit.spec.param_names()[0] == "tau1"


def test_multistart_exact_recovery():
    t = np.arange(1, 201.0)
    spec = ModelSpec((TrendTerm.free(0.05, 4), TrendTerm.free(0.05, 4)), ())
    fit = fit_gcpr_multistart(spec, Dataset.from_arrays(t**0.5 + t**2), starts=20)
    np.testing.assert_allclose(np.sort(fit.theta), [0.5, 2.0], atol=1e-3)


def test_multistart_respects_gap():
    t = np.arange(1, 201.0)
    spec = ModelSpec((TrendTerm.free(0.05, 4), TrendTerm.free(0.05, 4)), (), gap=3.0)
    fit = fit_gcpr_multistart(spec, Dataset.from_arrays(t**0.5 + t**2), starts=3)
    th = np.sort(fit.theta)
    assert th[1] - th[0] >= 3.0 - 1e-12
    assert np.all(th >= 0.05 - GAP_TOL) and np.all(th <= 4 + GAP_TOL)


def test_multistart_beats_dense_grid():
    g = np.random.default_rng(3)
    t = np.arange(1, 101.0)
    y = t**0.8 + 0.01 * t**2.2 + g.standard_normal(100)
    spec = ModelSpec((TrendTerm.free(0.1, 3), TrendTerm.free(0.1, 3)), ())
    data = Dataset.from_arrays(y)
    fit = fit_gcpr_multistart(spec, data, starts=20)
    ax = np.linspace(0.1, 3, 50)
    best = np.inf
    for a in ax:
        for b in ax:
            if b - a >= spec.gap:
                best = min(best, ols_given_theta(spec, data, [a, b]).rss)
    assert fit.rss <= best + 1e-8


def test_multistart_needs_two_free():
    with pytest.raises(InputError):
        fit_gcpr_multistart(T_FREE, Dataset.from_arrays(np.arange(1, 20.0)))


def test_stochastic_power_noise_free():
    g = np.random.default_rng(1)
    x = 5 + np.abs(np.cumsum(g.standard_normal(100)))
    prof = rss_profile_stochastic_power(Dataset.from_arrays(1 + x**2, x), [1.5, 2.0, 2.5])
    assert prof.rss[1] < 1e-12 * np.sum((1 + x**2) ** 2)
    assert prof.rss[0] > 1e-6 and prof.rss[2] > 1e-6
    assert not prof.used_abs


def test_stochastic_power_per_point_oracle(trend_data):
    pts = [1.5, 2.5, 3.5]
    with pytest.warns(RuntimeWarning):
        prof = rss_profile_stochastic_power(trend_data, pts)
    assert prof.used_abs
    T = trend_data.T
    t = np.arange(1, T + 1.0)
    x = trend_data.x[:, 0]
    for th, r in zip(pts, prof.rss):
        Z = np.column_stack([np.ones(T), t, x, np.abs(x) ** th])
        e = trend_data.y - Z @ np.linalg.lstsq(Z, trend_data.y, rcond=None)[0]
        assert r == pytest.approx(e @ e, rel=1e-10)


def test_stochastic_power_rejects_grid_near_one(trend_data):
    with pytest.raises(InputError):
        rss_profile_stochastic_power(trend_data, [0.98, 2.0])


def test_detrend():
    t = np.arange(1, 11.0)
    assert np.max(np.abs(detrend(5 + 3 * t))) < 1e-12
    r = detrend(np.arange(1, 6.0) ** 2)
    np.testing.assert_allclose(r, [2, -1, -2, -1, 2], atol=1e-10)
    z = np.random.default_rng(0).standard_normal(50)
    e = detrend(z)
    assert abs(e.mean()) < 1e-12
    assert abs(e @ np.arange(1, 51.0)) < 1e-8 * 50
    with pytest.raises(InputError):
        detrend([1.0, 2.0])

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from gcpr import (
    Dataset,
    InputError,
    LrvSet,
    ModelSpec,
    TrendTerm,
    fit_gcpr,
    fmols_fit,
    fmols_pipeline,
    fmols_t_stat_phi,
    ols_given_theta,
)

SPEC = ModelSpec((TrendTerm.at(0), TrendTerm.at(1), TrendTerm.free()), (2,))


def make_data(seed, T=60, m=1):
    g = np.random.default_rng(seed)
    t = np.arange(1, T + 1.0)
    x = np.cumsum(g.standard_normal((T, m)), axis=0)
    y = 2 + 0.1 * t + 0.01 * t**1.5 + x.sum(axis=1) - 0.05 * x[:, 0] ** 2 + g.standard_normal(T)
    return Dataset.from_arrays(y, x)


def no_correction_lrv(m=1, seed=0):
    """Omega_uv = 0, Delta_vu = 0 and Delta_vv arbitrary."""
    g = np.random.default_rng(seed)
    A = g.standard_normal((m, m))
    dvv = A @ A.T + np.eye(m)
    sigma = np.eye(m + 1)
    delta = np.zeros((m + 1, m + 1))
    delta[0, 0] = 1.3
    delta[1:, 1:] = dvv
    # keep Omega_uv = Delta_uv + Delta_vu' - Sigma_uv = 0
    return LrvSet.from_matrices(sigma, delta)


@given(st.integers(0, 10_000), st.floats(1.1, 3.0))
def test_no_correction_identity(seed, theta):
    data = make_data(seed)
    lrv = no_correction_lrv(seed=seed)
    assert np.allclose(lrv.omega_uv, 0) and np.allclose(lrv.delta_vu, 0)
    fm = fmols_fit(SPEC, data, lrv, [0, 1, theta], include_first=True)
    ols = ols_given_theta(SPEC, data, [0, 1, theta])
    np.testing.assert_allclose(fm.coefficients(), np.r_[ols.tau, ols.phi], rtol=1e-10, atol=1e-10)
    assert np.all(fm.bias_correction == 0)


def test_no_correction_default_rows():
    data = make_data(3)
    fm = fmols_fit(SPEC, data, no_correction_lrv(), [0, 1, 1.5])
    t = np.arange(2, data.T + 1.0)
    x = data.x[1:, 0]
    Z = np.column_stack([np.ones_like(t), t, t**1.5, x, x**2])
    oracle = np.linalg.lstsq(Z, data.y[1:], rcond=None)[0]
    np.testing.assert_allclose(fm.coefficients(), oracle, rtol=1e-9, atol=1e-10)


def test_transcription_oracle():
    data = make_data(5, T=20, m=2)
    spec = ModelSpec((TrendTerm.at(0), TrendTerm.at(1.5)), (2, 1))
    sigma = np.array([[1.0, 0.3, -0.1], [0.3, 1.2, 0.2], [-0.1, 0.2, 0.9]])
    delta = np.array([[1.4, 0.5, 0.1], [0.2, 1.6, 0.3], [0.0, 0.1, 1.2]])
    lrv = LrvSet.from_matrices(sigma, delta)
    fm = fmols_fit(spec, data, lrv, [0, 1.5])

    O = delta + delta.T - sigma
    Ovv, Ovu = O[1:, 1:], O[1:, 0]
    T = data.T
    t = np.arange(2, T + 1.0)
    x = data.x[1:]
    dx = np.diff(data.x, axis=0)
    yp = data.y[1:] - dx @ np.linalg.solve(Ovv, Ovu)
    dplus = delta[1:, 0] - delta[1:, 1:] @ np.linalg.solve(Ovv, Ovu)
    n = T - 1
    A = np.array([0, 0, dplus[0] * n, dplus[0] * 2 * x[:, 0].sum(), dplus[1] * n])
    Z = np.column_stack([np.ones(n), t**1.5, x[:, 0], x[:, 0] ** 2, x[:, 1]])
    oracle = np.linalg.solve(Z.T @ Z, Z.T @ yp - A)
    np.testing.assert_allclose(fm.coefficients(), oracle, rtol=1e-8)
    np.testing.assert_allclose(fm.bias_correction, A, rtol=1e-12)

    # t statistic
    k = 1
    var = lrv.omega_u_dot_v * np.linalg.inv(Z.T @ Z)[2 + k, 2 + k]
    tt = fmols_t_stat_phi(fm, lrv, "phi2", null_value=0.1)
    assert tt.t_stat == pytest.approx((oracle[2 + k] - 0.1) / np.sqrt(var), rel=1e-8)
    assert tt.p_value == pytest.approx(2 * norm.sf(abs(tt.t_stat)))
    assert tt.reject == (tt.p_value < 0.05)


def test_t_stat_zero_at_estimate():
    data = make_data(1)
    fm, lrv = fmols_pipeline(SPEC, data, theta=[0, 1, 1.5])
    assert fmols_t_stat_phi(fm, lrv, 0, null_value=fm.phi_plus[0]).t_stat == 0.0
    with pytest.raises(InputError):
        fmols_t_stat_phi(fm, lrv, "tau1")
    with pytest.raises(InputError):
        fmols_t_stat_phi(fm, lrv, 5)


def test_feasible_equals_supplied_estimate():
    data = make_data(2, T=120)
    fm_feasible, lrv = fmols_pipeline(SPEC, data)
    theta_hat = fit_gcpr(SPEC, data).theta
    fm_sup = fmols_fit(SPEC, data, lrv, theta_hat)
    np.testing.assert_array_equal(fm_feasible.coefficients(), fm_sup.coefficients())
    assert fm_feasible.theta_source == "estimated" and fm_sup.theta_source == "supplied"


def test_lrv_dimension_check():
    with pytest.raises(InputError):
        fmols_fit(SPEC, make_data(0), LrvSet.from_matrices(np.eye(3), np.eye(3)), [0, 1, 1.5])

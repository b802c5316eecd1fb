import numpy as np
import pytest
from scipy import stats

from gcpr import (
    Dataset,
    InputError,
    LrvSet,
    ModelSpec,
    ParamVector,
    SimConfig,
    TrendTerm,
    confidence_interval,
    fit_gcpr,
    run_sim_inference,
    scaling_matrices,
    simulate_draw,
    test_coefficient as coef_test,
)
from gcpr.nls import GcprFit, GridSpec
from gcpr.siminf import draw_stream, significance_stars

EX1_SPEC = ModelSpec((TrendTerm.free(0.05, 10.0),), ())


def example1_fit(T=200):
    """Fit object at theta = 1, tau = 1 for y = tau t^theta + u."""
    return GcprFit(ParamVector([1.0], [1.0], []), np.zeros(T), 0.0, EX1_SPEC, T)


def unit_lrv(m=0):
    return LrvSet.from_matrices(np.eye(m + 1), np.eye(m + 1))


@pytest.fixture(scope="module")
def small_fit():
    g = np.random.default_rng(4)
    T = 80
    t = np.arange(1, T + 1.0)
    x = np.cumsum(g.standard_normal(T))
    y = 0.02 * t**1.4 + 2 * x + g.standard_normal(T)
    spec = ModelSpec((TrendTerm.free(0.05, 10.0),), (1,))
    data = Dataset.from_arrays(y, x)
    return spec, data, fit_gcpr(spec, data, GridSpec(step=0.05))


def lrv_fixture():
    sigma = np.array([[1.0, 0.3], [0.3, 0.8]])
    delta = np.array([[1.4, 0.5], [0.2, 1.1]])
    return LrvSet.from_matrices(sigma, delta)


def test_transcription_oracle(small_fit):
    spec, data, fit = small_fit
    lrv = lrv_fixture()
    N = 16
    got = simulate_draw(fit, lrv, N, np.random.default_rng(99))

    # step by step: raw gradient, explicit G_N, partial sums, bias
    e = np.random.default_rng(99).standard_normal((N, 2))
    F = np.linalg.cholesky(lrv.omega)
    w = e @ F.T
    mu, eta = w[:, 0], w[:, 1]
    x = np.cumsum(eta)
    th, tau = fit.theta[0], fit.tau[0]
    n = np.arange(1, N + 1.0)
    fdot = np.column_stack([tau * n**th * np.log(n), n**th, x])
    G = scaling_matrices(spec, [th], [tau], N).G
    f = np.linalg.solve(G.T, fdot.T).T
    M = f.T @ f
    z = f.T @ mu
    dminus_vu = lrv.sigma[1, 0] - lrv.delta[0, 1]
    B = np.array([0.0, 0.0, dminus_vu])
    oracle = np.linalg.solve(M, z + B)
    np.testing.assert_allclose(got, oracle, rtol=1e-10, atol=1e-10)


def test_quadratic_bias_term():
    spec = ModelSpec((TrendTerm.at(0),), (2,))
    fit = GcprFit(ParamVector([0.0], [1.0], [1.0, 0.5]), np.zeros(50), 0.0, spec, 50)
    lrv = lrv_fixture()
    N = 16
    got = simulate_draw(fit, lrv, N, np.random.default_rng(5))
    e = np.random.default_rng(5).standard_normal((N, 2))
    w = e @ np.linalg.cholesky(lrv.omega).T
    chi = np.cumsum(w[:, 1]) / np.sqrt(N)
    f = np.column_stack([np.ones(N), chi, chi**2]) / np.sqrt(N)
    dm = lrv.sigma[1, 0] - lrv.delta[0, 1]
    B = np.array([0.0, dm, 2 * chi.mean() * dm])
    oracle = np.linalg.solve(f.T @ f, f.T @ w[:, 0] + B)
    np.testing.assert_allclose(got, oracle, rtol=1e-10, atol=1e-12)


def test_composition_with_streams(small_fit):
    _, _, fit = small_fit
    lrv = lrv_fixture()
    draws = run_sim_inference(fit, lrv, SimConfig(J=99, N=60, seed=17))
    for j in range(4):
        one = simulate_draw(fit, lrv, 60, draw_stream(17, j))
        np.testing.assert_allclose(draws.draws[j], one, rtol=1e-12, atol=1e-14)
    S = scaling_matrices(fit.spec, fit.theta, fit.tau, fit.T)
    np.testing.assert_allclose(draws.deviations, draws.draws @ np.linalg.inv(S.G_free()).T,
                               rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("threads, chunk", [(2, 7), (3, 64), (4, 1)])
def test_thread_count_determinism(small_fit, threads, chunk):
    _, _, fit = small_fit
    lrv = lrv_fixture()
    ref = run_sim_inference(fit, lrv, SimConfig(J=150, seed=3, threads=1))
    other = run_sim_inference(fit, lrv, SimConfig(J=150, seed=3, threads=threads, chunk=chunk))
    np.testing.assert_array_equal(ref.draws, other.draws)
    np.testing.assert_array_equal(ref.deviations, other.deviations)


def test_seed_changes_draws(small_fit):
    _, _, fit = small_fit
    a = run_sim_inference(fit, lrv_fixture(), SimConfig(J=99, seed=1))
    b = run_sim_inference(fit, lrv_fixture(), SimConfig(J=99, seed=2))
    assert not np.array_equal(a.draws, b.draws)


def test_confidence_interval_formula(small_fit):
    _, _, fit = small_fit
    draws = run_sim_inference(fit, lrv_fixture(), SimConfig(J=199, seed=8))
    for k, name in enumerate(draws.names):
        dev = np.sort(draws.deviations[:, k])
        h = (dev.size - 1) * np.array([0.025, 0.975])
        lo_i, hi_i = np.floor(h).astype(int), np.ceil(h).astype(int)
        q = dev[lo_i] + (h - lo_i) * (dev[hi_i] - dev[lo_i])
        g = draws.gamma_hat[k]
        lo, hi = confidence_interval(draws, name)
        assert lo == pytest.approx(g - q[1], abs=1e-12)
        assert hi == pytest.approx(g - q[0], abs=1e-12)


def test_test_consistent_with_interval(small_fit):
    _, _, fit = small_fit
    draws = run_sim_inference(fit, lrv_fixture(), SimConfig(J=199, seed=8))
    lo, hi = confidence_interval(draws, "phi1")
    for null in [lo - 1e-6, lo + 1e-6, 0.5 * (lo + hi), hi - 1e-6, hi + 1e-6]:
        r = coef_test(draws, "phi1", null)
        assert r.reject == (not lo <= null <= hi)
        assert 0 <= r.p_value <= 1
    assert coef_test(draws, "phi1", 0.5 * (lo + hi)).p_value > 0.05


def test_truncation_at_lower_bound(small_fit):
    _, _, fit = small_fit
    draws = run_sim_inference(fit, lrv_fixture(), SimConfig(J=199, seed=8))
    lo, _ = confidence_interval(draws, "theta", alpha=0.9999, truncate=True)
    assert lo >= 0.05


def test_bad_inputs(small_fit):
    _, _, fit = small_fit
    with pytest.raises(InputError):
        SimConfig(J=10)
    with pytest.raises(InputError):
        SimConfig(kappa=1.0)
    with pytest.raises(InputError):
        SimConfig(kappa=1.0, alpha_exp=0.9, theta_tilde=-0.2)
    draws = run_sim_inference(fit, lrv_fixture(), SimConfig(J=99, seed=0))
    with pytest.raises(InputError):
        confidence_interval(draws, "nope")
    with pytest.raises(InputError):
        coef_test(draws, 0, sides="up")
    with pytest.raises(InputError):
        run_sim_inference(fit, unit_lrv(0), SimConfig(J=99))


def test_path_length_rule():
    assert SimConfig(kappa=2.0, alpha_exp=0.5).path_length(100) == 20
    assert SimConfig().path_length(77) == 77


def test_stars():
    assert [significance_stars(p) for p in (0.001, 0.03, 0.07, 0.2)] == ["***", "**", "*", ""]


def test_example1_draws_are_exactly_gaussian():
    # with m = 0 the draw is M^{-1} z, z ~ N(0, M): Gaussian with covariance M^{-1}
    fit = example1_fit()
    N = 400
    draws = run_sim_inference(fit, unit_lrv(), SimConfig(J=2000, N=N, seed=5))
    n = np.arange(1, N + 1.0) / N
    f = np.column_stack([n * np.log(n), n]) / np.sqrt(N)
    cov = np.linalg.inv(f.T @ f)
    for k in range(2):
        z = draws.draws[:, k] / np.sqrt(cov[k, k])
        assert stats.kstest(z, "norm").pvalue > 1e-3


def test_example1_covariance_moderate_scale():
    fit = example1_fit()
    draws = run_sim_inference(fit, unit_lrv(), SimConfig(J=3000, N=3000, seed=11))
    np.testing.assert_allclose(np.cov(draws.draws.T), [[27, 9], [9, 6]], rtol=0.10)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcpr import Dataset, InputError, Kernel, ModelSpec, TrendTerm, estimate_lrv, fit_at_theta, lrv_from_fit
from gcpr.lrv import andrews_bandwidth, kernel_weight, residual_vector_series

KERNELS = [Kernel.BARTLETT, Kernel.PARZEN, Kernel.QS]


def double_sum(V, kernel, b):
    """Population-oriented brute force n^-1 sum_t sum_{s>=t} k((s-t)/b) V_t V_s'."""
    n, k = V.shape
    sigma = np.zeros((k, k))
    delta = np.zeros((k, k))
    for t in range(n):
        sigma += np.outer(V[t], V[t])
        for s in range(t, n):
            delta += float(kernel_weight(kernel, (s - t) / b)) * np.outer(V[t], V[s])
    return sigma / n, delta / n


def literal_lower_sum(V, kernel, b):
    """n^-1 sum_t sum_{s<=t} k((t-s)/b) V_t V_s'."""
    n, k = V.shape
    out = np.zeros((k, k))
    for t in range(n):
        for s in range(t + 1):
            out += float(kernel_weight(kernel, (t - s) / b)) * np.outer(V[t], V[s])
    return out / n


def test_kernel_values():
    assert kernel_weight("bartlett", 0) == 1 and kernel_weight("bartlett", 1) == 0
    assert kernel_weight("bartlett", 2) == 0
    assert kernel_weight("parzen", 0) == 1
    assert kernel_weight("qs", 0) == pytest.approx(1.0)
    assert kernel_weight("qs", 1e-5) == pytest.approx(1.0, abs=1e-8)
    assert kernel_weight("parzen", 0.5) == pytest.approx(0.25)
    assert kernel_weight("parzen", 0.75) == pytest.approx(2 * 0.25**3)
    assert kernel_weight("parzen", 1.5) == 0
    x = 0.7
    z = 6 * np.pi * x / 5
    qs = 25 / (12 * np.pi**2 * x**2) * (np.sin(z) / z - np.cos(z))
    assert kernel_weight("qs", x) == pytest.approx(qs, rel=1e-14)
    # continuity across the series switch point
    lo, hi = kernel_weight("qs", 1e-2 - 1e-12), kernel_weight("qs", 1e-2 + 1e-12)
    assert abs(lo - hi) < 1e-11


def test_kernel_parse():
    assert Kernel.parse("Bartlett") is Kernel.BARTLETT
    with pytest.raises(InputError):
        Kernel.parse("triangle")


@pytest.mark.parametrize("kernel", KERNELS)
@pytest.mark.parametrize("b", [1.0, 2.5, 3.0, 7.0, 40.0])
def test_brute_force_double_sum(kernel, b):
    V = np.random.default_rng(11).standard_normal((12, 3))
    V[:, 0] += np.r_[0, V[:-1, 1]]
    with pytest.warns(RuntimeWarning) if b >= 12 else _null():
        lrv = estimate_lrv(V, kernel, min(b, 40.0))
    sigma, delta = double_sum(V, kernel, lrv.bandwidth)
    np.testing.assert_allclose(lrv.sigma, sigma, atol=1e-12, rtol=0)
    np.testing.assert_allclose(lrv.delta, delta, atol=1e-12, rtol=0)
    np.testing.assert_allclose(lrv.delta.T, literal_lower_sum(V, kernel, lrv.bandwidth), atol=1e-12, rtol=0)


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *a):
        return False


@given(st.integers(8, 30), st.integers(1, 3), st.floats(1.0, 6.0), st.sampled_from(KERNELS),
       st.integers(0, 2**31))
def test_brute_force_property(n, k, b, kernel, seed):
    V = np.random.default_rng(seed).standard_normal((n, k))
    lrv = estimate_lrv(V, kernel, b)
    sigma, delta = double_sum(V, kernel, b)
    np.testing.assert_allclose(lrv.delta, delta, atol=1e-12, rtol=0)
    np.testing.assert_allclose(lrv.sigma, sigma, atol=1e-12, rtol=0)


@given(st.integers(8, 200), st.integers(1, 4), st.integers(0, 2**31), st.sampled_from(KERNELS))
def test_identities_exact(n, k, seed, kernel):
    V = np.random.default_rng(seed).standard_normal((n, k))
    lrv = estimate_lrv(V, kernel, "auto")
    np.testing.assert_array_equal(lrv.omega, lrv.delta + lrv.delta.T - lrv.sigma)
    np.testing.assert_array_equal(lrv.delta_minus, lrv.sigma - lrv.delta.T)
    np.testing.assert_allclose(lrv.omega, lrv.omega.T, atol=0)


def test_bartlett_b1_gives_sigma():
    V = np.random.default_rng(0).standard_normal((50, 2))
    lrv = estimate_lrv(V, "bartlett", 1.0)
    np.testing.assert_array_equal(lrv.omega, lrv.sigma)
    lrv2 = estimate_lrv(V, "bartlett", 2.0)
    g1 = V[:-1].T @ V[1:] / 50
    np.testing.assert_allclose(lrv2.omega - lrv.omega, 0.5 * (g1 + g1.T), atol=1e-14)


def test_ar1_long_run_variance():
    g = np.random.default_rng(5)
    n = 100_000
    e = g.standard_normal(n)
    u = np.empty(n)
    u[0] = e[0]
    for t in range(1, n):
        u[t] = 0.5 * u[t - 1] + e[t]
    lrv = estimate_lrv(u[:, None], "bartlett", n ** (1 / 3))
    assert lrv.omega[0, 0] == pytest.approx(4.0, rel=0.10)


def test_omega_u_dot_v():
    V = np.random.default_rng(2).standard_normal((100, 3))
    lrv = estimate_lrv(V, "bartlett", 4)
    O = lrv.omega
    expected = O[0, 0] - O[0, 1:] @ np.linalg.solve(O[1:, 1:], O[1:, 0])
    assert lrv.omega_u_dot_v == pytest.approx(expected, rel=1e-12)


def _ar1_oracle(c):
    rho = np.clip(c[:-1] @ c[1:] / (c[:-1] @ c[:-1]), -0.97, 0.97)
    e = c[1:] - rho * c[:-1]
    return rho, e @ e / e.size


def test_andrews_single_column():
    g = np.random.default_rng(9)
    n = 200
    c = np.zeros(n)
    for t in range(1, n):
        c[t] = 0.5 * c[t - 1] + g.standard_normal()
    rho, s2 = _ar1_oracle(c)
    a1 = 4 * rho**2 * s2**2 / ((1 - rho) ** 6 * (1 + rho) ** 2) / (s2**2 / (1 - rho) ** 4)
    assert andrews_bandwidth(c, "bartlett") == pytest.approx(1.1447 * (a1 * n) ** (1 / 3), rel=1e-10)
    a2 = 4 * rho**2 * s2**2 / (1 - rho) ** 8 / (s2**2 / (1 - rho) ** 4)
    assert andrews_bandwidth(c, "qs") == pytest.approx(1.3221 * (a2 * n) ** 0.2, rel=1e-10)
    assert andrews_bandwidth(c, "parzen") == pytest.approx(2.6614 * (a2 * n) ** 0.2, rel=1e-10)


def test_andrews_pooled():
    g = np.random.default_rng(10)
    n = 300
    V = np.cumsum(g.standard_normal((n, 2)), axis=0) * 0.1 + g.standard_normal((n, 2))
    num = den = 0.0
    for k in range(2):
        rho, s2 = _ar1_oracle(V[:, k])
        num += 4 * rho**2 * s2**2 / ((1 - rho) ** 6 * (1 + rho) ** 2)
        den += s2**2 / (1 - rho) ** 4
    b = 1.1447 * (num / den * n) ** (1 / 3)
    assert andrews_bandwidth(V, "bartlett") == pytest.approx(min(max(b, 1), n / 2), rel=1e-10)


def test_andrews_floor_for_white_noise():
    V = np.random.default_rng(1).standard_normal((100, 1))
    assert andrews_bandwidth(V, "bartlett") >= 1.0


def test_bandwidth_truncation_and_errors():
    V = np.random.default_rng(0).standard_normal((10, 2))
    with pytest.warns(RuntimeWarning):
        assert estimate_lrv(V, "bartlett", 50).bandwidth == 10
    with pytest.raises(InputError):
        estimate_lrv(V[:5], "bartlett", 2)
    V[3, 1] = np.nan
    with pytest.raises(InputError):
        estimate_lrv(V, "bartlett", 2)
    with pytest.raises(InputError):
        estimate_lrv(np.ones((10, 1)), "bartlett", -1)


def test_residual_vector_series():
    spec = ModelSpec((TrendTerm.at(0),), (1,))
    data = Dataset.from_arrays([1.0, 2.0, 4.0, 3.0], [1.0, 3.0, 6.0, 10.0])
    fit = fit_at_theta(spec, data, [0])
    V = residual_vector_series(fit, data)
    np.testing.assert_allclose(V[:, 1], [2, 3, 4])
    np.testing.assert_allclose(V[:, 0], fit.residuals[1:])
    V1 = residual_vector_series(fit, data, include_first=True)
    np.testing.assert_allclose(V1[:, 1], [1, 2, 3, 4])


def test_lrv_from_fit_matches_hand_assembly(trend_data, m3_spec):
    fit = fit_at_theta(m3_spec, trend_data, [0, 1, 2])
    lrv = lrv_from_fit(fit, trend_data, "bartlett", 5.0)
    V = np.column_stack([fit.residuals[1:], np.diff(trend_data.x[:, 0])])
    np.testing.assert_allclose(lrv.delta, estimate_lrv(V, "bartlett", 5.0).delta, atol=0)

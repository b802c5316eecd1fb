"""Simulated inference for GCPR estimators.

The limiting distribution of G_T (gamma-hat - gamma_0) depends on nuisance
parameters, so it is approximated by simulation: draw Gaussian increments
with the estimated long-run covariance, build the normalised regressors along
a path of length N and solve the normal equations of the limit problem,
adding the second-order bias term. The resulting draws J^(j) are mapped back
to parameter deviations with G_T^{-1} evaluated at the estimates.

Random numbers: draw j uses ``SeedSequence(seed, spawn_key=(j,))``; if that
draw is numerically singular it is redrawn with ``spawn_key=(j, a)`` for
a = 1, 2, 3. Results therefore do not depend on scheduling or thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .core import DegenerateDataError, InputError, ModelSpec, RankDeficientError, scaling_matrices
from .lrv import LrvSet

MAX_RETRIES = 3
COND_LIMIT = 1e13


class SingularDrawError(RankDeficientError):
    """The simulated moment matrix is numerically singular."""


@dataclass(frozen=True)
class SimConfig:
    """Settings for the simulated limiting distribution.

    Parameters
    ----------
    J : int
        Number of draws.
    N : int, optional
        Path length; defaults to T, or to floor(kappa * T**alpha_exp) when
        both of those are given.
    alpha : float
        Significance level used by default for intervals and tests.
    seed : int
        Master seed of the draw sub-streams.
    theta_tilde : float, optional
        Lower reference power that bounds ``alpha_exp`` from above by
        min(1, 1 + 2 theta_tilde).
    threads : int
        Worker threads; does not affect results.
    """

    J: int = 999
    N: int | None = None
    alpha: float = 0.05
    seed: int = 0
    kappa: float | None = None
    alpha_exp: float | None = None
    theta_tilde: float | None = None
    threads: int = 1
    chunk: int = 64

    def __post_init__(self) -> None:
        if self.J < 99:
            raise InputError(f"J must be at least 99, got {self.J}")
        if not 0 < self.alpha < 1:
            raise InputError("alpha must lie in (0, 1)")
        if self.N is not None and self.N < 2:
            raise InputError("N must be at least 2")
        if (self.kappa is None) != (self.alpha_exp is None):
            raise InputError("kappa and alpha_exp must be given together")
        if self.alpha_exp is not None:
            if not (self.kappa > 0 and self.alpha_exp > 0):
                raise InputError("kappa and alpha_exp must be positive")
            if self.theta_tilde is not None:
                if not self.theta_tilde > -0.5:
                    raise InputError("theta_tilde must exceed -1/2")
                bound = min(1.0, 1.0 + 2.0 * self.theta_tilde)
                if self.alpha_exp > bound + 1e-12:
                    raise InputError(f"alpha_exp {self.alpha_exp} exceeds min(1, 1 + 2 theta_tilde) = {bound}")
            elif self.alpha_exp > 1:
                raise InputError("alpha_exp must not exceed 1")

    def path_length(self, T: int) -> int:
        if self.N is not None:
            return self.N
        if self.kappa is not None:
            return max(2, int(math.floor(self.kappa * T ** self.alpha_exp)))
        return T

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SimDraws:
    """Simulated draws and their parameter-space deviations.

    Columns follow ``names``: free thetas, then tau, then phi.
    """

    draws: np.ndarray
    deviations: np.ndarray
    bias_terms: np.ndarray
    names: tuple[str, ...]
    gamma_hat: np.ndarray
    G_T: np.ndarray
    T: int
    N: int
    config: SimConfig
    resampled: int = 0
    lower_bounds: dict = field(default_factory=dict)

    def index(self, coordinate: int | str) -> int:
        if isinstance(coordinate, str):
            try:
                return self.names.index(coordinate)
            except ValueError:
                raise InputError(f"unknown coordinate {coordinate!r}; have {list(self.names)}") from None
        k = int(coordinate)
        if not 0 <= k < len(self.names):
            raise InputError(f"coordinate {k} out of range 0..{len(self.names) - 1}")
        return k


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def omega_root(omega: np.ndarray) -> np.ndarray:
    """F with F F' = Omega: lower Cholesky, else a clipped symmetric root."""
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    if not np.all(np.isfinite(omega)):
        raise DegenerateDataError("long-run covariance is not finite")
    try:
        return np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        pass
    sym = 0.5 * (omega + omega.T)
    w, U = np.linalg.eigh(sym)
    scale = max(np.abs(w).max(), 1e-300)
    if w.min() < -1e-6 * scale:
        raise DegenerateDataError(f"long-run covariance is not positive semidefinite (min eig {w.min():.3g})")
    if w.max() <= 0:
        raise DegenerateDataError("long-run covariance is zero")
    return U @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ U.T


def normalized_trends(spec: ModelSpec, theta, tau, N: int) -> np.ndarray:
    """G_N'^{-1} applied to the trend part of the score, for n = 1..N.

    Columns: tau_i (n/N)^theta_i ln(n/N) / sqrt(N) for each free power, then
    (n/N)^theta_i / sqrt(N) for every trend.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    lr = np.log(np.arange(1, N + 1, dtype=float) / N)
    rn = math.sqrt(N)
    pw = np.exp(np.outer(lr, theta)) if spec.d else np.empty((N, 0))
    cols = [tau[i] * pw[:, i] * lr / rn for i in spec.free_index]
    cols += [pw[:, i] / rn for i in range(spec.d)]
    return np.ascontiguousarray(np.column_stack(cols)) if cols else np.empty((N, 0))


def draw_stream(seed: int, j: int, attempt: int = 0) -> np.random.Generator:
    key = (j,) if attempt == 0 else (j, attempt)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _bias(spec: ModelSpec, bavg: np.ndarray, dm_vu: np.ndarray, kd: int) -> np.ndarray:
    out = np.zeros((bavg.shape[0], kd + spec.p))
    c = kd
    for i, p in enumerate(spec.orders):
        for ell in range(p):
            out[:, c] = (ell + 1) * bavg[:, i, ell] * dm_vu[i]
            c += 1
    return out


class _Simulator:
    def __init__(self, spec: ModelSpec, theta, tau, lrv: LrvSet, N: int) -> None:
        if lrv.m != spec.m:
            raise InputError(f"LRV has {lrv.m} regressors, model has {spec.m}")
        self.spec = spec
        self.N = N
        self.F = omega_root(lrv.omega)
        self.det = normalized_trends(spec, theta, tau, N)
        self.kd = self.det.shape[1]
        self.orders = np.asarray(spec.orders if spec.m else [0], dtype=np.int64)[: spec.m]
        self.dm_vu = lrv.delta_minus_vu
        self.m1 = spec.m + 1

    def solve(self, e: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Draws, bias vectors and an ok-mask for a (c, N, m+1) block of innovations."""
        mom, cross, bavg = _kernels.sim_moments(e, self.F, self.det, self.orders)
        bias = _bias(self.spec, bavg, self.dm_vu, self.kd)
        out = np.full(cross.shape, np.nan)
        rhs = cross + bias
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.sqrt(np.einsum("jkk->jk", mom))
            ok = np.all(np.isfinite(mom), axis=(1, 2)) & np.all(d > 0, axis=1)
        if np.any(ok):
            Ms = mom[ok] / (d[ok][:, :, None] * d[ok][:, None, :])
            good = np.linalg.cond(Ms) <= COND_LIMIT
            idx = np.flatnonzero(ok)
            ok[idx[~good]] = False
            if np.any(good):
                dg = d[idx[good]]
                sol = np.linalg.solve(Ms[good], (rhs[idx[good]] / dg)[:, :, None])[:, :, 0] / dg
                out[idx[good]] = sol
            ok &= np.all(np.isfinite(out), axis=1)
        return out, bias, ok

    def innovations(self, seed: int, j: int, attempt: int = 0) -> np.ndarray:
        return draw_stream(seed, j, attempt).standard_normal((self.N, self.m1))


def simulate_draw(fit, lrv: LrvSet, N: int, rng: np.random.Generator) -> np.ndarray:
    """One simulated draw J-hat_N using innovations from ``rng``."""
    sim = _Simulator(fit.spec, fit.theta, fit.tau, lrv, N)
    e = rng.standard_normal((N, sim.m1))
    out, _, ok = sim.solve(e[None])
    if not ok[0]:
        raise SingularDrawError("simulated moment matrix is singular; increase N")
    return out[0]


def run_sim_inference(fit, lrv: LrvSet, config: SimConfig) -> SimDraws:
    """J draws of the simulated limit and their deviations G_T^{-1} J."""
    spec: ModelSpec = fit.spec
    T = fit.T
    N = config.path_length(T)
    sim = _Simulator(spec, fit.theta, fit.tau, lrv, N)
    k = sim.kd + spec.p
    J = config.J
    draws = np.empty((J, k))
    bias = np.empty((J, k))
    resampled = np.zeros(J, dtype=int)

    def work(lo_hi: tuple[int, int]) -> None:
        lo, hi = lo_hi
        e = np.stack([sim.innovations(config.seed, j) for j in range(lo, hi)])
        out, b, ok = sim.solve(e)
        for r, j in enumerate(range(lo, hi)):
            att = 0
            while not ok[r] and att < MAX_RETRIES:
                att += 1
                o1, b1, k1 = sim.solve(sim.innovations(config.seed, j, att)[None])
                out[r], b[r], ok[r] = o1[0], b1[0], k1[0]
            resampled[j] = att if ok[r] else -1
        draws[lo:hi] = out
        bias[lo:hi] = b

    blocks = [(lo, min(lo + config.chunk, J)) for lo in range(0, J, config.chunk)]
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as ex:
            list(ex.map(work, blocks))
    else:
        for blk in blocks:
            work(blk)

    failed = int(np.sum(resampled < 0))
    if failed > 0.01 * J:
        raise SingularDrawError(f"{failed} of {J} draws failed; N = {N} may be too small")
    keep = resampled >= 0
    draws, bias = draws[keep], bias[keep]
    S = scaling_matrices(spec, fit.theta, fit.tau, T)
    dev = draws @ S.G_free_inv().T
    bounds = {name: spec.trends[i].lower for name, i in zip(spec.param_names(), spec.free_index)}
    return SimDraws(draws, dev, bias, tuple(spec.param_names()), fit.gamma(), S.G_free(), T, N,
                    config, int(np.sum(resampled > 0)), bounds)


# ---------------------------------------------------------------------------
# intervals and tests
# ---------------------------------------------------------------------------


def confidence_interval(draws: SimDraws, coordinate: int | str, alpha: float | None = None,
                        truncate: bool = False) -> tuple[float, float]:
    """Equal-tailed interval [g - q_{1-a/2}(dev), g - q_{a/2}(dev)].

    Quantiles are type-7 (linear interpolation of order statistics). With
    ``truncate`` a theta interval is cut at the lower bound of its power.
    """
    alpha = draws.config.alpha if alpha is None else alpha
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    k = draws.index(coordinate)
    dev = draws.deviations[:, k]
    q_lo, q_hi = np.quantile(dev, [alpha / 2.0, 1.0 - alpha / 2.0])
    g = float(draws.gamma_hat[k])
    lo, hi = g - float(q_hi), g - float(q_lo)
    name = draws.names[k]
    if truncate and name in draws.lower_bounds:
        lo = max(lo, draws.lower_bounds[name])
    return lo, hi


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    coordinate: str
    estimate: float
    null_value: float
    statistic: float
    p_value: float
    reject: bool
    alpha: float
    sides: str

    def to_dict(self) -> dict:
        return asdict(self)


def _deviation_cdf(dev: np.ndarray, s: float) -> float:
    """Inverse of the type-7 quantile function of ``dev`` evaluated at s."""
    srt = np.sort(dev)
    return float(np.interp(s, srt, np.linspace(0.0, 1.0, srt.size)))


def test_coefficient(draws: SimDraws, coordinate: int | str, null_value: float = 0.0,
                     sides: str = "two-sided", alpha: float | None = None) -> TestResult:
    """Test H0: gamma_k = null_value against the simulated deviation distribution.

    The statistic is gamma-hat_k - null_value. Two-sided rejection happens
    exactly when ``null_value`` lies outside ``confidence_interval``. For
    ``sides='less'`` the alternative is gamma_k < null_value, for
    ``'greater'`` it is gamma_k > null_value.
    """
    alpha = draws.config.alpha if alpha is None else alpha
    k = draws.index(coordinate)
    dev = draws.deviations[:, k]
    est = float(draws.gamma_hat[k])
    s = est - null_value
    P = _deviation_cdf(dev, s)
    if sides in ("two-sided", "two"):
        lo, hi = confidence_interval(draws, k, alpha)
        reject = not (lo <= null_value <= hi)
        p = min(1.0, 2.0 * min(P, 1.0 - P))
        sides = "two-sided"
    elif sides == "less":
        reject = s < float(np.quantile(dev, alpha))
        p = P
    elif sides == "greater":
        reject = s > float(np.quantile(dev, 1.0 - alpha))
        p = 1.0 - P
    else:
        raise InputError(f"sides must be 'two-sided', 'less' or 'greater', got {sides!r}")
    return TestResult(draws.names[k], est, float(null_value), s, p, bool(reject), alpha, sides)


test_coefficient.__test__ = False  # keep pytest from collecting it


def significance_stars(p: float) -> str:
    """'***', '**', '*' for p below 0.01, 0.05, 0.10."""
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""

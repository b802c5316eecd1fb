"""Concentrated nonlinear least squares for GCPR models.

For given trend powers theta the coefficients (tau, phi) follow from OLS, so
only the profiled residual sum of squares RSS(theta) has to be minimised.
With one free power this is done on a grid followed by golden-section
refinement inside the winning grid cell.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize
from scipy.stats import qmc

from . import _kernels
from .core import (
    Dataset,
    Design,
    InputError,
    ModelSpec,
    OptimizerError,
    ParamVector,
    RankDeficientError,
    TrendTerm,
    build_design_matrix,
    power_columns,
    trend_columns,
    validate_theta,
)

RANK_TOL = 1e-10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OlsResult:
    tau: np.ndarray
    phi: np.ndarray
    residuals: np.ndarray
    rss: float
    design: Design
    coef_scaled: np.ndarray


@dataclass(frozen=True)
class Profile:
    """Sampled profile (theta, RSS(theta)) in evaluation order of a sorted grid."""

    theta: np.ndarray
    rss: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("theta,rss\n")
            for th, r in zip(self.theta, self.rss):
                fh.write(f"{th:.10g},{r:.17g}\n")

    def monotone_sections(self) -> int:
        """Number of maximal runs on which the finite profile is monotone."""
        r = self.rss[np.isfinite(self.rss)]
        if r.size < 2:
            return int(r.size)
        s = np.sign(np.diff(r))
        s = s[s != 0]
        if s.size == 0:
            return 1
        return int(1 + np.count_nonzero(s[1:] != s[:-1]))

    def has_interior_minimum(self) -> bool:
        r = self.rss
        i = int(np.nanargmin(r))
        return 0 < i < r.size - 1


@dataclass(frozen=True)
class GcprFit:
    """Result of a GCPR fit.

    ``rss`` is the sum of squared raw-scale residuals. ``objective`` is the
    profiled criterion value at theta-hat as evaluated by the search; it is
    the minimum over ``theta_profile`` by construction.
    """

    params: ParamVector
    residuals: np.ndarray
    rss: float
    spec: ModelSpec
    T: int
    converged: bool = True
    bracket: tuple[float, float] | None = None
    objective: float | None = None
    theta_profile: Profile | None = None
    info: dict = field(default_factory=dict)

    @property
    def theta(self) -> np.ndarray:
        return self.params.theta

    @property
    def tau(self) -> np.ndarray:
        return self.params.tau

    @property
    def phi(self) -> np.ndarray:
        return self.params.phi

    def gamma(self) -> np.ndarray:
        """Inference coordinates: free thetas, tau, phi."""
        return self.params.inference_vector(self.spec)

    def to_dict(self) -> dict:
        out = {
            "theta": self.theta.tolist(),
            "tau": self.tau.tolist(),
            "phi": self.phi.tolist(),
            "rss": self.rss,
            "T": self.T,
            "converged": self.converged,
            "bracket": None if self.bracket is None else list(self.bracket),
        }
        return out


# ---------------------------------------------------------------------------
# least squares building blocks
# ---------------------------------------------------------------------------


def _qr_solve(Z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares by column-pivoted QR; raises on numerical rank loss."""
    T, k = Z.shape
    if k == 0:
        return np.empty(0), y.copy()
    if T < k:
        raise RankDeficientError(f"{k} columns but only {T} observations")
    Q, R, piv = sla.qr(Z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if not diag[0] > 0 or np.any(diag < RANK_TOL * diag[0]):
        bad = [int(piv[i]) for i in np.flatnonzero(diag < RANK_TOL * max(diag[0], 1e-300))]
        raise RankDeficientError(f"design is rank deficient (dependent columns {bad})")
    beta_p = sla.solve_triangular(R, Q.T @ y)
    beta = np.empty(k)
    beta[piv] = beta_p
    resid = y - Z @ beta
    return beta, resid


def ols_given_theta(spec: ModelSpec, data: Dataset, theta) -> OlsResult:
    """OLS of y on the trend and polynomial regressors for fixed powers.

    Returns raw-scale coefficients; the solve uses the scaled design and an
    orthogonal factorisation.
    """
    data.check_spec(spec)
    design = build_design_matrix(spec, data, theta)
    coef, resid = _qr_solve(design.Z, data.y)
    raw = design.unscale(coef)
    return OlsResult(raw[:spec.d], raw[spec.d:], resid, float(resid @ resid), design, coef)


def detrend(series) -> np.ndarray:
    """Residuals from regressing ``series`` on a constant and a linear trend."""
    y = np.asarray(series, dtype=float).ravel()
    T = y.size
    if T < 3:
        raise InputError("detrend needs at least 3 observations")
    t = np.arange(1, T + 1, dtype=float) / T
    Z = np.column_stack([np.ones(T), t])
    _, resid = _qr_solve(Z, y)
    return resid


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Grid for a single free trend power.

    ``points`` overrides the regular grid. Otherwise points run from
    ``lower`` to ``upper`` (defaults: the trend's bounds) in steps of ``step``.
    Points that violate the parameter space, e.g. the gap to a fixed power,
    are dropped.
    """

    step: float = 0.01
    lower: float | None = None
    upper: float | None = None
    points: tuple[float, ...] | None = None

    def raw_points(self, term: TrendTerm) -> np.ndarray:
        if self.points is not None:
            return np.unique(np.asarray(self.points, dtype=float))
        lo = term.lower if self.lower is None else self.lower
        hi = term.upper if self.upper is None else self.upper
        if not self.step > 0 or hi < lo:
            raise InputError(f"invalid grid [{lo}, {hi}] step {self.step}")
        n = int(math.floor((hi - lo) / self.step + 1e-9))
        return np.round(lo + self.step * np.arange(n + 1), 12)


def feasible_grid(spec: ModelSpec, grid: GridSpec) -> np.ndarray:
    """Grid points for the single free power that lie in the parameter space."""
    if spec.n_free != 1:
        raise InputError(f"grid search needs exactly one free power, model has {spec.n_free}")
    term = spec.trends[spec.free_index[0]]
    pts = grid.raw_points(term)
    keep = [th for th in pts if validate_theta(spec, spec.full_theta([th])).ok]
    return np.array(keep, dtype=float)


# ---------------------------------------------------------------------------
# profiled objective for one free power
# ---------------------------------------------------------------------------


class _Profiler:
    """Evaluates RSS(theta) for one free trend column against fixed columns."""

    def __init__(self, spec: ModelSpec, data: Dataset) -> None:
        data.check_spec(spec)
        T = data.T
        fixed = [i for i, tr in enumerate(spec.trends) if tr.fixed]
        dz, _ = trend_columns([spec.trends[i].power for i in fixed], T)
        sz, _ = power_columns(data.x, spec.orders, T)
        X = np.hstack([dz, sz])
        if X.shape[1]:
            Q, R, _ = sla.qr(X, mode="economic", pivoting=True)
            diag = np.abs(np.diag(R))
            if np.any(diag < RANK_TOL * diag[0]):
                raise RankDeficientError("fixed regressors are collinear")
            self.q = np.ascontiguousarray(Q)
            self.my = data.y - Q @ (Q.T @ data.y)
            self.pivot_ref = float(diag[0])
        else:
            self.q = np.empty((T, 0))
            self.my = data.y.copy()
            self.pivot_ref = 0.0
        self.log_t = np.log(np.arange(1, T + 1, dtype=float) / T)

    def __call__(self, thetas, threads: int = 1) -> np.ndarray:
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        if threads <= 1 or thetas.size < 2 * threads:
            return _kernels.profile_rss(self.log_t, self.my, self.q, thetas, self.pivot_ref)
        chunks = np.array_split(thetas, threads)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda c: _kernels.profile_rss(self.log_t, self.my, self.q, c,
                                                                self.pivot_ref), chunks))
        return np.concatenate(parts)


def profile_rss(spec: ModelSpec, data: Dataset, thetas, threads: int = 1) -> Profile:
    """RSS(theta) on the given values of the single free power."""
    thetas = np.asarray(thetas, dtype=float)
    return Profile(thetas, _Profiler(spec, data)(thetas, threads))


def _interval_feasible(spec: ModelSpec, a: float, b: float) -> bool:
    """True if every value in [a, b] is admissible for the single free power."""
    term = spec.trends[spec.free_index[0]]
    if a < term.lower - 1e-12 or b > term.upper + 1e-12:
        return False
    gap = spec.gap - 1e-12
    return all(not (a - gap < tr.power < b + gap) for tr in spec.trends if tr.fixed)


def _golden(f, a: float, b: float, x0: float, f0: float, tol: float, trace: list):
    """Golden-section search on [a, b]; returns the best point seen (x0 included)."""
    best_x, best_f = x0, f0
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    trace += [(c, fc), (d, fd)]
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_f:
            best_x, best_f = x, fx
    while b - a > tol:
        if not fd < fc:  # NaN at d counts as worse
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
            trace.append((c, fc))
            if fc < best_f:
                best_x, best_f = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
            trace.append((d, fd))
            if fd < best_f:
                best_x, best_f = d, fd
    return best_x, best_f


def _wrap(spec: ModelSpec, data: Dataset, theta: np.ndarray, **kw) -> GcprFit:
    ols = ols_given_theta(spec, data, theta)
    params = ParamVector(theta, ols.tau, ols.phi)
    return GcprFit(params, ols.residuals, ols.rss, spec, data.T, **kw)


def fit_gcpr(
    spec: ModelSpec,
    data: Dataset,
    grid: GridSpec | None = None,
    tol: float = 1e-6,
    keep_profile: bool = False,
    threads: int = 1,
) -> GcprFit:
    """Concentrated NLS fit.

    Models without free powers reduce to OLS. With one free power RSS(theta)
    is evaluated on ``grid``; the grid argmin (smallest theta on ties) is
    refined by golden section inside the adjacent grid cells, never crossing
    a gap in the feasible set.
    """
    data.check_spec(spec)
    if spec.n_free == 0:
        return _wrap(spec, data, spec.full_theta([]), objective=None)
    if spec.n_free > 1:
        raise InputError("fit_gcpr handles one free power; use fit_gcpr_multistart")
    grid = grid or GridSpec()
    pts = feasible_grid(spec, grid)
    if pts.size == 0:
        raise InputError("grid has no feasible points")
    prof = _Profiler(spec, data)
    rss = prof(pts, threads)
    if not np.any(np.isfinite(rss)):
        raise RankDeficientError("design is rank deficient at every grid point")
    if np.any(np.isinf(rss)):
        raise OptimizerError("non-finite RSS on the grid")
    g = int(np.nanargmin(rss))
    th0, f0 = float(pts[g]), float(rss[g])

    # refinement bracket: the two grid cells around the argmin, if feasible
    lo = hi = th0
    if g > 0 and np.isfinite(rss[g - 1]) and _interval_feasible(spec, pts[g - 1], th0):
        lo = float(pts[g - 1])
    if g < pts.size - 1 and np.isfinite(rss[g + 1]) and _interval_feasible(spec, th0, pts[g + 1]):
        hi = float(pts[g + 1])

    def obj(th: float) -> float:
        v = float(prof([th])[0])
        return v if np.isfinite(v) else np.inf

    trace: list[tuple[float, float]] = []
    if hi > lo:
        th_hat, f_hat = _golden(obj, lo, hi, th0, f0, tol, trace)
    else:
        th_hat, f_hat = th0, f0
    prof_out = None
    if keep_profile:
        allth = np.concatenate([pts, [t for t, _ in trace]])
        allr = np.concatenate([rss, [r for _, r in trace]])
        o = np.argsort(allth, kind="stable")
        prof_out = Profile(allth[o], allr[o])
    return _wrap(
        spec, data, spec.full_theta([th_hat]),
        converged=True, bracket=(lo, hi), objective=f_hat, theta_profile=prof_out,
        info={"grid_points": int(pts.size), "grid_argmin": th0, "refine_evals": len(trace)},
    )


def fit_at_theta(spec: ModelSpec, data: Dataset, theta) -> GcprFit:
    """Fit with every trend power held at ``theta`` (e.g. a known true value).

    The returned fit carries the all-fixed version of ``spec``, so downstream
    inference treats the powers as known.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    fixed = spec.with_trends([TrendTerm.at(th) for th in theta])
    return _wrap(fixed, data, theta, info={"theta_supplied": True})


def _rss_or_inf(spec: ModelSpec, data: Dataset, free: np.ndarray) -> float:
    theta = spec.full_theta(free)
    if not validate_theta(spec, theta).ok:
        return np.inf
    try:
        return ols_given_theta(spec, data, theta).rss
    except RankDeficientError:
        return np.inf


def fit_gcpr_multistart(
    spec: ModelSpec, data: Dataset, starts: int = 20, seed: int = 0
) -> GcprFit:
    """Nelder-Mead on the free powers from Latin-hypercube starting points.

    Infeasible points (bounds or gap violations) get an infinite criterion.
    Each run is restarted once from its end point to guard against simplex
    collapse; the best feasible end point is returned.
    """
    data.check_spec(spec)
    if spec.n_free < 2:
        raise InputError("multistart fitting is for models with two or more free powers")
    terms = [spec.trends[i] for i in spec.free_index]
    lo = np.array([t.lower for t in terms])
    hi = np.array([t.upper for t in terms])
    sampler = qmc.LatinHypercube(d=spec.n_free, seed=seed)
    cand = qmc.scale(sampler.random(max(50 * starts, 200)), lo, hi)
    feas = [c for c in cand if np.isfinite(_rss_or_inf(spec, data, c))][:starts]
    if not feas:
        raise OptimizerError("no feasible starting point found")

    def f(v):
        return _rss_or_inf(spec, data, v)

    best_x, best_f = None, np.inf
    for x0 in feas:
        x = np.asarray(x0, dtype=float)
        fx = f(x)
        opts = {"xatol": 1e-9, "fatol": 1e-14 * max(fx, 1e-300),
                "maxiter": 4000 * spec.n_free, "maxfev": 8000 * spec.n_free}
        for _ in range(2):
            res = minimize(f, x, method="Nelder-Mead", options=opts)
            if res.fun < fx:
                x, fx = res.x, float(res.fun)
        if fx < best_f:
            best_x, best_f = x, fx
    if best_x is None or not np.isfinite(best_f):
        raise OptimizerError("all starts failed")
    return _wrap(spec, data, spec.full_theta(best_x), converged=True, objective=best_f,
                 info={"starts": len(feas)})


# ---------------------------------------------------------------------------
# flexible stochastic power profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StochasticPowerProfile(Profile):
    used_abs: bool = False


def rss_profile_stochastic_power(data: Dataset, grid: Sequence[float], threads: int = 1
                                 ) -> StochasticPowerProfile:
    """RSS of y on [1, t, x, |x|^theta] for each theta in ``grid``.

    Real powers need x > 0; otherwise |x| is used and ``used_abs`` is set.
    Grid points within 0.05 of 0 or 1 are rejected since x^theta is then
    nearly collinear with the constant or with x.
    """
    if data.m != 1:
        raise InputError("stochastic-power profile needs exactly one regressor")
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise InputError("empty grid")
    near = grid[(np.abs(grid - 1.0) < 0.05 - 1e-12) | (np.abs(grid) < 0.05 - 1e-12)]
    if near.size:
        raise InputError(f"grid points too close to 0 or 1: {near.tolist()}")
    x = data.x[:, 0]
    used_abs = bool(np.any(x <= 0))
    if used_abs:
        warnings.warn("x has non-positive values; using |x| for real powers", RuntimeWarning,
                      stacklevel=2)
    ax = np.abs(x)
    T = data.T
    t = np.arange(1, T + 1, dtype=float) / T
    X = np.column_stack([np.ones(T), t, x / np.max(ax)])
    Q, R, _ = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if np.any(diag < RANK_TOL * diag[0]):
        raise RankDeficientError("[1, t, x] is rank deficient")
    my = data.y - Q @ (Q.T @ data.y)
    with np.errstate(divide="ignore"):
        lx = np.log(ax / np.max(ax))
    rss = _kernels.profile_rss(lx, my, np.ascontiguousarray(Q), grid, float(diag[0]))
    return StochasticPowerProfile(grid, rss, used_abs)

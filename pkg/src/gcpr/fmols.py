"""Fully modified OLS for GCPR models with given trend powers.

With theta held fixed (estimated by NLS or supplied), the coefficients are

    [tau+; phi+] = (sum z_t z_t')^{-1} (sum z_t y+_t - A*),

where y+_t = y_t - Omega_uv Omega_vv^{-1} dx_t removes the endogeneity and
A* = [0_d', A_1*', ..., A_m*']' with
A_i* = Delta+_{v_i u} [n, 2 sum x_it, ..., p_i sum x_it^{p_i - 1}]' and
Delta+_vu = Delta_vu - Delta_vv Omega_vv^{-1} Omega_vu removes the
second-order bias. Sums run over the rows used (t = 2..T by default).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.stats import norm

from .core import (
    Dataset,
    DegenerateDataError,
    InputError,
    ModelSpec,
    RankDeficientError,
    TrendTerm,
    build_design_matrix,
)
from .lrv import Kernel, LrvSet, lrv_from_fit
from .nls import RANK_TOL, GridSpec, fit_at_theta, fit_gcpr


@dataclass(frozen=True)
class FmolsFit:
    tau_plus: np.ndarray
    phi_plus: np.ndarray
    theta_used: np.ndarray
    theta_source: str
    bias_correction: np.ndarray
    delta_plus_vu: np.ndarray
    residuals_plus: np.ndarray
    design_inverse: np.ndarray
    scale: np.ndarray
    spec: ModelSpec

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.tau_plus, self.phi_plus])


def fmols_fit(spec: ModelSpec, data: Dataset, lrv: LrvSet, theta=None, grid: GridSpec | None = None,
              include_first: bool = False) -> FmolsFit:
    """FMOLS at ``theta`` (supplied) or at the NLS estimate (``theta=None``)."""
    data.check_spec(spec)
    if theta is None:
        theta = fit_gcpr(spec, data, grid).theta
        source = "estimated"
    else:
        source = "supplied"
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if lrv.m != spec.m:
        raise InputError("LRV and model disagree on the number of regressors")

    design = build_design_matrix(spec.with_trends([TrendTerm.at(th) for th in theta]), data, theta)
    Z, scale = design.Z, design.scale
    x = data.x
    dx = np.diff(np.vstack([np.zeros((1, x.shape[1])), x]), axis=0)
    rows = slice(0, data.T) if include_first else slice(1, data.T)
    Z, y, dx, xr = Z[rows], data.y[rows], dx[rows], x[rows]
    n = y.size

    if spec.m:
        try:
            coef_v = np.linalg.solve(lrv.omega_vv, lrv.omega_uv)
        except np.linalg.LinAlgError:
            raise DegenerateDataError("Omega_vv is singular") from None
        y_plus = y - dx @ coef_v
        dplus = lrv.delta_vu - lrv.delta_vv @ coef_v
    else:
        y_plus = y.copy()
        dplus = np.empty(0)

    a_raw = np.zeros(spec.k)
    c = spec.d
    for i, p in enumerate(spec.orders):
        for j in range(1, p + 1):
            a_raw[c] = dplus[i] * j * (n if j == 1 else np.sum(xr[:, i] ** (j - 1)))
            c += 1
    a_scaled = a_raw / scale

    Q, R = sla.qr(Z, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.size and (not diag.max() > 0 or np.any(diag < RANK_TOL * diag.max())):
        raise RankDeficientError("FMOLS design is rank deficient")
    rhs = Z.T @ y_plus - a_scaled
    w = sla.solve_triangular(R, rhs, trans="T")
    beta = sla.solve_triangular(R, w)
    Rinv = sla.solve_triangular(R, np.eye(R.shape[0]))
    inv = Rinv @ Rinv.T
    raw = beta / scale
    resid = y_plus - Z @ beta
    return FmolsFit(raw[:spec.d], raw[spec.d:], theta, source, a_raw, dplus, resid, inv, scale, spec)


@dataclass(frozen=True)
class FmolsTest:
    coordinate: str
    estimate: float
    t_stat: float
    p_value: float
    reject: bool
    alpha: float


def fmols_t_stat_phi(fit: FmolsFit, lrv: LrvSet, coordinate: int | str, null_value: float = 0.0,
                     alpha: float = 0.05) -> FmolsTest:
    """t = (phi+_k - null) / sqrt(Omega_u.v [(sum z z')^{-1}]_kk), two-sided normal test."""
    if isinstance(coordinate, str):
        if not coordinate.startswith("phi"):
            raise InputError("coordinate must name a phi coefficient")
        k = int(coordinate[3:]) - 1
    else:
        k = int(coordinate)
    if not 0 <= k < fit.phi_plus.size:
        raise InputError(f"phi index {k} out of range")
    col = fit.spec.d + k
    v = lrv.omega_u_dot_v * fit.design_inverse[col, col] / fit.scale[col] ** 2
    if not v > 0:
        raise DegenerateDataError("non-positive variance in FMOLS t statistic")
    est = float(fit.phi_plus[k])
    t = (est - null_value) / float(np.sqrt(v))
    p = float(2 * norm.sf(abs(t)))
    return FmolsTest(f"phi{k + 1}", est, t, p, bool(p < alpha), alpha)


def fmols_pipeline(spec: ModelSpec, data: Dataset, theta=None, kernel: Kernel | str = Kernel.BARTLETT,
                   bandwidth: float | str = "auto", grid: GridSpec | None = None,
                   include_first: bool = False) -> tuple[FmolsFit, LrvSet]:
    """First stage (NLS, or OLS at a supplied theta), LRV from its residuals, then FMOLS."""
    first = fit_gcpr(spec, data, grid) if theta is None else fit_at_theta(spec, data, theta)
    lrv = lrv_from_fit(first, data, kernel, bandwidth, include_first)
    fm = fmols_fit(spec, data, lrv, first.theta, include_first=include_first)
    if theta is None:
        fm = FmolsFit(**{**fm.__dict__, "theta_source": "estimated"})
    return fm, lrv

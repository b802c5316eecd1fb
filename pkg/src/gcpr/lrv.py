"""Kernel estimators of long-run covariance matrices.

For a stationary vector series V_t = [u_t, v_t']' the one-sided long-run
covariance is Delta = sum_{h>=0} E(V_t V_{t+h}'), so that its v-u block
Delta_vu = sum_{h>=0} E(v_t u_{t+h}) is the usual second-order bias term.
Then Omega = Delta + Delta' - Sigma and Delta^- = Sigma - Delta'.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .core import Dataset, InputError


class Kernel(str, Enum):
    BARTLETT = "bartlett"
    PARZEN = "parzen"
    QS = "qs"

    @classmethod
    def parse(cls, k: "Kernel | str") -> "Kernel":
        if isinstance(k, Kernel):
            return k
        key = str(k).lower().replace("-", "").replace("_", "")
        alias = {"bartlett": cls.BARTLETT, "parzen": cls.PARZEN, "qs": cls.QS,
                 "quadraticspectral": cls.QS}
        try:
            return alias[key]
        except KeyError:
            raise InputError(f"unknown kernel {k!r}") from None


def kernel_weight(kernel: Kernel | str, x) -> np.ndarray:
    """Kernel weight k(x) for x >= 0 (vectorised)."""
    kernel = Kernel.parse(kernel)
    x = np.abs(np.asarray(x, dtype=float))
    if kernel is Kernel.BARTLETT:
        return np.maximum(1.0 - x, 0.0)
    if kernel is Kernel.PARZEN:
        return np.where(x <= 0.5, 1.0 - 6.0 * x**2 + 6.0 * x**3,
                        np.where(x <= 1.0, 2.0 * (1.0 - x) ** 3, 0.0))
    z = 6.0 * np.pi * x / 5.0
    small = x < 1e-2
    zs = np.where(small, 1.0, z)
    xs = np.where(small, 1.0, x)
    full = 25.0 / (12.0 * np.pi**2 * xs**2) * (np.sin(zs) / zs - np.cos(zs))
    series = 1.0 - z**2 / 10.0 + z**4 / 280.0 - z**6 / 15120.0
    return np.where(small, series, full)


@dataclass(frozen=True)
class LrvSet:
    """Sigma, Delta, Omega and Delta^- for V_t = [u_t, v_t']'; index 0 is u."""

    sigma: np.ndarray
    delta: np.ndarray
    omega: np.ndarray
    delta_minus: np.ndarray
    omega_u_dot_v: float
    kernel: Kernel | None
    bandwidth: float | None
    source: str
    n: int

    @classmethod
    def from_matrices(cls, sigma, delta, source: str = "supplied") -> "LrvSet":
        """Build from known Sigma and Delta, e.g. population values of a DGP."""
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        delta = np.atleast_2d(np.asarray(delta, dtype=float))
        omega = delta + delta.T - sigma
        return cls(sigma, delta, omega, sigma - delta.T, _conditional(omega), None, None, source, 0)

    @property
    def m(self) -> int:
        return self.sigma.shape[0] - 1

    @property
    def omega_uv(self) -> np.ndarray:
        return self.omega[0, 1:]

    @property
    def omega_vv(self) -> np.ndarray:
        return self.omega[1:, 1:]

    @property
    def delta_vu(self) -> np.ndarray:
        return self.delta[1:, 0]

    @property
    def delta_vv(self) -> np.ndarray:
        return self.delta[1:, 1:]

    @property
    def delta_minus_vu(self) -> np.ndarray:
        return self.delta_minus[1:, 0]

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.tolist(),
            "delta": self.delta.tolist(),
            "omega": self.omega.tolist(),
            "delta_minus": self.delta_minus.tolist(),
            "omega_u_dot_v": self.omega_u_dot_v,
            "kernel": None if self.kernel is None else self.kernel.value,
            "bandwidth": self.bandwidth,
            "source": self.source,
            "n": self.n,
        }


def _conditional(omega: np.ndarray) -> float:
    """Omega_uu - Omega_uv Omega_vv^{-1} Omega_vu."""
    if omega.shape[0] == 1:
        return float(omega[0, 0])
    ovv = omega[1:, 1:]
    ouv = omega[0, 1:]
    try:
        sol = np.linalg.solve(ovv, ouv)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(ovv, ouv, rcond=None)[0]
    return float(omega[0, 0] - ouv @ sol)


def residual_vector_series(fit, data: Dataset, include_first: bool = False) -> np.ndarray:
    """Stack V_t = [u_t, dx_t']' for t = 2..T.

    With ``include_first`` the series starts at t = 1 using dx_1 = x_1, which
    is appropriate when x_0 = 0 is known (simulated data).
    """
    u = np.asarray(fit.residuals, dtype=float)
    if u.size != data.T:
        raise InputError("fit and data have different lengths")
    x = data.x
    if include_first:
        dx = np.diff(np.vstack([np.zeros((1, x.shape[1])), x]), axis=0)
        return np.column_stack([u, dx])
    return np.column_stack([u[1:], np.diff(x, axis=0)])


def _ar1(col: np.ndarray) -> tuple[float, float]:
    lag, cur = col[:-1], col[1:]
    den = lag @ lag
    if den <= 0:
        return 0.0, 0.0
    rho = float(lag @ cur / den)
    rho = max(min(rho, 0.97), -0.97)
    e = cur - rho * lag
    return rho, float(e @ e / e.size)


def andrews_bandwidth(V, kernel: Kernel | str) -> float:
    """AR(1) plug-in bandwidth with unit weights, floored at 1 and capped at n/2."""
    kernel = Kernel.parse(kernel)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n = V.shape[0]
    if n < 8:
        raise InputError("bandwidth selection needs at least 8 observations")
    num1 = num2 = den = 0.0
    for k in range(V.shape[1]):
        rho, s2 = _ar1(V[:, k])
        s4 = s2 * s2
        num1 += 4 * rho**2 * s4 / ((1 - rho) ** 6 * (1 + rho) ** 2)
        num2 += 4 * rho**2 * s4 / (1 - rho) ** 8
        den += s4 / (1 - rho) ** 4
    if den <= 0:
        return 1.0
    if kernel is Kernel.BARTLETT:
        b = 1.1447 * (num1 / den * n) ** (1.0 / 3.0)
    elif kernel is Kernel.PARZEN:
        b = 2.6614 * (num2 / den * n) ** 0.2
    else:
        b = 1.3221 * (num2 / den * n) ** 0.2
    return float(min(max(b, 1.0), 0.5 * n))


def lag_weights(kernel: Kernel | str, bandwidth: float, n: int) -> np.ndarray:
    """Weights k(i/b) for lags i = 1..n-1, trimmed after the last non-zero one."""
    w = kernel_weight(kernel, np.arange(1, n) / bandwidth)
    nz = np.flatnonzero(w)
    return w[: nz[-1] + 1] if nz.size else w[:0]


def estimate_lrv(V, kernel: Kernel | str = Kernel.BARTLETT, bandwidth: float | str = "auto",
                 source: str = "residuals") -> LrvSet:
    """Kernel estimates of Sigma, Delta, Omega and Delta^- from the rows of ``V``.

    Delta-hat = Sigma-hat + sum_{i>=1} k(i/b) n^{-1} sum_t V_t V_{t+i}'.
    """
    kernel = Kernel.parse(kernel)
    V = np.ascontiguousarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n = V.shape[0]
    if n < 8:
        raise InputError(f"need at least 8 observations, got {n}")
    if not np.all(np.isfinite(V)):
        raise InputError("V contains non-finite values")
    if isinstance(bandwidth, str):
        if bandwidth != "auto":
            raise InputError(f"bandwidth must be a number or 'auto', got {bandwidth!r}")
        b = andrews_bandwidth(V, kernel)
    else:
        b = float(bandwidth)
        if not b > 0:
            raise InputError("bandwidth must be positive")
        if b >= n:
            warnings.warn(f"bandwidth {b:g} >= n = {n}; truncated to n", RuntimeWarning, stacklevel=2)
            b = float(n)
    sigma = V.T @ V / n
    lags = _kernels.weighted_autocov(V, lag_weights(kernel, b, n))
    delta = sigma + lags
    omega = delta + delta.T - sigma
    return LrvSet(sigma, delta, omega, sigma - delta.T, _conditional(omega), kernel, b, source, n)


def lrv_from_fit(fit, data: Dataset, kernel: Kernel | str = Kernel.BARTLETT,
                 bandwidth: float | str = "auto", include_first: bool = False) -> LrvSet:
    V = residual_vector_series(fit, data, include_first)
    src = "residuals,t=1..T" if include_first else "residuals,t=2..T"
    return estimate_lrv(V, kernel, bandwidth, src)

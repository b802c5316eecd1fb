"""Domain types, parameter-space checks, design matrices and scaling matrices.

The model is

    y_t = sum_i tau_i t^theta_i + sum_i sum_j phi_ij x_it^j + u_t,   t = 1..T.

Trend powers are either fixed or free (estimated). Internally every design
column is rescaled, trends as (t/T)^theta and regressor powers as
(x/sqrt(T))^j, so that large powers do not wreck the conditioning of the
least-squares problem. Coefficients are unscaled once, when reported.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

LOG_OVERFLOW = 700.0
GAP_TOL = 1e-12


class GcprError(Exception):
    """Base class for library errors; ``exit_code`` is used by the CLI."""

    exit_code = 1


class InputError(GcprError, ValueError):
    """Malformed input: bad CSV, dimension mismatch, invalid parameters."""

    exit_code = 2


class RankDeficientError(GcprError):
    """The design matrix lost full column rank."""

    exit_code = 3


class OptimizerError(GcprError):
    """The optimiser could not produce a finite minimiser."""

    exit_code = 4


class DegenerateDataError(GcprError):
    """Input is numerically degenerate, e.g. identically zero residuals."""

    exit_code = 5


# ---------------------------------------------------------------------------
# model specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrendTerm:
    """One deterministic trend t^theta.

    Parameters
    ----------
    power : float or None
        The exponent if fixed, ``None`` if it is estimated.
    lower, upper : float
        Bounds for a free power. Ignored for fixed powers.
    """

    power: float | None = None
    lower: float = 0.05
    upper: float = 10.0

    def __post_init__(self) -> None:
        if self.power is None:
            if not self.lower > -0.5:
                raise InputError(f"free power lower bound must exceed -1/2, got {self.lower}")
            if not self.upper > self.lower:
                raise InputError(f"empty bracket [{self.lower}, {self.upper}]")
        elif not (math.isfinite(self.power) and self.power > -0.5):
            raise InputError(f"trend power must be finite and > -1/2, got {self.power}")

    @property
    def fixed(self) -> bool:
        return self.power is not None

    @classmethod
    def at(cls, power: float) -> "TrendTerm":
        return cls(power=float(power))

    @classmethod
    def free(cls, lower: float = 0.05, upper: float = 10.0) -> "TrendTerm":
        return cls(power=None, lower=float(lower), upper=float(upper))

    def label(self) -> str:
        return "free" if self.power is None else f"{self.power:g}"


@dataclass(frozen=True)
class ModelSpec:
    """Which trends enter the model and the polynomial order of each regressor.

    Parameters
    ----------
    trends : sequence of TrendTerm
    orders : sequence of int
        p_1..p_m, one entry per integrated regressor.
    gap : float
        Minimum distance between consecutive sorted trend powers.
    sample_length : int, optional
        T, when the spec is tied to a sample.
    """

    trends: tuple[TrendTerm, ...] = ()
    orders: tuple[int, ...] = ()
    gap: float = 0.05
    sample_length: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "trends", tuple(self.trends))
        object.__setattr__(self, "orders", tuple(int(p) for p in self.orders))
        if not self.trends and not self.orders:
            raise InputError("model needs at least one trend or regressor")
        if any(p < 1 for p in self.orders):
            raise InputError(f"regressor orders must be >= 1, got {self.orders}")
        if not self.gap > 0:
            raise InputError("gap must be positive")
        if self.sample_length is not None and self.sample_length < 1:
            raise InputError("sample_length must be positive")

    @property
    def d(self) -> int:
        return len(self.trends)

    @property
    def m(self) -> int:
        return len(self.orders)

    @property
    def p(self) -> int:
        return sum(self.orders)

    @property
    def k(self) -> int:
        """Number of linear coefficients, d + p."""
        return self.d + self.p

    @property
    def free_index(self) -> tuple[int, ...]:
        return tuple(i for i, tr in enumerate(self.trends) if not tr.fixed)

    @property
    def n_free(self) -> int:
        return len(self.free_index)

    def full_theta(self, free_values: Sequence[float] = ()) -> np.ndarray:
        """Combine fixed powers with values for the free ones."""
        free_values = np.atleast_1d(np.asarray(free_values, dtype=float))
        if free_values.size != self.n_free:
            raise InputError(f"expected {self.n_free} free powers, got {free_values.size}")
        out = np.empty(self.d)
        it = iter(free_values)
        for i, tr in enumerate(self.trends):
            out[i] = next(it) if tr.power is None else tr.power
        return out

    def coef_names(self) -> list[str]:
        names = [f"tau{i + 1}" for i in range(self.d)]
        c = 0
        for p in self.orders:
            for _ in range(p):
                c += 1
                names.append(f"phi{c}")
        return names

    def param_names(self) -> list[str]:
        """Names of the inference coordinates: free thetas, then taus, then phis."""
        if self.n_free == 1:
            th = ["theta"]
        else:
            th = [f"theta{i + 1}" for i in self.free_index]
        return th + self.coef_names()

    def with_trends(self, trends: Sequence[TrendTerm]) -> "ModelSpec":
        return ModelSpec(tuple(trends), self.orders, self.gap, self.sample_length)

    def describe(self) -> dict:
        return {
            "trends": [tr.label() for tr in self.trends],
            "orders": list(self.orders),
            "gap": self.gap,
            "bounds": [[tr.lower, tr.upper] for tr in self.trends if not tr.fixed],
        }


PRESETS = {
    "m1": ((0.0, 1.0), (2,)),
    "m2": ((0.0, 1.0, 2.0), (2,)),
    "m3": ((0.0, 1.0, None), (2,)),
    "m4": ((0.0, 1.0, None), (1,)),
}


def preset(name: str, lower: float = 0.05, upper: float = 10.0, gap: float = 0.05) -> ModelSpec:
    """Named empirical specifications: constant, linear trend, optional free power, GDP terms."""
    try:
        powers, orders = PRESETS[name.lower()]
    except KeyError:
        raise InputError(f"unknown model preset {name!r}; choose from {sorted(PRESETS)}") from None
    trends = tuple(TrendTerm.free(lower, upper) if p is None else TrendTerm.at(p) for p in powers)
    return ModelSpec(trends, orders, gap)


@dataclass(frozen=True)
class ParamVector:
    """gamma = (theta, tau, phi); theta has one entry per trend, fixed or free."""

    theta: np.ndarray
    tau: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        for name in ("theta", "tau", "phi"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if self.theta.shape != self.tau.shape:
            raise InputError("theta and tau must have equal length")

    def coefficients(self) -> np.ndarray:
        return np.concatenate([self.tau, self.phi])

    def inference_vector(self, spec: ModelSpec) -> np.ndarray:
        """Free thetas followed by tau and phi; the coordinates used by siminf."""
        return np.concatenate([self.theta[list(spec.free_index)], self.tau, self.phi])

    def identified(self) -> bool:
        return bool(np.all(self.tau != 0))

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "tau": self.tau.tolist(), "phi": self.phi.tolist()}


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Response y and integrated regressors x (T x m) observed at t = 1..T.

    ``labels`` keeps the original time labels for reporting only.
    """

    y: np.ndarray
    x: np.ndarray
    labels: np.ndarray | None = None
    source: str | None = None
    digest: str | None = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if x.size else np.empty((y.size, 0))
        if x.shape[0] != y.size:
            raise InputError(f"x has {x.shape[0]} rows but y has {y.size}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise InputError("data contain non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def T(self) -> int:
        return self.y.size

    @property
    def m(self) -> int:
        return self.x.shape[1]

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1, dtype=float)

    @classmethod
    def from_arrays(cls, y, x=None, labels=None) -> "Dataset":
        y = np.asarray(y, dtype=float)
        if x is None:
            x = np.empty((y.size, 0))
        return cls(y, x, None if labels is None else np.asarray(labels))

    @classmethod
    def from_csv(cls, path: str | Path) -> "Dataset":
        """Read ``t,y,x1[,x2,...]``; every cell must be a finite number."""
        path = Path(path)
        raw = path.read_bytes()
        try:
            text = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise InputError(f"{path}: not valid UTF-8 ({exc})") from None
        rows = list(csv.reader(text.splitlines()))
        if not rows:
            raise InputError(f"{path}: empty file")
        header = [h.strip().lower() for h in rows[0]]
        if len(header) < 2 or header[0] != "t" or header[1] != "y":
            raise InputError(f"{path}: line 1: header must start with 't,y', got {rows[0]}")
        for j, h in enumerate(header[2:], start=1):
            if h != f"x{j}":
                raise InputError(f"{path}: line 1: expected column 'x{j}', got {h!r}")
        ncol = len(header)
        vals = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not c.strip() for c in row):
                raise InputError(f"{path}: line {lineno}: blank line")
            if len(row) != ncol:
                raise InputError(f"{path}: line {lineno}: expected {ncol} fields, got {len(row)}")
            try:
                nums = [float(c) for c in row]
            except ValueError:
                raise InputError(f"{path}: line {lineno}: non-numeric cell in {row}") from None
            if not all(math.isfinite(v) for v in nums):
                raise InputError(f"{path}: line {lineno}: non-finite value in {row}")
            vals.append(nums)
        if not vals:
            raise InputError(f"{path}: no data rows")
        arr = np.array(vals)
        if np.any(np.diff(arr[:, 0]) <= 0):
            bad = int(np.argmax(np.diff(arr[:, 0]) <= 0)) + 3
            raise InputError(f"{path}: line {bad}: t column not strictly increasing")
        return cls(arr[:, 1], arr[:, 2:], arr[:, 0], str(path), hashlib.sha256(raw).hexdigest())

    def check_spec(self, spec: ModelSpec) -> None:
        if spec.m != self.m:
            raise InputError(f"model has {spec.m} regressors but data have {self.m}")
        if self.T < spec.k + 2:
            raise InputError(f"need T >= d + p + 2 = {spec.k + 2}, got {self.T}")
        if spec.sample_length is not None and spec.sample_length != self.T:
            raise InputError(f"spec sample_length {spec.sample_length} != T = {self.T}")


# ---------------------------------------------------------------------------
# parameter space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_theta(spec: ModelSpec, theta) -> ThetaReport:
    """Check bounds of free powers and the gap between consecutive sorted powers."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out: list[str] = []
    if theta.size != spec.d:
        return ThetaReport(False, (f"length: expected {spec.d} powers, got {theta.size}",))
    if not np.all(np.isfinite(theta)):
        return ThetaReport(False, ("non-finite power",))
    for i, (th, tr) in enumerate(zip(theta, spec.trends)):
        if tr.fixed:
            if th != tr.power:
                out.append(f"fixed: theta[{i}]={th:g} differs from fixed power {tr.power:g}")
            continue
        if th < tr.lower - GAP_TOL:
            out.append(f"lower bound: theta[{i}]={th:g} < {tr.lower:g}")
        if th > tr.upper + GAP_TOL:
            out.append(f"upper bound: theta[{i}]={th:g} > {tr.upper:g}")
    order = np.argsort(theta, kind="stable")
    srt = theta[order]
    for a, b, ia, ib in zip(srt[:-1], srt[1:], order[:-1], order[1:]):
        if b - a < spec.gap - GAP_TOL:
            out.append(f"gap: theta[{ib}]-theta[{ia}]={b - a:g} < {spec.gap:g}")
    return ThetaReport(not out, tuple(out))


def _log_power(base_log: float, power: float) -> float:
    v = power * base_log
    if abs(v) > LOG_OVERFLOW:
        raise InputError(f"power {power:g} overflows at log-base {base_log:g}")
    return v


# ---------------------------------------------------------------------------
# design matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Design:
    """Scaled design Z and the factors that map it back to raw regressors.

    Raw column k equals ``Z[:, k] * scale[k]``; raw coefficient k equals the
    scaled coefficient divided by ``scale[k]``.
    """

    Z: np.ndarray
    scale: np.ndarray
    names: tuple[str, ...]

    def raw(self) -> np.ndarray:
        return self.Z * self.scale

    def unscale(self, coef: np.ndarray) -> np.ndarray:
        return np.asarray(coef) / self.scale


def trend_columns(theta, T: int, t: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(t/T)^theta for t in ``t`` (default 1..T) and the scale factors T^theta."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if t is None:
        t = np.arange(1, T + 1, dtype=float)
    lt = np.log(t) - math.log(T)
    logT = math.log(T)
    scale = np.array([math.exp(_log_power(logT, th)) for th in theta])
    cols = np.exp(np.outer(lt, theta)) if theta.size else np.empty((t.size, 0))
    return cols, scale


def power_columns(x: np.ndarray, orders: Sequence[int], T: int) -> tuple[np.ndarray, np.ndarray]:
    """(x_i/sqrt(T))^j for j = 1..p_i and the scale factors T^{j/2}."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    rt = math.sqrt(T)
    cols, scale = [], []
    for i, p in enumerate(orders):
        xs = x[:, i] / rt
        pw = np.ones_like(xs)
        for j in range(1, p + 1):
            pw = pw * xs
            cols.append(pw)
            scale.append(rt**j)
    if not cols:
        return np.empty((x.shape[0], 0)), np.empty(0)
    return np.column_stack(cols), np.array(scale)


def build_design_matrix(spec: ModelSpec, data: Dataset, theta) -> Design:
    """Scaled design [d_t(theta)', s_t']' with its unscaling metadata."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size != spec.d:
        raise InputError(f"theta has length {theta.size}, model has {spec.d} trends")
    _check_dims(spec, data)
    rep = validate_theta(spec, theta)
    if not rep.ok:
        raise InputError("theta outside parameter space: " + "; ".join(rep.violations))
    T = data.T
    dz, ds = trend_columns(theta, T)
    sz, ss = power_columns(data.x, spec.orders, T)
    return Design(np.hstack([dz, sz]), np.concatenate([ds, ss]), tuple(spec.coef_names()))


def _check_dims(spec: ModelSpec, data: Dataset) -> None:
    if spec.m != data.m:
        raise InputError(f"model has {spec.m} regressors but data have {data.m}")


# ---------------------------------------------------------------------------
# scaling matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingMatrices:
    """D_d, D_s, the coupling matrix L and G = sqrt(h) blockdiag(D_d, D_d, D_s) L'^{-1}.

    Full matrices are (2d+p) square. ``free`` selects the rows/columns of the
    coordinates that are actually estimated (free thetas, all tau, all phi).
    """

    D_d: np.ndarray
    D_s: np.ndarray
    L_tau: np.ndarray
    G: np.ndarray
    horizon: float
    theta: np.ndarray
    tau: np.ndarray
    free: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def D_block(self) -> np.ndarray:
        return math.sqrt(self.horizon) * _blockdiag(self.D_d, self.D_d, self.D_s)

    def reconstruct_G(self) -> np.ndarray:
        return self.D_block @ np.linalg.inv(self.L_tau.T)

    def G_inv(self) -> np.ndarray:
        """L' D^{-1}, formed without inverting G numerically."""
        return self.L_tau.T @ np.diag(1.0 / np.diag(self.D_block))

    def G_free(self) -> np.ndarray:
        return self.G[np.ix_(self.free, self.free)]

    def G_free_inv(self) -> np.ndarray:
        return self.G_inv()[np.ix_(self.free, self.free)]


def _blockdiag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def scaling_matrices(spec: ModelSpec, theta, tau, horizon: float) -> ScalingMatrices:
    """Scaling matrices at (theta, tau) for sample length ``horizon`` (T or N).

    With d = 0 the trend blocks are empty and G = sqrt(h) D_s.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if theta.size != spec.d or tau.size != spec.d:
        raise InputError("theta and tau must each have one entry per trend")
    if not horizon >= 2:
        raise InputError(f"horizon must be >= 2, got {horizon}")
    lh = math.log(horizon)
    Dd = np.diag([math.exp(_log_power(lh, th)) for th in theta]) if spec.d else np.empty((0, 0))
    Ds = np.diag([math.exp(_log_power(lh, j / 2.0)) for p in spec.orders for j in range(1, p + 1)])
    Ds = Ds if spec.p else np.empty((0, 0))
    d, p = spec.d, spec.p
    n = 2 * d + p
    L = np.eye(n)
    L[:d, d:2 * d] = -np.diag(tau) * lh
    # L'^{-1} is lower triangular with +diag(tau) ln h in the (2,1) block
    Linv_t = np.eye(n)
    Linv_t[d:2 * d, :d] = np.diag(tau) * lh
    D = math.sqrt(horizon) * _blockdiag(Dd, Dd, Ds)
    G = D @ Linv_t
    free = np.array(list(spec.free_index) + list(range(d, n)), dtype=int)
    return ScalingMatrices(Dd, Ds, L, G, float(horizon), theta, tau, free)

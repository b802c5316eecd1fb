"""Monte Carlo designs and table reproduction.

The design is

    y_t = 7 + 0.05 t + tau_3 t^2 + 5 x_t + phi_2 x_t^2 + u_t,   x_t = sum_{s<=t} v_s,

with [u_t, v_t]' a VAR(1) with matrix A = H L H', H = U (U'U)^{-1/2} for a
2x2 matrix U of uniforms, and Gaussian innovations with unit variances and
correlation rho. Settings A-D fix the eigenvalues L of A.

The default tau_3 = -5e-3 (``TABLE_TAU0``) reproduces the published size,
coverage and interval-length tables; the design text prints -5e-4
(``PRINTED_TAU0``), which gives intervals for theta about ten times longer
than those tabulated.

Every replication draws from its own stream
``SeedSequence(seed, spawn_key=(cell, rep, 0))``; the simulated-inference
seed of that replication comes from ``spawn_key=(cell, rep, 1)``. A cell is
identified by a CRC32 of its (table, setting, rho, T, phi2) label, so a cell
gives the same numbers whatever else is run with it and in whatever order.
"""
from __future__ import annotations

import math
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .core import Dataset, GcprError, InputError, ModelSpec, TrendTerm
from .fmols import fmols_fit, fmols_t_stat_phi
from .kpss import run_kpss
from .lrv import LrvSet, lrv_from_fit
from .nls import GridSpec, fit_at_theta, fit_gcpr
from .siminf import SimConfig, confidence_interval, run_sim_inference, test_coefficient

TABLE_TAU0 = (7.0, 0.05, -5e-3)
PRINTED_TAU0 = (7.0, 0.05, -5e-4)
SETTINGS = {"A": (0.0, 0.0), "B": (0.5, 0.3), "C": (0.7, 0.5), "D": (0.9, 0.7)}
RHOS = (0.0, 0.25, 0.5)
T_TABLE = (100, 200, 500)
T_POWER = (100, 200, 300)
PHI2_GRID = (0.025, 0.05, 0.075, 0.1, 0.125, 0.15)
TABLE1_TAU = tuple(k * 1e-4 for k in range(7))
TABLE1_T = (100, 200)

ESTIMATORS = {
    "size2": ("SimNLS", "SimNLS(theta0)", "FMOLS", "FMOLS(theta0)"),
    "coverage4": ("Coverage", "Coverage(Omega)", "Length"),
    "kpss5": ("KPSS", "KPSS(theta0)"),
    "power": ("SimNLS",),
}
REDUCED_REPS = 2000
REDUCED_J = 399
FULL_REPS = 25000
FULL_J = 999


# ---------------------------------------------------------------------------
# data generating process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DgpConfig:
    T: int = 100
    theta0: float = 2.0
    tau0: tuple[float, ...] = TABLE_TAU0
    phi0: tuple[float, ...] = (5.0, 0.0)
    setting: str = "A"
    rho: float = 0.0
    presample: int = 50
    seed: int = 0
    redraw_H: bool = True

    def __post_init__(self) -> None:
        if self.setting not in SETTINGS:
            raise InputError(f"setting must be one of {sorted(SETTINGS)}, got {self.setting!r}")
        if not -1 < self.rho < 1:
            raise InputError("rho must lie in (-1, 1)")
        if self.T < 1 or self.presample < 0:
            raise InputError("T must be positive and presample non-negative")

    @property
    def trend_powers(self) -> tuple[float, ...]:
        return (0.0, 1.0, self.theta0)

    @property
    def L(self) -> np.ndarray:
        return np.diag(SETTINGS[self.setting])


def rotation(rng: np.random.Generator) -> np.ndarray:
    """H = U (U'U)^{-1/2} for U with iid uniform [0, 1] entries; H is orthogonal."""
    while True:
        U = rng.uniform(size=(2, 2))
        w, V = np.linalg.eigh(U.T @ U)
        if w.min() > 1e-10:
            return U @ (V @ np.diag(w**-0.5) @ V.T)


def var1_matrix(setting: str, rng: np.random.Generator) -> np.ndarray:
    H = rotation(rng)
    return H @ np.diag(SETTINGS[setting]) @ H.T


def innovation_cov(rho: float) -> np.ndarray:
    return np.array([[1.0, rho], [rho, 1.0]])


def generate_var1_errors(config: DgpConfig, n: int, rng: np.random.Generator | None = None,
                         A: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u, v, A): n observations after discarding the presample; recursion starts at zero."""
    if n < 1:
        raise InputError("n must be positive")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    if A is None:
        A = var1_matrix(config.setting, rng)
    C = np.linalg.cholesky(innovation_cov(config.rho))
    z = rng.standard_normal((config.presample + n, 2)) @ C.T
    if np.any(A):
        w = np.empty_like(z)
        prev = np.zeros(2)
        for t in range(z.shape[0]):
            prev = A @ prev + z[t]
            w[t] = prev
    else:
        w = z
    w = w[config.presample:]
    return w[:, 0].copy(), w[:, 1].copy(), A


@dataclass(frozen=True)
class GcprSample:
    data: Dataset
    u: np.ndarray
    v: np.ndarray
    A: np.ndarray


def gcpr_response(config: DgpConfig, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    t = np.arange(1, config.T + 1, dtype=float)
    y = sum(tau * t**th for tau, th in zip(config.tau0, config.trend_powers))
    y = y + sum(phi * x ** (j + 1) for j, phi in enumerate(config.phi0))
    return y + u


def generate_gcpr_sample(config: DgpConfig, rng: np.random.Generator | None = None,
                         A: np.ndarray | None = None, errors: tuple | None = None) -> GcprSample:
    """Draw (y, x) from the design; ``errors=(u, v)`` injects the disturbances."""
    if errors is None:
        u, v, A = generate_var1_errors(config, config.T, rng, A)
    else:
        u, v = (np.asarray(e, dtype=float) for e in errors)
        A = np.zeros((2, 2)) if A is None else A
    x = np.cumsum(v)
    y = gcpr_response(config, x, u)
    return GcprSample(Dataset.from_arrays(y, x), u, v, A)


def var1_long_run(A: np.ndarray, rho: float) -> LrvSet:
    """Population Sigma, Delta, Omega of the VAR(1) disturbances.

    Gamma_0 solves Gamma_0 = A Gamma_0 A' + Sigma_eta; Delta = Gamma_0 (I - A')^{-1};
    Omega = (I - A)^{-1} Sigma_eta (I - A')^{-1}.
    """
    S = innovation_cov(rho)
    G0 = sla.solve_discrete_lyapunov(A, S)
    delta = G0 @ np.linalg.inv(np.eye(2) - A.T)
    return LrvSet.from_matrices(G0, delta, source="population VAR(1)")


def model_spec() -> ModelSpec:
    """Constant, linear trend, free power and a quadratic in x."""
    return ModelSpec((TrendTerm.at(0.0), TrendTerm.at(1.0), TrendTerm.free()), (2,))


# ---------------------------------------------------------------------------
# scopes and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    table: str
    setting: str
    rho: float
    T: int
    phi2: float = 0.0

    def label(self) -> str:
        return f"{self.table}|{self.setting}|{self.rho:g}|{self.T}|{self.phi2:g}"

    @property
    def id(self) -> int:
        return zlib.crc32(self.label().encode())


def _default_axes(table: str) -> dict:
    if table == "power":
        return {"settings": ("A", "B", "C", "D"), "rho": (0.5,), "T": T_POWER, "phi2": PHI2_GRID}
    return {"settings": ("A", "B", "C", "D"), "rho": RHOS, "T": T_TABLE, "phi2": (0.0,)}


_SCOPE_PART = re.compile(r"^(rho|T|phi2)=([-0-9.,eE+]+)$")


def parse_scope(text: str | None, table: str) -> list[Cell]:
    """Cells selected by a scope string.

    Grammar: ``group[;group...]`` where a group is ``SETTINGS[:key=v1,v2...]...``
    with SETTINGS a subset of ``ABCD`` (or ``all``) and key one of rho, T, phi2.
    Example: ``A:rho=0:T=100`` or ``AD:rho=0,0.5:T=100,200``.
    """
    if table not in ESTIMATORS:
        raise InputError(f"unknown table {table!r}")
    base = _default_axes(table)
    if text is None or not text.strip():
        groups = ["all"]
    else:
        groups = [g.strip() for g in text.split(";") if g.strip()]
        if not groups:
            raise InputError(f"empty scope {text!r}")
    cells: list[Cell] = []
    for g in groups:
        parts = [p.strip() for p in g.split(":")]
        head = parts[0]
        axes = dict(base)
        if head.lower() != "all":
            if not head or any(c not in SETTINGS for c in head):
                raise InputError(f"invalid settings {head!r} in scope {text!r}")
            axes["settings"] = tuple(dict.fromkeys(head))
        for p in parts[1:]:
            m = _SCOPE_PART.match(p)
            if not m:
                raise InputError(f"invalid scope component {p!r}; expected rho=, T= or phi2=")
            key, vals = m.groups()
            try:
                nums = [float(v) for v in vals.split(",") if v]
            except ValueError:
                raise InputError(f"invalid number in {p!r}") from None
            if not nums:
                raise InputError(f"no values in {p!r}")
            if key == "T":
                if any(v != int(v) or v < 10 for v in nums):
                    raise InputError(f"T values must be integers >= 10: {p!r}")
                axes["T"] = tuple(int(v) for v in nums)
            elif key == "rho":
                if any(not -1 < v < 1 for v in nums):
                    raise InputError(f"rho must lie in (-1, 1): {p!r}")
                axes["rho"] = tuple(nums)
            else:
                axes["phi2"] = tuple(nums)
        for s in axes["settings"]:
            for T in axes["T"]:
                for r in axes["rho"]:
                    for ph in axes["phi2"]:
                        c = Cell(table, s, float(r), int(T), float(ph))
                        if c not in cells:
                            cells.append(c)
    return cells


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    estimator: str
    value: float
    se: float
    n: int
    failures: int

    def to_dict(self) -> dict:
        out = asdict(self.cell)
        out.update(estimator=self.estimator, value=self.value, se=self.se, n=self.n,
                   failures=self.failures)
        return out


@dataclass(frozen=True)
class TableReport:
    """Cell values (percentages, or mean interval length) with Monte Carlo standard errors."""

    table: str
    results: tuple[CellResult, ...]
    reps: int
    J: int | None
    seed: int
    config: dict = field(default_factory=dict)

    def value(self, estimator: str, setting: str = "A", rho: float = 0.0, T: int = 100,
              phi2: float = 0.0) -> CellResult:
        for r in self.results:
            c = r.cell
            if (r.estimator == estimator and c.setting == setting and math.isclose(c.rho, rho)
                    and c.T == T and math.isclose(c.phi2, phi2)):
                return r
        raise KeyError((estimator, setting, rho, T, phi2))

    def to_dict(self) -> dict:
        return {"table": self.table, "reps": self.reps, "J": self.J, "seed": self.seed,
                "config": self.config, "cells": [r.to_dict() for r in self.results]}

    def to_csv(self) -> str:
        if self.table == "power":
            lines = ["phi2,power,T"]
            for r in sorted(self.results, key=lambda r: (r.cell.T, r.cell.phi2)):
                lines.append(f"{r.cell.phi2:g},{r.value:.4f},{r.cell.T}")
            return "\n".join(lines) + "\n"
        lines = ["table,setting,rho,T,phi2,estimator,value,se,n,failures"]
        for r in self.results:
            c = r.cell
            lines.append(f"{c.table},{c.setting},{c.rho:g},{c.T},{c.phi2:g},{r.estimator},"
                         f"{r.value:.4f},{r.se:.4f},{r.n},{r.failures}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        if self.table == "table1":
            return self._text_table1()
        cols = sorted({(r.cell.setting, r.cell.rho) for r in self.results})
        head = f"{'':<18}" + "".join(f"{s}:{rho:g}".rjust(10) for s, rho in cols)
        out = [f"{self.table}  reps={self.reps}  J={self.J}  seed={self.seed}", head]
        keys = sorted({(r.cell.T, r.cell.phi2) for r in self.results})
        ests = list(dict.fromkeys(r.estimator for r in self.results))
        for T, ph in keys:
            out.append(f"T={T}" + (f" phi2={ph:g}" if self.table == "power" else ""))
            for e in ests:
                row = f"  {e:<16}"
                for s, rho in cols:
                    try:
                        v = self.value(e, s, rho, T, ph).value
                        row += f"{v:10.2f}"
                    except KeyError:
                        row += f"{'':>10}"
                out.append(row)
        return "\n".join(out) + "\n"

    def _text_table1(self) -> str:
        taus = sorted({r.cell.phi2 for r in self.results})
        out = [f"table1  reps={self.reps}  seed={self.seed}",
               "tau0 (1e-4)".ljust(12) + "".join(f"{t * 1e4:8.0f}" for t in taus)]
        for T in sorted({r.cell.T for r in self.results}):
            row = f"T={T}".ljust(12)
            for t in taus:
                row += f"{self.value('t-test', 'A', 0.0, T, t).value:8.1f}"
            out.append(row)
        return "\n".join(out) + "\n"


def _summarise(cell: Cell, estimator: str, vals: list) -> CellResult:
    ok = np.array([v for v in vals if v is not None], dtype=float)
    fails = len(vals) - ok.size
    if ok.size == 0:
        return CellResult(cell, estimator, float("nan"), float("nan"), 0, fails)
    if estimator == "Length":
        se = float(ok.std(ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else float("nan")
        return CellResult(cell, estimator, float(ok.mean()), se, ok.size, fails)
    p = float(ok.mean())
    return CellResult(cell, estimator, 100 * p, 100 * math.sqrt(p * (1 - p) / ok.size), ok.size, fails)


# ---------------------------------------------------------------------------
# Table 1: spurious quadratic under an omitted quadratic trend
# ---------------------------------------------------------------------------


def _table1_errors(seed: int, T: int, reps: int) -> tuple[np.ndarray, np.ndarray]:
    cell = Cell("table1", "A", 0.0, T).id
    e = np.empty((reps, 2, T))
    for r in range(reps):
        g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell, r))))
        e[r] = g.standard_normal((2, T))
    return e[:, 0], e[:, 1]


def table1_tstats(u: np.ndarray, v: np.ndarray, tau0_grid: Sequence[float]) -> np.ndarray:
    """t statistics of the x^2 coefficient, shape (len(tau0_grid), reps).

    Regression of y = -tau0 t^2 + u on [1, t, x, x^2] with sigma^2 = RSS/T.
    """
    reps, T = u.shape
    t = np.arange(1, T + 1, dtype=float)
    x = np.cumsum(v, axis=1)
    X = np.empty((reps, T, 4))
    X[:, :, 0] = 1.0
    X[:, :, 1] = t / T
    X[:, :, 2] = x / math.sqrt(T)
    X[:, :, 3] = (x / math.sqrt(T)) ** 2
    Q, R = np.linalg.qr(X)
    r44 = R[:, 3, 3]
    Qu = np.einsum("rtk,rt->rk", Q, u)
    Qt = np.einsum("rtk,t->rk", Q, t**2)
    uu = np.einsum("rt,rt->r", u, u)
    ut = u @ t**2
    tt = t**2 @ t**2
    out = np.empty((len(tau0_grid), reps))
    for i, tau in enumerate(tau0_grid):
        qy = Qu - tau * Qt
        yy = uu - 2 * tau * ut + tau * tau * tt
        rss = np.maximum(yy - np.einsum("rk,rk->r", qy, qy), 0.0)
        out[i] = np.sign(r44) * qy[:, 3] / np.sqrt(rss / T)
    return out


def table1_experiment(tau0_grid: Sequence[float] = TABLE1_TAU, T_grid: Sequence[int] = TABLE1_T,
                      reps: int = FULL_REPS, seed: int = 0, level: float = 0.05,
                      chunk: int = 5000) -> TableReport:
    """Rejection rates (%) of the one-sided t test of phi_2 >= 0 at the normal 5% quantile.

    All tau0 values at a given T share the same disturbances.
    """
    from scipy.stats import norm

    if reps < 100:
        raise InputError("table 1 needs at least 100 replications")
    crit = float(norm.ppf(level))
    results = []
    for T in T_grid:
        u, v = _table1_errors(seed, T, reps)
        rej = np.zeros(len(tau0_grid))
        for lo in range(0, reps, chunk):
            ts = table1_tstats(u[lo:lo + chunk], v[lo:lo + chunk], tau0_grid)
            rej += np.sum(ts < crit, axis=1)
        for tau, k in zip(tau0_grid, rej):
            p = k / reps
            results.append(CellResult(Cell("table1", "A", 0.0, int(T), float(tau)), "t-test",
                                      100 * p, 100 * math.sqrt(p * (1 - p) / reps), reps, 0))
    return TableReport("table1", tuple(results), reps, None, seed,
                       {"tau0_grid": list(tau0_grid), "T_grid": list(T_grid), "level": level})


# ---------------------------------------------------------------------------
# Tables 2, 4, 5 and power curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Task:
    cell: Cell
    rep: int
    seed: int
    J: int
    estimators: tuple[str, ...]
    grid_step: float
    redraw_H: bool
    fixed_A: tuple | None
    tau0: tuple[float, ...] = DgpConfig.tau0


def _streams(seed: int, cell: Cell, rep: int) -> tuple[np.random.Generator, int]:
    g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell.id, rep, 0))))
    sim_seed = int(np.random.SeedSequence(seed, spawn_key=(cell.id, rep, 1)).generate_state(1, np.uint64)[0])
    return g, sim_seed


def _safe(fn):
    try:
        return fn()
    except (GcprError, np.linalg.LinAlgError, FloatingPointError):
        return None


def replicate(task: _Task) -> dict[str, float | None]:
    """Outcomes of one replication for each requested estimator (None on failure)."""
    c = task.cell
    cfg = DgpConfig(T=c.T, tau0=task.tau0, phi0=(5.0, c.phi2), setting=c.setting, rho=c.rho,
                    redraw_H=task.redraw_H)
    rng, sim_seed = _streams(task.seed, c, task.rep)
    A = None if task.fixed_A is None else np.array(task.fixed_A)
    sample = generate_gcpr_sample(cfg, rng, A)
    data = sample.data
    spec = model_spec()
    grid = GridSpec(step=task.grid_step)
    theta0 = np.array(cfg.trend_powers)
    sim = SimConfig(J=task.J, seed=sim_seed)
    out: dict[str, float | None] = {}

    fit = _safe(lambda: fit_gcpr(spec, data, grid))
    lrv = None if fit is None else _safe(lambda: lrv_from_fit(fit, data))
    need0 = any(e.endswith("(theta0)") for e in task.estimators)
    fit0 = _safe(lambda: fit_at_theta(spec, data, theta0)) if need0 else None
    lrv0 = None if fit0 is None else _safe(lambda: lrv_from_fit(fit0, data))

    def sim_test(f, lv):
        d = run_sim_inference(f, lv, sim)
        return float(test_coefficient(d, "phi2", 0.0).reject)

    def fm_test(theta, lv):
        fm = fmols_fit(spec, data, lv, theta)
        return float(fmols_t_stat_phi(fm, lv, "phi2").reject)

    cov_ci = None
    for e in task.estimators:
        if e == "SimNLS":
            out[e] = None if lrv is None else _safe(lambda: sim_test(fit, lrv))
        elif e == "SimNLS(theta0)":
            out[e] = None if lrv0 is None else _safe(lambda: sim_test(fit0, lrv0))
        elif e == "FMOLS":
            out[e] = None if lrv is None else _safe(lambda: fm_test(fit.theta, lrv))
        elif e == "FMOLS(theta0)":
            out[e] = None if lrv0 is None else _safe(lambda: fm_test(theta0, lrv0))
        elif e in ("Coverage", "Length"):
            if cov_ci is None and lrv is not None:
                cov_ci = _safe(lambda: confidence_interval(run_sim_inference(fit, lrv, sim), "theta"))
            if cov_ci is None:
                out[e] = None
            elif e == "Coverage":
                out[e] = float(cov_ci[0] <= cfg.theta0 <= cov_ci[1])
            else:
                out[e] = cov_ci[1] - cov_ci[0]
        elif e == "Coverage(Omega)":
            true = var1_long_run(sample.A, cfg.rho)
            if fit is None:
                out[e] = None
            else:
                ci = _safe(lambda: confidence_interval(run_sim_inference(fit, true, sim), "theta"))
                out[e] = None if ci is None else float(ci[0] <= cfg.theta0 <= ci[1])
        elif e == "KPSS":
            out[e] = None if lrv is None else _safe(lambda: float(run_kpss(fit, data, lrv).reject))
        elif e == "KPSS(theta0)":
            out[e] = None if lrv0 is None else _safe(lambda: float(run_kpss(fit0, data, lrv0).reject))
        else:
            raise InputError(f"unknown estimator {e!r}")
    return out


def run_cell(cell: Cell, reps: int, J: int, seed: int, estimators: Sequence[str] | None = None,
             workers: int = 1, grid_step: float = 0.01, redraw_H: bool = True,
             tau0: Sequence[float] = DgpConfig.tau0) -> list[CellResult]:
    ests = tuple(estimators or ESTIMATORS[cell.table])
    fixed_A = None
    if not redraw_H:
        g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell.id,))))
        fixed_A = tuple(map(tuple, var1_matrix(cell.setting, g)))
    tasks = [_Task(cell, r, seed, J, ests, grid_step, redraw_H, fixed_A, tuple(map(float, tau0)))
             for r in range(reps)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            outs = list(ex.map(replicate, tasks, chunksize=max(1, reps // (8 * workers))))
    else:
        outs = [replicate(t) for t in tasks]
    return [_summarise(cell, e, [o[e] for o in outs]) for e in ests]


def table_experiment(table: str, scope: str | Iterable[Cell] | None = None, reps: int = REDUCED_REPS,
                     J: int = REDUCED_J, seed: int = 0, estimators: Sequence[str] | None = None,
                     workers: int = 1, grid_step: float = 0.01, redraw_H: bool = True,
                     tau0: Sequence[float] = DgpConfig.tau0) -> TableReport:
    """Run the cells of one table; ``table`` is size2, coverage4, kpss5 or power."""
    if table not in ESTIMATORS:
        raise InputError(f"unknown table {table!r}; choose from {sorted(ESTIMATORS)}")
    if reps < 1:
        raise InputError("reps must be positive")
    cells = parse_scope(scope, table) if scope is None or isinstance(scope, str) else list(scope)
    if estimators is not None:
        bad = [e for e in estimators if e not in ESTIMATORS[table]]
        if bad:
            raise InputError(f"estimators {bad} do not belong to table {table}")
    results: list[CellResult] = []
    for c in cells:
        results += run_cell(c, reps, J, seed, estimators, workers, grid_step, redraw_H, tau0)
    cfg = {"estimators": list(estimators or ESTIMATORS[table]), "grid_step": grid_step,
           "redraw_H": redraw_H, "tau0": list(map(float, tau0)), "kernel": "bartlett", "bandwidth": "andrews", "N": "T",
           "cells": [asdict(c) for c in cells]}
    return TableReport(table, tuple(results), reps, J, seed, cfg)


def power_is_monotone(values: Sequence[float], ses: Sequence[float]) -> bool:
    """Nondecreasing up to at most one dip no larger than one standard error."""
    dips = 0
    for a, b, s in zip(values[:-1], values[1:], ses[1:]):
        if b < a:
            if a - b > s:
                return False
            dips += 1
    return dips <= 1


__all__ = [
    "DgpConfig", "GcprSample", "TableReport", "CellResult", "Cell", "generate_var1_errors",
    "generate_gcpr_sample", "var1_long_run", "var1_matrix", "rotation", "table1_experiment",
    "table_experiment", "parse_scope", "run_cell", "replicate", "power_is_monotone", "model_spec",
]


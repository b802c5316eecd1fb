"""Subsampling KPSS-type test of the cointegration null.

The fully modified residuals are split into M = floor(n/q) disjoint blocks,
taken alternately from the start and the end of the sample. Each block gives
a KPSS statistic whose null limit is int_0^1 W(r)^2 dr; the null is rejected
when the largest exceeds the alpha/M upper quantile of that law (Bonferroni).
The block length q is chosen by the minimum-volatility rule over block
counts M = 4..12.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from . import _kernels
from .core import Dataset, DegenerateDataError, InputError
from .lrv import LrvSet


@dataclass(frozen=True)
class KpssResult:
    q_chosen: int
    M: int
    block_stats: np.ndarray
    max_stat: float
    critical: float
    reject: bool
    alpha: float
    omega_u_dot_v: float
    n: int
    volatility_trace: tuple[tuple[int, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "q_chosen": self.q_chosen,
            "M": self.M,
            "block_stats": self.block_stats.tolist(),
            "max_stat": self.max_stat,
            "critical": self.critical,
            "reject": self.reject,
            "alpha": self.alpha,
            "omega_u_dot_v": self.omega_u_dot_v,
            "n": self.n,
            "volatility_trace": [{"q": q, "max_stat": s, "volatility": None if math.isnan(v) else v}
                                 for q, s, v in self.volatility_trace],
        }


def fm_residuals(fit, data: Dataset, lrv: LrvSet, include_first: bool = False) -> np.ndarray:
    """u_t - Omega_uv Omega_vv^{-1} dx_t for t = 2..T (t = 1..T with ``include_first``)."""
    u = np.asarray(fit.residuals, dtype=float)
    if u.size != data.T:
        raise InputError("fit and data have different lengths")
    x = data.x
    dx = np.diff(np.vstack([np.zeros((1, x.shape[1])), x]), axis=0)
    if not include_first:
        u, dx = u[1:], dx[1:]
    if data.m == 0:
        return u.copy()
    if lrv.m != data.m:
        raise InputError("LRV and data disagree on the number of regressors")
    try:
        coef = np.linalg.solve(lrv.omega_vv, lrv.omega_uv)
    except np.linalg.LinAlgError:
        raise DegenerateDataError("Omega_vv is singular") from None
    return u - dx @ coef


def kpss_statistic(u_plus, omega_u_dot_v: float) -> float:
    """q^{-2} sum_t S_t^2 / Omega_u.v for one segment of length q."""
    u = np.ascontiguousarray(u_plus, dtype=float)
    q = u.size
    if q < 4:
        raise InputError(f"segment length must be at least 4, got {q}")
    if not omega_u_dot_v > 0:
        raise DegenerateDataError("conditional long-run variance is not positive")
    return float(_kernels.block_stats(u, np.array([0], dtype=np.int64), q, float(omega_u_dot_v))[0])


def subsample_blocks(n: int, q: int) -> list[range]:
    """M = floor(n/q) blocks (0-based), alternating between start and end.

    Block 1 is the first q observations, block 2 the last q, block 3 the next
    q from the start, and so on. Leftover middle observations are unused.
    """
    if not 1 <= q <= n:
        raise InputError(f"need 1 <= q <= n, got q={q}, n={n}")
    M = n // q
    out = []
    for b in range(M):
        k = b // 2
        if b % 2 == 0:
            out.append(range(k * q, (k + 1) * q))
        else:
            out.append(range(n - (k + 1) * q, n - k * q))
    return out


def block_statistics(u_plus, omega_u_dot_v: float, q: int) -> np.ndarray:
    u = np.ascontiguousarray(u_plus, dtype=float)
    starts = np.array([r.start for r in subsample_blocks(u.size, q)], dtype=np.int64)
    return _kernels.block_stats(u, starts, q, float(omega_u_dot_v))


# ---------------------------------------------------------------------------
# critical values
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def intw2_table() -> tuple[np.ndarray, np.ndarray]:
    """(tail_prob, quantile) of int_0^1 W^2, sorted by increasing tail probability."""
    text = resources.files("gcpr").joinpath("data/intw2_quantiles.csv").read_text(encoding="utf-8")
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    arr = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
    o = np.argsort(arr[:, 0])
    return arr[o, 0], arr[o, 1]


def critical_value(alpha: float, M: int = 1) -> float:
    """c with P(int W^2 >= c) = alpha/M, interpolated linearly in log probability."""
    if M < 1:
        raise InputError("M must be at least 1")
    p = alpha / M
    probs, quant = intw2_table()
    if not 0 < p < 0.5:
        raise InputError(f"alpha/M = {p:g} must lie in (0, 0.5)")
    if p < probs[0] * (1 - 1e-12):
        raise InputError(f"alpha/M = {p:g} is below the table resolution {probs[0]:g}")
    return float(np.interp(math.log(p), np.log(probs), quant))


# ---------------------------------------------------------------------------
# block-size choice and the full procedure
# ---------------------------------------------------------------------------


BLOCK_COUNTS = (4, 12)


def default_q_grid(n: int, blocks: tuple[int, int] = BLOCK_COUNTS) -> list[int]:
    """Block lengths q = floor(n/M) for block counts M in ``blocks`` (inclusive), q >= 4."""
    lo, hi = blocks
    if not 1 <= lo <= hi:
        raise InputError(f"invalid block-count range {blocks}")
    grid = sorted({n // M for M in range(lo, hi + 1) if n // M >= 4})
    if not grid:
        raise InputError(f"sample of {n} observations is too short for blocks of length 4")
    return grid


def volatility(s, window: int = 2, edges: str = "interior") -> np.ndarray:
    """Rolling sample standard deviation of ``s`` over ``window`` neighbours each side.

    With ``edges='interior'`` entries without a complete window are NaN
    (unless the sequence is too short, in which case ``'shrink'`` is used).
    """
    if edges not in ("interior", "shrink"):
        raise InputError(f"edges must be 'interior' or 'shrink', got {edges!r}")
    if window < 1:
        raise InputError("window must be at least 1")
    s = np.asarray(s, dtype=float)
    n = s.size
    if edges == "interior" and n < 2 * window + 1:
        edges = "shrink"
    vol = np.full(n, np.nan)
    for i in range(n):
        if edges == "interior" and not window <= i < n - window:
            continue
        w = s[max(0, i - window): i + window + 1]
        vol[i] = float(np.std(w, ddof=1)) if w.size > 1 else 0.0
    return vol


def min_volatility_q(u_plus, omega_u_dot_v: float, q_grid, window: int = 2, edges: str = "interior"
                     ) -> tuple[int, tuple[tuple[int, float, float], ...]]:
    """Block length whose max-statistic is most stable across neighbouring lengths.

    Volatility is the sample standard deviation of the max-statistics over
    ``window`` neighbours on each side. With ``edges='interior'`` only
    candidates with a complete window compete (edge candidates report NaN);
    with ``edges='shrink'`` the window is cut at the ends of the grid. Grids
    too short for a complete window fall back to ``'shrink'``. Ties go to the
    smaller q.
    """
    if edges not in ("interior", "shrink"):
        raise InputError(f"edges must be 'interior' or 'shrink', got {edges!r}")
    if window < 1:
        raise InputError("window must be at least 1")
    u = np.ascontiguousarray(u_plus, dtype=float)
    n = u.size
    grid = sorted({int(q) for q in q_grid if 4 <= int(q) <= n // 2})
    if not grid:
        raise InputError("no feasible block length in the grid")
    s = np.array([block_statistics(u, omega_u_dot_v, q).max() for q in grid])
    vol = volatility(s, window, edges)
    best = int(np.nanargmin(vol))
    trace = tuple((q, float(a), float(v)) for q, a, v in zip(grid, s, vol))
    return grid[best], trace


def run_kpss(fit, data: Dataset, lrv: LrvSet, alpha: float = 0.05, q_grid=None,
             window: int = 2, include_first: bool = False, edges: str = "interior") -> KpssResult:
    """Fully modified residuals, minimum-volatility q and the Bonferroni decision."""
    u = fm_residuals(fit, data, lrv, include_first)
    omega = float(lrv.omega_u_dot_v)
    scale = max(float(np.linalg.norm(data.y)), 1e-300)
    if not np.linalg.norm(u) > 1e-10 * scale or not omega > 0:
        raise DegenerateDataError("residuals are degenerate; the test is not defined")
    return kpss_test(u, omega, alpha, q_grid, window, edges)


def kpss_test(u_plus, omega_u_dot_v: float, alpha: float = 0.05, q_grid=None, window: int = 2,
              edges: str = "interior") -> KpssResult:
    """The test applied to a given residual series and conditional LRV."""
    u = np.ascontiguousarray(u_plus, dtype=float)
    if not omega_u_dot_v > 0:
        raise DegenerateDataError("conditional long-run variance is not positive")
    q_grid = default_q_grid(u.size) if q_grid is None else q_grid
    q, trace = min_volatility_q(u, omega_u_dot_v, q_grid, window, edges)
    stats = block_statistics(u, omega_u_dot_v, q)
    M = stats.size
    crit = critical_value(alpha, M)
    mx = float(stats.max())
    return KpssResult(q, M, stats, mx, crit, bool(mx > crit), alpha, float(omega_u_dot_v), u.size,
                      trace)

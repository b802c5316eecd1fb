"""Pure numpy implementations of the hot loops.

Every function here has a twin in ``_cy.pyx`` with the same signature and
semantics; the test suite checks the two agree.
"""
from __future__ import annotations

import numpy as np


def profile_rss(log_t, my, q, thetas, pivot_ref):
    """Profiled RSS for one free trend column ``exp(theta * log_t)``.

    ``q`` is an orthonormal basis (T x k0) of the fixed columns and ``my`` the
    response residualised on it. Entries where the free column is numerically
    inside span(q) are returned as NaN.
    """
    log_t = np.asarray(log_t, dtype=np.float64)
    my = np.asarray(my, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    thetas = np.asarray(thetas, dtype=np.float64)
    out = np.empty(thetas.shape[0])
    for g, th in enumerate(thetas):
        z = np.exp(th * log_t)
        nz = np.sqrt(z @ z)
        if q.shape[1]:
            z = z - q @ (q.T @ z)
        mzz = z @ z
        if not np.sqrt(mzz) > 1e-10 * max(nz, pivot_ref):
            out[g] = np.nan
            continue
        r = my - (z @ my / mzz) * z
        out[g] = r @ r
    return out


def weighted_autocov(v, weights):
    """Sum_i weights[i-1] * n^{-1} sum_t V_t V_{t+i}' for lags i = 1..len(weights)."""
    v = np.asarray(v, dtype=np.float64)
    n, k = v.shape
    acc = np.zeros((k, k))
    for i, w in enumerate(weights, start=1):
        if i >= n:
            break
        if w != 0.0:
            acc += w * (v[:-i].T @ v[i:])
    return acc / n


def sim_moments(e, chol, det, orders):
    """Moment matrices of the normalised regressors for a batch of draws.

    Parameters
    ----------
    e : (J, N, m+1) standard normal innovations
    chol : (m+1, m+1) factor F with F F' = Omega
    det : (N, kd) normalised deterministic regressors, shared by all draws
    orders : (m,) integer powers of each stochastic regressor

    Returns
    -------
    mom : (J, k, k) sum of f f'
    cross : (J, k) sum of f * mu
    bavg : (J, m, pmax) averages of (chi/sqrt(N))^l for l = 0..pmax-1
    """
    e = np.asarray(e, dtype=np.float64)
    jn, n, m1 = e.shape
    m = m1 - 1
    orders = np.asarray(orders, dtype=np.int64)
    pmax = int(orders.max()) if m else 0
    w = e @ np.asarray(chol, dtype=np.float64).T
    mu = w[:, :, 0]
    rn = np.sqrt(n)
    chi = np.cumsum(w[:, :, 1:], axis=1) / rn
    cols = [np.broadcast_to(det, (jn,) + det.shape)]
    bavg = np.zeros((jn, m, max(pmax, 1)))
    for i in range(m):
        pw = np.ones((jn, n))
        for ell in range(orders[i]):
            bavg[:, i, ell] = pw.mean(axis=1)
            pw = pw * chi[:, :, i]
            cols.append((pw / rn)[:, :, None])
    f = np.concatenate(cols, axis=2) if len(cols) > 1 else np.array(cols[0])
    mom = np.einsum("jnk,jnl->jkl", f, f)
    cross = np.einsum("jnk,jn->jk", f, mu)
    return mom, cross, bavg


def block_stats(u, starts, q, omega):
    """KPSS statistic on each block ``u[s:s+q]``."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty(len(starts))
    for b, s in enumerate(starts):
        c = np.cumsum(u[s:s + q])
        out[b] = (c @ c) / (q * q * omega)
    return out


def intw2(e):
    """Row-wise n^{-2} sum_t S_t^2 with S_t the partial sums of ``e``."""
    e = np.asarray(e, dtype=np.float64)
    s = np.cumsum(e, axis=1)
    return np.einsum("ij,ij->i", s, s) / e.shape[1] ** 2

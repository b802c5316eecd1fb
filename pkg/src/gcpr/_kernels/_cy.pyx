# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot loops in ``_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, NAN

cnp.import_array()


def profile_rss(log_t, my, q, thetas, double pivot_ref):
    cdef const double[::1] lt = np.ascontiguousarray(log_t, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(my, dtype=np.float64)
    cdef const double[:, ::1] qq = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef Py_ssize_t T = lt.shape[0], k0 = qq.shape[1], G = th.shape[0]
    cdef Py_ssize_t g, t, c
    cdef double[::1] z = np.empty(T)
    cdef double[::1] proj = np.empty(max(k0, 1))
    out_arr = np.empty(G)
    cdef double[::1] out = out_arr
    cdef double nz, mzz, zy, beta, r, rss, ref
    with nogil:
        for g in range(G):
            nz = 0.0
            for t in range(T):
                z[t] = exp(th[g] * lt[t])
                nz += z[t] * z[t]
            nz = sqrt(nz)
            for c in range(k0):
                proj[c] = 0.0
            for t in range(T):
                for c in range(k0):
                    proj[c] += qq[t, c] * z[t]
            mzz = 0.0
            zy = 0.0
            for t in range(T):
                for c in range(k0):
                    z[t] -= qq[t, c] * proj[c]
                mzz += z[t] * z[t]
                zy += z[t] * y[t]
            ref = nz if nz > pivot_ref else pivot_ref
            if not (sqrt(mzz) > 1e-10 * ref):
                out[g] = NAN
                continue
            beta = zy / mzz
            rss = 0.0
            for t in range(T):
                r = y[t] - beta * z[t]
                rss += r * r
            out[g] = rss
    return out_arr


def weighted_autocov(v, weights):
    cdef const double[:, ::1] V = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = V.shape[0], k = V.shape[1], L = w.shape[0]
    cdef Py_ssize_t i, t, a, b
    acc_arr = np.zeros((k, k))
    cdef double[:, ::1] acc = acc_arr
    cdef double wi
    with nogil:
        for i in range(1, L + 1):
            if i >= n:
                break
            wi = w[i - 1]
            if wi == 0.0:
                continue
            for t in range(n - i):
                for a in range(k):
                    for b in range(k):
                        acc[a, b] += wi * V[t, a] * V[t + i, b]
        for a in range(k):
            for b in range(k):
                acc[a, b] /= n
    return acc_arr


def sim_moments(e, chol, det, orders):
    cdef const double[:, :, ::1] E = np.ascontiguousarray(e, dtype=np.float64)
    cdef const double[:, ::1] F = np.ascontiguousarray(chol, dtype=np.float64)
    cdef const double[:, ::1] D = np.ascontiguousarray(det, dtype=np.float64)
    cdef const long long[::1] P = np.ascontiguousarray(orders, dtype=np.int64)
    cdef Py_ssize_t J = E.shape[0], N = E.shape[1], m1 = E.shape[2]
    cdef Py_ssize_t m = m1 - 1, kd = D.shape[1]
    cdef Py_ssize_t ptot = 0, pmax = 1, i, ell, j, n, a, b, c
    for i in range(m):
        ptot += P[i]
        if P[i] > pmax:
            pmax = P[i]
    cdef Py_ssize_t k = kd + ptot
    mom_arr = np.zeros((J, k, k))
    cross_arr = np.zeros((J, k))
    bavg_arr = np.zeros((J, m, pmax))
    cdef double[:, :, ::1] mom = mom_arr
    cdef double[:, ::1] cross = cross_arr
    cdef double[:, :, ::1] bavg = bavg_arr
    cdef double[::1] f = np.empty(max(k, 1))
    cdef double[::1] w = np.empty(m1)
    cdef double[::1] chi = np.empty(max(m, 1))
    cdef double rn = sqrt(<double>N), mu, pw, cz
    with nogil:
        for j in range(J):
            for i in range(m):
                chi[i] = 0.0
            for n in range(N):
                for a in range(m1):
                    w[a] = 0.0
                    for b in range(m1):
                        w[a] += F[a, b] * E[j, n, b]
                mu = w[0]
                for a in range(kd):
                    f[a] = D[n, a]
                c = kd
                for i in range(m):
                    chi[i] += w[i + 1]
                    cz = chi[i] / rn
                    pw = 1.0
                    for ell in range(P[i]):
                        bavg[j, i, ell] += pw
                        pw *= cz
                        f[c] = pw / rn
                        c += 1
                for a in range(k):
                    cross[j, a] += f[a] * mu
                    for b in range(a + 1):
                        mom[j, a, b] += f[a] * f[b]
            for a in range(k):
                for b in range(a):
                    mom[j, b, a] = mom[j, a, b]
            for i in range(m):
                for ell in range(P[i]):
                    bavg[j, i, ell] /= N
    return mom_arr, cross_arr, bavg_arr


def block_stats(u, starts, Py_ssize_t q, double omega):
    cdef const double[::1] U = np.ascontiguousarray(u, dtype=np.float64)
    cdef const long long[::1] S = np.ascontiguousarray(starts, dtype=np.int64)
    cdef Py_ssize_t nb = S.shape[0], b, t
    out_arr = np.empty(nb)
    cdef double[::1] out = out_arr
    cdef double c, acc
    with nogil:
        for b in range(nb):
            c = 0.0
            acc = 0.0
            for t in range(S[b], S[b] + q):
                c += U[t]
                acc += c * c
            out[b] = acc / (<double>q * q * omega)
    return out_arr


def intw2(e):
    cdef const double[:, ::1] E = np.ascontiguousarray(e, dtype=np.float64)
    cdef Py_ssize_t R = E.shape[0], n = E.shape[1], r, t
    out_arr = np.empty(R)
    cdef double[::1] out = out_arr
    cdef double s, acc
    with nogil:
        for r in range(R):
            s = 0.0
            acc = 0.0
            for t in range(n):
                s += E[r, t]
                acc += s * s
            out[r] = acc / (<double>n * n)
    return out_arr

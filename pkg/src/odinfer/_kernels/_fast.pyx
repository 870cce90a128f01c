# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend; see `_reference.py` for the contract.

All routines are loop-for-loop translations of the reference module so the
two backends agree to floating-point round-off on identical inputs.
"""

from libc.math cimport sqrt, log, INFINITY, pow

import numpy as np

cimport numpy as cnp

cnp.import_array()


def recursion_pass(X, Z, double gamma, streams=None, bint collect_weights=False):
    X = np.ascontiguousarray(X, dtype=np.float64)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef const double[:, ::1] Xv = X
    cdef const double[:, ::1] Zv = Z
    cdef Py_ssize_t n = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    cdef Py_ssize_t nk = 0
    cdef const double[:, ::1] Sv
    streams_arr = None
    if streams is not None:
        streams_arr = np.ascontiguousarray(streams, dtype=np.float64)
        Sv = streams_arr
        nk = Sv.shape[1]

    delta_arr = np.eye(d)
    sum_gww_arr = np.zeros((d, d))
    sum_z2ww_arr = np.zeros((d, d))
    sum_wz_arr = np.zeros((d, d))
    sum_wx_arr = np.zeros((d, d))
    sum_zz_arr = np.zeros((d, d))
    sum_ws_arr = np.zeros((d, nk)) if streams is not None else None
    W_arr = np.zeros((n, d)) if collect_weights else None

    cdef double[:, ::1] delta = delta_arr
    cdef double[:, ::1] sum_gww = sum_gww_arr
    cdef double[:, ::1] sum_z2ww = sum_z2ww_arr
    cdef double[:, ::1] sum_wz = sum_wz_arr
    cdef double[:, ::1] sum_wx = sum_wx_arr
    cdef double[:, ::1] sum_zz = sum_zz_arr
    cdef double[:, ::1] sum_ws
    if streams is not None:
        sum_ws = sum_ws_arr
    cdef double[:, ::1] Wv
    if collect_weights:
        Wv = W_arr

    w_arr = np.zeros(d)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i, j, k
    cdef double nz2, denom, acc, max_gw = 0.0, max_zr = 0.0, gw, zr, wj, zj

    for i in range(n):
        nz2 = 0.0
        for j in range(d):
            zj = Zv[i, j]
            nz2 += zj * zj
        denom = 0.5 * gamma + nz2
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += delta[j, k] * Zv[i, k]
            w[j] = acc / denom
        for j in range(d):
            wj = w[j]
            for k in range(d):
                delta[j, k] -= wj * Zv[i, k]
                sum_gww[j, k] += gamma * wj * w[k]
                sum_z2ww[j, k] += nz2 * wj * w[k]
                sum_wz[j, k] += wj * Zv[i, k]
                sum_wx[j, k] += wj * Xv[i, k]
                sum_zz[j, k] += Zv[i, j] * Zv[i, k]
        if streams is not None:
            for j in range(d):
                wj = w[j]
                for k in range(nk):
                    sum_ws[j, k] += wj * Sv[i, k]
        acc = 0.0
        for j in range(d):
            acc += w[j] * w[j]
        gw = sqrt(gamma * acc)
        if gw > max_gw:
            max_gw = gw
        zr = nz2 / gamma
        if zr > max_zr:
            max_zr = zr
        if collect_weights:
            for j in range(d):
                Wv[i, j] = w[j]

    return {
        "delta": delta_arr,
        "sum_gww": sum_gww_arr,
        "sum_z2ww": sum_z2ww_arr,
        "sum_wz": sum_wz_arr,
        "sum_wx": sum_wx_arr,
        "sum_zz": sum_zz_arr,
        "sum_ws": sum_ws_arr,
        "max_gw_norm": max_gw,
        "max_z_ratio": max_zr,
        "weights": W_arr,
    }


def bandit_z_pass(arms, Py_ssize_t d, double log_n_sq):
    arms = np.ascontiguousarray(arms, dtype=np.int64)
    cdef const cnp.int64_t[::1] av = arms
    cdef Py_ssize_t n = av.shape[0]
    counts_arr = np.zeros(d)
    Z_arr = np.zeros((n, d))
    cdef double[::1] counts = counts_arr
    cdef double[:, ::1] Z = Z_arr
    cdef Py_ssize_t i, k
    cdef double gkk
    for i in range(n):
        k = <Py_ssize_t> av[i]
        gkk = counts[k] if counts[k] > log_n_sq else log_n_sq
        Z[i, k] = 1.0 / sqrt(gkk)
        counts[k] += 1.0
    counts[<Py_ssize_t> av[n - 1]] -= 1.0
    return Z_arr, np.maximum(counts_arr, log_n_sq)


def ar1_z_pass(x, double log_n_sq):
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    cdef const double[::1] xv = x
    cdef Py_ssize_t n = xv.shape[0]
    Z_arr = np.zeros((n, 1))
    cdef double[:, ::1] Z = Z_arr
    cdef double x1sq = xv[0] * xv[0]
    cdef double cum = 0.0, g, past, xi, gamma_last = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        xi = xv[i]
        cum += xi * xi
        g = log_n_sq * xi * xi
        past = cum - x1sq
        if past > g:
            g = past
        gamma_last = g
        if g > 0.0:
            Z[i, 0] = xi / sqrt(g)
        elif xi != 0.0:
            raise ValueError("invalid scaling matrix")
    return Z_arr, np.array([gamma_last])


cdef int _cholesky(double[:, ::1] A, double[:, ::1] L, Py_ssize_t d) nogil:
    """L (lower) with L L^T = A; returns 0 on success, -1 if not PD."""
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(d):
        for j in range(i + 1):
            acc = A[i, j]
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            if i == j:
                if acc <= 0.0:
                    return -1
                L[i, i] = sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
        for j in range(i + 1, d):
            L[i, j] = 0.0
    return 0


cdef void _spd_solve(double[:, ::1] L, double[::1] b, double[::1] out, double[::1] tmp, Py_ssize_t d) nogil:
    """Solve (L L^T) out = b given the Cholesky factor L."""
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(d):
        acc = b[i]
        for k in range(i):
            acc -= L[i, k] * tmp[k]
        tmp[i] = acc / L[i, i]
    for i in range(d - 1, -1, -1):
        acc = tmp[i]
        for k in range(i + 1, d):
            acc -= L[k, i] * out[k]
        out[i] = acc / L[i, i]


def general_z_pass(X, L_diag):
    X = np.ascontiguousarray(X, dtype=np.float64)
    L_diag = np.ascontiguousarray(L_diag, dtype=np.float64)
    cdef const double[:, ::1] Xv = X
    cdef const double[::1] Lv = L_diag
    cdef Py_ssize_t n = Xv.shape[0]
    cdef Py_ssize_t d = Xv.shape[1]
    S_arr = np.zeros((d, d))
    Lf_arr = np.zeros((d, d))
    Z_arr = np.zeros((n, d))
    gdiag_arr = L_diag.copy()
    ei_arr = np.zeros(d)
    col_arr = np.zeros(d)
    tmp_arr = np.zeros(d)
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] Lf = Lf_arr
    cdef double[:, ::1] Z = Z_arr
    cdef double[::1] gdiag = gdiag_arr
    cdef double[::1] ei = ei_arr
    cdef double[::1] col = col_arr
    cdef double[::1] tmp = tmp_arr
    inv_diag_arr = np.zeros(d)
    cdef double[::1] inv_diag = inv_diag_arr
    cdef Py_ssize_t i, j, k
    cdef double q, g
    cdef int ok
    for i in range(n):
        ok = -1
        if i >= d:
            ok = _cholesky(S, Lf, d)
        if ok == 0:
            # all-or-nothing like the reference: use diag(S^-1) only if every
            # entry is positive and finite
            for j in range(d):
                for k in range(d):
                    ei[k] = 0.0
                ei[j] = 1.0
                _spd_solve(Lf, ei, col, tmp, d)
                inv_diag[j] = col[j]
                if not (col[j] > 0.0 and col[j] - col[j] == 0.0):
                    ok = -1
                    break
        for j in range(d):
            g = Lv[j]
            if ok == 0:
                q = 1.0 / inv_diag[j]
                if q > g:
                    g = q
            gdiag[j] = g
            Z[i, j] = Xv[i, j] / sqrt(g)
        for j in range(d):
            for k in range(d):
                S[j, k] += Xv[i, j] * Xv[i, k]
    return Z_arr, gdiag_arr


def simulate_bandit_eps_greedy(theta, Py_ssize_t n, double eps, noise, explore_coins, arm_uniforms):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    explore_coins = np.ascontiguousarray(explore_coins, dtype=np.float64)
    arm_uniforms = np.ascontiguousarray(arm_uniforms, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[::1] eps_v = noise
    cdef const double[::1] coins = explore_coins
    cdef const double[::1] unis = arm_uniforms
    cdef Py_ssize_t d = th.shape[0]
    arms_arr = np.zeros(n, dtype=np.int64)
    y_arr = np.zeros(n)
    sums_arr = np.zeros(d)
    counts_arr = np.zeros(d)
    cdef cnp.int64_t[::1] arms = arms_arr
    cdef double[::1] y = y_arr
    cdef double[::1] sums = sums_arr
    cdef double[::1] counts = counts_arr
    cdef Py_ssize_t i, j, k
    cdef double r, best, mj
    for i in range(n):
        if i < d:
            k = i
        elif coins[i] < eps:
            k = <Py_ssize_t> (unis[i] * d)
            if k > d - 1:
                k = d - 1
        else:
            k = 0
            best = sums[0] / counts[0]
            for j in range(1, d):
                mj = sums[j] / counts[j]
                if mj > best:
                    best = mj
                    k = j
        r = th[k] + eps_v[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms_arr, y_arr


def simulate_bandit_ucb(theta, Py_ssize_t n, double c, noise):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[::1] eps_v = noise
    cdef Py_ssize_t d = th.shape[0]
    arms_arr = np.zeros(n, dtype=np.int64)
    y_arr = np.zeros(n)
    sums_arr = np.zeros(d)
    counts_arr = np.zeros(d)
    cdef cnp.int64_t[::1] arms = arms_arr
    cdef double[::1] y = y_arr
    cdef double[::1] sums = sums_arr
    cdef double[::1] counts = counts_arr
    cdef Py_ssize_t i, j, k
    cdef double r, best, idx, logt
    for i in range(n):
        if i < d:
            k = i
        else:
            logt = log(i + 1.0)
            k = 0
            best = sums[0] / counts[0] + sqrt(c * logt / counts[0])
            for j in range(1, d):
                idx = sums[j] / counts[j] + sqrt(c * logt / counts[j])
                if idx > best:
                    best = idx
                    k = j
        r = th[k] + eps_v[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms_arr, y_arr


def simulate_bandit_thompson(theta, Py_ssize_t n, noise, normals):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[::1] eps_v = noise
    cdef const double[:, ::1] nm = normals
    cdef Py_ssize_t d = th.shape[0]
    arms_arr = np.zeros(n, dtype=np.int64)
    y_arr = np.zeros(n)
    sums_arr = np.zeros(d)
    counts_arr = np.zeros(d)
    cdef cnp.int64_t[::1] arms = arms_arr
    cdef double[::1] y = y_arr
    cdef double[::1] sums = sums_arr
    cdef double[::1] counts = counts_arr
    cdef Py_ssize_t i, j, k
    cdef double r, best, draw, prec
    for i in range(n):
        if i < d:
            k = i
        else:
            k = 0
            best = -INFINITY
            for j in range(d):
                prec = 1.0 + counts[j]
                draw = sums[j] / prec + nm[i, j] / sqrt(prec)
                if draw > best:
                    best = draw
                    k = j
        r = th[k] + eps_v[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms_arr, y_arr


def simulate_ar1(double theta, Py_ssize_t n, noise):
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    cdef const double[::1] eps_v = noise
    x_arr = np.zeros(n)
    y_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr
    cdef double prev = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        x[i] = prev
        prev = theta * prev + eps_v[i]
        y[i] = prev
    return x_arr, y_arr


def simulate_linear_bandit(contexts, eps, double lam, theta, noise, explore_coins, arm_uniforms):
    contexts = np.ascontiguousarray(contexts, dtype=np.float64)
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    explore_coins = np.ascontiguousarray(explore_coins, dtype=np.float64)
    arm_uniforms = np.ascontiguousarray(arm_uniforms, dtype=np.float64)
    cdef const double[:, ::1] A = contexts
    cdef const double[::1] eps_sched = eps
    cdef const double[::1] th = theta
    cdef const double[::1] noise_v = noise
    cdef const double[::1] coins = explore_coins
    cdef const double[::1] unis = arm_uniforms
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t n = noise_v.shape[0]
    X_arr = np.zeros((n, d))
    y_arr = np.zeros(n)
    V_arr = lam * np.eye(d)
    b_arr = np.zeros(d)
    Lf_arr = np.zeros((d, d))
    tr_arr = np.zeros(d)
    tmp_arr = np.zeros(d)
    cdef double[:, ::1] X = X_arr
    cdef double[::1] y = y_arr
    cdef double[:, ::1] V = V_arr
    cdef double[::1] b = b_arr
    cdef double[:, ::1] Lf = Lf_arr
    cdef double[::1] tr = tr_arr
    cdef double[::1] tmp = tmp_arr
    cdef Py_ssize_t i, j, k, kk
    cdef double r, best, score
    for i in range(n):
        if coins[i] < eps_sched[i]:
            k = <Py_ssize_t> (unis[i] * m)
            if k > m - 1:
                k = m - 1
        else:
            if _cholesky(V, Lf, d) != 0:
                raise ValueError("ridge design matrix not positive definite")
            _spd_solve(Lf, b, tr, tmp, d)
            k = 0
            best = -INFINITY
            for j in range(m):
                score = 0.0
                for kk in range(d):
                    score += A[j, kk] * tr[kk]
                if score > best:
                    best = score
                    k = j
        r = noise_v[i]
        for kk in range(d):
            X[i, kk] = A[k, kk]
            r += A[k, kk] * th[kk]
        y[i] = r
        for j in range(d):
            for kk in range(d):
                V[j, kk] += A[k, j] * A[k, kk]
            b[j] += A[k, j] * r
    return X_arr, y_arr


def simulate_adversarial(Py_ssize_t d, Py_ssize_t n, theta, noise):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[::1] eps_v = noise
    X_arr = np.zeros((n, d))
    y_arr = np.zeros(n)
    m_arr = np.zeros(d - 1)
    cdef double[:, ::1] X = X_arr
    cdef double[::1] y = y_arr
    cdef double[::1] mv = m_arr
    cdef double sqrt_d = sqrt(<double> d)
    cdef double cum_b2 = 0.0, d_prev = 1.0, b_v, b_pv, a, r
    cdef Py_ssize_t i, u, v
    for i in range(n):
        u = i % (d - 1)
        v = i // (d - 1) + 1
        b_v = pow(<double> v, -0.25) / sqrt_d
        if u == 0 and v > 1:
            b_pv = pow(<double> (v - 1), -0.25) / sqrt_d
            cum_b2 += b_pv * b_pv
            d_prev = 1.0 + cum_b2
        a = -b_v * mv[u] / d_prev
        X[i, u] = b_v
        X[i, d - 1] = a
        r = b_v * th[u] + a * th[d - 1] + eps_v[i]
        y[i] = r
        mv[u] += b_v * (r - a)
    return X_arr, y_arr

"""Pure-Python kernel backend.

Mirrors `_fast.pyx` function-for-function; the compiled module is preferred at
import time when available.  Every routine is a tight per-row loop over a
dataset, written so both backends consume identical pre-drawn random variates
and perform the same floating-point operations in the same order.
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# weight recursion


def recursion_pass(X, Z, gamma, streams=None, collect_weights=False):
    """Run the debiasing weight recursion over rows of (X, Z).

    Z holds the scaled covariates z_i; gamma is the ridge scalar for the
    final sample size.  `streams` is an optional (n, k) matrix of per-row
    scalars r_i; the pass accumulates sum_i w_i * r_i for each column.

    Returns a dict of accumulators:
      delta        I - W_n Z_n
      sum_gww      gamma * sum w w^T
      sum_z2ww     sum ||z||^2 w w^T       (recursion-identity term)
      sum_wz       sum w z^T
      sum_wx       sum w x^T
      sum_zz       sum z z^T
      sum_ws       (d, k) stream sums, or None
      max_gw_norm  max_i sqrt(gamma) ||w_i||
      max_z_ratio  max_i ||z_i||^2 / gamma
      weights      (n, d) per-row w_i when collect_weights, else None
    """
    X = np.ascontiguousarray(X, dtype=float)
    Z = np.ascontiguousarray(Z, dtype=float)
    n, d = X.shape
    half = 0.5 * gamma
    delta = np.eye(d)
    sum_gww = np.zeros((d, d))
    sum_z2ww = np.zeros((d, d))
    sum_wz = np.zeros((d, d))
    sum_wx = np.zeros((d, d))
    sum_zz = np.zeros((d, d))
    sum_ws = None
    if streams is not None:
        streams = np.ascontiguousarray(streams, dtype=float)
        sum_ws = np.zeros((d, streams.shape[1]))
    W = np.zeros((n, d)) if collect_weights else None
    max_gw = 0.0
    max_zr = 0.0
    for i in range(n):
        z = Z[i]
        nz2 = float(z @ z)
        w = (delta @ z) / (half + nz2)
        wz = np.outer(w, z)
        delta -= wz
        ww = np.outer(w, w)
        sum_gww += gamma * ww
        sum_z2ww += nz2 * ww
        sum_wz += wz
        sum_wx += np.outer(w, X[i])
        sum_zz += np.outer(z, z)
        if sum_ws is not None:
            sum_ws += np.outer(w, streams[i])
        gw = math.sqrt(gamma * float(w @ w))
        if gw > max_gw:
            max_gw = gw
        zr = nz2 / gamma
        if zr > max_zr:
            max_zr = zr
        if W is not None:
            W[i] = w
    return {
        "delta": delta,
        "sum_gww": sum_gww,
        "sum_z2ww": sum_z2ww,
        "sum_wz": sum_wz,
        "sum_wx": sum_wx,
        "sum_zz": sum_zz,
        "sum_ws": sum_ws,
        "max_gw_norm": max_gw,
        "max_z_ratio": max_zr,
        "weights": W,
    }


# ---------------------------------------------------------------------------
# schedule passes: produce z_i = Gamma_i^{-1/2} x_i row by row


def bandit_z_pass(arms, d, log_n_sq):
    """z rows for basis-vector covariates under the arm-count schedule.

    Gamma_i = max(arm counts over rows < i, (log n)^2) element-wise on the
    diagonal.  Returns (Z, gamma_diag_last), the latter being the diagonal of
    the Gamma used at the final row.
    """
    arms = np.ascontiguousarray(arms, dtype=np.int64)
    n = arms.shape[0]
    counts = np.zeros(d)
    Z = np.zeros((n, d))
    for i in range(n):
        k = int(arms[i])
        gkk = counts[k] if counts[k] > log_n_sq else log_n_sq
        Z[i, k] = 1.0 / math.sqrt(gkk)
        counts[k] += 1.0
    counts[int(arms[n - 1])] -= 1.0  # counts strictly before the final row
    return Z, np.maximum(counts, log_n_sq)


def ar1_z_pass(x, log_n_sq):
    """z rows for the scalar autoregression schedule.

    Gamma_i = max((log n)^2 x_i^2, sum_{j<=i} x_j^2 - x_1^2); with the
    autoregression convention y_0 = 0 the first row has x_1 = 0, giving
    Gamma_1 = 0 and the degenerate z = 0 step.
    """
    x = np.ascontiguousarray(x, dtype=float).reshape(-1)
    n = x.shape[0]
    Z = np.zeros((n, 1))
    x1sq = x[0] * x[0]
    cum = 0.0
    gamma_last = 0.0
    for i in range(n):
        xi = x[i]
        cum += xi * xi
        g = log_n_sq * xi * xi
        past = cum - x1sq
        if past > g:
            g = past
        gamma_last = g
        if g > 0.0:
            Z[i, 0] = xi / math.sqrt(g)
        elif xi != 0.0:
            raise ValueError("invalid scaling matrix")
    return Z, np.array([gamma_last])


def general_z_pass(X, L_diag):
    """z rows for the diagonal schedule max{diag(S_i^{-1})^{-1}, L}.

    S_i is the prefix covariance over rows strictly before i; while it is
    singular the schedule falls back to the floor L alone.
    """
    X = np.ascontiguousarray(X, dtype=float)
    L_diag = np.ascontiguousarray(L_diag, dtype=float)
    n, d = X.shape
    S = np.zeros((d, d))
    Z = np.zeros((n, d))
    gamma_diag = L_diag.copy()
    for i in range(n):
        q = None
        if i >= d:
            try:
                diag = np.diag(np.linalg.inv(S))
                if np.all(diag > 0.0) and np.all(np.isfinite(diag)):
                    q = 1.0 / diag
            except np.linalg.LinAlgError:
                q = None
        gamma_diag = np.maximum(q, L_diag) if q is not None else L_diag.copy()
        Z[i] = X[i] / np.sqrt(gamma_diag)
        S += np.outer(X[i], X[i])
    return Z, gamma_diag


# ---------------------------------------------------------------------------
# simulators (consume pre-drawn variates; no RNG calls inside)


def simulate_bandit_eps_greedy(theta, n, eps, noise, explore_coins, arm_uniforms):
    d = theta.shape[0]
    arms = np.zeros(n, dtype=np.int64)
    y = np.zeros(n)
    sums = np.zeros(d)
    counts = np.zeros(d)
    for i in range(n):
        if i < d:
            k = i
        elif explore_coins[i] < eps:
            k = min(int(arm_uniforms[i] * d), d - 1)
        else:
            k = 0
            best = sums[0] / counts[0]
            for j in range(1, d):
                mj = sums[j] / counts[j]
                if mj > best:
                    best = mj
                    k = j
        r = theta[k] + noise[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms, y


def simulate_bandit_ucb(theta, n, c, noise):
    d = theta.shape[0]
    arms = np.zeros(n, dtype=np.int64)
    y = np.zeros(n)
    sums = np.zeros(d)
    counts = np.zeros(d)
    for i in range(n):
        if i < d:
            k = i
        else:
            logt = math.log(i + 1.0)
            k = 0
            best = sums[0] / counts[0] + math.sqrt(c * logt / counts[0])
            for j in range(1, d):
                idx = sums[j] / counts[j] + math.sqrt(c * logt / counts[j])
                if idx > best:
                    best = idx
                    k = j
        r = theta[k] + noise[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms, y


def simulate_bandit_thompson(theta, n, noise, normals):
    # per-arm N(0, 1) prior, known unit noise variance in the posterior
    d = theta.shape[0]
    arms = np.zeros(n, dtype=np.int64)
    y = np.zeros(n)
    sums = np.zeros(d)
    counts = np.zeros(d)
    for i in range(n):
        if i < d:
            k = i
        else:
            k = 0
            best = -math.inf
            for j in range(d):
                prec = 1.0 + counts[j]
                draw = sums[j] / prec + normals[i, j] / math.sqrt(prec)
                if draw > best:
                    best = draw
                    k = j
        r = theta[k] + noise[i]
        arms[i] = k
        y[i] = r
        sums[k] += r
        counts[k] += 1.0
    return arms, y


def simulate_ar1(theta, n, noise):
    x = np.zeros(n)
    y = np.zeros(n)
    prev = 0.0  # y_0 = 0
    for i in range(n):
        x[i] = prev
        prev = theta * prev + noise[i]
        y[i] = prev
    return x, y


def simulate_linear_bandit(contexts, eps, lam, theta, noise, explore_coins, arm_uniforms):
    contexts = np.ascontiguousarray(contexts, dtype=float)
    m, d = contexts.shape
    n = noise.shape[0]
    X = np.zeros((n, d))
    y = np.zeros(n)
    V = lam * np.eye(d)
    b = np.zeros(d)
    for i in range(n):
        if explore_coins[i] < eps[i]:
            k = min(int(arm_uniforms[i] * m), m - 1)
        else:
            theta_ridge = np.linalg.solve(V, b)
            scores = contexts @ theta_ridge
            k = 0
            best = scores[0]
            for j in range(1, m):
                if scores[j] > best:
                    best = scores[j]
                    k = j
        a = contexts[k]
        r = float(a @ theta) + noise[i]
        X[i] = a
        y[i] = r
        V += np.outer(a, a)
        b += a * r
    return X, y


def simulate_adversarial(d, n, theta, noise):
    """Round-robin design x_i = b_{v_i} e_{u_i} + a_{u_i, v_i} e_d."""
    X = np.zeros((n, d))
    y = np.zeros(n)
    m = np.zeros(d - 1)  # m_{u, v}: running sum of b_w (y_{u,w} - a_{u,w})
    sqrt_d = math.sqrt(d)
    cum_b2 = 0.0  # sum_{w <= v-1} b_w^2
    d_prev = 1.0  # d_{v-1} = 1 + cum_b2
    for i in range(n):
        u = i % (d - 1)  # 0-based; covers coordinates 1..d-1 in round-robin
        v = i // (d - 1) + 1
        b_v = v ** (-0.25) / sqrt_d
        if u == 0 and v > 1:
            b_pv = (v - 1) ** (-0.25) / sqrt_d
            cum_b2 += b_pv * b_pv
            d_prev = 1.0 + cum_b2
        a = -b_v * m[u] / d_prev
        X[i, u] = b_v
        X[i, d - 1] = a
        r = b_v * theta[u] + a * theta[d - 1] + noise[i]
        y[i] = r
        m[u] += b_v * (r - a)
    return X, y

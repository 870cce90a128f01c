"""OLS, the online-debiased estimator, its direction-rotated variant, and the
post-debiasing correction for multi-armed bandit designs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AdaptiveDataset,
    SampleCovariance,
    SymmetricMatrix,
    sample_covariance,
    solve_spd,
    sym_inv_sqrt,
    sym_sqrt,
)
from .weights import TuningSchedule, WeightState, run_recursion

__all__ = [
    "OlsFit",
    "OdFit",
    "DiagOdFit",
    "PostDebiasFit",
    "WeightDiagnostics",
    "ols",
    "online_debias",
    "diag_online_debias",
    "post_debias_correct",
    "householder_basis",
]


@dataclass
class OlsFit:
    theta_ls: np.ndarray
    cov: SampleCovariance
    residuals: np.ndarray
    sigma2_hat: float


@dataclass(frozen=True)
class WeightDiagnostics:
    """Scalar summary of a finished weight recursion."""

    steps: int
    max_gw_norm: float
    max_z_ratio: float
    variance_stability: float
    recursion_residual: float
    trace_gww: float


def _weight_diag(state: WeightState) -> WeightDiagnostics:
    from .weights import recursion_identity_residual

    return WeightDiagnostics(
        steps=state.steps,
        max_gw_norm=state.max_gw_norm,
        max_z_ratio=state.max_z_ratio,
        variance_stability=state.variance_stability(),
        recursion_residual=recursion_identity_residual(state),
        trace_gww=float(np.trace(state.sum_gww)),
    )


@dataclass
class OdFit:
    theta_od: np.ndarray
    gamma_n: float
    S_half: SymmetricMatrix
    bias_vec: np.ndarray | None
    mart_vec: np.ndarray | None
    weight_diag: WeightDiagnostics
    state: WeightState
    cov: SampleCovariance


@dataclass
class DiagOdFit:
    V: np.ndarray
    theta_diag_od: np.ndarray
    beta_n: float
    D_half: SymmetricMatrix
    omega11: float
    Omega21: np.ndarray
    Omega22: SymmetricMatrix
    gamma_n: float
    state: WeightState
    theta_v_ls: np.ndarray


@dataclass
class PostDebiasFit:
    theta_pd: np.ndarray
    gammahat_n: float
    target_coord: int
    gamma_n: float


def ols(dataset: AdaptiveDataset) -> OlsFit:
    """Least squares via the normal equations S theta = X^T y."""
    cov = sample_covariance(dataset)
    try:
        theta = solve_spd(cov.array, dataset.X.T @ dataset.y)
    except ValueError:
        raise ValueError("singular covariance; consider augment_dataset") from None
    residuals = dataset.y - dataset.X @ theta
    sigma2 = float(residuals @ residuals) / len(dataset)
    return OlsFit(theta, cov, residuals, sigma2)


def online_debias(dataset: AdaptiveDataset, tuning: TuningSchedule,
                  theta_star=None) -> OdFit:
    """theta_od = theta_ls + S_n^{-1/2} sum_i w_i (y_i - x_i^T theta_ls).

    When theta_star is supplied (simulation mode) the fit also carries the
    exact bias/martingale split: sqrt(gamma) S^{1/2}(theta_od - theta*) =
    bias_vec + mart_vec.
    """
    base = ols(dataset)
    S = base.cov.array
    S_half = sym_sqrt(S)
    S_inv_half = sym_inv_sqrt(S)
    streams = base.residuals[:, None]
    noise = None
    if theta_star is not None:
        theta_star = np.asarray(theta_star, dtype=float)
        noise = dataset.y - dataset.X @ theta_star
        streams = np.column_stack([base.residuals, noise])
    state = run_recursion(dataset.X, tuning, y=dataset.y, streams=streams)
    theta_od = base.theta_ls + S_inv_half.array @ state.sum_w_r
    bias_vec = mart_vec = None
    if theta_star is not None:
        root_gamma = math.sqrt(tuning.gamma_n)
        d = dataset.d
        bias_mat = np.eye(d) - state.sum_wx @ S_inv_half.array
        bias_vec = root_gamma * bias_mat @ (S_half.array @ (base.theta_ls - theta_star))
        mart_vec = root_gamma * state.sum_w_streams[:, 1]
    return OdFit(theta_od, tuning.gamma_n, S_half, bias_vec, mart_vec,
                 _weight_diag(state), state, base.cov)


def householder_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal V with first row v: the reflection swapping e_1 and v.

    Deterministic and O(d^2); reduces to the identity when v = e_1.
    """
    v = np.asarray(v, dtype=float)
    d = v.shape[0]
    e1 = np.zeros(d)
    e1[0] = 1.0
    u = v - e1
    nu2 = float(u @ u)
    if nu2 < 1e-28:
        return np.eye(d)
    H = np.eye(d) - (2.0 / nu2) * np.outer(u, u)
    return H


def diag_online_debias(dataset: AdaptiveDataset, v, tuning: TuningSchedule,
                       theta_star=None) -> DiagOdFit:
    """Direction-rotated debiased estimator enabling valid fixed-direction
    intervals.

    Rotates covariates into a basis whose first coordinate is v, runs the
    weight recursion on the rotated rows, and inflates the correction by the
    closed-form factor beta_n >= 1.
    """
    v = np.asarray(v, dtype=float)
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-8:
        raise ValueError("direction must be unit norm")
    V = householder_basis(v)
    d = dataset.d
    X_rot = dataset.X @ V.T
    rotated = AdaptiveDataset(X_rot, dataset.y, dataset.meta)
    base = ols(rotated)

    S_v = base.cov.array                      # V S_n V^T
    Omega = np.linalg.inv(S_v)                # (V S_n V^T)^{-1}
    Omega = 0.5 * (Omega + Omega.T)
    omega11 = float(Omega[0, 0])
    Omega21 = Omega[1:, 0].copy()
    Omega22 = Omega[1:, 1:].copy()

    if d == 1:
        D_half = SymmetricMatrix.from_array(np.array([[omega11 ** -0.5]]))
        D_inv_half = np.array([[math.sqrt(omega11)]])
        beta_n = 1.0
        Omega22_sym = SymmetricMatrix.zeros(0)
    else:
        Om22_inv_half = sym_inv_sqrt(Omega22).array   # (Omega_22)^{-1/2}
        Om22_half = sym_sqrt(Omega22).array
        D_half_arr = np.zeros((d, d))
        D_half_arr[0, 0] = omega11 ** -0.5
        D_half_arr[1:, 1:] = Om22_inv_half
        D_half = SymmetricMatrix.from_array(D_half_arr)
        D_inv_half = np.zeros((d, d))
        D_inv_half[0, 0] = math.sqrt(omega11)
        D_inv_half[1:, 1:] = Om22_half
        coupling = Om22_inv_half @ Omega21 * (omega11 ** -0.5)
        beta_n = math.sqrt(1.0 + 2.0 * float(coupling @ coupling))
        Omega22_sym = SymmetricMatrix.from_array(Omega22)

    state = run_recursion(X_rot, tuning, y=dataset.y, streams=base.residuals[:, None])
    theta_diag = base.theta_ls + beta_n * (D_inv_half @ state.sum_w_r)
    return DiagOdFit(V, theta_diag, beta_n, D_half, omega11, Omega21,
                     Omega22_sym, tuning.gamma_n, state, base.theta_ls)


def _bandit_arms(dataset: AdaptiveDataset) -> np.ndarray:
    X = dataset.X
    one = X == 1.0
    if not (np.all(one.sum(axis=1) == 1) and np.all((X != 0.0).sum(axis=1) == 1)):
        raise ValueError("post-debias requires multi-armed bandit structure")
    return np.argmax(X, axis=1)


def post_debias_correct(dataset: AdaptiveDataset, tuning: TuningSchedule, j: int) -> PostDebiasFit:
    """Variance-sharpened debiasing for bandit designs.

    sqrt(gammahat_n) = max{ e_j^T sqrt(gamma_n) sum_i w_i x_i^T S_n^{-1/2} e_j,
    1 / (ln n ln ln n) }; the correction is rescaled by
    sqrt(gamma_n / gammahat_n).
    """
    _bandit_arms(dataset)
    n = len(dataset)
    base = ols(dataset)
    S_inv_half = sym_inv_sqrt(base.cov.array).array
    state = run_recursion(dataset.X, tuning, y=dataset.y, streams=base.residuals[:, None])
    stat = math.sqrt(tuning.gamma_n) * float((state.sum_wx @ S_inv_half)[j, j])
    ln = math.log(n)
    floor = 1.0 / (ln * math.log(ln))
    sqrt_gammahat = max(stat, floor)
    gammahat = sqrt_gammahat ** 2
    scale = math.sqrt(tuning.gamma_n / gammahat)
    theta_pd = base.theta_ls + scale * (S_inv_half @ state.sum_w_r)
    return PostDebiasFit(theta_pd, gammahat, int(j), tuning.gamma_n)

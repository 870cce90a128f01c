"""Online-debiasing weight recursion with its exact diagnostic identities.

The recursion consumes rows in collection order.  With z_i = Gamma_i^{-1/2}
x_i and Delta_{i-1} = I - W_{i-1} Z_{i-1} (Delta_0 = I), each step computes

    w_i = Delta_{i-1} z_i / (gamma_n / 2 + ||z_i||^2),

the closed-form minimizer of the ridge-regularized Frobenius objective that
defines the weights.  gamma_n and the scaling matrices depend on the final
sample size, so weights are computed in a second pass over the full dataset,
never during collection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .core import SymmetricMatrix, sym_inv_sqrt

__all__ = [
    "TuningSchedule",
    "WeightState",
    "step_weights",
    "run_recursion",
    "recursion_identity_residual",
    "commutative_bound",
]

# rule signature: (i, S_prefix, X_prev, y_prev) -> Gamma_{i,n}; all arguments
# cover rows strictly before i, which enforces F_{i-1}-measurability
ScalingRule = Callable[[int, np.ndarray, np.ndarray, np.ndarray | None], np.ndarray]


@dataclass
class TuningSchedule:
    """gamma_n plus the rule i -> Gamma_{i,n}; one constructor per application
    lives in `odinfer.tuning`."""

    label: str
    gamma_n: float
    rule: ScalingRule
    kind: str = "custom"  # bandit | ar1 | general | exploration | custom
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.gamma_n > 0.0) or not math.isfinite(self.gamma_n):
            raise ValueError("gamma_n must be a positive finite scalar")


class WeightState:
    """Accumulated recursion state after `steps` rows.

    Delta is I - W_i Z_i; sum_gww is gamma_n * sum w w^T; sum_wxG is
    sum w_i x_i^T Gamma_i^{-1/2} (= sum w z^T); sum_wx keeps the unscaled
    sum w_i x_i^T needed by the estimators; sum_z2ww tracks the
    recursion-identity term sum ||z_i||^2 w_i w_i^T.
    """

    __slots__ = (
        "gamma_n", "d", "Delta", "sum_w_r", "sum_w_streams", "sum_gww",
        "sum_z2ww", "sum_wxG", "sum_wx", "sum_zz", "max_gw_norm",
        "max_z_ratio", "steps", "weights", "gamma_last", "prefix_opnorms",
    )

    def __init__(self, d: int, gamma_n: float, collect_weights: bool = False):
        if not (gamma_n > 0.0):
            raise ValueError("gamma_n must be positive")
        self.gamma_n = float(gamma_n)
        self.d = int(d)
        self.Delta = np.eye(d)
        self.sum_w_r = np.zeros(d)
        self.sum_w_streams = None
        self.sum_gww = np.zeros((d, d))
        self.sum_z2ww = np.zeros((d, d))
        self.sum_wxG = np.zeros((d, d))
        self.sum_wx = np.zeros((d, d))
        self.sum_zz = np.zeros((d, d))
        self.max_gw_norm = 0.0
        self.max_z_ratio = 0.0
        self.steps = 0
        self.weights = [] if collect_weights else None
        self.gamma_last = None
        self.prefix_opnorms = None

    # -- single-step update (generic path; kernels fuse this loop) ----------

    def step(self, x, Gamma, r: float | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        z = _scale_covariate(x, Gamma)
        nz2 = float(z @ z)
        w = (self.Delta @ z) / (0.5 * self.gamma_n + nz2)
        wz = np.outer(w, z)
        self.Delta -= wz
        ww = np.outer(w, w)
        self.sum_gww += self.gamma_n * ww
        self.sum_z2ww += nz2 * ww
        self.sum_wxG += wz
        self.sum_wx += np.outer(w, x)
        self.sum_zz += np.outer(z, z)
        if r is not None:
            self.sum_w_r += w * float(r)
        self.max_gw_norm = max(self.max_gw_norm, math.sqrt(self.gamma_n * float(w @ w)))
        self.max_z_ratio = max(self.max_z_ratio, nz2 / self.gamma_n)
        self.steps += 1
        if self.weights is not None:
            self.weights.append(w.copy())
        return w

    @property
    def weight_matrix(self) -> np.ndarray:
        if self.weights is None:
            raise ValueError("weights were not retained; pass collect_weights=True")
        if isinstance(self.weights, np.ndarray):
            return self.weights
        return np.array(self.weights).reshape(self.steps, self.d)

    def variance_stability(self) -> float:
        """Operator norm of I - sum_i w_i x_i^T Gamma_i^{-1/2} (= Delta)."""
        return float(np.linalg.norm(self.Delta, 2))


def _scale_covariate(x: np.ndarray, Gamma) -> np.ndarray:
    """z = Gamma^{-1/2} x with the degenerate 0-scaling convention."""
    if isinstance(Gamma, SymmetricMatrix):
        Gamma = Gamma.array
    G = np.atleast_2d(np.asarray(Gamma, dtype=float))
    d = x.shape[0]
    if G.shape != (d, d):
        raise ValueError(f"scaling matrix shape {G.shape} does not match dimension {d}")
    diag = np.diag(G)
    if not np.all(np.isfinite(G)):
        raise ValueError("invalid scaling matrix")
    if np.array_equal(G, np.diag(diag)):
        if np.any(diag < 0.0):
            raise ValueError("invalid scaling matrix")
        z = np.zeros(d)
        for j in range(d):
            if diag[j] > 0.0:
                z[j] = x[j] / math.sqrt(diag[j])
            elif x[j] != 0.0:
                # Gamma = 0 is only allowed against a zero covariate (the
                # autoregression's first step); the objective is constant
                # in w there and the paper's convention sets w = 0
                raise ValueError("invalid scaling matrix")
        return z
    try:
        R = sym_inv_sqrt(G)
    except ValueError as exc:
        raise ValueError(f"invalid scaling matrix: {exc}") from None
    return R.array @ x


def step_weights(state: WeightState, x, Gamma) -> tuple[np.ndarray, WeightState]:
    """One recursion step; returns (w_i, updated state).  The state is
    updated in place and returned for convenience."""
    w = state.step(x, Gamma)
    return w, state


def recursion_identity_residual(state: WeightState) -> float:
    """Max-norm residual of the exact identity
    I - gamma_n sum w w^T = sum ||z||^2 w w^T + Delta Delta^T."""
    d = state.d
    lhs = np.eye(d) - state.sum_gww
    rhs = state.sum_z2ww + state.Delta @ state.Delta.T
    return float(np.abs(lhs - rhs).max())


def commutative_bound(state: WeightState, min_eig_sum_zz: float) -> float:
    """exp(-lambda_min(sum z z^T) / gamma_n): valid operator-norm bound on
    I - sum w_i x_i^T Gamma_i^{-1/2} when the z_i z_i^T commute pairwise
    (the caller's responsibility; true for diagonal scalings and d = 1)."""
    return math.exp(-float(min_eig_sum_zz) / state.gamma_n)


# ---------------------------------------------------------------------------
# full-dataset pass


def _is_basis_rows(X: np.ndarray) -> bool:
    one = X == 1.0
    return bool(np.all(one.sum(axis=1) == 1) and np.all((X != 0.0).sum(axis=1) == 1))


def run_recursion(
    X,
    schedule: TuningSchedule,
    y=None,
    streams=None,
    collect_weights: bool = False,
    track_prefix_opnorm: bool = False,
) -> WeightState:
    """Run the weight recursion over a full design matrix.

    `streams` is an optional (n, k) matrix of per-row scalars; the returned
    state carries sum_i w_i streams[i] in sum_w_streams (column 0 also lands
    in sum_w_r).  When possible the pass is dispatched to a compiled kernel;
    `track_prefix_opnorm` forces the generic per-step path and records
    ||Delta_k||_op for every prefix.
    """
    X = np.ascontiguousarray(X, dtype=float)
    n, d = X.shape
    if streams is not None:
        streams = np.ascontiguousarray(streams, dtype=float)
        if streams.ndim == 1:
            streams = streams[:, None]
        if streams.shape[0] != n:
            raise ValueError("stream length must match row count")

    fast = not track_prefix_opnorm
    Z = None
    gamma_last = None
    if fast and schedule.kind == "bandit" and _is_basis_rows(X):
        arms = np.argmax(X, axis=1).astype(np.int64)
        Z, gamma_last = _kernels.bandit_z_pass(arms, d, schedule.params["log_n_sq"])
        gamma_last = np.diag(gamma_last)
    elif fast and schedule.kind == "ar1" and d == 1:
        Z, gamma_last = _kernels.ar1_z_pass(X[:, 0], schedule.params["log_n_sq"])
        gamma_last = np.atleast_2d(gamma_last)
    elif fast and schedule.kind == "general":
        Z, gamma_last = _kernels.general_z_pass(X, schedule.params["L_diag"])
        gamma_last = np.diag(gamma_last)
    elif fast and schedule.kind == "exploration":
        G = np.asarray(schedule.params["Gamma"], dtype=float)
        R = sym_inv_sqrt(G).array
        Z = X @ R
        gamma_last = G

    if Z is not None:
        out = _kernels.recursion_pass(X, Z, schedule.gamma_n, streams=streams, collect_weights=collect_weights)
        state = WeightState(d, schedule.gamma_n, collect_weights=False)
        state.Delta = out["delta"]
        state.sum_gww = out["sum_gww"]
        state.sum_z2ww = out["sum_z2ww"]
        state.sum_wxG = out["sum_wz"]
        state.sum_wx = out["sum_wx"]
        state.sum_zz = out["sum_zz"]
        state.max_gw_norm = out["max_gw_norm"]
        state.max_z_ratio = out["max_z_ratio"]
        state.steps = n
        state.weights = out["weights"]
        if out["sum_ws"] is not None:
            state.sum_w_streams = out["sum_ws"]
            state.sum_w_r = out["sum_ws"][:, 0].copy()
        state.gamma_last = gamma_last
        return state

    # generic path: build Gamma_{i,n} from the schedule rule row by row
    state = WeightState(d, schedule.gamma_n, collect_weights=collect_weights)
    if track_prefix_opnorm:
        state.prefix_opnorms = []
    S_prefix = np.zeros((d, d))
    sum_ws = np.zeros((d, streams.shape[1])) if streams is not None else None
    y_arr = None if y is None else np.asarray(y, dtype=float)
    for i in range(n):
        y_prev = None if y_arr is None else y_arr[:i]
        Gamma = schedule.rule(i + 1, S_prefix, X[:i], y_prev)
        state.gamma_last = np.atleast_2d(np.asarray(Gamma, dtype=float))
        w = state.step(X[i], Gamma)
        if sum_ws is not None:
            sum_ws += np.outer(w, streams[i])
        if track_prefix_opnorm:
            state.prefix_opnorms.append(float(np.linalg.norm(state.Delta, 2)))
        S_prefix += np.outer(X[i], X[i])
    if sum_ws is not None:
        state.sum_w_streams = sum_ws
        state.sum_w_r = sum_ws[:, 0].copy()
    return state

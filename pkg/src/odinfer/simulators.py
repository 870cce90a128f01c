"""Adaptive data-collection simulators: multi-armed bandits (eps-greedy, UCB,
Thompson), the unit-root autoregression, ridge-greedy linear bandits, and the
round-robin adversarial design behind the confidence-width lower bound.

Reproducibility contract: every simulator is deterministic given (config,
seed).  Replication r of an experiment uses the counter-based stream
`stream(seed, r)`, and all random variates are pre-drawn in a fixed order
before entering the (possibly compiled) simulation loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .core import AdaptiveDataset

__all__ = [
    "NoiseModel",
    "EpsGreedy",
    "Ucb",
    "Thompson",
    "stream",
    "run_bandit",
    "run_ar1",
    "run_linear_bandit",
    "run_fixed_design",
    "run_adversarial_design",
    "sphere_points",
    "adversarial_precision",
]


def stream(seed: int, rep: int = 0) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, rep); parallel and serial
    replication schedules see identical draws."""
    key = np.array([np.uint64(seed), np.uint64(rep)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class NoiseModel:
    """Martingale-difference noise with constant conditional variance."""

    kind: str = "gaussian"  # gaussian | scaled-uniform | custom
    sigma2: float = 1.0
    moment_exponent: float = 1.0  # documentation of the (2+Delta)-moment bound
    custom: Callable[[np.random.Generator, int], np.ndarray] | None = None

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return math.sqrt(self.sigma2) * rng.standard_normal(n)
        if self.kind == "scaled-uniform":
            half = math.sqrt(3.0 * self.sigma2)
            return half * (2.0 * rng.random(n) - 1.0)
        if self.kind == "custom":
            if self.custom is None:
                raise ValueError("custom noise model needs a callable")
            return np.asarray(self.custom(rng, n), dtype=float)
        raise ValueError(f"unknown noise kind {self.kind!r}")


@dataclass(frozen=True)
class EpsGreedy:
    eps: float = 0.1
    name: str = field(default="eps_greedy", init=False)


@dataclass(frozen=True)
class Ucb:
    # index mean_k + sqrt(c ln i / N_k); the classical c = 2 is the default,
    # exposed because the literature varies on the constant
    c: float = 2.0
    name: str = field(default="ucb", init=False)


@dataclass(frozen=True)
class Thompson:
    name: str = field(default="thompson", init=False)


BanditPolicy = EpsGreedy | Ucb | Thompson


def run_bandit(policy: BanditPolicy, theta_star, n: int, noise: NoiseModel,
               rng: np.random.Generator) -> AdaptiveDataset:
    """Arms are standard basis vectors; rounds 1..d force one pull per arm so
    S_n is invertible without augmentation, then the policy takes over."""
    theta_star = np.asarray(theta_star, dtype=float)
    d = theta_star.shape[0]
    if n < d:
        raise ValueError("need at least one pull per arm")
    eps = noise.draw(rng, n)
    if isinstance(policy, EpsGreedy):
        coins = rng.random(n)
        unis = rng.random(n)
        arms, y = _kernels.simulate_bandit_eps_greedy(theta_star, n, policy.eps, eps, coins, unis)
    elif isinstance(policy, Ucb):
        arms, y = _kernels.simulate_bandit_ucb(theta_star, n, policy.c, eps)
    elif isinstance(policy, Thompson):
        normals = rng.standard_normal((n, d))
        arms, y = _kernels.simulate_bandit_thompson(theta_star, n, eps, normals)
    else:
        raise ValueError(f"unknown bandit policy {policy!r}")
    X = np.eye(d)[np.asarray(arms)]
    meta = {"policy": policy.name, "theta_star": theta_star.tolist(),
            "sigma2": noise.sigma2, "n": n}
    return AdaptiveDataset(X, y, meta)


def run_ar1(theta_star: float, n: int, rng: np.random.Generator) -> AdaptiveDataset:
    """y_0 = 0; y_i = theta* y_{i-1} + eps_i with standard Gaussian noise;
    rows are (x_i, y_i) = (y_{i-1}, y_i)."""
    if not (-1.0 < theta_star <= 1.0):
        raise ValueError("autoregression parameter must lie in (-1, 1]")
    eps = rng.standard_normal(n)
    x, y = _kernels.simulate_ar1(float(theta_star), n, eps)
    meta = {"policy": "ar1", "theta_star": float(theta_star), "sigma2": 1.0, "n": n}
    return AdaptiveDataset(x[:, None], y, meta)


def run_linear_bandit(contexts, eps_schedule, lambda_ridge: float, theta_star,
                      n: int, noise: NoiseModel, rng: np.random.Generator) -> AdaptiveDataset:
    """Ridge-greedy selection with epsilon-exploration over a fixed context
    set; ties go to the lowest index."""
    contexts = np.ascontiguousarray(contexts, dtype=float)
    if contexts.ndim != 2 or contexts.shape[0] == 0:
        raise ValueError("context set must be a nonempty (m, d) array")
    theta_star = np.asarray(theta_star, dtype=float)
    eps_arr = np.asarray(eps_schedule, dtype=float)
    if eps_arr.ndim == 0:
        eps_arr = np.full(n, float(eps_arr))
    if eps_arr.shape != (n,):
        raise ValueError("exploration schedule length must equal n")
    if not (lambda_ridge > 0.0):
        raise ValueError("lambda_ridge must be positive")
    eps = noise.draw(rng, n)
    coins = rng.random(n)
    unis = rng.random(n)
    X, y = _kernels.simulate_linear_bandit(contexts, eps_arr, lambda_ridge,
                                           theta_star, eps, coins, unis)
    meta = {"policy": "linear_eps_greedy", "theta_star": theta_star.tolist(),
            "sigma2": noise.sigma2, "n": n, "lambda_ridge": lambda_ridge,
            "n_contexts": int(contexts.shape[0]),
            "eps_mean": float(eps_arr.mean())}
    return AdaptiveDataset(X, y, meta)


def run_fixed_design(X_design, theta_star, noise: NoiseModel, rng: np.random.Generator) -> AdaptiveDataset:
    """Non-adaptive baseline: responses drawn over a frozen design."""
    X = np.ascontiguousarray(X_design, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    y = X @ theta_star + noise.draw(rng, X.shape[0])
    meta = {"policy": "fixed_design", "theta_star": theta_star.tolist(),
            "sigma2": noise.sigma2, "n": int(X.shape[0])}
    return AdaptiveDataset(X, y, meta)


def run_adversarial_design(d: int, n: int, rng: np.random.Generator
                           ) -> tuple[AdaptiveDataset, np.ndarray, bool]:
    """Round-robin adversarial selection: x_i = b_{v_i} e_{u_i} + a_{u_i,v_i} e_d
    with b_v = v^{-1/4}/sqrt(d), a_{u,v} = -b_v m_{u,v-1} / d_{v-1}.

    The parameter is drawn from the two-point-mixture prior (0 with
    probability 1/2, else Gaussian on the first d-1 coordinates with last
    coordinate 1); noise is standard Gaussian (sigma = 1).  Returns
    (dataset, theta_star, event_flag) with event_flag = (theta* != 0).
    """
    if d < 2:
        raise ValueError("adversarial design needs d >= 2")
    if n % (d - 1) != 0:
        raise ValueError("n must be divisible by d - 1")
    coin = rng.random()
    theta = np.zeros(d)
    flag = bool(coin >= 0.5)
    gauss = rng.standard_normal(d - 1)
    if flag:
        theta[: d - 1] = gauss
        theta[d - 1] = 1.0
    eps = rng.standard_normal(n)
    X, y = _kernels.simulate_adversarial(d, n, theta, eps)
    meta = {"policy": "adversarial_minimax", "theta_star": theta.tolist(),
            "sigma2": 1.0, "n": n, "nonzero_event": flag}
    return AdaptiveDataset(X, y, meta), theta, flag


def sphere_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n points drawn uniformly from the unit sphere S^{d-1}."""
    P = rng.standard_normal((n, d))
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def adversarial_precision(dataset: AdaptiveDataset) -> float:
    """1 / ||e_d||^2_{S_n^{-1}} = 1 / (S_n^{-1})_{dd}, via the arrowhead
    Schur complement S_dd - sum_u S_ud^2 / S_uu."""
    X = dataset.X
    S = X.T @ X
    d = S.shape[0]
    head = S[: d - 1, : d - 1]
    if not np.array_equal(head, np.diag(np.diag(head))):
        raise ValueError("expected an arrowhead covariance")
    return float(S[d - 1, d - 1] - np.sum(S[: d - 1, d - 1] ** 2 / np.diag(head)))

"""Tuning schedules: gamma_n and the scaling matrices Gamma_{i,n}.

Natural logarithms throughout.  Each application gets one constructor that
packages the per-step rule into a `TuningSchedule`; the raw scaling
operations are exposed for direct use and testing.  Every rule consumes only
rows strictly before the current one, so recomputing Gamma_{i,n} from a
truncated dataset reproduces it exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .core import AdaptiveDataset, SymmetricMatrix, sym_eigh, _as_matrix
from .weights import TuningSchedule

__all__ = [
    "gamma_default",
    "scaling_bandit",
    "scaling_general",
    "scaling_ar",
    "scaling_exploration",
    "augment_dataset",
    "default_floor",
    "bandit_schedule",
    "general_schedule",
    "ar1_schedule",
    "exploration_schedule",
    "make_schedule",
    "exploration_floor",
    "sufficient_exploration",
]


def gamma_default(n: int) -> float:
    """1 / (ln n * ln ln n); requires n >= 16 so ln ln n is comfortably
    positive."""
    if n < 16:
        raise ValueError("sample too small for default schedule")
    ln = math.log(n)
    return 1.0 / (ln * math.log(ln))


def default_floor(n: int) -> np.ndarray:
    """Recommended diagonal floor L_n = (ln ln n / gamma_n) I, as a vector."""
    lnln = math.log(math.log(n))
    return np.array([lnln / gamma_default(n)])


def _floor_vector(d: int, L, n: int | None = None) -> np.ndarray:
    if L is None:
        if n is None:
            raise ValueError("L_n is required")
        return np.full(d, float(default_floor(n)[0]))
    L = np.asarray(L, dtype=float)
    if L.ndim == 0:
        return np.full(d, float(L))
    if L.ndim == 2:
        if not np.array_equal(L, np.diag(np.diag(L))):
            raise ValueError("floor matrix must be diagonal")
        L = np.diag(L)
    if L.shape != (d,):
        raise ValueError("floor dimension mismatch")
    if np.any(L < 0.0):
        raise ValueError("floor entries must be nonnegative")
    return L.copy()


def scaling_bandit(S_prefix, n: int) -> SymmetricMatrix:
    """Element-wise max of the (diagonal) prefix covariance and (ln n)^2 I."""
    S = _as_matrix(S_prefix)
    diag = np.diag(S)
    if not np.array_equal(S, np.diag(diag)):
        raise ValueError("bandit schedule requires diagonal S")
    lsq = math.log(n) ** 2
    return SymmetricMatrix.from_diag(np.maximum(diag, lsq))


def scaling_general(S_prefix, L_n) -> SymmetricMatrix:
    """Diagonal Gamma = max{diag(S^-1)^-1, L_n} element-wise."""
    S = _as_matrix(S_prefix)
    d = S.shape[0]
    L = _floor_vector(d, L_n)
    try:
        Sinv = np.linalg.inv(S)
    except np.linalg.LinAlgError:
        raise ValueError("prefix covariance singular") from None
    diag = np.diag(Sinv)
    if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
        raise ValueError("prefix covariance singular")
    return SymmetricMatrix.from_diag(np.maximum(1.0 / diag, L))


def scaling_ar(y_history, n: int) -> float:
    """max{(ln n)^2 y_{i-1}^2, sum_{j<=i-1} y_j^2} for the scalar
    autoregression; 0 at the first step (empty history, y_0 = 0)."""
    y = np.asarray(y_history, dtype=float).reshape(-1)
    if y.size == 0:
        return 0.0
    lsq = math.log(n) ** 2
    return float(max(lsq * y[-1] ** 2, float(y @ y)))


def scaling_exploration(eps_total: float, G) -> SymmetricMatrix:
    """Constant scaling (sum_j eps_j) G, independent of the step index."""
    if not (eps_total > 0.0):
        raise ValueError("total exploration must be positive")
    Gm = _as_matrix(G)
    evals, _ = sym_eigh(Gm)
    if evals[0] <= 0.0:
        raise ValueError("exploration matrix not positive definite")
    return SymmetricMatrix.from_array(eps_total * Gm)


def augment_dataset(dataset: AdaptiveDataset, rng, response=None, design_only: bool = False) -> AdaptiveDataset:
    """Append ceil((ln n)^2) rows with covariates uniform on the unit sphere.

    `response` maps (x, rng) -> y for the new rows (simulation mode).  With
    design_only=True the responses are filled with zeros and flagged in the
    metadata; such datasets support design diagnostics only.
    """
    n = len(dataset)
    extra = math.ceil(math.log(n) ** 2)
    d = dataset.d
    X_new = rng.standard_normal((extra, d))
    X_new /= np.linalg.norm(X_new, axis=1, keepdims=True)
    if response is not None:
        y_new = np.array([float(response(x, rng)) for x in X_new])
    elif design_only:
        y_new = np.zeros(extra)
    else:
        raise ValueError("augmentation needs a response model (or design_only=True)")
    meta = {"augmented_rows": extra}
    if design_only:
        meta["augmented_design_only"] = True
    return dataset.extended(X_new, y_new, meta)


# ---------------------------------------------------------------------------
# schedule constructors


def bandit_schedule(n: int, gamma: float | None = None) -> TuningSchedule:
    gamma = gamma_default(n) if gamma is None else float(gamma)
    lsq = math.log(n) ** 2

    def rule(i, S_prefix, X_prev, y_prev):
        return scaling_bandit(S_prefix, n).array

    return TuningSchedule("bandit", gamma, rule, kind="bandit", params={"log_n_sq": lsq, "n": n})


def general_schedule(n: int, d: int, L=None, gamma: float | None = None) -> TuningSchedule:
    gamma = gamma_default(n) if gamma is None else float(gamma)
    L_diag = _floor_vector(d, L, n=n)

    def rule(i, S_prefix, X_prev, y_prev):
        # early singular prefixes fall back to the floor alone (the exposed
        # scaling_general op errors instead, by contract)
        try:
            return scaling_general(S_prefix, L_diag).array
        except ValueError:
            return np.diag(L_diag)

    return TuningSchedule("general", gamma, rule, kind="general", params={"L_diag": L_diag, "n": n})


def ar1_schedule(n: int, gamma: float | None = None) -> TuningSchedule:
    gamma = gamma_default(n) if gamma is None else float(gamma)
    lsq = math.log(n) ** 2

    def rule(i, S_prefix, X_prev, y_prev):
        if y_prev is None:
            raise ValueError("ar1 schedule needs the response history")
        return np.atleast_2d(scaling_ar(y_prev, n))

    return TuningSchedule("ar1", gamma, rule, kind="ar1", params={"log_n_sq": lsq, "n": n})


def exploration_schedule(n: int, eps, G, gamma: float | None = None) -> TuningSchedule:
    gamma = gamma_default(n) if gamma is None else float(gamma)
    eps = np.asarray(eps, dtype=float)
    eps_total = float(eps) * n if eps.ndim == 0 else float(eps.sum())
    Gamma = scaling_exploration(eps_total, G).array

    def rule(i, S_prefix, X_prev, y_prev):
        return Gamma

    return TuningSchedule("exploration", gamma, rule, kind="exploration",
                          params={"Gamma": Gamma, "eps_total": eps_total, "n": n})


def make_schedule(name: str, n: int, d: int, **kwargs) -> TuningSchedule:
    """Schedule selection by name: bandit | general | ar1 | exploration."""
    if name == "bandit":
        return bandit_schedule(n, gamma=kwargs.get("gamma"))
    if name == "general":
        return general_schedule(n, d, L=kwargs.get("L"), gamma=kwargs.get("gamma"))
    if name == "ar1":
        return ar1_schedule(n, gamma=kwargs.get("gamma"))
    if name == "exploration":
        return exploration_schedule(n, kwargs["eps"], kwargs["G"], gamma=kwargs.get("gamma"))
    raise ValueError(f"unknown schedule {name!r}; expected bandit|general|ar1|exploration")


# ---------------------------------------------------------------------------
# sufficient exploration (active-learning condition)


def exploration_floor(contexts, n: int, max_x_sq: float | None = None) -> float:
    """Smallest constant eps so n * eps meets the sufficient-exploration
    bound sum eps_i >= E[max ||x||^2] (ln n)^2 / lambda_min(G), with
    G = mean of a a^T over the context set."""
    A = np.asarray(contexts, dtype=float)
    G = (A.T @ A) / A.shape[0]
    lam_min = float(sym_eigh(G)[0][0])
    if lam_min <= 0.0:
        raise ValueError("exploration matrix not positive definite")
    if max_x_sq is None:
        max_x_sq = float(np.max(np.sum(A * A, axis=1)))
    need = max_x_sq * math.log(n) ** 2 / lam_min
    return min(1.0, need / n)


def sufficient_exploration(eps_total: float, G, max_x_sq: float, n: int) -> bool:
    """Check sum eps_i >= E[max ||x||^2] (ln n)^2 / lambda_min(G)."""
    lam_min = float(sym_eigh(_as_matrix(G))[0][0])
    if lam_min <= 0.0:
        return False
    return eps_total >= max_x_sq * math.log(n) ** 2 / lam_min

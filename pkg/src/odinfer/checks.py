"""Self-contained invariant battery behind the `check` CLI subcommand.

Each check prints one PASS/FAIL line; the runner returns the number of
failures.  These are fast smoke-level versions of the full test suite,
runnable from an installed package without pytest.
"""

from __future__ import annotations

import math

import numpy as np

from . import tuning
from .core import sym_eigh, sym_sqrt, sym_inv_sqrt
from .estimators import online_debias, ols
from .harness import ExperimentConfig, emit_csv, run_experiment
from .inference import chi2_cdf, chi2_quantile, normal_cdf, normal_quantile
from .simulators import EpsGreedy, NoiseModel, run_bandit, stream
from .weights import recursion_identity_residual, run_recursion

__all__ = ["run_all"]


def _check_quantile_roundtrip():
    rng = stream(7, 0)
    worst = 0.0
    for p in rng.random(400) * 0.98 + 0.01:
        worst = max(worst, abs(normal_cdf(normal_quantile(p)) - p))
        worst = max(worst, abs(chi2_cdf(3, chi2_quantile(3, p)) - p))
    return worst <= 1e-9, f"max quantile round-trip error {worst:.2e}"


def _check_matrix_roots():
    rng = stream(11, 0)
    worst = 0.0
    for _ in range(25):
        d = int(rng.integers(1, 7))
        A = rng.standard_normal((d, d))
        S = A @ A.T
        R = sym_sqrt(S).array
        worst = max(worst, float(np.abs(R @ R - S).max()) / (1.0 + float(np.abs(S).max())))
        Ri = sym_inv_sqrt(S + np.eye(d)).array
        worst = max(worst, float(np.abs(Ri @ (S + np.eye(d)) @ Ri - np.eye(d)).max()))
    return worst <= 1e-8, f"max square-root residual {worst:.2e}"


def _check_recursion_identity():
    rng = stream(13, 0)
    worst = 0.0
    for rep in range(5):
        theta = np.array([0.3, 0.3])
        ds = run_bandit(EpsGreedy(0.1), theta, 400, NoiseModel(), stream(13, rep))
        sched = tuning.bandit_schedule(len(ds))
        state = run_recursion(ds.X, sched, y=ds.y)
        worst = max(worst, recursion_identity_residual(state))
    return worst <= 1e-9, f"max recursion-identity residual {worst:.2e}"


def _check_contraction():
    theta = np.array([0.3, 0.3])
    ds = run_bandit(EpsGreedy(0.1), theta, 300, NoiseModel(), stream(17, 0))
    sched = tuning.bandit_schedule(len(ds))
    state = run_recursion(ds.X, sched, y=ds.y, track_prefix_opnorm=True)
    worst = max(state.prefix_opnorms)
    return worst <= 1.0 + 1e-10, f"max prefix ||Delta||_op {worst:.12f}"


def _check_bandit_bounds():
    theta = np.array([0.3, 0.3])
    ok = True
    worst_vs = 0.0
    worst_wxg = 0.0
    for rep in range(3):
        ds = run_bandit(EpsGreedy(0.1), theta, 1000, NoiseModel(), stream(19, rep))
        sched = tuning.bandit_schedule(len(ds))
        fit = online_debias(ds, sched)
        state = fit.state
        worst_vs = max(worst_vs, state.variance_stability())
        wxg = float(np.abs(state.sum_wx @ np.diag(1.0 / np.sqrt(np.diag(state.gamma_last)))).max())
        worst_wxg = max(worst_wxg, wxg)
        min_eig = float(sym_eigh(state.sum_zz)[0][0])
        ok = ok and worst_vs <= math.exp(-min_eig / sched.gamma_n) + 1e-12
    ok = ok and worst_wxg <= 4.0 + 1e-8
    return ok, f"variance stability {worst_vs:.2e}, ||WX Gamma^-1/2||_max {worst_wxg:.3f}"


def _check_zero_noise():
    rng = stream(23, 0)
    X = rng.standard_normal((60, 3))
    theta = np.array([1.0, -2.0, 0.5])
    from .core import AdaptiveDataset

    ds = AdaptiveDataset(X, X @ theta)
    base = ols(ds)
    sched = tuning.general_schedule(len(ds), 3)
    fit = online_debias(ds, sched)
    err = max(float(np.abs(base.theta_ls - theta).max()), float(np.abs(fit.theta_od - theta).max()))
    return err <= 1e-8, f"zero-noise recovery error {err:.2e}"


def _check_determinism():
    cfg = ExperimentConfig(scenario="bandit", policy="eps_greedy", n=120,
                           replications=8, alpha=(0.05, 0.1), seed=99,
                           methods=("od_direction", "naive_ols"))
    import tempfile, os, filecmp

    with tempfile.TemporaryDirectory() as tmp:
        a = os.path.join(tmp, "a")
        b = os.path.join(tmp, "b")
        emit_csv(run_experiment(cfg, threads=1), a)
        emit_csv(run_experiment(cfg, threads=4), b)
        same = filecmp.cmp(os.path.join(a, "coverage.csv"), os.path.join(b, "coverage.csv"), shallow=False)
        same = same and filecmp.cmp(os.path.join(a, "errors.csv"), os.path.join(b, "errors.csv"), shallow=False)
    return same, "1-thread and 4-thread runs byte-identical" if same else "thread count changed output"


_CHECKS = [
    ("quantile round trips", _check_quantile_roundtrip),
    ("matrix square roots", _check_matrix_roots),
    ("recursion identity", _check_recursion_identity),
    ("prefix contraction", _check_contraction),
    ("bandit lemma bounds", _check_bandit_bounds),
    ("zero-noise recovery", _check_zero_noise),
    ("thread determinism", _check_determinism),
]


def run_all(verbose: bool = True) -> int:
    failures = 0
    for name, fn in _CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        if not ok:
            failures += 1
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return failures

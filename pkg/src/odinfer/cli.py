"""Command-line interface: simulate | fit | experiment | check."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, tuning
from ._kernels import get_backend
from .core import read_dataset_csv, write_dataset_csv
from .estimators import diag_online_debias, ols, online_debias
from .harness import ExperimentConfig, emit_csv, parse_config, run_experiment
from .inference import ci_concentration, ci_direction, ci_naive_od, ci_naive_ols


def _load_config(path: str | None, seed=None, threads=None) -> ExperimentConfig:
    if path is None:
        cfg = ExperimentConfig()
    else:
        with open(path) as fh:
            cfg = parse_config(fh.read())
    if seed is not None:
        cfg.seed = int(seed)
    if threads is not None:
        cfg.threads = int(threads)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.seed)
    from .harness import _make_context_set, _simulate, sphere_points, stream

    contexts = _make_context_set(cfg) if cfg.scenario == "linear_bandit" else None
    fixed_X = None
    if cfg.scenario == "fixed_design":
        fixed_X = sphere_points(cfg.n, len(cfg.theta_star), stream(cfg.seed, 2**32 - 2))
    ds, theta = _simulate(cfg, args.replication, contexts, fixed_X)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "dataset.csv")
    ds.meta["seed"] = cfg.seed
    ds.meta["replication"] = args.replication
    write_dataset_csv(ds, path)
    print(f"wrote {path} ({len(ds)} rows, d={ds.d}); provenance in {path}.json")
    return 0


def _interval_text(ci) -> str:
    return f"[{ci.lo:.6f}, {ci.hi:.6f}] (level {ci.level:g}, {ci.method})"


def _cmd_fit(args) -> int:
    ds = read_dataset_csv(args.data)
    n, d = len(ds), ds.d
    base = ols(ds)
    schedule = tuning.make_schedule(args.schedule, n, d, gamma=args.gamma,
                                    **_schedule_kwargs(args, ds))
    fit = online_debias(ds, schedule)
    out = {
        "n": n,
        "d": d,
        "theta_ls": base.theta_ls.tolist(),
        "theta_od": fit.theta_od.tolist(),
        "sigma2_hat": base.sigma2_hat,
        "gamma_n": schedule.gamma_n,
        "intervals": [],
    }
    S = fit.cov.array
    alpha = args.alpha
    for j in range(d):
        v = np.zeros(d)
        v[j] = 1.0
        dfit = diag_online_debias(ds, v, schedule)
        entry = {
            "coordinate": j + 1,
            "od_direction": _interval_text(ci_direction(dfit, base.sigma2_hat, alpha, S)),
            "naive_ols": _interval_text(ci_naive_ols(base, base.sigma2_hat, alpha, v)),
            "naive_od": _interval_text(ci_naive_od(fit, base.sigma2_hat, alpha, v, S)),
        }
        if args.concentration:
            sigma = math.sqrt(base.sigma2_hat)
            entry["concentration"] = _interval_text(
                ci_concentration(ds, args.lambda_ridge, alpha, v, sigma))
        out["intervals"].append(entry)
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


def _schedule_kwargs(args, ds):
    if args.schedule != "exploration":
        return {}
    A = ds.X
    G = (A.T @ A) / A.shape[0]
    return {"eps": 1.0, "G": G}


def _cmd_experiment(args) -> int:
    cfg = _load_config(args.config, args.seed, args.threads)
    report = run_experiment(cfg)
    cov_path, err_path = emit_csv(report, args.out)
    resolved = os.path.join(args.out, "config_resolved.txt")
    with open(resolved, "w") as fh:
        for key, value in sorted(cfg.resolved().items()):
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            fh.write(f"{key} = {value}\n")
        fh.write(f"backend = {get_backend()}\n")
    print(f"wrote {cov_path}, {err_path}, {resolved}")
    return 0


def _cmd_check(args) -> int:
    from .checks import run_all

    failures = run_all()
    print(f"backend: {get_backend()}")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="odinfer",
        description="Online-debiased inference for adaptively collected linear models",
    )
    parser.add_argument("--version", action="version", version=f"odinfer {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="emit one simulated dataset as CSV")
    p_sim.add_argument("--config", default=None, help="experiment config file")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--replication", type=int, default=0)
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit estimators/intervals on a dataset CSV")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--schedule", default="general",
                       choices=["bandit", "general", "ar1", "exploration"])
    p_fit.add_argument("--gamma", type=float, default=None)
    p_fit.add_argument("--alpha", type=float, default=0.05)
    p_fit.add_argument("--concentration", action="store_true")
    p_fit.add_argument("--lambda-ridge", type=float, default=0.1, dest="lambda_ridge")
    p_fit.set_defaults(fn=_cmd_fit)

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo coverage experiment")
    p_exp.add_argument("--config", default=None)
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--threads", type=int, default=None)
    p_exp.add_argument("--out", default="out")
    p_exp.set_defaults(fn=_cmd_experiment)

    p_chk = sub.add_parser("check", help="run the invariant/diagnostic battery")
    p_chk.set_defaults(fn=_cmd_check)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

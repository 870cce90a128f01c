"""Monte Carlo experiment driver: simulate, fit, cover, aggregate, emit.

A replication is a pure function of (config, seed, replication index); the
driver farms replications out to a thread pool and reduces them in index
order, so reports are identical for any --threads value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import tuning as tuning_mod
from .core import AdaptiveDataset
from .estimators import diag_online_debias, ols, online_debias
from .inference import (
    ci_concentration,
    ci_direction,
    ci_naive_od,
    ci_naive_ols,
    diagnostics_assumptions,
    normal_cdf,
)
from .simulators import (
    EpsGreedy,
    NoiseModel,
    Thompson,
    Ucb,
    run_adversarial_design,
    run_ar1,
    run_bandit,
    run_fixed_design,
    run_linear_bandit,
    sphere_points,
    stream,
)

__all__ = [
    "ExperimentConfig",
    "CoverageReport",
    "parse_config",
    "run_experiment",
    "ks_statistic",
    "minimax_trace_check",
    "emit_csv",
    "read_coverage_csv",
]

_SCENARIOS = ("bandit", "ar1", "linear_bandit", "adversarial", "fixed_design")
_METHODS = ("od_direction", "naive_ols", "naive_od", "concentration")
_TAILS = ("lower", "upper", "two-sided")


@dataclass
class ExperimentConfig:
    scenario: str = "bandit"
    policy: str = "eps_greedy"          # bandit only: eps_greedy | ucb | thompson
    eps: float = 0.1                    # eps-greedy explore probability
    ucb_c: float = 2.0
    theta_star: tuple = (0.3, 0.3)
    n: int = 1000
    replications: int = 1000
    alpha: tuple = (0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3)
    methods: tuple = ("od_direction", "naive_ols", "naive_od", "concentration")
    seed: int = 20240901
    threads: int = 1
    augment: bool = False
    sigma2: float = 1.0
    noise: str = "gaussian"
    lambda_ridge: float = 0.1
    theta_bound: float = 1.0
    conc_form: str = "ball"
    n_contexts: int = 50
    lin_eps: float = -1.0               # <0: use the sufficient-exploration floor
    d: int = 3                          # adversarial / fixed_design dimension
    target_coords: tuple = ()           # empty: scenario default

    def __post_init__(self):
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for a in self.alpha:
            if not (0.0 < a < 0.5):
                raise ValueError("alpha grid must lie in (0, 0.5) so one-sided tails exist")
        for m in self.methods:
            if m == "w_decorrelation":
                raise ValueError("w_decorrelation is a stub (not implemented); remove it from methods")
            if m not in _METHODS:
                raise ValueError(f"unknown method {m!r}")

    def resolved(self) -> dict:
        out = asdict(self)
        out["target_coords"] = list(self.effective_targets())
        return out

    def effective_targets(self) -> tuple:
        if self.target_coords:
            return tuple(int(j) for j in self.target_coords)
        if self.scenario == "linear_bandit":
            return (0, 1)
        if self.scenario == "adversarial":
            return (self.d - 1,)
        return (0,)

    def dimension(self) -> int:
        if self.scenario == "bandit" or self.scenario == "linear_bandit":
            return len(self.theta_star)
        if self.scenario == "ar1":
            return 1
        if self.scenario == "fixed_design":
            return len(self.theta_star)
        return self.d


_BOOLS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config(text: str) -> ExperimentConfig:
    """Flat key=value format, one pair per line, '#' comments."""
    fields = {f.name: f.type for f in ExperimentConfig.__dataclass_fields__.values()}
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        default = ExperimentConfig.__dataclass_fields__[key].default
        if isinstance(default, bool):
            if value.lower() not in _BOOLS:
                raise ValueError(f"config line {lineno}: bad boolean {value!r}")
            kwargs[key] = _BOOLS[value.lower()]
        elif isinstance(default, int):
            kwargs[key] = int(value)
        elif isinstance(default, float):
            kwargs[key] = float(value)
        elif isinstance(default, tuple):
            if key in ("methods",):
                kwargs[key] = tuple(s.strip() for s in value.split(",") if s.strip())
            elif key in ("target_coords",):
                kwargs[key] = tuple(int(s) for s in value.split(",") if s.strip())
            else:
                kwargs[key] = tuple(float(s) for s in value.split(",") if s.strip())
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


@dataclass
class CoverageReport:
    """Aggregated coverage/width table plus per-replication raw material."""

    scenario: str
    seed: int
    n: int
    replications: int
    rows: list = field(default_factory=list)  # dicts: method, alpha, tail, coverage, ...
    od_errors: np.ndarray | None = None       # (R, d) standardized OD errors
    ols_errors: np.ndarray | None = None      # (R, d) standardized OLS errors
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def row(self, method: str, alpha: float, tail: str) -> dict:
        for r in self.rows:
            if r["method"] == method and math.isclose(r["alpha"], alpha) and r["tail"] == tail:
                return r
        raise KeyError((method, alpha, tail))

    def coverage(self, method: str, alpha: float, tail: str) -> float:
        return self.row(method, alpha, tail)["coverage"]

    def mean_width(self, method: str, alpha: float) -> float:
        return self.row(method, alpha, "two-sided")["mean_width"]


def _make_context_set(config: ExperimentConfig) -> np.ndarray:
    # fixed across stages and across replications: drawn once from the
    # experiment seed, not the per-replication streams
    rng = stream(config.seed, 2**32 - 1)
    return sphere_points(config.n_contexts, len(config.theta_star), rng)


def _lin_eps(config: ExperimentConfig, contexts: np.ndarray) -> float:
    if config.lin_eps >= 0.0:
        return float(config.lin_eps)
    return tuning_mod.exploration_floor(contexts, config.n)


def _simulate(config: ExperimentConfig, rep: int, contexts: np.ndarray | None,
              fixed_X: np.ndarray | None):
    rng = stream(config.seed, rep)
    noise = NoiseModel(kind=config.noise, sigma2=config.sigma2)
    scenario = config.scenario
    if scenario == "bandit":
        theta = np.asarray(config.theta_star, dtype=float)
        if config.policy == "eps_greedy":
            policy = EpsGreedy(config.eps)
        elif config.policy == "ucb":
            policy = Ucb(config.ucb_c)
        elif config.policy == "thompson":
            policy = Thompson()
        else:
            raise ValueError(f"unknown bandit policy {config.policy!r}")
        ds = run_bandit(policy, theta, config.n, noise, rng)
    elif scenario == "ar1":
        theta = np.array([float(config.theta_star[0])])
        ds = run_ar1(float(theta[0]), config.n, rng)
    elif scenario == "linear_bandit":
        theta = np.asarray(config.theta_star, dtype=float)
        eps = _lin_eps(config, contexts)
        ds = run_linear_bandit(contexts, eps, config.lambda_ridge, theta, config.n, noise, rng)
    elif scenario == "fixed_design":
        theta = np.asarray(config.theta_star, dtype=float)
        ds = run_fixed_design(fixed_X, theta, noise, rng)
    elif scenario == "adversarial":
        ds, theta, _flag = run_adversarial_design(config.d, config.n, rng)
    else:
        raise ValueError(scenario)
    if config.augment:
        def response(x, r):
            return float(x @ theta) + float(noise.draw(r, 1)[0])
        ds = tuning_mod.augment_dataset(ds, rng, response=response)
    return ds, theta


def _make_schedule(config: ExperimentConfig, ds: AdaptiveDataset,
                   contexts: np.ndarray | None):
    n_total = len(ds)
    if config.augment:
        # augmented rows break the special structure; the general schedule is
        # exactly the regime augmentation exists to enable
        return tuning_mod.general_schedule(n_total, ds.d)
    if config.scenario == "bandit":
        return tuning_mod.bandit_schedule(n_total)
    if config.scenario == "ar1":
        return tuning_mod.ar1_schedule(n_total)
    if config.scenario == "linear_bandit":
        G = (contexts.T @ contexts) / contexts.shape[0]
        return tuning_mod.exploration_schedule(n_total, _lin_eps(config, contexts), G)
    return tuning_mod.general_schedule(n_total, ds.d)


def _one_replication(config: ExperimentConfig, rep: int, contexts, fixed_X):
    ds, theta_star = _simulate(config, rep, contexts, fixed_X)
    schedule = _make_schedule(config, ds, contexts)
    base = ols(ds)
    sigma2_hat = base.sigma2_hat
    od = online_debias(ds, schedule, theta_star=theta_star)
    S = od.cov.array
    d = ds.d

    if sigma2_hat > 0.0:
        scale = math.sqrt(schedule.gamma_n / sigma2_hat)
        od_err = scale * (od.S_half.array @ (od.theta_od - theta_star))
        ols_err = (od.S_half.array @ (base.theta_ls - theta_star)) / math.sqrt(sigma2_hat)
    else:  # zero-noise run: estimates are exact, errors vanish
        od_err = np.zeros(d)
        ols_err = np.zeros(d)

    hits = {}
    widths = {}
    sigma_known = math.sqrt(config.sigma2)
    for j in config.effective_targets():
        v = np.zeros(d)
        v[j] = 1.0
        truth = float(theta_star[j])
        dfit = diag_online_debias(ds, v, schedule) if "od_direction" in config.methods else None

        def interval(method, a):
            if method == "od_direction":
                return ci_direction(dfit, sigma2_hat, a, S)
            if method == "naive_od":
                return ci_naive_od(od, sigma2_hat, a, v, S)
            if method == "naive_ols":
                return ci_naive_ols(base, sigma2_hat, a, v)
            if method == "concentration":
                return ci_concentration(ds, config.lambda_ridge, a, v, sigma_known,
                                        config.theta_bound, config.conc_form)
            raise ValueError(method)

        for method in config.methods:
            for a in config.alpha:
                two = interval(method, a)
                one = interval(method, 2.0 * a)
                hits[(j, method, a, "two-sided")] = two.contains(truth)
                # 'lower' tail mirrors the paper's figure naming: the
                # interval bounded above, which fails when the estimate is
                # biased downward
                hits[(j, method, a, "lower")] = truth <= one.hi
                hits[(j, method, a, "upper")] = truth >= one.lo
                widths[(j, method, a)] = two.width
    diag = diagnostics_assumptions(ds, schedule, od.state)
    extra = {}
    if config.scenario == "bandit" and not config.augment:
        counts = ds.X.sum(axis=0)
        extra["n_min"] = float(counts.min())
        extra["n_min_violation"] = float(counts.min() < math.log(len(ds)) ** 2)
    if config.scenario == "adversarial" and not config.augment:
        from .simulators import adversarial_precision

        extra["adversarial_precision"] = adversarial_precision(ds)
    decomp = float(np.abs(math.sqrt(schedule.gamma_n) * (od.S_half.array @ (od.theta_od - theta_star))
                          - (od.bias_vec + od.mart_vec)).max())
    return hits, widths, od_err, ols_err, diag, extra, decomp


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> CoverageReport:
    """Simulate R replications, fit every configured method, and aggregate
    per (method, alpha, tail) coverage and width."""
    threads = config.threads if threads is None else threads
    R = config.replications
    contexts = _make_context_set(config) if config.scenario == "linear_bandit" else None
    fixed_X = None
    if config.scenario == "fixed_design":
        rng = stream(config.seed, 2**32 - 2)
        fixed_X = sphere_points(config.n, len(config.theta_star), rng)

    results = [None] * R

    def work(rep):
        try:
            results[rep] = _one_replication(config, rep, contexts, fixed_X)
        except Exception as exc:
            raise RuntimeError(f"replication {rep} (seed {config.seed}) failed: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(R)))
    else:
        for rep in range(R):
            work(rep)

    d = config.dimension()
    od_errors = np.array([r[2] for r in results]).reshape(R, d)
    ols_errors = np.array([r[3] for r in results]).reshape(R, d)

    report = CoverageReport(config.scenario, config.seed, config.n, R,
                            od_errors=od_errors, ols_errors=ols_errors,
                            config=config.resolved())
    targets = config.effective_targets()
    for method in config.methods:
        for a in config.alpha:
            for tail in _TAILS:
                # average over replications and target coordinates
                vals = np.array([r[0][(j, method, a, tail)] for r in results for j in targets], dtype=float)
                cov = float(vals.mean())
                se = math.sqrt(cov * (1.0 - cov) / vals.size)
                ws = np.array([r[1][(j, method, a)] for r in results for j in targets], dtype=float)
                wmean = float(ws.mean())
                wse = float(ws.std(ddof=1) / math.sqrt(ws.size)) if ws.size > 1 else 0.0
                report.rows.append({
                    "method": method, "alpha": float(a), "tail": tail,
                    "coverage": cov, "coverage_se": se,
                    "mean_width": wmean, "width_se": wse,
                })
    diag_fields = ["variance_stability", "vanishing_bias_stat", "max_z_ratio",
                   "stability_gap", "stability_gap_bound", "wx_gamma_max",
                   "lambda_min_S", "commute_bound"]
    for name in diag_fields:
        report.diagnostics[name] = np.array([getattr(r[4], name) for r in results])
    report.diagnostics["decomposition_residual"] = np.array([r[6] for r in results])
    for key in results[0][5]:
        report.diagnostics[key] = np.array([r[5][key] for r in results])
    return report


def ks_statistic(samples) -> float:
    """Sup distance between the empirical CDF and the standard normal CDF."""
    s = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    m = s.size
    if m == 0:
        raise ValueError("ks_statistic needs at least one sample")
    cdf = np.array([normal_cdf(float(x)) for x in s])
    upper = np.max(np.arange(1, m + 1) / m - cdf)
    lower = np.max(cdf - np.arange(0, m) / m)
    return float(max(upper, lower))


def minimax_trace_check(design, M, sigma2: float, R: int,
                        rng: np.random.Generator | None = None,
                        seed: int = 0) -> tuple[float, float]:
    """Monte Carlo check of the fixed-design risk identity
    E ||theta_hat - theta*||_M^2 = sigma^2 tr(S^-1 M)."""
    X = np.ascontiguousarray(design, dtype=float)
    M = np.asarray(M, dtype=float)
    S = X.T @ X
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ValueError("singular design") from None
    Sinv = np.linalg.inv(S)
    bound = float(sigma2 * np.trace(Sinv @ M))
    if rng is None:
        rng = stream(seed, 0)
    B = X @ Sinv  # theta_hat - theta* = B^T eps
    risks = np.empty(R)
    chunk = max(1, min(R, 10_000_000 // max(X.shape[0], 1)))
    done = 0
    while done < R:
        r = min(chunk, R - done)
        E = math.sqrt(sigma2) * rng.standard_normal((r, X.shape[0]))
        Zm = E @ B
        risks[done:done + r] = np.einsum("ri,ij,rj->r", Zm, M, Zm)
        done += r
    return float(risks.mean()), bound


# ---------------------------------------------------------------------------
# CSV emission

_COVERAGE_HEADER = "scenario,method,alpha,tail,coverage,coverage_se,mean_width,width_se,replications,seed"
_ERRORS_HEADER = "scenario,replication,coordinate,standardized_error"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def emit_csv(report: CoverageReport, out_dir) -> tuple[str, str]:
    """Write coverage.csv and errors.csv under out_dir; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    cov_path = os.path.join(out_dir, "coverage.csv")
    err_path = os.path.join(out_dir, "errors.csv")
    with open(cov_path, "w") as fh:
        fh.write(_COVERAGE_HEADER + "\n")
        for r in report.rows:
            fh.write(",".join([
                report.scenario, r["method"], _fmt(r["alpha"]), r["tail"],
                _fmt(r["coverage"]), _fmt(r["coverage_se"]),
                _fmt(r["mean_width"]), _fmt(r["width_se"]),
                str(report.replications), str(report.seed),
            ]) + "\n")
    with open(err_path, "w") as fh:
        fh.write(_ERRORS_HEADER + "\n")
        for rep in range(report.od_errors.shape[0]):
            for j in range(report.od_errors.shape[1]):
                fh.write(",".join([
                    report.scenario, str(rep), str(j + 1),
                    _fmt(float(report.od_errors[rep, j])),
                ]) + "\n")
    return cov_path, err_path


def read_coverage_csv(path) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != _COVERAGE_HEADER:
            raise ValueError(f"unexpected coverage header: {header!r}")
        rows = []
        for line in fh:
            cells = line.strip().split(",")
            if len(cells) != 10:
                continue
            rows.append({
                "scenario": cells[0], "method": cells[1], "alpha": float(cells[2]),
                "tail": cells[3], "coverage": float(cells[4]),
                "coverage_se": float(cells[5]), "mean_width": float(cells[6]),
                "width_se": float(cells[7]), "replications": int(cells[8]),
                "seed": int(cells[9]),
            })
    return rows

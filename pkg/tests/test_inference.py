import math

import numpy as np
import pytest

from odinfer.core import AdaptiveDataset
from odinfer.estimators import diag_online_debias, ols, online_debias
from odinfer.inference import (
    chi2_cdf,
    chi2_quantile,
    ci_concentration,
    ci_direction,
    ci_naive_od,
    ci_naive_ols,
    ci_w_decorrelation,
    confidence_region,
    diagnostics_assumptions,
    normal_cdf,
    normal_quantile,
)
from odinfer.simulators import EpsGreedy, NoiseModel, run_bandit, stream
from odinfer.tuning import bandit_schedule
from odinfer.weights import WeightState

# frozen 30-digit reference values (mpmath)
Z_975 = 1.95996398454005423552
CHI2_2_95 = 5.99146454710798198687
CHI2_5_90 = 9.23635689978111845144
CHI2_1_95 = 3.84145882069412595836


def test_normal_quantile_values():
    assert normal_quantile(0.5) == 0.0
    assert abs(normal_quantile(0.975) - Z_975) < 1e-9
    assert abs(normal_quantile(0.025) + Z_975) < 1e-9


def test_normal_quantile_round_trip():
    rng = np.random.default_rng(1)
    for p in rng.random(1000) * 0.998 + 0.001:
        assert abs(normal_cdf(normal_quantile(p)) - p) < 1e-9


def test_normal_cdf_against_mpmath():
    mp = pytest.importorskip("mpmath")
    for x in (-8.0, -3.5, -1.0, -0.1, 0.0, 0.3, 1.0, 2.5, 6.0):
        ref = float(mp.mpf(1) / 2 * mp.erfc(-mp.mpf(x) / mp.sqrt(2)))
        assert abs(normal_cdf(x) - ref) < 1e-13


def test_normal_quantile_domain():
    for p in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            normal_quantile(p)


def test_chi2_quantile_values():
    # chi2_1 = Z^2 identity
    for p in (0.1, 0.5, 0.9, 0.95):
        z = normal_quantile((1.0 + p) / 2.0)
        assert abs(chi2_quantile(1, p) - z * z) < 1e-7
    assert abs(chi2_quantile(1, 0.95) - CHI2_1_95) < 1e-7
    # closed form for d = 2: -2 ln(alpha)
    assert abs(chi2_quantile(2, 0.95) - CHI2_2_95) < 1e-8
    assert abs(chi2_quantile(2, 0.95) + 2.0 * math.log(0.05)) < 1e-10
    assert abs(chi2_quantile(5, 0.9) - CHI2_5_90) < 1e-7 * CHI2_5_90


def test_chi2_round_trip():
    # 1000-point p grid across several degrees of freedom
    rng = np.random.default_rng(2)
    for _ in range(1000):
        d = int(rng.integers(1, 12))
        p = float(rng.random() * 0.998 + 0.001)
        x = chi2_quantile(d, p)
        assert abs(chi2_cdf(d, x) - p) < 1e-8


def test_quantile_extreme_tails():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for p in (1e-15, 1e-10, 1e-6, 1 - 1e-6, 1 - 1e-10, 1 - 1e-15):
        ref = float(mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1))
        assert abs(normal_quantile(p) - ref) < 1e-9 * max(1.0, abs(ref))


def test_chi2_cdf_against_mpmath():
    mp = pytest.importorskip("mpmath")
    for d in (1, 2, 5, 10):
        for x in (0.1, 1.0, 4.0, 20.0):
            ref = float(mp.gammainc(mp.mpf(d) / 2, 0, mp.mpf(x) / 2, regularized=True))
            assert abs(chi2_cdf(d, x) - ref) < 1e-12


def test_chi2_quantile_domain():
    with pytest.raises(ValueError):
        chi2_quantile(0, 0.5)
    with pytest.raises(ValueError):
        chi2_quantile(2, 1.0)


def _bandit_fit(n=600, seed=5):
    ds = run_bandit(EpsGreedy(0.1), np.array([0.3, 0.3]), n, NoiseModel(), stream(seed, 0))
    sched = bandit_schedule(n)
    base = ols(ds)
    fit = online_debias(ds, sched)
    return ds, sched, base, fit


def test_confidence_region_membership():
    ds, sched, base, fit = _bandit_fit()
    region = confidence_region(fit, base.sigma2_hat, 0.05)
    assert region.contains(fit.theta_od)  # statistic 0 at the center
    assert region.statistic(fit.theta_od) == 0.0
    # boundary convention: a point exactly at the quantile is a member
    evals_dir = np.array([1.0, 0.0])
    shape = region.shape.array
    t = math.sqrt(region.radius2 / float(evals_dir @ shape @ evals_dir))
    boundary = fit.theta_od + t * evals_dir
    assert region.contains(boundary) or region.statistic(boundary) <= region.radius2 * (1 + 1e-12)
    with pytest.raises(ValueError):
        confidence_region(fit, base.sigma2_hat, 1.2)
    with pytest.raises(ValueError):
        confidence_region(fit, 0.0, 0.05)


def test_ci_direction_width_formula():
    ds, sched, base, fit = _bandit_fit()
    S = fit.cov.array
    v = np.array([1.0, 0.0])
    dfit = diag_online_debias(ds, v, sched)
    ci = ci_direction(dfit, base.sigma2_hat, 0.05, S)
    hw = (dfit.beta_n * math.sqrt(base.sigma2_hat / sched.gamma_n)
          * math.sqrt(v @ np.linalg.solve(S, v)) * normal_quantile(0.975))
    assert abs(ci.width - 2.0 * hw) < 1e-12
    assert ci.contains(dfit.theta_diag_od[0])
    assert ci.method == "od_direction"


def test_naive_od_equals_direction_in_diagonal_case():
    # beta_n = 1, V = I for bandit data with v = e_1: intervals match to 1e-10
    ds, sched, base, fit = _bandit_fit()
    S = fit.cov.array
    v = np.array([1.0, 0.0])
    dfit = diag_online_debias(ds, v, sched)
    assert dfit.beta_n == pytest.approx(1.0, abs=1e-12)
    a = ci_direction(dfit, base.sigma2_hat, 0.05, S)
    b = ci_naive_od(fit, base.sigma2_hat, 0.05, v, S)
    assert abs(a.lo - b.lo) < 1e-10 and abs(a.hi - b.hi) < 1e-10


def test_naive_ols_width_ratio():
    # width(naive_ols) / width(od_direction) = sqrt(gamma_n) / beta_n
    ds, sched, base, fit = _bandit_fit()
    S = fit.cov.array
    v = np.array([0.0, 1.0])
    dfit = diag_online_debias(ds, v, sched)
    w_od = ci_direction(dfit, base.sigma2_hat, 0.05, S).width
    w_ols = ci_naive_ols(base, base.sigma2_hat, 0.05, v).width
    assert w_ols / w_od == pytest.approx(math.sqrt(sched.gamma_n) / dfit.beta_n, rel=1e-10)


def test_concentration_monotone():
    ds, sched, base, fit = _bandit_fit()
    v = np.array([1.0, 0.0])
    w1 = ci_concentration(ds, 0.1, 0.05, v, 1.0, theta_bound=1.0).width
    w2 = ci_concentration(ds, 0.1, 0.05, v, 1.0, theta_bound=3.0).width
    assert w2 >= w1
    w3 = ci_concentration(ds, 0.1, 0.01, v, 1.0, theta_bound=1.0).width
    assert w3 >= w1  # smaller delta -> wider
    with pytest.raises(ValueError):
        ci_concentration(ds, 0.0, 0.05, v, 1.0)


def test_concentration_large_lambda_limit():
    # lambda -> large: ridge estimate near 0, radius carries sqrt(lambda) * bound
    ds, sched, base, fit = _bandit_fit()
    v = np.array([1.0, 0.0])
    ci = ci_concentration(ds, 1e8, 0.05, v, 1.0, theta_bound=1.0)
    assert abs(0.5 * (ci.lo + ci.hi)) < 1e-3  # centered near zero
    assert ci.width / 2.0 >= 1.0  # contains the sqrt(lambda) bound / sqrt(lambda) term


def test_concentration_forms():
    ds, sched, base, fit = _bandit_fit()
    v = np.array([1.0, 0.0])
    ball = ci_concentration(ds, 0.1, 0.05, v, 1.0, form="ball")
    ell = ci_concentration(ds, 0.1, 0.05, v, 1.0, form="ellipsoid")
    assert ball.width >= ell.width  # ball projection is the conservative one
    with pytest.raises(ValueError):
        ci_concentration(ds, 0.1, 0.05, v, 1.0, form="banana")


def test_w_decorrelation_stub():
    with pytest.raises(NotImplementedError):
        ci_w_decorrelation()


def test_diagnostics_fixed_design_direct_weights():
    # with the stability-condition choice w_i = B_n^{-1/2} x_i and B_n = S_n,
    # the bias and variance-stability statistics vanish identically
    rng = np.random.default_rng(7)
    X = rng.standard_normal((400, 2))
    y = X @ np.array([0.5, -0.5]) + rng.standard_normal(400)
    ds = AdaptiveDataset(X, y)
    S = X.T @ X
    from odinfer.core import sym_inv_sqrt
    from odinfer.weights import TuningSchedule

    B_inv_half = sym_inv_sqrt(S).array
    state = WeightState(2, 1.0)
    W = X @ B_inv_half  # w_i = B^{-1/2} x_i
    state.sum_wx = W.T @ X
    state.sum_wxG = W.T @ (X @ B_inv_half)
    state.Delta = np.eye(2) - state.sum_wxG
    state.sum_gww = W.T @ W
    state.sum_zz = B_inv_half @ S @ B_inv_half
    state.max_z_ratio = float(max(np.sum((X @ B_inv_half) ** 2, axis=1)))
    state.gamma_last = S
    state.steps = 400
    sched = TuningSchedule("direct", 1.0, lambda *a: S, kind="custom")
    diag = diagnostics_assumptions(ds, sched, state)
    assert diag.vanishing_bias_stat < 1e-8
    assert diag.variance_stability < 1e-10
    assert diag.max_z_ratio < 0.2  # max_i x^T S^-1 x, small for n >> d


def test_confidence_region_monte_carlo_coverage():
    # iid fixed-design Gaussian simulation, d = 2, 1000 reps: empirical
    # coverage within 0.95 +/- 0.02.  The floor is raised to 1/gamma^2 so the
    # asymptotic-negligibility ratio is ~gamma at this sample size.
    from odinfer.simulators import run_fixed_design, sphere_points
    from odinfer.tuning import gamma_default, general_schedule

    design = sphere_points(1000, 2, stream(31, 0))
    gamma = gamma_default(1000)
    sched = general_schedule(1000, 2, L=1.0 / gamma ** 2)
    theta = np.array([0.3, -0.2])
    hits = 0
    for r in range(1000):
        sim = run_fixed_design(design, theta, NoiseModel(), stream(31, r + 1))
        base = ols(sim)
        fit = online_debias(sim, sched)
        hits += confidence_region(fit, base.sigma2_hat, 0.05).contains(theta)
    assert 0.93 <= hits / 1000 <= 0.97


def test_naive_ols_valid_on_fixed_design():
    # fixed orthogonal design with Gaussian noise: the textbook interval is
    # in its valid regime, coverage ~ 1 - alpha
    X = np.vstack([np.eye(2)] * 100)
    theta = np.array([0.4, -0.3])
    hits = 0
    for r in range(1000):
        rng = stream(77, r)
        y = X @ theta + rng.standard_normal(200)
        base = ols(AdaptiveDataset(X, y))
        ci = ci_naive_ols(base, base.sigma2_hat, 0.05, np.array([1.0, 0.0]))
        hits += ci.contains(theta[0])
    assert 0.93 <= hits / 1000 <= 0.97


def test_normalized_product_hides_discrete_factor():
    # why directly inverting the joint normality fails: with dependent
    # (A, b) one can have A b ~ N(0, I) while b itself is +/-1 valued,
    # so b is nowhere near N(0, (A^T A)^{-1})
    rng = np.random.default_rng(99)
    m = 4000
    X = rng.standard_normal(m)
    Y = rng.standard_normal(m)
    prod_1 = (np.abs(X) * np.sign(X) + np.abs(Y) * np.sign(Y)) / math.sqrt(2.0)
    prod_2 = (-np.abs(X) * np.sign(X) + np.abs(Y) * np.sign(Y)) / math.sqrt(2.0)
    from odinfer.harness import ks_statistic

    assert ks_statistic(prod_1) < 0.03  # (X + Y)/sqrt(2) is standard normal
    assert ks_statistic(prod_2) < 0.03
    assert set(np.unique(np.sign(X))) == {-1.0, 1.0}  # the factor is discrete


def test_bandit_diagnostics_bounds():
    ds, sched, base, fit = _bandit_fit(n=1000, seed=11)
    diag = diagnostics_assumptions(ds, sched, fit.state)
    counts = ds.X.sum(axis=0)
    if counts.min() >= math.log(1000) ** 2:
        assert diag.variance_stability <= math.exp(-1.0 / sched.gamma_n)
    assert diag.wx_gamma_max <= 4.0 + 1e-8
    assert diag.stability_gap <= diag.stability_gap_bound + 1e-12

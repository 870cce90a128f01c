import math

import numpy as np
import pytest

from odinfer.core import sample_covariance
from odinfer.simulators import (
    EpsGreedy,
    NoiseModel,
    Thompson,
    Ucb,
    adversarial_precision,
    run_adversarial_design,
    run_ar1,
    run_bandit,
    run_linear_bandit,
    sphere_points,
    stream,
)


def test_bandit_forced_initialization():
    ds = run_bandit(EpsGreedy(0.5), np.array([0.1, 0.2, 0.3]), 50, NoiseModel(), stream(1, 0))
    assert np.array_equal(ds.X[:3], np.eye(3))


def test_bandit_greedy_determinism():
    # eps = 0, zero noise, distinct means: always pulls the best arm after init
    noise = NoiseModel(sigma2=0.0)
    ds = run_bandit(EpsGreedy(0.0), np.array([0.1, 0.9]), 40, noise, stream(2, 0))
    assert np.array_equal(ds.X[2:], np.tile([0.0, 1.0], (38, 1)))


def test_bandit_covariance_is_count_diagonal():
    ds = run_bandit(Thompson(), np.array([0.3, 0.3]), 300, NoiseModel(), stream(3, 0))
    S = sample_covariance(ds).array
    counts = ds.X.sum(axis=0)
    assert np.array_equal(S, np.diag(counts))
    assert counts.sum() == 300


def test_bandit_needs_enough_rounds():
    with pytest.raises(ValueError, match="at least one pull"):
        run_bandit(EpsGreedy(0.1), np.array([0.1, 0.2, 0.3]), 2, NoiseModel(), stream(4, 0))


def test_bandit_reproducible():
    a = run_bandit(Ucb(), np.array([0.3, 0.3]), 200, NoiseModel(), stream(5, 7))
    b = run_bandit(Ucb(), np.array([0.3, 0.3]), 200, NoiseModel(), stream(5, 7))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)


def test_ar1_unrolled_example():
    # theta* = 1 with eps = (0.5, -0.2): y = (0.5, 0.3), covariates (0, 0.5)
    class TwoDraws:
        def standard_normal(self, n):
            return np.array([0.5, -0.2])

    ds = run_ar1(1.0, 2, TwoDraws())
    assert np.allclose(ds.y, [0.5, 0.3])
    assert np.allclose(ds.X[:, 0], [0.0, 0.5])


def test_ar1_theta_zero():
    rng = stream(6, 0)
    ds = run_ar1(0.0, 100, rng)
    # y_i = eps_i and x_i = eps_{i-1}
    assert np.array_equal(ds.X[1:, 0], ds.y[:-1])
    assert ds.X[0, 0] == 0.0


def test_ar1_residual_reconstruction():
    # theta = 0: y_i is the noise itself, so reconstruction is bit-exact
    ds0 = run_ar1(0.0, 500, stream(7, 1))
    assert np.array_equal(ds0.y, stream(7, 1).standard_normal(500))
    # general theta: reconstruction is exact up to one rounding per step
    ds = run_ar1(0.7, 500, stream(7, 0))
    eps = ds.y - 0.7 * ds.X[:, 0]
    noise = stream(7, 0).standard_normal(500)
    assert np.abs(eps - noise).max() < 1e-12


def test_ar1_domain():
    with pytest.raises(ValueError):
        run_ar1(1.5, 100, stream(8, 0))


def test_ar1_unit_root_donsker_spread():
    # (1/n^2) sum y_{i-1}^2 has nondegenerate spread (IQR > 0.1)
    vals = []
    for r in range(300):
        ds = run_ar1(1.0, 1000, stream(9, r))
        vals.append(float(ds.X[:, 0] @ ds.X[:, 0]) / 1000.0 ** 2)
    q75, q25 = np.percentile(vals, [75, 25])
    assert q75 - q25 > 0.1


def test_linear_bandit_pure_exploration_moments():
    rng = stream(10, 0)
    A = sphere_points(50, 2, rng)
    ds = run_linear_bandit(A, 1.0, 0.1, np.array([0.3, 0.3]), 2000, NoiseModel(), stream(10, 1))
    emp = ds.X.T @ ds.X / 2000.0
    G = A.T @ A / 50.0
    assert np.abs(emp - G).max() < 0.05


def test_linear_bandit_greedy_exploits():
    # eps = 0 with zero noise: after the ridge estimate stabilizes the
    # selection sticks to the best-scoring context
    rng = stream(11, 0)
    A = sphere_points(20, 2, rng)
    theta = np.array([1.0, 0.5])
    ds = run_linear_bandit(A, np.concatenate([np.ones(50), np.zeros(450)]),
                           0.1, theta, 500, NoiseModel(sigma2=0.0), stream(11, 1))
    best = A[np.argmax(A @ theta)]
    assert np.abs(ds.X[-1] - best).max() < 1e-12


def test_linear_bandit_validation():
    with pytest.raises(ValueError, match="nonempty"):
        run_linear_bandit(np.zeros((0, 2)), 0.1, 0.1, np.array([0.3, 0.3]), 10,
                          NoiseModel(), stream(12, 0))


def test_adversarial_first_round_and_b1():
    ds, theta, flag = run_adversarial_design(2, 100, stream(13, 0))
    # b_1 = 1^{-1/4}/sqrt(2)
    assert ds.X[0, 0] == pytest.approx(1.0 / math.sqrt(2.0))
    assert ds.X[0, 1] == 0.0  # a_{u,1} = 0
    d3, theta3, _ = run_adversarial_design(3, 30, stream(13, 1))
    assert d3.X[0, 2] == 0.0 and d3.X[1, 2] == 0.0  # a_{u,1} = 0 for all u


def test_adversarial_round_robin_pattern():
    ds, _, _ = run_adversarial_design(4, 30, stream(14, 0))
    for i in range(30):
        u = i % 3
        row = ds.X[i]
        assert row[u] != 0.0
        nonzero = np.nonzero(row[:3])[0]
        assert list(nonzero) == [u]


def test_adversarial_arrowhead_covariance():
    ds, _, _ = run_adversarial_design(4, 300, stream(15, 0))
    S = ds.X.T @ ds.X
    head = S[:3, :3]
    assert np.abs(head - np.diag(np.diag(head))).max() < 1e-12
    val = adversarial_precision(ds)
    Sinv = np.linalg.inv(S)
    assert val == pytest.approx(1.0 / Sinv[3, 3], rel=1e-9)


def test_adversarial_divisibility():
    with pytest.raises(ValueError, match="divisible"):
        run_adversarial_design(3, 101, stream(16, 0))


def test_adversarial_prior():
    zeros = 0
    for r in range(200):
        _, theta, flag = run_adversarial_design(2, 10, stream(17, r))
        if flag:
            assert theta[-1] == 1.0
        else:
            assert np.array_equal(theta, np.zeros(2))
            zeros += 1
    assert 60 < zeros < 140  # fair coin


def test_noise_models():
    rng = stream(18, 0)
    g = NoiseModel("gaussian", 2.0).draw(rng, 20000)
    assert abs(g.var() - 2.0) < 0.1
    u = NoiseModel("scaled-uniform", 0.5).draw(rng, 20000)
    assert abs(u.var() - 0.5) < 0.05
    assert abs(u.mean()) < 0.05
    c = NoiseModel("custom", custom=lambda r, n: np.zeros(n)).draw(rng, 5)
    assert np.array_equal(c, np.zeros(5))
    with pytest.raises(ValueError):
        NoiseModel("nope").draw(rng, 1)


def test_stream_independence_and_determinism():
    a = stream(1, 0).standard_normal(5)
    b = stream(1, 1).standard_normal(5)
    c = stream(1, 0).standard_normal(5)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)

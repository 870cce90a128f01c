"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Times the weight recursion and each simulator on benchmark-sized inputs and
verifies that both backends agree numerically before reporting speedups.
"""

import argparse
import time

import numpy as np

from odinfer._kernels import _reference

try:
    from odinfer._kernels import _fast
except ImportError:
    _fast = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _fast is None:
        print("compiled backend unavailable; build with `pip install -e .`")
        return 1

    rng = np.random.default_rng(1)
    n, d = 1000, 2
    X = rng.standard_normal((n, d))
    Z = 0.15 * rng.standard_normal((n, d))
    streams = rng.standard_normal((n, 1))
    theta = np.array([0.3, 0.3])
    noise = rng.standard_normal(n)
    coins = rng.random(n)
    unis = rng.random(n)
    normals = rng.standard_normal((n, d))
    contexts = rng.standard_normal((50, d))
    contexts /= np.linalg.norm(contexts, axis=1, keepdims=True)
    eps = np.full(n, 0.11)
    theta3 = np.array([0.4, -0.2, 1.0])
    noise3 = rng.standard_normal(30_000)

    cases = [
        ("recursion_pass (n=1000, d=2)",
         lambda m: m.recursion_pass(X, Z, 0.075, streams=streams)),
        ("bandit eps-greedy (n=1000)",
         lambda m: m.simulate_bandit_eps_greedy(theta, n, 0.1, noise, coins, unis)),
        ("bandit thompson (n=1000)",
         lambda m: m.simulate_bandit_thompson(theta, n, noise, normals)),
        ("ar1 (n=1000)",
         lambda m: m.simulate_ar1(1.0, n, noise)),
        ("linear bandit (n=1000, 50 arms)",
         lambda m: m.simulate_linear_bandit(contexts, eps, 0.1, theta, noise, coins, unis)),
        ("adversarial (n=30000, d=3)",
         lambda m: m.simulate_adversarial(3, 30_000, theta3, noise3)),
        ("general z pass (n=1000, d=2)",
         lambda m: m.general_z_pass(X, np.full(d, 25.8))),
    ]

    print(f"{'kernel':36s} {'python':>10s} {'compiled':>10s} {'speedup':>9s}")
    for name, fn in cases:
        t_py, out_py = _time(lambda: fn(_reference), args.repeat)
        t_c, out_c = _time(lambda: fn(_fast), args.repeat)
        a = out_py[0] if isinstance(out_py, tuple) else out_py["delta"]
        b = out_c[0] if isinstance(out_c, tuple) else out_c["delta"]
        worst = float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).max())
        agree = "" if worst < 1e-9 else f"  DISAGREE ({worst:.1e})"
        print(f"{name:36s} {t_py*1e3:9.2f}ms {t_c*1e3:9.2f}ms {t_py/t_c:8.1f}x{agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Kernel backend selection.

The hot per-row loops (weight recursion, schedule passes, simulators) exist
twice: a Cython extension (`_fast`) and a pure-Python twin (`_reference`).
The compiled module is used when importable; set ODINFER_PURE_PYTHON=1 to
force the fallback (the benchmark and backend-equality tests do this).
"""

import os

if os.environ.get("ODINFER_PURE_PYTHON"):
    from . import _reference as impl

    BACKEND = "python"
else:
    try:
        from . import _fast as impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _reference as impl

        BACKEND = "python"

recursion_pass = impl.recursion_pass
bandit_z_pass = impl.bandit_z_pass
ar1_z_pass = impl.ar1_z_pass
general_z_pass = impl.general_z_pass
simulate_bandit_eps_greedy = impl.simulate_bandit_eps_greedy
simulate_bandit_ucb = impl.simulate_bandit_ucb
simulate_bandit_thompson = impl.simulate_bandit_thompson
simulate_ar1 = impl.simulate_ar1
simulate_linear_bandit = impl.simulate_linear_bandit
simulate_adversarial = impl.simulate_adversarial


def get_backend() -> str:
    return BACKEND

"""odinfer: online-debiased estimation and exact confidence machinery for
adaptively collected linear regression data, plus the simulators and Monte
Carlo harness used to validate coverage."""

__version__ = "0.1.0"

from ._kernels import get_backend
from .core import (
    AdaptiveDataset,
    Observation,
    SampleCovariance,
    SymmetricMatrix,
    read_dataset_csv,
    sample_covariance,
    solve_spd,
    sym_inv_sqrt,
    sym_sqrt,
    write_dataset_csv,
)
from .estimators import (
    DiagOdFit,
    OdFit,
    OlsFit,
    PostDebiasFit,
    diag_online_debias,
    ols,
    online_debias,
    post_debias_correct,
)
from .harness import (
    CoverageReport,
    ExperimentConfig,
    emit_csv,
    ks_statistic,
    minimax_trace_check,
    parse_config,
    run_experiment,
)
from .inference import (
    ConfidenceInterval,
    ConfidenceRegion,
    chi2_quantile,
    ci_concentration,
    ci_direction,
    ci_naive_od,
    ci_naive_ols,
    confidence_region,
    diagnostics_assumptions,
    normal_quantile,
)
from .simulators import (
    EpsGreedy,
    NoiseModel,
    Thompson,
    Ucb,
    run_adversarial_design,
    run_ar1,
    run_bandit,
    run_linear_bandit,
    stream,
)
from .tuning import (
    augment_dataset,
    bandit_schedule,
    exploration_schedule,
    gamma_default,
    general_schedule,
    make_schedule,
    scaling_ar,
    scaling_bandit,
    scaling_exploration,
    scaling_general,
)
from .weights import (
    TuningSchedule,
    WeightState,
    commutative_bound,
    recursion_identity_residual,
    run_recursion,
    step_weights,
)

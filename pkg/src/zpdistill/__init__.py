"""Competence-weighted distillation toolkit.

Weight training problems by the student's own pass rate: a Beta-shaped
kernel w(p) = p^alpha * (1-p)^beta concentrates gradient signal on problems
the student sometimes solves, suppressing both hopeless and mastered ones.
The package provides the kernel and its moment-matched calibration,
closed-form robustness and variance calculators for that weighting, binned
gradient signal-to-noise diagnostics, and a small synthetic distillation
world that reproduces the mechanism end to end.
"""

from .errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    FileFormatError,
    FitError,
    InsufficientDataError,
    ZpdistillError,
)
from .kernel import (
    KernelParams,
    WeightVector,
    ZpdMoments,
    at_flat_boundary,
    beta_weight,
    fisher_info,
    kernel_peak,
    normalize_weights,
    q_signal,
    saturated_weight,
    select_exponents,
    zpd_moments,
)
from .passrate import (
    THREE_BIN_EDGES,
    PassRate,
    PassRateHistogram,
    RolloutRecord,
    equal_edges,
    estimate_pass_rate,
    hard_filter,
    histogram,
)
from .robustness import (
    DescentParams,
    SnrModelFit,
    descent_rate,
    efficiency_ratio,
    fit_snr_model,
    minimax_scale,
    minimax_weight,
    optimal_weight,
    remainder,
    robustness_rows,
    worst_case_efficiency,
)
from .snr_profile import (
    GradientRecord,
    SnrBin,
    SnrProfile,
    bell_shape_score,
    compute_snr_bins,
    normalize_profile,
)
from .variance import (
    EmpiricalBatchStats,
    VarianceSpec,
    convergence_bound,
    cov_condition,
    gamma_from_signal,
    variance_ratio_beta,
    variance_ratio_empirical,
)
from .distill_sim import (
    CheckpointRow,
    SimConfig,
    SimMetrics,
    SimWorld,
    build_world,
    forward_kl,
    measure_snr,
    retention,
    reverse_kl,
    run_rollouts,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ZpdistillError",
    "DomainError",
    "DegenerateInputError",
    "InsufficientDataError",
    "FitError",
    "ConfigError",
    "FileFormatError",
    "RolloutRecord",
    "PassRate",
    "PassRateHistogram",
    "THREE_BIN_EDGES",
    "equal_edges",
    "estimate_pass_rate",
    "hard_filter",
    "histogram",
    "KernelParams",
    "WeightVector",
    "ZpdMoments",
    "beta_weight",
    "kernel_peak",
    "normalize_weights",
    "zpd_moments",
    "select_exponents",
    "at_flat_boundary",
    "saturated_weight",
    "q_signal",
    "fisher_info",
    "DescentParams",
    "SnrModelFit",
    "descent_rate",
    "optimal_weight",
    "efficiency_ratio",
    "minimax_scale",
    "worst_case_efficiency",
    "minimax_weight",
    "remainder",
    "fit_snr_model",
    "robustness_rows",
    "VarianceSpec",
    "EmpiricalBatchStats",
    "variance_ratio_empirical",
    "cov_condition",
    "variance_ratio_beta",
    "gamma_from_signal",
    "convergence_bound",
    "GradientRecord",
    "SnrBin",
    "SnrProfile",
    "compute_snr_bins",
    "normalize_profile",
    "bell_shape_score",
    "SimConfig",
    "SimWorld",
    "SimMetrics",
    "CheckpointRow",
    "build_world",
    "run_rollouts",
    "forward_kl",
    "reverse_kl",
    "train",
    "measure_snr",
    "retention",
    "__version__",
]

"""causalreg: covariance-based ridge/lasso with confounding-calibrated regularization."""

from .bounds import (
    ConfoundedRegressionProblem,
    FunctionClassSpec,
    correlation_dimension,
    interventional_loss,
    jl_tail_check,
    loss_gap_lemma1,
    nonlinear_gap_1d,
    observational_loss,
    theorem3_violation_check,
)
from .concorr import ConCorrResult, concorr_fit, cv_baseline_fit
from .confounding import (
    ConfoundingEstimate,
    causal_norm_target,
    estimate_confounding_strength,
)
from .data import (
    CovariancePair,
    Dataset,
    RegressionVector,
    center_and_scale,
    drop_columns,
    empirical_covariances,
    read_dataset_csv,
)
from .simulation import (
    ExperimentConfig,
    ExperimentRecord,
    LinearSCM,
    SimulatedInstance,
    gen_scenario1,
    gen_scenario2,
    relative_squared_error,
    run_experiment,
    success_failure_rates,
    summarize_rates,
    theorem1_moment_draws,
)
from .solvers import (
    SolverConfig,
    lasso_from_cov,
    ols_from_cov,
    ridge_from_cov,
    solution_norm_curve,
    solve_lambda_for_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ConCorrResult",
    "ConfoundedRegressionProblem",
    "ConfoundingEstimate",
    "CovariancePair",
    "Dataset",
    "ExperimentConfig",
    "ExperimentRecord",
    "FunctionClassSpec",
    "LinearSCM",
    "RegressionVector",
    "SimulatedInstance",
    "SolverConfig",
    "causal_norm_target",
    "center_and_scale",
    "concorr_fit",
    "correlation_dimension",
    "cv_baseline_fit",
    "drop_columns",
    "empirical_covariances",
    "estimate_confounding_strength",
    "gen_scenario1",
    "gen_scenario2",
    "interventional_loss",
    "jl_tail_check",
    "lasso_from_cov",
    "loss_gap_lemma1",
    "nonlinear_gap_1d",
    "observational_loss",
    "ols_from_cov",
    "read_dataset_csv",
    "relative_squared_error",
    "ridge_from_cov",
    "run_experiment",
    "solution_norm_curve",
    "solve_lambda_for_norm",
    "success_failure_rates",
    "summarize_rates",
    "theorem1_moment_draws",
    "theorem3_violation_check",
]

"""Lasso tuned by validation or K-fold cross-validation, with VC-type error bounds."""
from .bounds import (
    BoundReport,
    VCParams,
    bahr_esseen_varsigma,
    cv_prediction_bound,
    min_eigenvalue,
    restricted_eigenvalue,
    srm_rate,
    theorem2_bound,
    theorem3_bound,
    theorem4_bound,
    vc_bound,
    vc_epsilon,
)
from .data import (
    Dataset,
    FoldPlan,
    SimulationConfig,
    StandardizationParams,
    apply_standardization,
    kfold_plan,
    load_csv,
    save_csv,
    save_json,
    simulate_dgp,
    split_validation,
    standardize,
)
from .grid import GridSpec
from .metrics import FitMetrics, bias_l2, empirical_risk, fit_metrics, gr_squared, r_squared
from .selection import SelectionResult, cv_lasso, holdout_lasso, worst_fold
from .solvers import FitResult, fsr_fit, lambda_max, lasso_fit, lasso_path, ols_fit

__version__ = "0.1.0"

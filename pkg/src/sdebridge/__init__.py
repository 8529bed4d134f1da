"""Adaptive Bridge-type penalized estimation for ergodic diffusions."""

from .bridge import (
    BridgeResult,
    DisjointResult,
    PenaltyConfig,
    WeightVector,
    adaptive_weights,
    bridge_fit,
    bridge_objective,
    disjoint_fit,
    rate_condition_check,
)
from .errors import (
    CsvParseError,
    DegenerateSeriesError,
    EvaluationError,
    ExplosionError,
    RunError,
    SdeBridgeError,
    SingularDiffusionError,
    TuningError,
)
from .experiments import (
    McConfig,
    McSummary,
    PredictConfig,
    PredictReport,
    bootstrap_predict,
    compare_joint_disjoint,
    load_series_csv,
    run_mc,
    run_predict,
    write_mc_outputs,
)
from .model import (
    ParamVector,
    SdeModel,
    SparsityMask,
    drift_eval,
    get_model,
    make_linear_affine,
    make_trig2d,
    model_names,
    register_model,
    sigma_eval,
    sigma_sq,
)
from .qmle import FitResult, hessian_fd, qmle_fit, quasi_neg_loglik
from .simulate import (
    RngSpec,
    SamplePath,
    euler_simulate,
    high_freq_grid,
    standard_normal_block,
    write_path_csv,
)
from .tuning import (
    ResidualSeries,
    TuneResult,
    combined_score,
    ks_gaussian,
    ljung_box,
    residuals,
    tune,
)

__version__ = "0.1.0"

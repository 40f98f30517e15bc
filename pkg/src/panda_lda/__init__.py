"""Sparse linear discriminant analysis: PANDA, LPD and AdaLDA with a proximal ADMM conic solver."""
from .core import (
    GaussianModel,
    LinearRule,
    SuffStats,
    bayes_direction,
    classify,
    compute_suff_stats,
    population_risk,
    std_normal_cdf,
)
from .datagen import ModelKind, SimSpec, build_model, sample
from .errors import *  # noqa: F401,F403
from .estimators import (
    FitResult,
    KClassFit,
    adalda_fit,
    kclass_classify,
    kclass_panda_fit,
    lpd_fit,
    panda_fit,
    theoretical_defaults,
)
from .evaluation import (
    MetricsRow,
    aggregate,
    auc,
    empirical_error,
    estimation_errors,
    run_replicates,
    tau_relative_error,
    variable_selection,
)
from .solver import AdmmConfig, ConicProgram, Solution, assemble_panda_program, solve
from .tuning import TuneGrid, grid_search

__version__ = "0.1.0"

"""Shapley value estimation via stochastic iteration with momentum."""

from simshap.coalitions import (
    ENUMERATION_CAP,
    EstimatorConfig,
    GameBoundary,
    all_coalitions,
    coalition_from_index,
    coalition_to_index,
    shapley_kernel_weight,
)
from simshap.estimators import (
    BatchMoments,
    ExplanationReport,
    IterationTrace,
    SingularSystemError,
    exact_shapley,
    kernel_shap,
    sim_shapley,
    solve_constrained_ridge,
    stable_sim_shapley,
)
from simshap.games import (
    CooperativeGame,
    GlobalGame,
    LocalGame,
    TabulatedGame,
    global_game,
    loss_game_local,
    prediction_game_local,
    tabulated_game,
)
from simshap.imputation import MarginalImputer, MeanImputer
from simshap.models import PredictiveModel, fit_linear, fit_logistic
from simshap.online import WelfordAccumulator
from simshap.sampling import KernelSampler

__version__ = "0.1.0"

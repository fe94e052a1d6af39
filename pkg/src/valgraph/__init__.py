"""Instrumental value propagation over causal world models, and its inversion."""

from .baseline import (
    FlatProblem,
    GapReport,
    baseline_grid_posterior,
    baseline_log_posterior,
    baseline_posterior,
    baseline_predict,
    flat_problem_for,
    generalization_gap,
)
from .errors import *  # noqa: F401,F403
from .fileio import ObservationFile, emit_model, emit_observations, parse_model, parse_observations
from .inference import (
    ChoiceObservation,
    GaussianPrior,
    GridAxis,
    GridPosterior,
    InferenceProblem,
    MHConfig,
    PosteriorSamples,
    PredictiveSummary,
    ValueReport,
    grid_posterior,
    log_likelihood,
    log_posterior,
    mh_sample,
    predict_value,
)
from .scenarios import builtin_scenario
from .values import ValueExplanation, evaluate_values, expected_value, explain_value, impact
from .world import (
    Literal,
    WorldModel,
    build_model,
    do_surgery,
    interventional_prob,
    joint_probability,
    topological_order,
)

__version__ = "0.1.0"

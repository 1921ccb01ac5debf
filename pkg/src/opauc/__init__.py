"""One-pass AUC optimization toolkit.

Streaming pairwise-square-loss learners driven by running per-class first
and second-order statistics, a randomized low-rank sketch variant for high
dimensions, univariate and projection baselines, an exact tie-aware AUC
evaluator, and a cross-validation benchmark harness with a CLI.
"""
from .baselines import (
    ProjectionWrapper,
    UnivariateModel,
    project_instance,
    train_projected,
    train_univariate,
    univariate_step,
)
from .data import (
    Dataset,
    Instance,
    ParseError,
    ScalingParams,
    apply_scaling,
    fit_scaling,
    from_instances,
    load_libsvm,
    parse_libsvm,
    scale_dataset,
    serialize_libsvm,
    stream,
)
from .evaluation import RegretTrace, auc, regret_trace, surrogate_objective
from .exact import ExactModelState, NoPairError, StepPolicy, train_exact
from .harness import EvalReport, ExperimentConfig, grid_select, run_cv, stratified_kfold
from .models import from_json, model_scores, to_json
from .sketch import SketchModelState, train_sketch

__all__ = [
    "Dataset",
    "EvalReport",
    "ExactModelState",
    "ExperimentConfig",
    "Instance",
    "NoPairError",
    "ParseError",
    "ProjectionWrapper",
    "RegretTrace",
    "ScalingParams",
    "SketchModelState",
    "StepPolicy",
    "UnivariateModel",
    "apply_scaling",
    "auc",
    "fit_scaling",
    "from_instances",
    "from_json",
    "grid_select",
    "load_libsvm",
    "model_scores",
    "parse_libsvm",
    "project_instance",
    "regret_trace",
    "run_cv",
    "scale_dataset",
    "serialize_libsvm",
    "stratified_kfold",
    "stream",
    "surrogate_objective",
    "to_json",
    "train_exact",
    "train_projected",
    "train_sketch",
    "train_univariate",
    "univariate_step",
]

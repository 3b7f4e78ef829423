"""Possibilistic networks: representation, imprecise-data sampling and parameter learning."""

from .core import (
    ConditionalPossibilityTable,
    Event,
    MassFunction,
    NetworkStructure,
    PossibilisticNetwork,
    PossibilityDistribution,
    Semantics,
    StateDomain,
    alpha_cut,
    condition,
    is_consistent,
    joint_possibility,
    joint_table,
    mass_to_possibility,
    necessity_measure,
    normalize,
    possibility_measure,
    topological_order,
)
from .estimator import (
    CountMode,
    CountTensor,
    Estimator,
    ImprecisionBudget,
    count_possibilistic,
    count_random_set,
    histogram_estimate,
    learn_parameters,
    possibilistic_loglik,
    possibilistic_mle,
    possibilistic_mle_raw,
    random_set_loglik,
    random_set_mle,
)
from .evaluation import EvaluationReport, ExperimentConfig, cpt_distance, joint_distance, run_experiment
from .sampler import (
    ImpreciseDataset,
    SamplerConfig,
    SamplingMode,
    conditional_envelope,
    imprecision_blur,
    instantiate_variable,
    sample_dataset,
)

__version__ = "0.1.0"

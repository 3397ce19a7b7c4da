"""Tensor-train black-box optimization toolkit."""

from .cross import (
    EvaluationError,
    NestedIndexSets,
    SampleLog,
    pointwise_oracle,
    tensor_oracle,
    tt_cross,
)
from .gp import (
    BayesConfig,
    GaussianProcessModel,
    Kernel,
    acquisition_ucb,
    bayes_minimize,
    gp_fit,
    gp_predict,
    propose_next,
)
from .harness import (
    PENALTY_VALUE,
    BatchRequest,
    BatchResult,
    evaluate_batch,
    parallel_scaling_report,
)
from .maxvol import MaxVolResult, maxvol, maxvol_element_bound_check
from .objectives import (
    MIXER_BOUNDS,
    BlackBoxObjective,
    EvaluationFailure,
    SectionField,
    benchmark,
    cov,
    mixer_objective,
    mixer_surrogate,
    section_from_csv,
    seeded_failure_model,
    shifted_quadratic,
    with_latency,
)
from .optimizer import SearchGrid, TetraOptConfig, grid_point, tetraopt_minimize
from .power import PowerConfig, rank_growth_probe, tt_power_argmax
from .trace import OptimizationTrace, TraceEvent
from .tt import (
    TensorTrain,
    frobenius_norm,
    load_tt,
    save_tt,
    tt_add,
    tt_eval,
    tt_eval_many,
    tt_full,
    tt_hadamard,
    tt_round,
    tt_scale,
    tt_shift,
)

__version__ = "0.1.0"

__all__ = [
    "BatchRequest",
    "BatchResult",
    "BayesConfig",
    "BlackBoxObjective",
    "EvaluationError",
    "EvaluationFailure",
    "GaussianProcessModel",
    "Kernel",
    "MIXER_BOUNDS",
    "MaxVolResult",
    "NestedIndexSets",
    "OptimizationTrace",
    "PENALTY_VALUE",
    "PowerConfig",
    "SampleLog",
    "SearchGrid",
    "SectionField",
    "TensorTrain",
    "TetraOptConfig",
    "TraceEvent",
    "acquisition_ucb",
    "bayes_minimize",
    "benchmark",
    "cov",
    "evaluate_batch",
    "frobenius_norm",
    "gp_fit",
    "gp_predict",
    "grid_point",
    "load_tt",
    "maxvol",
    "maxvol_element_bound_check",
    "mixer_objective",
    "mixer_surrogate",
    "parallel_scaling_report",
    "pointwise_oracle",
    "propose_next",
    "rank_growth_probe",
    "save_tt",
    "section_from_csv",
    "seeded_failure_model",
    "shifted_quadratic",
    "tensor_oracle",
    "tetraopt_minimize",
    "tt_add",
    "tt_cross",
    "tt_eval",
    "tt_eval_many",
    "tt_full",
    "tt_hadamard",
    "tt_power_argmax",
    "tt_round",
    "tt_scale",
    "tt_shift",
    "with_latency",
]

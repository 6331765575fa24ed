"""Python bindings for the symidx library."""

from ._symidx import (
    FlowResult,
    InitReport,
    LossKind,
    RunResult,
    TrainConfig,
    hall_inner_product,
    integrate_flow,
    powersum,
    powersum_vector,
    projection_deficiency,
    sample_cue,
    semigroup_check,
    semigroup_exact,
    time_bound,
    train,
    vandermonde_diagnostics,
    init_report,
)

__all__ = [
    "FlowResult",
    "InitReport",
    "LossKind",
    "RunResult",
    "TrainConfig",
    "hall_inner_product",
    "init_report",
    "integrate_flow",
    "powersum",
    "powersum_vector",
    "projection_deficiency",
    "sample_cue",
    "semigroup_check",
    "semigroup_exact",
    "time_bound",
    "train",
    "vandermonde_diagnostics",
]

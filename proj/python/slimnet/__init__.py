"""Group-sparse neural network training, pruning and reporting."""

from ._core import (
    ConfigError,
    ContractError,
    DivergenceError,
    FormatError,
    Network,
    NetworkSpec,
    ShapeError,
    StructuralError,
    compact,
    detect_dead,
    evaluate,
    load_checkpoint,
    prox_group,
    regularizer_value,
    report_json,
    run_experiment_json,
    run_prox_trials,
    save_checkpoint,
    soft_threshold,
    synth_teacher_student,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DivergenceError",
    "FormatError",
    "Network",
    "NetworkSpec",
    "ShapeError",
    "StructuralError",
    "compact",
    "detect_dead",
    "evaluate",
    "load_checkpoint",
    "prox_group",
    "regularizer_value",
    "report_json",
    "run_experiment_json",
    "run_prox_trials",
    "save_checkpoint",
    "soft_threshold",
    "synth_teacher_student",
]

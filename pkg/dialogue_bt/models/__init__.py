"""Configuration schemas and result containers for dialogue-bt."""

from dialogue_bt.models.results import (
    REPORT_SCHEMA,
    Hypothesis,
    IterationTrace,
    MetricsReport,
    PhaseResult,
    PseudoPair,
)
from dialogue_bt.models.schemas import (
    PUBLISHED_LEARNING_RATE,
    BtConfig,
    CorpusPaths,
    DecodeConfig,
    FilterConfig,
    ModelConfig,
    OptimConfig,
    RunConfig,
    SynthSpec,
    load_run_config,
)

__all__ = [
    "BtConfig",
    "CorpusPaths",
    "DecodeConfig",
    "FilterConfig",
    "Hypothesis",
    "IterationTrace",
    "MetricsReport",
    "ModelConfig",
    "OptimConfig",
    "PUBLISHED_LEARNING_RATE",
    "PhaseResult",
    "PseudoPair",
    "REPORT_SCHEMA",
    "RunConfig",
    "SynthSpec",
    "load_run_config",
]

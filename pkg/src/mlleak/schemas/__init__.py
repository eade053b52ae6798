"""Validated data models for mlleak."""

from .architecture import Architecture, LayerSpec
from .enums import (
    Access,
    AttackKind,
    AttackVariant,
    Auxiliary,
    CellStatus,
    LayerKind,
    OptimizerKind,
    RiskLevel,
)
from .experiment import ArchitectureName, DatasetEntry, ExperimentConfig
from .params import (
    SYNTH_PRESETS,
    OptimizerConfig,
    SynthSpec,
    TrainConfig,
    attack_train_config,
)
from .results import (
    CSV_COLUMNS,
    DEGENERATE,
    INSUFFICIENT_DATA,
    ComplexityRow,
    Correlation,
    ExperimentCell,
    GapRow,
    RiskReport,
    TargetRecord,
    ThreatSummaryRow,
)
from .threat import ThreatModel, is_applicable

__all__ = [
    # Enums
    "Access",
    "AttackKind",
    "AttackVariant",
    "Auxiliary",
    "CellStatus",
    "LayerKind",
    "OptimizerKind",
    "RiskLevel",
    # Parameters
    "OptimizerConfig",
    "SynthSpec",
    "SYNTH_PRESETS",
    "TrainConfig",
    "attack_train_config",
    # Architectures
    "Architecture",
    "LayerSpec",
    # Threat models
    "ThreatModel",
    "is_applicable",
    # Results
    "CSV_COLUMNS",
    "DEGENERATE",
    "INSUFFICIENT_DATA",
    "ComplexityRow",
    "Correlation",
    "ExperimentCell",
    "GapRow",
    "RiskReport",
    "TargetRecord",
    "ThreatSummaryRow",
    # Experiment documents
    "ArchitectureName",
    "DatasetEntry",
    "ExperimentConfig",
]

"""
mlleak - privacy risk measurement for small image classifiers.

Trains target models, mounts membership inference, attribute inference and
model stealing attacks under the four access x auxiliary-data threat
models, and reports how much each target leaks.

Example:
    >>> import mlleak
    >>> mlleak.set_root_seed(7)
    >>> ds = mlleak.synth_generate(mlleak.SYNTH_PRESETS["fmnist-like"])
    >>> split = mlleak.four_way_split(ds, seed=1)
    >>> arch = mlleak.build_architecture("small_mlp", ds.channels, ds.num_classes)
    >>> target = mlleak.train(arch, split.target_train, mlleak.TrainConfig(epochs=5))
    >>> threat = mlleak.ThreatModel.parse("black_box/shadow")
    >>> attack = mlleak.mia_train_shadow(split, arch, threat, target.train_config)
    >>> access = mlleak.grant_access(target, threat)
    >>> mlleak.mia_evaluate(attack, access, split.target_train, split.target_test)
"""

# Configuration functions
from .config import (
    TrainProfile,
    set_root_seed,
    set_jobs,
    set_profile,
    configure_profile,
    get_root_seed,
    get_jobs,
    get_profile,
    get_train_profile,
)
from .base import derive_seed

# Models
from .schemas import (
    SYNTH_PRESETS,
    Access,
    Architecture,
    AttackKind,
    AttackVariant,
    Auxiliary,
    CellStatus,
    DatasetEntry,
    ExperimentCell,
    ExperimentConfig,
    LayerSpec,
    OptimizerConfig,
    OptimizerKind,
    RiskLevel,
    RiskReport,
    SynthSpec,
    TargetRecord,
    ThreatModel,
    TrainConfig,
    is_applicable,
)

# Data
from .data import (
    FourWaySplit,
    LabeledDataset,
    complexity_rank,
    four_way_split,
    majority_baseline,
    partial_subset,
    synth_generate,
)
from .idx import load_idx, parse_idx

# Models and training
from .zoo import (
    TrainedModel,
    accuracy,
    build_architecture,
    embedding,
    predict,
    simple_cnn,
    small_mlp,
    tiny_residual,
    train,
)
from .checkpoint import load_checkpoint, save_checkpoint

# Threat models
from .threat import TargetAccess, WhiteBoxAccess, grant_access, query

# Attacks
from .attacks import (
    AttackModel,
    agreement,
    attribute_attack,
    mia_evaluate,
    mia_train_partial,
    mia_train_shadow,
    steal_model,
)

# Reporting
from .report import build_report, overfitting_gap, pearson, write_csv, write_summary

# Exceptions
from .exceptions import (
    MLLeakError,
    MLLeakConfigurationError,
    MLLeakDimensionError,
    MLLeakNumericError,
    MLLeakLabelError,
    MLLeakOptimizerStateError,
    MLLeakDataError,
    MLLeakDataFormatError,
    MLLeakFormatError,
    MLLeakLengthError,
    MLLeakConsistencyError,
    MLLeakSizeError,
    MLLeakDisjointnessError,
    MLLeakBalanceError,
    MLLeakTrainingError,
    MLLeakCapabilityError,
    MLLeakCheckpointError,
    MLLeakDegenerateInputError,
    MLLeakInsufficientDataError,
    MLLeakEmptyInputError,
    MLLeakIOError,
)

__all__ = [
    # Configuration
    "TrainProfile",
    "set_root_seed",
    "set_jobs",
    "set_profile",
    "configure_profile",
    "get_root_seed",
    "get_jobs",
    "get_profile",
    "get_train_profile",
    "derive_seed",
    # Models
    "SYNTH_PRESETS",
    "Access",
    "Architecture",
    "AttackKind",
    "AttackVariant",
    "Auxiliary",
    "CellStatus",
    "DatasetEntry",
    "ExperimentCell",
    "ExperimentConfig",
    "LayerSpec",
    "OptimizerConfig",
    "OptimizerKind",
    "RiskLevel",
    "RiskReport",
    "SynthSpec",
    "TargetRecord",
    "ThreatModel",
    "TrainConfig",
    "is_applicable",
    # Data
    "FourWaySplit",
    "LabeledDataset",
    "complexity_rank",
    "four_way_split",
    "majority_baseline",
    "partial_subset",
    "synth_generate",
    "load_idx",
    "parse_idx",
    # Models and training
    "TrainedModel",
    "accuracy",
    "build_architecture",
    "embedding",
    "predict",
    "simple_cnn",
    "small_mlp",
    "tiny_residual",
    "train",
    "load_checkpoint",
    "save_checkpoint",
    # Threat models
    "TargetAccess",
    "WhiteBoxAccess",
    "grant_access",
    "query",
    # Attacks
    "AttackModel",
    "agreement",
    "attribute_attack",
    "mia_evaluate",
    "mia_train_partial",
    "mia_train_shadow",
    "steal_model",
    # Reporting
    "build_report",
    "overfitting_gap",
    "pearson",
    "write_csv",
    "write_summary",
    # Exceptions
    "MLLeakError",
    "MLLeakConfigurationError",
    "MLLeakDimensionError",
    "MLLeakNumericError",
    "MLLeakLabelError",
    "MLLeakOptimizerStateError",
    "MLLeakDataError",
    "MLLeakDataFormatError",
    "MLLeakFormatError",
    "MLLeakLengthError",
    "MLLeakConsistencyError",
    "MLLeakSizeError",
    "MLLeakDisjointnessError",
    "MLLeakBalanceError",
    "MLLeakTrainingError",
    "MLLeakCapabilityError",
    "MLLeakCheckpointError",
    "MLLeakDegenerateInputError",
    "MLLeakInsufficientDataError",
    "MLLeakEmptyInputError",
    "MLLeakIOError",
]

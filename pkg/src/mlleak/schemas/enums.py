"""Enums for mlleak."""

from enum import Enum


class OptimizerKind(str, Enum):
    """Optimization algorithm."""

    SGD = "sgd"
    ADAM = "adam"


class Access(str, Enum):
    """How the adversary reaches the target model."""

    BLACK_BOX = "black_box"
    WHITE_BOX = "white_box"


class Auxiliary(str, Enum):
    """Auxiliary data the adversary holds."""

    PARTIAL = "partial"
    SHADOW = "shadow"


class AttackKind(str, Enum):
    """Attack families run by the experiment grid."""

    MEMBERSHIP = "membership"
    ATTRIBUTE = "attribute"
    STEALING = "stealing"


class AttackVariant(str, Enum):
    """Concrete attack classifier variants."""

    MIA_BLACKBOX = "mia_blackbox"
    MIA_WHITEBOX = "mia_whitebox"
    ATTRIBUTE = "attribute"
    SURROGATE = "surrogate"


class LayerKind(str, Enum):
    """Layer kinds of an architecture descriptor."""

    CONV = "conv"
    DENSE = "dense"
    RELU = "relu"
    FLATTEN = "flatten"
    RESIDUAL = "residual"


class CellStatus(str, Enum):
    """Outcome of one grid cell."""

    OK = "ok"
    SKIPPED = "skipped"


class RiskLevel(str, Enum):
    """Qualitative risk from the attacker advantage over baseline."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"

"""Experiment cell and risk report models for mlleak."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import AttackKind, CellStatus, RiskLevel

# CSV column contract, in order
CSV_COLUMNS: tuple[str, ...] = (
    "dataset",
    "arch",
    "threat",
    "attack",
    "metric",
    "train_acc",
    "test_acc",
    "gap",
    "complexity",
    "seed",
)

INSUFFICIENT_DATA = "insufficient-data"
DEGENERATE = "degenerate"


class ExperimentCell(BaseModel):
    """
    One (target model x threat model x attack) measurement.

    `metric` is attack accuracy for membership and attribute inference and
    agreement for stealing. Skipped cells carry no metric and a note.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: str
    arch: str
    threat: str
    attack: AttackKind
    metric: float | None = Field(None, ge=0.0, le=1.0)
    train_acc: float = Field(..., ge=0.0, le=1.0)
    test_acc: float = Field(..., ge=0.0, le=1.0)
    gap: float = Field(..., ge=-1.0, le=1.0)
    complexity: float
    seed: int
    status: CellStatus = CellStatus.OK
    note: str = ""
    extra: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_metric(self) -> ExperimentCell:
        if self.status == CellStatus.OK and self.metric is None:
            raise ValueError("completed cells need a metric")
        if abs(self.gap - (self.train_acc - self.test_acc)) > 1e-9:
            raise ValueError("gap must equal train_acc - test_acc")
        return self

    @property
    def target_key(self) -> tuple[str, str, int]:
        """Identity of the attacked target model."""
        return (self.dataset, self.arch, self.seed)

    def csv_row(self) -> dict[str, object]:
        return {
            "dataset": self.dataset,
            "arch": self.arch,
            "threat": self.threat,
            "attack": self.attack.value,
            "metric": self.metric,
            "train_acc": self.train_acc,
            "test_acc": self.test_acc,
            "gap": self.gap,
            "complexity": self.complexity,
            "seed": self.seed,
        }


class Correlation(BaseModel):
    """Pearson correlation entry; `value` is None unless status is "ok"."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x: str
    y: str
    points: int
    value: float | None = None
    status: Literal["ok", "insufficient-data", "degenerate"] = "ok"


class ThreatSummaryRow(BaseModel):
    """Performance of one attack under one threat model."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    attack: AttackKind
    threat: str
    cells: int
    median: float
    mean: float
    baseline: float | None = None
    advantage: float | None = None
    risk_level: RiskLevel | None = None


class ComplexityRow(BaseModel):
    """Attack metric for one dataset, ordered by complexity."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    attack: AttackKind
    dataset: str
    complexity: float
    cells: int
    median: float


class GapRow(BaseModel):
    """One cell's metric against its target's overfitting gap."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    attack: AttackKind
    threat: str
    dataset: str
    arch: str
    seed: int
    gap: float
    metric: float


class RiskReport(BaseModel):
    """
    All cells plus the four aggregate tables.

    Example:
        >>> report = build_report(cells)
        >>> RiskReport.model_validate_json(report.model_dump_json()) == report
        True
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    format_version: Literal[1] = 1
    cells: tuple[ExperimentCell, ...]
    skipped: tuple[ExperimentCell, ...] = ()
    threat_summary: tuple[ThreatSummaryRow, ...] = ()
    complexity_series: tuple[ComplexityRow, ...] = ()
    complexity_correlations: tuple[Correlation, ...] = ()
    gap_series: tuple[GapRow, ...] = ()
    gap_correlations: tuple[Correlation, ...] = ()
    attack_correlations: tuple[Correlation, ...] = ()


class TargetRecord(BaseModel):
    """Accuracy record written next to each target checkpoint."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset: str
    arch: str
    seed: int
    train_acc: float = Field(..., ge=0.0, le=1.0)
    test_acc: float = Field(..., ge=0.0, le=1.0)
    complexity: float
    checkpoint: str

    @property
    def gap(self) -> float:
        return self.train_acc - self.test_acc

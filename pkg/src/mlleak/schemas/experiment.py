"""Experiment document model for mlleak."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import AttackKind
from .params import SYNTH_PRESETS, OptimizerConfig, SynthSpec
from .threat import ThreatModel, is_applicable

ArchitectureName = Literal["simple_cnn", "small_mlp", "tiny_residual"]


class DatasetEntry(BaseModel):
    """
    One dataset of the study.

    Synthetic entries name a preset and/or give SynthSpec fields in `synth`
    (fields override the preset). IDX entries give image and label paths.

    Example:
        >>> DatasetEntry(id="easy", kind="synthetic", preset="fmnist-like",
        ...              synth={"samples_per_class": 40})
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    kind: Literal["synthetic", "idx"] = "synthetic"
    preset: str | None = None
    synth: dict[str, Any] = Field(default_factory=dict)
    images: str | None = None
    labels: str | None = None
    # caps target_train and shadow_train to steer overfitting
    max_train_samples: int | None = Field(None, ge=2)

    @model_validator(mode="after")
    def _check_source(self) -> DatasetEntry:
        if self.kind == "idx":
            if not self.images or not self.labels:
                raise ValueError(f"idx dataset {self.id!r} needs 'images' and 'labels' paths")
        else:
            if self.preset is not None and self.preset not in SYNTH_PRESETS:
                raise ValueError(
                    f"unknown preset {self.preset!r}; expected one of {sorted(SYNTH_PRESETS)}"
                )
            if self.preset is None and "num_classes" not in self.synth:
                raise ValueError(
                    f"synthetic dataset {self.id!r} needs a preset or synth.num_classes"
                )
            self.synth_spec(0)
        return self

    def synth_spec(self, default_seed: int) -> SynthSpec:
        """Resolve preset + overrides; the seed defaults to `default_seed`."""
        fields: dict[str, Any] = {}
        if self.preset is not None:
            fields.update(SYNTH_PRESETS[self.preset].model_dump())
            fields.pop("seed")
        fields.update(self.synth)
        fields.setdefault("seed", default_seed)
        return SynthSpec(**fields)


class ExperimentConfig(BaseModel):
    """
    A complete, reproducible study: datasets x architectures x seeds,
    the threat models and attacks to run, and training settings.

    Unset epoch budgets come from the training profile.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    schema_version: Literal[1] = 1
    root_seed: int | None = Field(None, ge=0, lt=2**64)
    seeds: tuple[int, ...] = Field((0,), min_length=1)
    profile: Literal["fast", "paper-faithful"] | None = None
    datasets: tuple[DatasetEntry, ...] = Field(..., min_length=1)
    architectures: tuple[ArchitectureName, ...] = Field(("simple_cnn",), min_length=1)
    threat_models: tuple[str, ...] = tuple(t.label for t in ThreatModel.all())
    attacks: tuple[AttackKind, ...] = tuple(AttackKind)
    epochs: int | None = Field(None, ge=0)
    attack_epochs: int | None = Field(None, ge=1)
    batch_size: int = Field(64, ge=1)
    optimizer: OptimizerConfig = OptimizerConfig()
    partial_fraction: float = Field(0.7, gt=0.0, le=1.0)
    output_dir: str = "runs"

    @field_validator("threat_models")
    @classmethod
    def _check_threats(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        for label in value:
            ThreatModel.parse(label)
        if len(set(value)) != len(value):
            raise ValueError("threat models must not repeat")
        return value

    @model_validator(mode="after")
    def _check_grid(self) -> ExperimentConfig:
        ids = [d.id for d in self.datasets]
        if len(set(ids)) != len(ids):
            raise ValueError("dataset ids must be unique")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must not repeat")
        if not self.threat_models or not self.attacks:
            raise ValueError("at least one threat model and one attack are required")
        if not any(is_applicable(a, t) for a in self.attacks for t in self.threats()):
            raise ValueError("no requested attack applies to any requested threat model")
        return self

    def threats(self) -> tuple[ThreatModel, ...]:
        return tuple(ThreatModel.parse(label) for label in self.threat_models)

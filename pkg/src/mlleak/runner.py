"""
Config-driven experiment grid.

A study is one ExperimentConfig document. The runner trains one target per
(dataset, architecture, seed), mounts every requested attack under every
requested threat model against each target, and aggregates the resulting
cells into a report. All randomness derives from the root seed through
base.derive_seed, so re-running a config reproduces every file.

Output layout under the output directory:

    checkpoints/<dataset>__<arch>__seed<s>.ckpt
    targets/<dataset>__<arch>__seed<s>.json
    cells/<dataset>__<arch>__seed<s>__<access>-<auxiliary>__<attack>.json
    report.csv
    summary.json
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from pydantic import ValidationError

from . import config as runtime
from .attacks import (
    agreement,
    attribute_attack,
    mia_evaluate,
    mia_train_partial,
    mia_train_shadow,
    steal_model,
    unseen_members,
)
from .base import atomic_write_text, derive_seed, read_bytes
from .checkpoint import load_checkpoint, save_checkpoint
from .data import (
    FourWaySplit,
    LabeledDataset,
    complexity_rank,
    concatenate,
    four_way_split,
    majority_baseline,
    partial_subset,
    sample,
    synth_generate,
)
from .exceptions import MLLeakConfigurationError, MLLeakEmptyInputError, MLLeakIOError
from .idx import load_idx
from .report import build_report, write_csv, write_summary
from .schemas import (
    AttackKind,
    Auxiliary,
    CellStatus,
    DatasetEntry,
    ExperimentCell,
    ExperimentConfig,
    RiskReport,
    TargetRecord,
    ThreatModel,
    TrainConfig,
    attack_train_config,
    is_applicable,
)
from .threat import grant_access
from .zoo import TrainedModel, accuracy, build_architecture, train

_log = logging.getLogger(__name__)

CHECKPOINT_DIR = "checkpoints"
TARGET_DIR = "targets"
CELL_DIR = "cells"
CSV_NAME = "report.csv"
SUMMARY_NAME = "summary.json"

SKIPPED_INAPPLICABLE = "skipped: inapplicable"
SKIPPED_NO_ATTRIBUTES = "skipped: no attribute labels"
SKIPPED_NO_UNSEEN_MEMBERS = "skipped: partial set covers target_train"

J = TypeVar("J")
R = TypeVar("R")


def load_config(path: str | Path) -> ExperimentConfig:
    """
    Read and validate an experiment document.

    Raises:
        MLLeakIOError: If the file cannot be read
        MLLeakConfigurationError: If the document is invalid
    """
    payload = read_bytes(path)
    try:
        return ExperimentConfig.model_validate_json(payload)
    except ValidationError as e:
        raise MLLeakConfigurationError(f"Invalid experiment config {path}: {e}") from e


@dataclass(frozen=True)
class RunSettings:
    """
    An experiment document with every runtime choice resolved.

    Attributes:
        config: The validated document
        root_seed: Seed all component seeds derive from
        epochs: Target, shadow and surrogate training epochs
        attack_epochs: Attack classifier training epochs
        out_dir: Output directory
        jobs: Maximum concurrent grid jobs
        base_dir: Directory relative IDX paths are resolved against
    """

    config: ExperimentConfig
    root_seed: int
    epochs: int
    attack_epochs: int
    out_dir: Path
    jobs: int
    base_dir: Path

    def seed(self, *components: str | int) -> int:
        return derive_seed(self.root_seed, *components)

    def target_config(self, job: TargetJob) -> TrainConfig:
        return TrainConfig(
            batch_size=self.config.batch_size,
            epochs=self.epochs,
            optimizer=self.config.optimizer,
            shuffle_seed=self.seed("target-shuffle", *job.parts),
        )


def resolve_settings(
    config: ExperimentConfig,
    *,
    out: str | Path | None = None,
    seed: int | None = None,
    jobs: int | None = None,
    profile: str | None = None,
    base_dir: str | Path = ".",
) -> RunSettings:
    """
    Combine a document with overrides.

    Explicit arguments win over document values, which win over the
    module-level configuration (see mlleak.config).
    """
    budgets = runtime.get_train_profile(profile or config.profile)
    if seed is not None:
        root = seed
    elif config.root_seed is not None:
        root = config.root_seed
    else:
        root = runtime.get_root_seed()
    workers = jobs if jobs is not None else runtime.get_jobs()
    if workers < 1:
        raise MLLeakConfigurationError(f"jobs must be >= 1, got {workers}")
    return RunSettings(
        config=config,
        root_seed=root,
        epochs=config.epochs if config.epochs is not None else budgets.epochs,
        attack_epochs=(
            config.attack_epochs if config.attack_epochs is not None else budgets.attack_epochs
        ),
        out_dir=Path(out if out is not None else config.output_dir),
        jobs=workers,
        base_dir=Path(base_dir),
    )


@dataclass(frozen=True)
class TargetJob:
    """One target model of the grid."""

    dataset: DatasetEntry
    arch: str
    seed: int

    @property
    def parts(self) -> tuple[str, str, int]:
        return (self.dataset.id, self.arch, self.seed)

    @property
    def key(self) -> str:
        return f"{self.dataset.id}__{self.arch}__seed{self.seed}"


def target_jobs(config: ExperimentConfig) -> list[TargetJob]:
    return [
        TargetJob(dataset, arch, seed)
        for dataset in config.datasets
        for arch in config.architectures
        for seed in config.seeds
    ]


# Datasets

# per-process cache; datasets are immutable and deterministic in their key
_DATASETS: dict[tuple[str, int, str], tuple[LabeledDataset, float]] = {}


def load_dataset(entry: DatasetEntry, settings: RunSettings) -> tuple[LabeledDataset, float]:
    """The dataset of an entry and its complexity score."""
    key = (entry.model_dump_json(), settings.root_seed, str(settings.base_dir))
    if key not in _DATASETS:
        if entry.kind == "idx":
            assert entry.images is not None and entry.labels is not None
            ds = load_idx(
                settings.base_dir / entry.images, settings.base_dir / entry.labels, name=entry.id
            )
        else:
            spec = entry.synth_spec(settings.seed("data", entry.id))
            ds = synth_generate(spec, name=entry.id)
        _DATASETS[key] = (ds, complexity_rank(ds))
        _log.info(f"Prepared dataset {entry.id}: {ds!r}")
    return _DATASETS[key]


def experiment_split(
    ds: LabeledDataset, entry: DatasetEntry, settings: RunSettings, seed: int
) -> FourWaySplit:
    """
    Four-way split of a dataset for one grid seed.

    With max_train_samples set, target_train, shadow_train and shadow_test
    are each reduced to that many samples; target_test keeps its size.
    """
    split = four_way_split(ds, settings.seed("split", entry.id, seed))
    cap = entry.max_train_samples
    if cap is None or cap >= len(split.target_train):
        return split

    def capped(part: LabeledDataset, role: str) -> LabeledDataset:
        return sample(part, cap, settings.seed("cap", entry.id, seed, role), name=part.name)

    return replace(
        split,
        target_train=capped(split.target_train, "target_train"),
        shadow_train=capped(split.shadow_train, "shadow_train"),
        shadow_test=capped(split.shadow_test, "shadow_test"),
    )


# Jobs


def _map_jobs(
    fn: Callable[[RunSettings, J], R], settings: RunSettings, jobs: Sequence[J]
) -> list[R]:
    if settings.jobs <= 1 or len(jobs) <= 1:
        return [fn(settings, job) for job in jobs]
    workers = min(settings.jobs, len(jobs))
    _log.info(f"Running {len(jobs)} jobs on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, [settings] * len(jobs), jobs))


def _record_path(settings: RunSettings, job: TargetJob) -> Path:
    return settings.out_dir / TARGET_DIR / f"{job.key}.json"


def run_train_job(settings: RunSettings, job: TargetJob) -> TargetRecord:
    """Train, checkpoint and score one target."""
    ds, complexity = load_dataset(job.dataset, settings)
    split = experiment_split(ds, job.dataset, settings, job.seed)
    arch = build_architecture(job.arch, ds.channels, ds.num_classes)
    cfg = settings.target_config(job)
    model = train(arch, split.target_train, cfg, settings.seed("init", *job.parts))

    checkpoint = Path(CHECKPOINT_DIR) / f"{job.key}.ckpt"
    save_checkpoint(model, settings.out_dir / checkpoint, dataset=job.dataset.id)
    record = TargetRecord(
        dataset=job.dataset.id,
        arch=job.arch,
        seed=job.seed,
        train_acc=accuracy(model, split.target_train),
        test_acc=accuracy(model, split.target_test),
        complexity=complexity,
        checkpoint=checkpoint.as_posix(),
    )
    atomic_write_text(_record_path(settings, job), record.model_dump_json(indent=2) + "\n")
    _log.info(f"Target {job.key}: train {record.train_acc:.4f}, test {record.test_acc:.4f}")
    return record


def _load_record(settings: RunSettings, job: TargetJob) -> TargetRecord:
    path = _record_path(settings, job)
    try:
        return TargetRecord.model_validate_json(read_bytes(path))
    except ValidationError as e:
        raise MLLeakIOError(f"Invalid target record {path}: {e}", path=path) from e


def _auxiliary_set(
    split: FourWaySplit, threat: ThreatModel, partial: LabeledDataset
) -> LabeledDataset:
    if threat.auxiliary == Auxiliary.PARTIAL:
        return partial
    name = f"{split.shadow_train.name}+test"
    return concatenate(split.shadow_train, split.shadow_test, name=name)


def run_cell(
    settings: RunSettings,
    job: TargetJob,
    record: TargetRecord,
    model: TrainedModel,
    split: FourWaySplit,
    threat: ThreatModel,
    attack: AttackKind,
) -> ExperimentCell:
    """Mount one attack under one threat model against one target."""
    cell = {
        "dataset": record.dataset,
        "arch": record.arch,
        "threat": threat.label,
        "attack": attack,
        "train_acc": record.train_acc,
        "test_acc": record.test_acc,
        "gap": record.gap,
        "complexity": record.complexity,
        "seed": record.seed,
    }
    if not is_applicable(attack, threat):
        _log.info(f"{job.key}: {attack.value} under {threat} {SKIPPED_INAPPLICABLE}")
        return ExperimentCell(**cell, status=CellStatus.SKIPPED, note=SKIPPED_INAPPLICABLE)
    if attack == AttackKind.ATTRIBUTE and not split.target_test.has_attributes:
        return ExperimentCell(**cell, status=CellStatus.SKIPPED, note=SKIPPED_NO_ATTRIBUTES)

    component = (*job.parts, threat.label, attack.value)
    seed = settings.seed("attack", *component)
    access = grant_access(model, threat)
    attack_cfg = attack_train_config(
        settings.attack_epochs, shuffle_seed=settings.seed("attack-shuffle", *component)
    )
    recipe = model.train_config.model_copy(
        update={"shuffle_seed": settings.seed("adversary-shuffle", *component)}
    )
    partial = partial_subset(
        split.target_train, settings.config.partial_fraction, settings.seed("partial", *job.parts)
    )
    partial_membership = attack == AttackKind.MEMBERSHIP and threat.auxiliary == Auxiliary.PARTIAL
    if partial_membership and len(unseen_members(split.target_train, partial)) == 0:
        return ExperimentCell(**cell, status=CellStatus.SKIPPED, note=SKIPPED_NO_UNSEEN_MEMBERS)
    extra: dict[str, float] = {}

    if attack == AttackKind.MEMBERSHIP:
        if threat.auxiliary == Auxiliary.SHADOW:
            attack_model = mia_train_shadow(
                split, model.architecture, threat, recipe, attack_cfg=attack_cfg, seed=seed
            )
        else:
            attack_model = mia_train_partial(
                partial, split.shadow_test, access, attack_cfg=attack_cfg, seed=seed
            )
        exclude = partial if partial_membership else None
        metric = mia_evaluate(
            attack_model, access, split.target_train, split.target_test, exclude=exclude
        )
    elif attack == AttackKind.ATTRIBUTE:
        aux = _auxiliary_set(split, threat, partial)
        metric = attribute_attack(access, aux, split.target_test, attack_cfg=attack_cfg, seed=seed)
        extra["baseline"] = majority_baseline(split.target_test)
    else:
        aux = _auxiliary_set(split, threat, partial)
        surrogate = steal_model(access, aux, model.architecture, recipe, seed=seed)
        metric = agreement(access, surrogate, split.target_test)
        extra["surrogate_test_acc"] = accuracy(surrogate, split.target_test)

    _log.info(f"{job.key}: {attack.value} under {threat} -> {metric:.4f}")
    return ExperimentCell(**cell, metric=metric, extra=extra)


def run_attack_job(settings: RunSettings, job: TargetJob) -> list[ExperimentCell]:
    """Every requested (threat, attack) pair against one target."""
    record = _load_record(settings, job)
    model = load_checkpoint(settings.out_dir / record.checkpoint)
    ds, _ = load_dataset(job.dataset, settings)
    split = experiment_split(ds, job.dataset, settings, job.seed)
    return [
        run_cell(settings, job, record, model, split, threat, attack)
        for threat in settings.config.threats()
        for attack in settings.config.attacks
    ]


def cell_filename(cell: ExperimentCell) -> str:
    threat = cell.threat.replace("/", "-")
    return f"{cell.dataset}__{cell.arch}__seed{cell.seed}__{threat}__{cell.attack.value}.json"


# Commands


def cmd_train_target(settings: RunSettings) -> list[TargetRecord]:
    """
    Train and checkpoint every (dataset, architecture, seed) target.

    Raises:
        MLLeakIOError: If a dataset file cannot be read
        MLLeakTrainingError: If training diverges
    """
    jobs = target_jobs(settings.config)
    records = _map_jobs(run_train_job, settings, jobs)
    _log.info(f"Trained {len(records)} targets into {settings.out_dir}")
    return records


def cmd_attack(settings: RunSettings) -> list[ExperimentCell]:
    """
    Run the attack grid against existing checkpoints and write one file per cell.

    Inapplicable (threat, attack) pairs are recorded as skipped cells.
    Cell files from an earlier study in the same directory are removed, so
    the report covers exactly this grid.

    Raises:
        MLLeakIOError: If a target record or checkpoint is missing
        MLLeakCheckpointError: If a checkpoint is corrupt
    """
    jobs = target_jobs(settings.config)
    for job in jobs:
        path = _record_path(settings, job)
        if not path.exists():
            raise MLLeakIOError(
                f"No trained target for {job.key}; run train-target first", path=path
            )
    cells = [cell for batch in _map_jobs(run_attack_job, settings, jobs) for cell in batch]
    _clear_cells(settings.out_dir / CELL_DIR)
    for cell in cells:
        path = settings.out_dir / CELL_DIR / cell_filename(cell)
        atomic_write_text(path, cell.model_dump_json(indent=2) + "\n")
    _log.info(f"Wrote {len(cells)} cells into {settings.out_dir / CELL_DIR}")
    return cells


def _clear_cells(cell_dir: Path) -> None:
    """Drop cell files left by an earlier study in the same output directory."""
    stale = sorted(cell_dir.glob("*.json"))
    for path in stale:
        try:
            path.unlink()
        except OSError as e:
            raise MLLeakIOError(f"Cannot remove stale cell file {path}: {e}", path=path) from e
    if stale:
        _log.info(f"Removed {len(stale)} stale cell files from {cell_dir}")


def load_cells(out_dir: str | Path) -> list[ExperimentCell]:
    """
    Read every cell file of an output directory, in file-name order.

    Raises:
        MLLeakEmptyInputError: If there are no cell files
        MLLeakIOError: If a cell file is unreadable or invalid
    """
    files = sorted((Path(out_dir) / CELL_DIR).glob("*.json"))
    if not files:
        raise MLLeakEmptyInputError(f"No cell files under {Path(out_dir) / CELL_DIR}")
    cells = []
    for path in files:
        try:
            cells.append(ExperimentCell.model_validate_json(read_bytes(path)))
        except ValidationError as e:
            raise MLLeakIOError(f"Invalid cell file {path}: {e}", path=path) from e
    return cells


def cmd_report(out_dir: str | Path) -> RiskReport:
    """
    Build the report from the cell files and write report.csv and summary.json.

    Raises:
        MLLeakEmptyInputError: If there are no cell files
    """
    out_dir = Path(out_dir)
    report = build_report(load_cells(out_dir))
    write_csv(report, out_dir / CSV_NAME)
    write_summary(report, out_dir / SUMMARY_NAME)
    _log.info(f"Wrote {out_dir / CSV_NAME} and {out_dir / SUMMARY_NAME}")
    return report


def cmd_full_suite(settings: RunSettings) -> RiskReport:
    """train-target, attack and report in sequence."""
    cmd_train_target(settings)
    cmd_attack(settings)
    return cmd_report(settings.out_dir)

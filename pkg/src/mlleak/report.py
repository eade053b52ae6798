"""
Metrics and the risk report.

build_report() groups experiment cells into four tables:

- threat_summary: attack performance per threat model, with the attacker's
  advantage over the baseline and a risk level
- complexity_series: attack metric per dataset, ordered by complexity
- gap_series: attack metric against the target's overfitting gap
- attack_correlations: correlation between attacks across target models

Correlations with fewer than three points are reported as
"insufficient-data" and those with a zero-variance axis as "degenerate".
"""

import io
import logging
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .base import atomic_write_text, handle_numeric_errors
from .data import LabeledDataset
from .exceptions import (
    MLLeakConfigurationError,
    MLLeakDegenerateInputError,
    MLLeakEmptyInputError,
    MLLeakInsufficientDataError,
)
from .schemas import (
    CSV_COLUMNS,
    DEGENERATE,
    INSUFFICIENT_DATA,
    AttackKind,
    CellStatus,
    ComplexityRow,
    Correlation,
    ExperimentCell,
    GapRow,
    RiskLevel,
    RiskReport,
    ThreatSummaryRow,
)
from .zoo import TrainedModel, accuracy

_log = logging.getLogger(__name__)

MEMBERSHIP_BASELINE = 0.5
# advantage thresholds: below each bound the level applies
RISK_BOUNDS: tuple[tuple[float, RiskLevel], ...] = (
    (0.05, RiskLevel.LOW),
    (0.15, RiskLevel.MEDIUM),
    (0.30, RiskLevel.HIGH),
)
ATTACK_PAIRS: tuple[tuple[AttackKind, AttackKind], ...] = (
    (AttackKind.MEMBERSHIP, AttackKind.STEALING),
    (AttackKind.MEMBERSHIP, AttackKind.ATTRIBUTE),
    (AttackKind.ATTRIBUTE, AttackKind.STEALING),
)


def overfitting_gap(
    model: TrainedModel, target_train: LabeledDataset, target_test: LabeledDataset
) -> float:
    """Train accuracy minus test accuracy."""
    return accuracy(model, target_train) - accuracy(model, target_test)


@handle_numeric_errors
def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Sample Pearson correlation.

    Args:
        xs: First variable (at least 3 values)
        ys: Second variable, same length

    Returns:
        r in [-1, 1]

    Raises:
        MLLeakConfigurationError: If the lengths differ
        MLLeakInsufficientDataError: If fewer than 3 points are given
        MLLeakDegenerateInputError: If either variable has zero variance
        MLLeakNumericError: If an input is not finite

    Example:
        >>> pearson([1, 2, 3], [2, 4, 6])
        1.0
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise MLLeakConfigurationError(
            f"pearson needs two equal-length sequences, got {x.shape} and {y.shape}"
        )
    if len(x) < 3:
        raise MLLeakInsufficientDataError(f"pearson needs at least 3 points, got {len(x)}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise MLLeakDegenerateInputError("pearson is undefined for a zero-variance input")
    dx, dy = x - x.mean(), y - y.mean()
    r = float(np.sum(dx * dy) / np.sqrt(np.sum(dx * dx) * np.sum(dy * dy)))
    return min(1.0, max(-1.0, r))


def correlation(x: str, y: str, xs: Sequence[float], ys: Sequence[float]) -> Correlation:
    """pearson() as a report entry, recording why a value is missing."""
    try:
        return Correlation(x=x, y=y, points=len(xs), value=pearson(xs, ys))
    except MLLeakInsufficientDataError:
        return Correlation(x=x, y=y, points=len(xs), status=INSUFFICIENT_DATA)
    except MLLeakDegenerateInputError:
        return Correlation(x=x, y=y, points=len(xs), status=DEGENERATE)


def risk_level(advantage: float) -> RiskLevel:
    for bound, level in RISK_BOUNDS:
        if advantage < bound:
            return level
    return RiskLevel.CRITICAL


def _frame(cells: Sequence[ExperimentCell]) -> pd.DataFrame:
    rows = [
        {**cell.csv_row(), "baseline": cell.extra.get("baseline", np.nan)} for cell in cells
    ]
    return pd.DataFrame(rows, columns=[*CSV_COLUMNS, "baseline"])


def _threat_summary(df: pd.DataFrame) -> list[ThreatSummaryRow]:
    grouped = df.groupby(["attack", "threat"], sort=True).agg(
        cells=("metric", "size"),
        median=("metric", "median"),
        mean=("metric", "mean"),
        baseline=("baseline", "mean"),
    )
    rows = []
    for (attack, threat), row in grouped.iterrows():
        kind = AttackKind(attack)
        baseline: float | None
        if kind == AttackKind.MEMBERSHIP:
            baseline = MEMBERSHIP_BASELINE
        elif kind == AttackKind.ATTRIBUTE and not np.isnan(row["baseline"]):
            baseline = float(row["baseline"])
        else:
            baseline = None
        advantage = None if baseline is None else float(row["median"]) - baseline
        rows.append(
            ThreatSummaryRow(
                attack=kind,
                threat=threat,
                cells=int(row["cells"]),
                median=float(row["median"]),
                mean=float(row["mean"]),
                baseline=baseline,
                advantage=advantage,
                risk_level=None if advantage is None else risk_level(advantage),
            )
        )
    return rows


def _complexity_tables(df: pd.DataFrame) -> tuple[list[ComplexityRow], list[Correlation]]:
    grouped = df.groupby(["attack", "dataset"], sort=True).agg(
        complexity=("complexity", "first"),
        cells=("metric", "size"),
        median=("metric", "median"),
    )
    grouped = grouped.reset_index().sort_values(["attack", "complexity", "dataset"])
    series = [
        ComplexityRow(
            attack=AttackKind(row.attack),
            dataset=row.dataset,
            complexity=float(row.complexity),
            cells=int(row.cells),
            median=float(row.median),
        )
        for row in grouped.itertuples(index=False)
    ]
    correlations = [
        correlation(
            "complexity",
            f"{attack}.metric",
            group["complexity"].tolist(),
            group["metric"].tolist(),
        )
        for attack, group in df.groupby("attack", sort=True)
    ]
    return series, correlations


def _gap_tables(df: pd.DataFrame) -> tuple[list[GapRow], list[Correlation]]:
    series = [
        GapRow(
            attack=AttackKind(row.attack),
            threat=row.threat,
            dataset=row.dataset,
            arch=row.arch,
            seed=int(row.seed),
            gap=float(row.gap),
            metric=float(row.metric),
        )
        for row in df.itertuples(index=False)
    ]
    correlations = [
        correlation("gap", f"{attack}.metric", group["gap"].tolist(), group["metric"].tolist())
        for attack, group in df.groupby("attack", sort=True)
    ]
    return series, correlations


def target_medians(df: pd.DataFrame) -> pd.DataFrame:
    """
    One value per (dataset, arch) and attack: the median over seeds of the
    per-seed median over threat models.
    """
    per_seed = df.groupby(["dataset", "arch", "seed", "attack"], sort=True)["metric"].median()
    per_target = per_seed.groupby(level=["dataset", "arch", "attack"]).median()
    return per_target.unstack("attack")


def _attack_correlations(df: pd.DataFrame) -> list[Correlation]:
    medians = target_medians(df) if len(df) else pd.DataFrame()
    entries = []
    for a, b in ATTACK_PAIRS:
        if a.value in medians.columns and b.value in medians.columns:
            paired = medians[[a.value, b.value]].dropna()
            xs, ys = paired[a.value].tolist(), paired[b.value].tolist()
        else:
            xs, ys = [], []
        entries.append(correlation(f"{a.value}.metric", f"{b.value}.metric", xs, ys))
    return entries


def _sort_key(cell: ExperimentCell) -> tuple[str, str, int, str, str]:
    return (cell.dataset, cell.arch, cell.seed, cell.threat, cell.attack.value)


def build_report(cells: Iterable[ExperimentCell]) -> RiskReport:
    """
    Aggregate experiment cells into a RiskReport.

    Completed cells feed every table; skipped cells are only listed.

    Raises:
        MLLeakEmptyInputError: If no cells are given

    Example:
        >>> report = build_report(cells)
        >>> [c.status for c in report.attack_correlations]
        ['ok', 'insufficient-data', 'insufficient-data']
    """
    ordered = sorted(cells, key=_sort_key)
    if not ordered:
        raise MLLeakEmptyInputError("cannot build a report without experiment cells")
    done = [c for c in ordered if c.status == CellStatus.OK]
    skipped = [c for c in ordered if c.status != CellStatus.OK]
    df = _frame(done)

    if done:
        summary = _threat_summary(df)
        complexity_series, complexity_corr = _complexity_tables(df)
        gap_series, gap_corr = _gap_tables(df)
    else:
        summary, complexity_series, complexity_corr, gap_series, gap_corr = [], [], [], [], []
    report = RiskReport(
        cells=tuple(done),
        skipped=tuple(skipped),
        threat_summary=tuple(summary),
        complexity_series=tuple(complexity_series),
        complexity_correlations=tuple(complexity_corr),
        gap_series=tuple(gap_series),
        gap_correlations=tuple(gap_corr),
        attack_correlations=tuple(_attack_correlations(df)),
    )
    _log.info(f"Built report from {len(done)} cells ({len(skipped)} skipped)")
    return report


def report_csv(report: RiskReport) -> str:
    """CSV text of the completed cells with the fixed column order."""
    frame = pd.DataFrame([cell.csv_row() for cell in report.cells], columns=list(CSV_COLUMNS))
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_csv(report: RiskReport, path: str | Path) -> Path:
    """Write report_csv() atomically."""
    return atomic_write_text(path, report_csv(report))


def write_summary(report: RiskReport, path: str | Path) -> Path:
    """Write the full report (cells and all four tables) as indented JSON, atomically."""
    return atomic_write_text(path, report.model_dump_json(indent=2) + "\n")


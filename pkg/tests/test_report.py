"""Tests for metrics and the risk report."""

import random

import numpy as np
import pytest

from mlleak.exceptions import (
    MLLeakConfigurationError,
    MLLeakDegenerateInputError,
    MLLeakEmptyInputError,
    MLLeakInsufficientDataError,
    MLLeakNumericError,
)
from mlleak.report import (
    build_report,
    correlation,
    overfitting_gap,
    pearson,
    report_csv,
    risk_level,
    write_csv,
    write_summary,
)
from mlleak.schemas import (
    CSV_COLUMNS,
    AttackKind,
    CellStatus,
    ExperimentCell,
    RiskLevel,
    RiskReport,
)
from mlleak.zoo import accuracy

# dataset -> (complexity, train_acc, test_acc)
TARGETS = {
    "a": (0.5, 0.9, 0.8),
    "b": (1.5, 1.0, 0.6),
    "c": (2.5, 0.95, 0.7),
}
MEMBERSHIP = {"a": (0.55, 0.57), "b": (0.8, 0.82), "c": (0.7, 0.72)}
STEALING = {"a": 0.9, "b": 0.6, "c": 0.7}
ATTRIBUTE = {"a": 0.6, "b": 0.65, "c": 0.7}


def make_cell(
    dataset: str,
    threat: str,
    attack: AttackKind,
    metric: float | None,
    *,
    seed: int = 0,
    status: CellStatus = CellStatus.OK,
    extra: dict[str, float] | None = None,
) -> ExperimentCell:
    complexity, train_acc, test_acc = TARGETS[dataset]
    return ExperimentCell(
        dataset=dataset,
        arch="small_mlp",
        threat=threat,
        attack=attack,
        metric=metric,
        train_acc=train_acc,
        test_acc=test_acc,
        gap=train_acc - test_acc,
        complexity=complexity,
        seed=seed,
        status=status,
        extra=extra or {},
    )


@pytest.fixture
def cells() -> list[ExperimentCell]:
    """Three targets with every attack, plus one skipped cell."""
    out = []
    for ds in TARGETS:
        black, white = MEMBERSHIP[ds]
        out.append(make_cell(ds, "black_box/shadow", AttackKind.MEMBERSHIP, black))
        out.append(make_cell(ds, "white_box/shadow", AttackKind.MEMBERSHIP, white))
        out.append(make_cell(ds, "black_box/shadow", AttackKind.STEALING, STEALING[ds]))
        out.append(
            make_cell(
                ds,
                "white_box/shadow",
                AttackKind.ATTRIBUTE,
                ATTRIBUTE[ds],
                extra={"baseline": 0.55},
            )
        )
    out.append(
        make_cell(
            "a",
            "black_box/shadow",
            AttackKind.ATTRIBUTE,
            None,
            status=CellStatus.SKIPPED,
        )
    )
    return out


class TestPearson:
    """Tests for pearson function."""

    def test_perfect_correlation(self):
        """Test linear data correlates perfectly."""
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_matches_numpy(self):
        """Test agreement with numpy's correlation matrix."""
        rng = np.random.default_rng(0)
        xs, ys = rng.random(10), rng.random(10)
        assert pearson(xs, ys) == pytest.approx(np.corrcoef(xs, ys)[0, 1])

    def test_symmetric(self):
        """Test swapping the variables keeps the value."""
        rng = np.random.default_rng(1)
        xs, ys = rng.normal(size=12), rng.normal(size=12)
        assert abs(pearson(xs, ys) - pearson(ys, xs)) <= 1e-12

    def test_invariant_under_positive_affine_maps(self):
        """Test a*x + b with a > 0 leaves the value unchanged."""
        rng = np.random.default_rng(2)
        xs, ys = rng.normal(size=12), rng.normal(size=12)
        base = pearson(xs, ys)
        assert abs(pearson(3.7 * xs - 12.0, ys) - base) <= 1e-9
        assert abs(pearson(xs, 0.25 * ys + 4.0) - base) <= 1e-9

    def test_non_finite_input(self):
        """Test an infinite value is a numeric error, not a NaN result."""
        with pytest.raises(MLLeakNumericError):
            pearson([np.inf, 1.0, 2.0], [1.0, 2.0, 4.0])

    def test_insufficient_data(self):
        """Test two points are not enough."""
        with pytest.raises(MLLeakInsufficientDataError):
            pearson([1, 2], [1, 2])

    def test_degenerate(self):
        """Test a constant axis has no correlation."""
        with pytest.raises(MLLeakDegenerateInputError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        """Test both variables need the same length."""
        with pytest.raises(MLLeakConfigurationError):
            pearson([1, 2, 3], [1, 2])

    def test_correlation_statuses(self):
        """Test report entries record why a value is missing."""
        assert correlation("x", "y", [1, 2, 3], [1, 2, 4]).status == "ok"
        short = correlation("x", "y", [1, 2], [1, 2])
        assert short.status == "insufficient-data"
        assert short.value is None
        assert short.points == 2
        assert correlation("x", "y", [1, 2, 3], [5, 5, 5]).status == "degenerate"


class TestRiskLevel:
    """Tests for risk_level function."""

    @pytest.mark.parametrize(
        "advantage,expected",
        [
            (-0.1, RiskLevel.LOW),
            (0.0, RiskLevel.LOW),
            (0.049, RiskLevel.LOW),
            (0.05, RiskLevel.MEDIUM),
            (0.149, RiskLevel.MEDIUM),
            (0.15, RiskLevel.HIGH),
            (0.299, RiskLevel.HIGH),
            (0.30, RiskLevel.CRITICAL),
            (0.5, RiskLevel.CRITICAL),
        ],
    )
    def test_bounds(self, advantage, expected):
        """Test each bound starts the next level."""
        assert risk_level(advantage) == expected


class TestOverfittingGap:
    """Tests for overfitting_gap function."""

    def test_train_minus_test(self, small_target, small_split):
        """Test the gap is the accuracy difference."""
        gap = overfitting_gap(small_target, small_split.target_train, small_split.target_test)
        expected = accuracy(small_target, small_split.target_train) - accuracy(
            small_target, small_split.target_test
        )
        assert gap == expected
        assert -1.0 <= gap <= 1.0


class TestBuildReport:
    """Tests for build_report function."""

    def test_empty_input(self):
        """Test a report needs at least one cell."""
        with pytest.raises(MLLeakEmptyInputError):
            build_report([])

    def test_skipped_cells_listed_separately(self, cells):
        """Test skipped cells are kept out of the tables."""
        report = build_report(cells)
        assert len(report.cells) == 12
        assert len(report.skipped) == 1
        assert report.skipped[0].note == ""
        assert all(c.status == CellStatus.OK for c in report.cells)

    def test_threat_summary(self, cells):
        """Test medians, baselines and risk levels per attack and threat."""
        rows = {(r.attack, r.threat): r for r in build_report(cells).threat_summary}
        assert list(rows) == [
            (AttackKind.ATTRIBUTE, "white_box/shadow"),
            (AttackKind.MEMBERSHIP, "black_box/shadow"),
            (AttackKind.MEMBERSHIP, "white_box/shadow"),
            (AttackKind.STEALING, "black_box/shadow"),
        ]

        black = rows[(AttackKind.MEMBERSHIP, "black_box/shadow")]
        assert black.cells == 3
        assert black.median == pytest.approx(0.7)
        assert black.baseline == 0.5
        assert black.advantage == pytest.approx(0.2)
        assert black.risk_level == RiskLevel.HIGH

        attribute = rows[(AttackKind.ATTRIBUTE, "white_box/shadow")]
        assert attribute.baseline == pytest.approx(0.55)
        assert attribute.advantage == pytest.approx(0.1)
        assert attribute.risk_level == RiskLevel.MEDIUM

        stealing = rows[(AttackKind.STEALING, "black_box/shadow")]
        assert stealing.baseline is None
        assert stealing.risk_level is None

    def test_complexity_series_ordered(self, cells):
        """Test datasets are listed from simplest to most complex per attack."""
        report = build_report(cells)
        membership = [r for r in report.complexity_series if r.attack == AttackKind.MEMBERSHIP]
        assert [r.dataset for r in membership] == ["a", "b", "c"]
        assert membership[0].median == pytest.approx(0.56)
        assert membership[0].cells == 2
        statuses = {c.y: (c.status, c.points) for c in report.complexity_correlations}
        assert statuses["membership.metric"] == ("ok", 6)

    def test_gap_series(self, cells):
        """Test one gap row per completed cell and one correlation per attack."""
        report = build_report(cells)
        assert len(report.gap_series) == 12
        row = next(r for r in report.gap_series if r.dataset == "b")
        assert row.gap == pytest.approx(0.4)
        assert [c.y for c in report.gap_correlations] == [
            "attribute.metric",
            "membership.metric",
            "stealing.metric",
        ]

    def test_attack_correlations(self, cells):
        """Test attacks are correlated across per-target medians."""
        entries = build_report(cells).attack_correlations
        assert [(c.x, c.y) for c in entries] == [
            ("membership.metric", "stealing.metric"),
            ("membership.metric", "attribute.metric"),
            ("attribute.metric", "stealing.metric"),
        ]
        membership = [0.56, 0.81, 0.71]
        stealing = [STEALING[d] for d in TARGETS]
        assert entries[0].status == "ok"
        assert entries[0].points == 3
        assert entries[0].value == pytest.approx(pearson(membership, stealing))

    def test_single_target_correlations_insufficient(self, cells):
        """Test one target model cannot support an attack correlation."""
        report = build_report([c for c in cells if c.dataset == "a"])
        assert [c.status for c in report.attack_correlations] == ["insufficient-data"] * 3

    def test_degenerate_complexity(self):
        """Test one dataset under four threats has no complexity correlation."""
        threats = ["black_box/partial", "black_box/shadow", "white_box/partial", "white_box/shadow"]
        four = [
            make_cell("a", threat, AttackKind.MEMBERSHIP, 0.5 + i / 10)
            for i, threat in enumerate(threats)
        ]
        report = build_report(four)
        assert report.complexity_correlations[0].status == "degenerate"

    def test_only_skipped_cells(self):
        """Test a report of skipped cells has empty tables."""
        skipped = make_cell(
            "a", "black_box/shadow", AttackKind.ATTRIBUTE, None, status=CellStatus.SKIPPED
        )
        report = build_report([skipped])
        assert report.cells == ()
        assert report.threat_summary == ()
        assert [c.status for c in report.attack_correlations] == ["insufficient-data"] * 3

    def test_order_independent(self, cells):
        """Test the report does not depend on the input order."""
        shuffled = list(cells)
        random.Random(3).shuffle(shuffled)
        assert build_report(shuffled) == build_report(cells)


class TestOutputs:
    """Tests for CSV and summary output."""

    def test_csv_header_and_rows(self, cells):
        """Test the fixed column order and one row per completed cell."""
        lines = report_csv(build_report(cells)).splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 13
        assert lines[1].startswith("a,small_mlp,black_box/shadow,membership,0.55,")

    def test_csv_byte_identical(self, cells, tmp_path):
        """Test equal inputs write identical files."""
        shuffled = list(cells)
        random.Random(1).shuffle(shuffled)
        first = write_csv(build_report(cells), tmp_path / "one.csv")
        second = write_csv(build_report(shuffled), tmp_path / "two.csv")
        assert first.read_bytes() == second.read_bytes()

    def test_summary_round_trip(self, cells, tmp_path):
        """Test the summary parses back into the same report."""
        report = build_report(cells)
        path = write_summary(report, tmp_path / "out" / "summary.json")
        assert RiskReport.model_validate_json(path.read_text()) == report

"""Tests for aggregated results."""

import math

import pytest

from graph_dual_mixup.results import RESULT_FIELDS, RunRecord, RunResult, content_digest


def make_result(accuracies, arm="GDM-ACC"):
    records = [
        RunRecord(arm=arm, fold=k // 3, repeat=k % 3, seed=k, accuracy=acc, train_size=20, test_size=10, generated=60)
        for k, acc in enumerate(accuracies)
    ]
    return RunResult(arm=arm, dataset="toy", folds=2, repeats=3, records=records)


def test_mean_and_population_std():
    """Test statistics are recomputed from the per-run accuracies."""
    result = make_result([0.5, 0.7, 0.6, 0.6, 0.5, 0.7])
    assert result.mean == pytest.approx(0.6)
    assert result.std == pytest.approx(math.sqrt(0.04 / 6))


def test_empty_result_is_nan():
    """Test no runs give nan statistics."""
    result = make_result([])
    assert math.isnan(result.mean)
    assert math.isnan(result.std)


def test_rows_follow_result_fields():
    """Test each row carries exactly the CSV columns."""
    rows = make_result([0.5]).rows()
    assert list(rows[0]) == RESULT_FIELDS
    assert rows[0]["generated"] == 60


def test_summary_and_banner():
    """Test the summary copies statistics and formats percentages."""
    summary = make_result([0.5, 0.75]).summary({"seed": 0})
    assert summary.runs == 2
    assert summary.accuracies == [0.5, 0.75]
    assert summary.config == {"seed": 0}
    assert summary.format_banner_line() == "GDM-ACC | folds 2 x repeats 3 | acc 62.50 (12.50)"


def test_digest_is_stable_and_content_sensitive():
    """Test equal results share a digest and any accuracy change alters it."""
    first = make_result([0.5, 0.75])
    assert first.digest == make_result([0.5, 0.75]).digest
    assert first.digest.startswith("sha256:")
    assert first.digest != make_result([0.5, 0.76]).digest

    first.provenance.append({"position": 0, "lam": 0.5})
    assert first.digest != make_result([0.5, 0.75]).digest


def test_content_digest_ignores_key_order():
    """Test dictionaries hash by content, not insertion order."""
    assert content_digest({"a": 1, "b": 2}) == content_digest({"b": 2, "a": 1})

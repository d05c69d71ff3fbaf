"""Per-run records, aggregated results and the summary written next to them."""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from pydantic import BaseModel

from .storage import to_jsonable

RESULT_FIELDS = ["arm", "fold", "repeat", "seed", "accuracy", "train_size", "test_size", "generated"]


def content_digest(*payloads: Any) -> str:
    """SHA-256 over the canonical JSON form of `payloads`, as "sha256:<hex>"."""
    digest = hashlib.sha256()
    for payload in payloads:
        digest.update(json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":")).encode("utf-8"))
    return f"sha256:{digest.hexdigest()}"


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (fold, repeat) job."""

    arm: str
    fold: int
    repeat: int
    seed: int
    accuracy: float
    train_size: int
    test_size: int
    generated: int = 0

    def to_row(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class RunResult:
    """All runs of one experiment arm; mean and std are recomputed from `records`."""

    arm: str
    dataset: str
    folds: int
    repeats: int
    records: list[RunRecord] = field(default_factory=list)
    loss_curves: list[dict[str, Any]] = field(default_factory=list)
    provenance: list[dict[str, Any]] = field(default_factory=list)

    @property
    def accuracies(self) -> list[float]:
        return [record.accuracy for record in self.records]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.records else float("nan")

    @property
    def std(self) -> float:
        """Population standard deviation (ddof=0) over all runs."""
        return float(np.std(self.accuracies)) if self.records else float("nan")

    def rows(self) -> list[dict[str, Any]]:
        return [record.to_row() for record in self.records]

    @property
    def digest(self) -> str:
        return content_digest(self.rows(), self.provenance)

    def summary(self, config: dict[str, Any] | None = None) -> "RunSummary":
        return RunSummary(
            arm=self.arm,
            dataset=self.dataset,
            folds=self.folds,
            repeats=self.repeats,
            runs=len(self.records),
            mean_accuracy=self.mean,
            std_accuracy=self.std,
            accuracies=self.accuracies,
            content_digest=self.digest,
            config=config or {},
        )


class RunSummary(BaseModel):
    """Contents of summary.json.

    Attributes:
        arm: "GCN" for the baseline, "GDM-ACC"/"GDM-UNC"/"GDM-RAND" for augmentation
        dataset: Dataset label
        folds: Fold count
        repeats: Repeats per fold
        runs: Number of aggregated runs (folds x repeats)
        mean_accuracy: Mean test accuracy in [0, 1]
        std_accuracy: Population standard deviation of the test accuracy
        accuracies: Per-run accuracies in (fold, repeat) order
        content_digest: Digest of the result rows and provenance records
        config: Effective configuration
    """

    arm: str
    dataset: str
    folds: int
    repeats: int
    runs: int
    mean_accuracy: float
    std_accuracy: float
    accuracies: list[float]
    content_digest: str
    config: dict[str, Any] = {}

    def format_banner_line(self) -> str:
        """One-line human summary, accuracies in percent."""
        return (
            f"{self.arm} | folds {self.folds} x repeats {self.repeats} | "
            f"acc {100 * self.mean_accuracy:.2f} ({100 * self.std_accuracy:.2f})"
        )


__all__ = ["RESULT_FIELDS", "RunRecord", "RunResult", "RunSummary", "content_digest"]

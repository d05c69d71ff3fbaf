"""
Experiment output persistence.

Writes every artifact of a run (per-run CSV rows, summary JSON, loss curves,
config snapshot, provenance records) with atomic temp-file-plus-rename writes,
so a crashed or interrupted run never leaves a half-written file behind.
"""

import contextlib
import csv
import json
import logging
import tempfile
from collections.abc import Callable, Iterable
from pathlib import Path
from typing import IO, Any

import numpy as np
import yaml

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.json"
LOSS_CURVES_FILE = "loss_curves.csv"
CONFIG_SNAPSHOT_FILE = "config.yaml"
PROVENANCE_FILE = "provenance.jsonl"


def atomic_write(
    target_file: Path,
    write_func: Callable[[IO[str]], None],
    prefix: str = "temp_",
    error_msg: str = "Failed to write file",
) -> None:
    """Write file atomically with Windows-safe file handle management.

    Args:
        target_file: Final destination file path
        write_func: Callable that takes file handle and writes content
        prefix: Prefix for temporary file name
        error_msg: Error message prefix for exceptions

    Raises:
        OSError: If file write or rename fails
    """
    target_file.parent.mkdir(parents=True, exist_ok=True)
    temp_path = None
    try:
        with tempfile.NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=target_file.parent,
            prefix=prefix,
            suffix=".tmp",
            delete=False,
            newline="",
        ) as tmp_file:
            temp_path = Path(tmp_file.name)
            write_func(tmp_file)
            tmp_file.flush()
        # Handle is closed here, so the rename also works on Windows
        temp_path.replace(target_file)

    except Exception as e:
        if temp_path:
            with contextlib.suppress(Exception):
                temp_path.unlink()
        raise OSError(f"{error_msg}: {e}") from e


def atomic_write_text(target_file: Path, text: str, error_msg: str = "Failed to write file") -> None:
    atomic_write(target_file, lambda f: f.write(text), prefix=f"{target_file.stem}_", error_msg=error_msg)


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, tuples and paths into JSON-serializable values.

    Args:
        value: Any value produced by the pipeline

    Returns:
        An equivalent value built from dict/list/str/int/float/bool/None
    """
    if value is None or isinstance(value, bool | int | float | str):
        return value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple | set | frozenset):
        return [to_jsonable(item) for item in value]
    if hasattr(value, "model_dump"):
        return to_jsonable(value.model_dump(mode="json"))
    raise TypeError(f"Cannot serialize value of type {type(value).__name__}")


def write_csv(target_file: Path, fieldnames: list[str], rows: Iterable[dict[str, Any]]) -> None:
    rows = list(rows)

    def write_rows(tmp_file):
        writer = csv.DictWriter(tmp_file, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: to_jsonable(value) for key, value in row.items()})

    atomic_write(target_file, write_rows, prefix=f"{target_file.stem}_", error_msg=f"Failed to save {target_file.name}")


def read_csv(source_file: Path) -> list[dict[str, str]]:
    with open(source_file, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def write_json(target_file: Path, payload: dict[str, Any]) -> None:
    def write_payload(tmp_file):
        json.dump(to_jsonable(payload), tmp_file, indent=2, sort_keys=True, ensure_ascii=False)
        tmp_file.write("\n")

    atomic_write(target_file, write_payload, prefix=f"{target_file.stem}_", error_msg=f"Failed to save {target_file.name}")


def write_jsonl(target_file: Path, records: Iterable[Any]) -> None:
    records = list(records)

    def write_records(tmp_file):
        for record in records:
            json.dump(to_jsonable(record), tmp_file, sort_keys=True, ensure_ascii=False)
            tmp_file.write("\n")

    atomic_write(target_file, write_records, prefix=f"{target_file.stem}_", error_msg=f"Failed to save {target_file.name}")


def read_jsonl(source_file: Path) -> list[dict[str, Any]]:
    records = []
    with open(source_file, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


class RunStore:
    """
    Owns the output directory of one experiment or augmentation run.

    Contract:
    - Inputs: rows, summaries and records produced by the pipeline
    - Outputs: results.csv, summary.json, loss_curves.csv, config.yaml, provenance.jsonl
    - Side Effects: Filesystem writes under out_dir (created on demand)
    - Errors: OSError for disk issues
    """

    def __init__(self, out_dir: Path | str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    @property
    def results_path(self) -> Path:
        return self.out_dir / RESULTS_FILE

    @property
    def summary_path(self) -> Path:
        return self.out_dir / SUMMARY_FILE

    @property
    def loss_curves_path(self) -> Path:
        return self.out_dir / LOSS_CURVES_FILE

    @property
    def provenance_path(self) -> Path:
        return self.out_dir / PROVENANCE_FILE

    def save_results(self, fieldnames: list[str], rows: Iterable[dict[str, Any]]) -> Path:
        write_csv(self.results_path, fieldnames, rows)
        logger.debug(f"Results saved to {self.results_path}")
        return self.results_path

    def save_summary(self, summary: dict[str, Any]) -> Path:
        write_json(self.summary_path, summary)
        logger.debug(f"Summary saved to {self.summary_path}")
        return self.summary_path

    def save_loss_curves(self, rows: Iterable[dict[str, Any]]) -> Path:
        write_csv(self.loss_curves_path, ["fold", "repeat", "stage", "epoch", "loss"], rows)
        return self.loss_curves_path

    def save_config_snapshot(self, config: dict[str, Any]) -> Path:
        """Save the effective configuration as YAML next to the results."""
        target = self.out_dir / CONFIG_SNAPSHOT_FILE

        def write_config(tmp_file):
            yaml.safe_dump(to_jsonable(config), tmp_file, default_flow_style=False, sort_keys=True)

        atomic_write(target, write_config, prefix="config_", error_msg="Failed to save config snapshot")
        return target

    def save_provenance(self, records: Iterable[Any]) -> Path:
        write_jsonl(self.provenance_path, records)
        return self.provenance_path

    def load_summary(self) -> dict[str, Any]:
        """Load summary.json.

        Raises:
            FileNotFoundError: If the run has not written a summary
        """
        with open(self.summary_path, encoding="utf-8") as f:
            return json.load(f)

    def load_results(self) -> list[dict[str, str]]:
        return read_csv(self.results_path)

    def load_provenance(self) -> list[dict[str, Any]]:
        return read_jsonl(self.provenance_path)


__all__ = [
    "RunStore",
    "atomic_write",
    "atomic_write_text",
    "to_jsonable",
    "write_csv",
    "read_csv",
    "write_json",
    "write_jsonl",
    "read_jsonl",
]

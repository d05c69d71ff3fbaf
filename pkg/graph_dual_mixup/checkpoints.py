"""
Model checkpoints.

A checkpoint is a versioned JSON document: model kind, architecture, and every
weight matrix with its shape header. Values are stored as float.hex strings so
a save/load round trip is bitwise exact.
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from .classifier import ClassifierModel
from .errors import CheckpointError
from .gsae import GsaeModel
from .storage import write_json

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "graph-dual-mixup-checkpoint"
CHECKPOINT_VERSION = 1

Model = ClassifierModel | GsaeModel


def _kind(model: Model) -> str:
    if isinstance(model, ClassifierModel):
        return "classifier"
    if isinstance(model, GsaeModel):
        return "gsae"
    raise CheckpointError(f"Cannot checkpoint object of type {type(model).__name__}")


def _encode_matrix(values: np.ndarray) -> dict[str, Any]:
    return {"shape": list(values.shape), "values": [float(v).hex() for v in values.ravel()]}


def _decode_matrix(name: str, entry: dict[str, Any]) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in entry["shape"])
        flat = np.array([float.fromhex(v) for v in entry["values"]], dtype=np.float64)
        return flat.reshape(shape)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"Malformed weights for {name}: {e}") from e


def save_checkpoint(model: Model, path: Path | str) -> Path:
    """Write `model` to `path` atomically.

    Raises:
        OSError: If the file cannot be written
    """
    path = Path(path)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": _kind(model),
        "architecture": model.architecture(),
        "parameters": {name: _encode_matrix(values) for name, values in model.state_dict().items()},
    }
    write_json(path, payload)
    logger.debug(f"Saved {payload['kind']} checkpoint to {path}")
    return path


def load_checkpoint(path: Path | str) -> Model:
    """Rebuild the model stored at `path`.

    Raises:
        CheckpointError: If the file is not a readable checkpoint of a supported version
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e

    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a graph-dual-mixup checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {payload.get('version')!r} in {path}")

    architecture = payload.get("architecture", {})
    kind = payload.get("kind")
    if kind not in ("classifier", "gsae"):
        raise CheckpointError(f"Unknown model kind {kind!r} in {path}")
    try:
        model: Model = ClassifierModel(**architecture) if kind == "classifier" else GsaeModel(**architecture)
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"Invalid architecture in {path}: {e}") from e

    state = {name: _decode_matrix(name, entry) for name, entry in payload.get("parameters", {}).items()}
    try:
        model.load_state_dict(state)
    except ValueError as e:
        raise CheckpointError(f"Checkpoint {path} does not match its architecture: {e}") from e
    return model


__all__ = ["CHECKPOINT_FORMAT", "CHECKPOINT_VERSION", "save_checkpoint", "load_checkpoint"]

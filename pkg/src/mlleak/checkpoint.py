"""
Model checkpoint container.

Layout:

    MLLEAK-CKPT v1\\n
    <one-line JSON header>\\n
    <parameter values as little-endian float64, in header order>

The header records the architecture descriptor, class count, seed, train
config, training history and each tensor's name and shape. Round trips are
bit-exact.
"""

import json
import logging
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from .base import atomic_write_bytes, read_bytes
from .engine import Parameters, Tensor
from .exceptions import MLLeakCheckpointError, MLLeakConfigurationError
from .schemas import Architecture, TrainConfig
from .zoo import EpochRecord, TrainedModel, init_params

_log = logging.getLogger(__name__)

MAGIC = b"MLLEAK-CKPT"
FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")


class TensorEntry(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    shape: tuple[int, ...]


class CheckpointHeader(BaseModel):
    """JSON header of a checkpoint file."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    format_version: Literal[1] = 1
    architecture: Architecture
    num_classes: int
    seed: int
    train_config: TrainConfig
    dataset: str = ""
    tensors: tuple[TensorEntry, ...]
    history: tuple[tuple[int, float, float], ...] = ()


def encode_checkpoint(model: TrainedModel, dataset: str = "") -> bytes:
    """Serialize a trained model to checkpoint bytes."""
    header = CheckpointHeader(
        architecture=model.architecture,
        num_classes=model.num_classes,
        seed=model.seed,
        train_config=model.train_config,
        dataset=dataset,
        tensors=tuple(TensorEntry(name=name, shape=t.shape) for name, t in model.params.items()),
        history=tuple((r.epoch, r.loss, r.accuracy) for r in model.history),
    )
    body = b"".join(t.data.astype(_DTYPE, copy=False).tobytes() for t in model.params.values())
    return b"%s v%d\n%s\n%s" % (MAGIC, FORMAT_VERSION, header.model_dump_json().encode(), body)


def _split_lines(payload: bytes) -> tuple[bytes, bytes, bytes]:
    first = payload.find(b"\n")
    second = payload.find(b"\n", first + 1) if first >= 0 else -1
    if first < 0 or second < 0:
        raise MLLeakCheckpointError("checkpoint is missing its header lines")
    return payload[:first], payload[first + 1 : second], payload[second + 1 :]


def decode_checkpoint(payload: bytes) -> tuple[TrainedModel, str]:
    """
    Parse checkpoint bytes.

    Returns:
        The model and the dataset id recorded with it

    Raises:
        MLLeakCheckpointError: Unknown format, malformed header, or a
            parameter payload that disagrees with the header
    """
    magic_line, header_line, body = _split_lines(payload)
    tag, _, version = magic_line.partition(b" ")
    if tag != MAGIC:
        raise MLLeakCheckpointError("not an mlleak checkpoint")
    if version != b"v%d" % FORMAT_VERSION:
        raise MLLeakCheckpointError(
            f"unsupported checkpoint version {version.decode(errors='replace')!r}"
        )
    try:
        header = CheckpointHeader.model_validate_json(header_line)
    except (ValidationError, json.JSONDecodeError) as e:
        raise MLLeakCheckpointError(f"invalid checkpoint header: {e}") from e

    try:
        expected = init_params(header.architecture, 0)
    except MLLeakConfigurationError as e:
        raise MLLeakCheckpointError(f"checkpoint architecture is unusable: {e}") from e
    layout = [(entry.name, entry.shape) for entry in header.tensors]
    if layout != [(name, t.shape) for name, t in expected.items()]:
        raise MLLeakCheckpointError("tensor layout does not match the architecture")
    sizes = [int(np.prod(shape)) for _, shape in layout]
    if len(body) != sum(sizes) * _DTYPE.itemsize:
        raise MLLeakCheckpointError(
            f"parameter payload has {len(body)} bytes, header describes "
            f"{sum(sizes) * _DTYPE.itemsize}"
        )

    params = Parameters()
    offset = 0
    for (name, shape), size in zip(layout, sizes):
        values = np.frombuffer(body, dtype=_DTYPE, count=size, offset=offset * _DTYPE.itemsize)
        params.add(name, Tensor(values.astype(np.float64).reshape(shape)))
        offset += size
    model = TrainedModel(
        architecture=header.architecture,
        params=params.frozen(),
        num_classes=header.num_classes,
        history=tuple(EpochRecord(*row) for row in header.history),
        train_config=header.train_config,
        seed=header.seed,
    )
    return model, header.dataset


def save_checkpoint(model: TrainedModel, path: str | Path, dataset: str = "") -> Path:
    """
    Write a checkpoint atomically.

    Raises:
        MLLeakIOError: If the file cannot be written
    """
    path = atomic_write_bytes(path, encode_checkpoint(model, dataset))
    _log.info(f"Saved {model.name} checkpoint to {path}")
    return path


def load_checkpoint(path: str | Path) -> TrainedModel:
    """
    Read a checkpoint from disk.

    Raises:
        MLLeakIOError: If the file cannot be read
        MLLeakCheckpointError: If the file is corrupt
    """
    model, _ = decode_checkpoint(read_bytes(path))
    return model

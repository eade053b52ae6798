"""
IDX binary format ingestion.

The IDX format is big-endian:

    image file: magic 0x00000803, N, H, W (u32 each), then N*H*W pixel bytes
    label file: magic 0x00000801, N (u32 each), then N label bytes

Images are scaled to [0, 1], stored with one channel, and brought to 32x32:
smaller images are zero-padded symmetrically, larger ones are reduced by
nearest-neighbour index sampling.
"""

import gzip
import logging
import struct
import zlib
from pathlib import Path

import numpy as np

from .base import read_bytes
from .data import IMAGE_SIZE, LabeledDataset
from .exceptions import (
    MLLeakConsistencyError,
    MLLeakFormatError,
    MLLeakLengthError,
)

_log = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
_IMAGE_HEADER = struct.Struct(">IIII")
_LABEL_HEADER = struct.Struct(">II")


def _read_header(payload: bytes, header: struct.Struct, magic: int, kind: str) -> tuple[int, ...]:
    if len(payload) < header.size:
        raise MLLeakLengthError(
            f"{kind} file header needs {header.size} bytes, got {len(payload)}",
            expected=header.size,
            actual=len(payload),
        )
    fields = header.unpack_from(payload)
    if fields[0] != magic:
        raise MLLeakFormatError(
            f"{kind} file magic is 0x{fields[0]:08x}, expected 0x{magic:08x}",
            magic=fields[0],
        )
    return fields[1:]


def _read_body(payload: bytes, offset: int, count: int, kind: str) -> np.ndarray:
    expected = offset + count
    if len(payload) < expected:
        raise MLLeakLengthError(
            f"{kind} file is truncated: header promises {expected} bytes, got {len(payload)}",
            expected=expected,
            actual=len(payload),
        )
    if len(payload) > expected:
        raise MLLeakFormatError(f"{kind} file has {len(payload) - expected} trailing bytes")
    return np.frombuffer(payload, dtype=np.uint8, count=count, offset=offset)


def fit_to_size(images: np.ndarray, size: int = IMAGE_SIZE) -> np.ndarray:
    """
    Bring (N, C, H, W) images to (N, C, size, size).

    Each spatial axis shorter than `size` is zero-padded symmetrically (the
    extra pixel of an odd difference goes after); a longer axis is reduced by
    nearest-neighbour sampling of row/column indices.
    """
    for axis in (2, 3):
        extent = images.shape[axis]
        if extent < size:
            before = (size - extent) // 2
            pad = [(0, 0)] * images.ndim
            pad[axis] = (before, size - extent - before)
            images = np.pad(images, pad)
        elif extent > size:
            picks = ((np.arange(size) + 0.5) * extent / size).astype(np.int64)
            images = np.take(images, picks, axis=axis)
    return images


def parse_idx(
    image_bytes: bytes,
    label_bytes: bytes,
    *,
    name: str = "idx",
    num_classes: int | None = None,
) -> LabeledDataset:
    """
    Decode an IDX image/label file pair.

    Args:
        image_bytes: Image file contents
        label_bytes: Label file contents
        name: Dataset identifier
        num_classes: Class count (defaults to the largest label + 1)

    Returns:
        LabeledDataset with images of shape (N, 1, 32, 32)

    Raises:
        MLLeakFormatError: Bad magic number or trailing bytes
        MLLeakLengthError: Payload shorter than the header promises
        MLLeakConsistencyError: Image and label counts differ

    Example:
        >>> ds = parse_idx(open("t10k-images-idx3-ubyte", "rb").read(),
        ...                open("t10k-labels-idx1-ubyte", "rb").read())
        >>> ds.images.shape[1:]
        (1, 32, 32)
    """
    n_images, rows, cols = _read_header(image_bytes, _IMAGE_HEADER, IMAGE_MAGIC, "image")
    (n_labels,) = _read_header(label_bytes, _LABEL_HEADER, LABEL_MAGIC, "label")
    if n_images != n_labels:
        raise MLLeakConsistencyError(
            f"image file holds {n_images} samples but label file holds {n_labels}"
        )

    pixels = _read_body(image_bytes, _IMAGE_HEADER.size, n_images * rows * cols, "image")
    labels = _read_body(label_bytes, _LABEL_HEADER.size, n_labels, "label").astype(np.int64)

    images = pixels.reshape(n_images, 1, rows, cols).astype(np.float64) / 255.0
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if n_labels else 1
    _log.debug(f"Decoded {n_images} IDX samples of {rows}x{cols} for {name}")
    return LabeledDataset(
        images=fit_to_size(images),
        class_labels=labels,
        num_classes=num_classes,
        name=name,
    )


def _read_maybe_gzip(path: Path) -> bytes:
    payload = read_bytes(path)
    if path.suffix != ".gz":
        return payload
    try:
        return gzip.decompress(payload)
    except (OSError, EOFError, zlib.error) as e:
        raise MLLeakFormatError(f"{path} is not a valid gzip file: {e}") from e


def load_idx(
    image_path: str | Path,
    label_path: str | Path,
    *,
    name: str | None = None,
    num_classes: int | None = None,
) -> LabeledDataset:
    """
    Read and decode an IDX file pair from disk (``.gz`` files are gunzipped).

    Raises:
        MLLeakIOError: If either file cannot be read, naming its path
    """
    image_path, label_path = Path(image_path), Path(label_path)
    return parse_idx(
        _read_maybe_gzip(image_path),
        _read_maybe_gzip(label_path),
        name=name or image_path.name.split(".")[0],
        num_classes=num_classes,
    )

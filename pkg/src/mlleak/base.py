"""
Base utilities for mlleak.

Provides:
- Seed derivation from the root seed
- Numeric error mapping decorator
- Atomic file writes
"""

import functools
import hashlib
import logging
import os
import tempfile
from pathlib import Path
from typing import Callable, ParamSpec, TypeVar

import numpy as np

from .exceptions import MLLeakIOError, MLLeakNumericError

# Type variables for preserving function signatures in decorators
P = ParamSpec("P")
R = TypeVar("R")

_log = logging.getLogger(__name__)

_SEED_MASK = (1 << 63) - 1


def derive_seed(root: int, *components: str | int) -> int:
    """
    Derive a component seed from the root seed.

    The seed is the first 8 bytes of sha256("root:c1/c2/...") read as a
    big-endian integer and masked to 63 bits, so adding a component never
    changes the seeds of existing ones.

    Args:
        root: Root seed
        components: Component path (e.g. "target", "easy", "simple_cnn", 0)

    Returns:
        Non-negative 63-bit seed

    Example:
        >>> derive_seed(0, "split", "easy", 1) == derive_seed(0, "split", "easy", 1)
        True
    """
    key = f"{root}:{'/'.join(str(c) for c in components)}".encode()
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big") & _SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    """Create the numpy generator used for every seeded draw."""
    return np.random.default_rng(seed)


def handle_numeric_errors(
    func: Callable[P, R],
) -> Callable[P, R]:
    """
    Decorator turning numpy floating-point faults into MLLeakNumericError.

    Invalid operations (0/0, inf - inf) raise inside the wrapped call instead
    of silently producing NaN.

    Args:
        func: Function to wrap

    Returns:
        Wrapped function with numeric error mapping
    """

    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            with np.errstate(invalid="raise"):
                return func(*args, **kwargs)
        except FloatingPointError as e:
            _log.debug(f"Floating-point fault in {func.__qualname__}: {e}")
            raise MLLeakNumericError(
                f"Invalid floating-point operation in {func.__name__}: {e}"
            ) from e

    return wrapper


def atomic_write_bytes(path: str | Path, payload: bytes) -> Path:
    """
    Write a file so readers never observe a partial payload.

    Args:
        path: Destination file
        payload: Bytes to write

    Returns:
        The destination path

    Raises:
        MLLeakIOError: If the directory or file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise MLLeakIOError(f"Cannot write {path}: {e}", path=path) from e
    _log.debug(f"Wrote {len(payload)} bytes to {path}")
    return path


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Text variant of atomic_write_bytes (UTF-8, newline preserved)."""
    return atomic_write_bytes(path, text.encode("utf-8"))


def read_bytes(path: str | Path) -> bytes:
    """
    Read a whole file.

    Raises:
        MLLeakIOError: If the file is missing or unreadable, naming the path
    """
    path = Path(path)
    try:
        return path.read_bytes()
    except OSError as e:
        raise MLLeakIOError(f"Cannot read {path}: {e.strerror or e}", path=path) from e

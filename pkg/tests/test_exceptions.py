"""Tests for exception classes."""

import pickle

import pytest

from mlleak.exceptions import (
    MLLeakBalanceError,
    MLLeakCapabilityError,
    MLLeakCheckpointError,
    MLLeakConfigurationError,
    MLLeakConsistencyError,
    MLLeakDataError,
    MLLeakDataFormatError,
    MLLeakDegenerateInputError,
    MLLeakDimensionError,
    MLLeakDisjointnessError,
    MLLeakEmptyInputError,
    MLLeakError,
    MLLeakFormatError,
    MLLeakInsufficientDataError,
    MLLeakIOError,
    MLLeakLabelError,
    MLLeakLengthError,
    MLLeakNumericError,
    MLLeakOptimizerStateError,
    MLLeakSizeError,
    MLLeakTrainingError,
)


def test_base_exception():
    """Test base MLLeakError can be raised and caught."""
    with pytest.raises(MLLeakError):
        raise MLLeakError("Test error")


@pytest.mark.parametrize(
    "error_class",
    [
        MLLeakConfigurationError,
        MLLeakNumericError,
        MLLeakOptimizerStateError,
        MLLeakDataError,
        MLLeakConsistencyError,
        MLLeakSizeError,
        MLLeakBalanceError,
        MLLeakCheckpointError,
        MLLeakDegenerateInputError,
        MLLeakInsufficientDataError,
        MLLeakEmptyInputError,
    ],
)
def test_plain_errors_inherit_from_base(error_class):
    """Test every message-only error is an MLLeakError."""
    error = error_class("message")
    assert str(error) == "message"
    assert isinstance(error, MLLeakError)


def test_data_format_errors():
    """Test IDX decoding errors share the data-format base."""
    for error in (
        MLLeakFormatError("bad magic", magic=0x1234),
        MLLeakLengthError("short", expected=16, actual=8),
        MLLeakConsistencyError("counts differ"),
    ):
        assert isinstance(error, MLLeakDataFormatError)
        assert isinstance(error, MLLeakDataError)


def test_format_error_context():
    """Test format error keeps the offending magic number."""
    error = MLLeakFormatError("bad magic", magic=0x0803)
    assert error.magic == 0x0803


def test_length_error_context():
    """Test length error keeps expected and actual sizes."""
    error = MLLeakLengthError("short", expected=16, actual=8)
    assert error.expected == 16
    assert error.actual == 8


def test_label_error_is_index_error():
    """Test label errors can be caught as IndexError."""
    with pytest.raises(IndexError):
        raise MLLeakLabelError("label 7 out of range")


def test_dimension_error_context_and_repr():
    """Test dimension error carries shapes and shows them in repr."""
    error = MLLeakDimensionError("mismatch", expected=(3,), actual=(4,))
    assert error.expected == (3,)
    assert error.actual == (4,)
    assert repr(error) == "MLLeakDimensionError(message='mismatch', expected=(3,), actual=(4,))"


def test_training_error_epoch():
    """Test training error records the failing epoch."""
    error = MLLeakTrainingError("diverged", epoch=3)
    assert error.epoch == 3
    assert "epoch=3" in repr(error)


def test_capability_error_required():
    """Test capability error names the missing capability."""
    error = MLLeakCapabilityError("needs internals", required="white_box")
    assert error.required == "white_box"


def test_disjointness_error_overlap():
    """Test disjointness error counts shared samples."""
    error = MLLeakDisjointnessError("overlap", overlap=5)
    assert error.overlap == 5
    assert isinstance(error, MLLeakDataError)


def test_io_error_path():
    """Test I/O error stringifies and exposes the path."""
    error = MLLeakIOError("Cannot read", path="/tmp/missing.idx")
    assert error.path == "/tmp/missing.idx"
    assert repr(error) == "MLLeakIOError(message='Cannot read', path='/tmp/missing.idx')"


class TestPickling:
    """Errors raised in worker processes keep their context."""

    def test_io_error_round_trip(self):
        """Test keyword-only context survives pickling."""
        error = pickle.loads(pickle.dumps(MLLeakIOError("Cannot read", path="a/b")))
        assert isinstance(error, MLLeakIOError)
        assert str(error) == "Cannot read"
        assert error.path == "a/b"

    def test_training_error_round_trip(self):
        """Test the epoch attribute survives pickling."""
        error = pickle.loads(pickle.dumps(MLLeakTrainingError("diverged", epoch=4)))
        assert error.epoch == 4

    def test_label_error_round_trip(self):
        """Test multiple inheritance survives pickling."""
        error = pickle.loads(pickle.dumps(MLLeakLabelError("bad label")))
        assert isinstance(error, IndexError)
        assert str(error) == "bad label"

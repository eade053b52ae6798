"""Tests for IDX binary format ingestion."""

import gzip

import numpy as np
import pytest

from mlleak.exceptions import (
    MLLeakConsistencyError,
    MLLeakDataFormatError,
    MLLeakFormatError,
    MLLeakIOError,
    MLLeakLengthError,
)
from mlleak.idx import fit_to_size, load_idx, parse_idx

from .conftest import idx_image_bytes, idx_label_bytes


@pytest.fixture
def mnist_like():
    """Five 28x28 images with labels 0..4."""
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(5, 28, 28), dtype=np.uint8)
    labels = np.arange(5, dtype=np.uint8)
    return images, labels


class TestParseIdx:
    """Tests for parse_idx function."""

    def test_round_trip_pixels(self, mnist_like):
        """Test decoded pixels reproduce the bytes exactly inside the padding."""
        images, labels = mnist_like
        ds = parse_idx(idx_image_bytes(images), idx_label_bytes(labels))
        assert ds.images.shape == (5, 1, 32, 32)
        restored = np.rint(ds.images[:, 0, 2:30, 2:30] * 255.0).astype(np.uint8)
        assert np.array_equal(restored, images)
        assert np.array_equal(ds.class_labels, labels)

    def test_padding_is_zero(self, mnist_like):
        """Test the 2-pixel border around 28x28 images is zero."""
        images, labels = mnist_like
        ds = parse_idx(idx_image_bytes(images), idx_label_bytes(labels))
        border = ds.images.copy()
        border[:, :, 2:30, 2:30] = 0.0
        assert not border.any()

    def test_num_classes(self, mnist_like):
        """Test the class count defaults to max label + 1 and can be given."""
        images, labels = mnist_like
        assert parse_idx(idx_image_bytes(images), idx_label_bytes(labels)).num_classes == 5
        ds = parse_idx(idx_image_bytes(images), idx_label_bytes(labels), num_classes=10)
        assert ds.num_classes == 10

    def test_bad_image_magic(self, mnist_like):
        """Test a wrong magic number raises a format error carrying it."""
        images, labels = mnist_like
        with pytest.raises(MLLeakFormatError) as exc_info:
            parse_idx(idx_image_bytes(images, magic=0x801), idx_label_bytes(labels))
        assert exc_info.value.magic == 0x801

    def test_bad_label_magic(self, mnist_like):
        """Test the label file magic is checked too."""
        images, labels = mnist_like
        with pytest.raises(MLLeakFormatError):
            parse_idx(idx_image_bytes(images), idx_label_bytes(labels, magic=0x803))

    def test_truncated_images(self, mnist_like):
        """Test a short pixel payload raises a length error."""
        images, labels = mnist_like
        payload = idx_image_bytes(images)[:-1]
        with pytest.raises(MLLeakLengthError) as exc_info:
            parse_idx(payload, idx_label_bytes(labels))
        assert exc_info.value.expected == len(payload) + 1
        assert exc_info.value.actual == len(payload)

    def test_truncated_header(self):
        """Test a payload shorter than its header raises a length error."""
        with pytest.raises(MLLeakLengthError):
            parse_idx(b"\x00\x00\x08", idx_label_bytes(np.zeros(1, dtype=np.uint8)))

    def test_trailing_bytes(self, mnist_like):
        """Test extra bytes after the payload are rejected."""
        images, labels = mnist_like
        with pytest.raises(MLLeakFormatError):
            parse_idx(idx_image_bytes(images), idx_label_bytes(labels) + b"\x00")

    def test_count_mismatch(self, mnist_like):
        """Test image and label counts must agree."""
        images, labels = mnist_like
        with pytest.raises(MLLeakConsistencyError):
            parse_idx(idx_image_bytes(images), idx_label_bytes(labels[:4]))

    def test_errors_share_a_base(self, mnist_like):
        """Test every decoding error is a data-format error."""
        images, labels = mnist_like
        with pytest.raises(MLLeakDataFormatError):
            parse_idx(idx_image_bytes(images), idx_label_bytes(labels[:4]))


class TestFitToSize:
    """Tests for fit_to_size function."""

    def test_pads_odd_difference_after(self):
        """Test the extra padding pixel goes after the image."""
        out = fit_to_size(np.ones((1, 1, 29, 29)))
        assert out.shape == (1, 1, 32, 32)
        assert out[0, 0, 1, 1] == 1.0
        assert out[0, 0, 0, 0] == 0.0
        assert out[0, 0, 30, 30] == 0.0

    def test_downsamples_larger_images(self):
        """Test 64x64 images are reduced by index sampling."""
        images = np.arange(64 * 64, dtype=np.float64).reshape(1, 1, 64, 64)
        out = fit_to_size(images)
        assert out.shape == (1, 1, 32, 32)
        assert out[0, 0, 0, 0] == images[0, 0, 1, 1]

    def test_exact_size_unchanged(self):
        """Test 32x32 images pass through."""
        images = np.random.default_rng(0).random((2, 1, 32, 32))
        assert np.array_equal(fit_to_size(images), images)


class TestLoadIdx:
    """Tests for load_idx function."""

    def test_load_plain_files(self, tmp_path, mnist_like):
        """Test reading raw IDX files from disk."""
        images, labels = mnist_like
        (tmp_path / "train-images-idx3-ubyte").write_bytes(idx_image_bytes(images))
        (tmp_path / "train-labels-idx1-ubyte").write_bytes(idx_label_bytes(labels))
        ds = load_idx(tmp_path / "train-images-idx3-ubyte", tmp_path / "train-labels-idx1-ubyte")
        assert len(ds) == 5
        assert ds.name == "train-images-idx3-ubyte"

    def test_load_gzip_files(self, tmp_path, mnist_like):
        """Test .gz files are decompressed transparently."""
        images, labels = mnist_like
        (tmp_path / "img.idx.gz").write_bytes(gzip.compress(idx_image_bytes(images)))
        (tmp_path / "lbl.idx.gz").write_bytes(gzip.compress(idx_label_bytes(labels)))
        ds = load_idx(tmp_path / "img.idx.gz", tmp_path / "lbl.idx.gz", name="digits")
        assert ds.name == "digits"
        assert np.array_equal(ds.class_labels, labels)

    def test_bad_gzip(self, tmp_path, mnist_like):
        """Test corrupt gzip payloads raise a format error."""
        images, labels = mnist_like
        (tmp_path / "img.gz").write_bytes(b"not gzip at all")
        (tmp_path / "lbl").write_bytes(idx_label_bytes(labels))
        with pytest.raises(MLLeakFormatError):
            load_idx(tmp_path / "img.gz", tmp_path / "lbl")

    def test_missing_file_names_path(self, tmp_path, mnist_like):
        """Test a missing file raises an I/O error naming it."""
        images, _ = mnist_like
        (tmp_path / "img").write_bytes(idx_image_bytes(images))
        with pytest.raises(MLLeakIOError) as exc_info:
            load_idx(tmp_path / "img", tmp_path / "absent-labels")
        assert exc_info.value.path == str(tmp_path / "absent-labels")

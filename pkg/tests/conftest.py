"""
Shared pytest fixtures and configuration for all tests.
"""

import json
import struct
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from mlleak import config
from mlleak.data import IMAGE_SIZE, FourWaySplit, LabeledDataset, four_way_split
from mlleak.schemas import OptimizerConfig, ThreatModel, TrainConfig
from mlleak.zoo import TrainedModel, small_mlp, train


@pytest.fixture(autouse=True)
def reset_config():
    """
    Reset module-level configuration before each test.

    This fixture runs automatically for all tests to ensure
    test isolation and prevent state leakage.
    """
    # Store original values
    original_root_seed = config._root_seed
    original_jobs = config._jobs
    original_profile = config._profile
    original_profiles = config._profiles

    # Reset to defaults
    config._root_seed = 0
    config._jobs = 1
    config._profile = "fast"
    config._profiles = {
        name: replace(profile) for name, profile in config._DEFAULT_PROFILES.items()
    }

    yield

    # Restore original values
    config._root_seed = original_root_seed
    config._jobs = original_jobs
    config._profile = original_profile
    config._profiles = original_profiles


def make_dataset(
    n: int,
    num_classes: int = 2,
    *,
    channels: int = 1,
    seed: int = 0,
    name: str = "random",
    attributes: bool = True,
    labels: np.ndarray | None = None,
) -> LabeledDataset:
    """Uniform random images with random (or given) labels."""
    rng = np.random.default_rng(seed)
    return LabeledDataset(
        images=rng.random((n, channels, IMAGE_SIZE, IMAGE_SIZE)),
        class_labels=rng.integers(0, num_classes, size=n) if labels is None else labels,
        num_classes=num_classes,
        name=name,
        attribute_labels=rng.integers(0, 2, size=n) if attributes else None,
    )


def idx_image_bytes(images: np.ndarray, magic: int = 0x00000803) -> bytes:
    """Encode (N, H, W) uint8 images as an IDX image file."""
    n, h, w = images.shape
    return struct.pack(">IIII", magic, n, h, w) + images.astype(np.uint8).tobytes()


def idx_label_bytes(labels: np.ndarray, magic: int = 0x00000801) -> bytes:
    """Encode uint8 labels as an IDX label file."""
    return struct.pack(">II", magic, len(labels)) + labels.astype(np.uint8).tobytes()


@pytest.fixture
def quick_config():
    """Two epochs of plain SGD, one batch per epoch for small sets."""
    return TrainConfig(batch_size=64, epochs=2, optimizer=OptimizerConfig(learning_rate=0.01))


@pytest.fixture
def attack_config():
    """Short attack-classifier recipe."""
    from mlleak.schemas import attack_train_config

    return attack_train_config(epochs=2, shuffle_seed=1)


@pytest.fixture
def small_split() -> FourWaySplit:
    """Four parts of 12 random grayscale samples, three classes."""
    return four_way_split(make_dataset(48, num_classes=3, seed=4, name="small"), seed=9)


@pytest.fixture
def small_target(small_split: FourWaySplit, quick_config: TrainConfig) -> TrainedModel:
    """SmallMLP trained briefly on the split's target_train part."""
    arch = small_mlp(channels=1, num_classes=3)
    return train(arch, small_split.target_train, quick_config, seed=2)


@pytest.fixture
def threat_models() -> tuple[ThreatModel, ...]:
    return ThreatModel.all()


@pytest.fixture
def study_document(tmp_path: Path):
    """
    Write a tiny experiment document and return its path.

    Example:
        path = study_document(attacks=["membership"])
    """

    def _write(**overrides) -> Path:
        document = {
            "root_seed": 11,
            "seeds": [0],
            "datasets": [
                {
                    "id": "tiny",
                    "kind": "synthetic",
                    "synth": {
                        "num_classes": 2,
                        "samples_per_class": 16,
                        "noise_sigma": 0.2,
                        "attribute_strength": 0.5,
                    },
                }
            ],
            "architectures": ["small_mlp"],
            "epochs": 2,
            "attack_epochs": 2,
            "batch_size": 16,
            "output_dir": str(tmp_path / "runs"),
        }
        document.update(overrides)
        path = tmp_path / "study.json"
        path.write_text(json.dumps(document))
        return path

    return _write

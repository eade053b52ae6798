"""
Datasets, synthetic generation, and the four-way split.

## Usage Example

```python
from mlleak.data import synth_generate, four_way_split, partial_subset
from mlleak.schemas import SynthSpec

ds = synth_generate(SynthSpec(num_classes=4, samples_per_class=100, seed=3))
split = four_way_split(ds, seed=11)
partial = partial_subset(split.target_train, fraction=0.7, seed=12)
```
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.neighbors import KNeighborsClassifier

from .base import handle_numeric_errors, make_rng
from .exceptions import (
    MLLeakConfigurationError,
    MLLeakDataError,
    MLLeakDimensionError,
    MLLeakSizeError,
)
from .schemas import SynthSpec

_log = logging.getLogger(__name__)

IMAGE_SIZE = 32

# complexity_rank weights: channels, class count, nearest-neighbour error
WEIGHT_CHANNELS = 1.0
WEIGHT_CLASSES = 0.1
WEIGHT_NN_ERROR = 2.0
_NN_MAX_SAMPLES = 2000
_NN_HOLDOUT = 0.2


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    Image samples with class labels and an optional binary attribute.

    Attributes:
        images: float64 array (N, C, 32, 32) with values in [0, 1]
        class_labels: int64 array (N,) with values < num_classes
        num_classes: Number of classes
        name: Identifier used in reports
        attribute_labels: Optional int64 array (N,) of 0/1 attributes
        indices: Sample ids in the source dataset (views keep their origin)
    """

    images: np.ndarray
    class_labels: np.ndarray
    num_classes: int
    name: str = "dataset"
    attribute_labels: np.ndarray | None = None
    indices: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        images = np.asarray(self.images, dtype=np.float64)
        labels = np.asarray(self.class_labels, dtype=np.int64)
        n = len(labels)
        if images.ndim != 4 or images.shape[0] != n:
            raise MLLeakDimensionError(
                f"images must be (N, C, H, W) with N={n}, got {images.shape}"
            )
        if images.shape[2:] != (IMAGE_SIZE, IMAGE_SIZE):
            raise MLLeakDimensionError(
                f"prepared images are {IMAGE_SIZE}x{IMAGE_SIZE}, got {images.shape[2:]}",
                expected=(IMAGE_SIZE, IMAGE_SIZE),
                actual=images.shape[2:],
            )
        if self.num_classes < 1:
            raise MLLeakDataError(f"num_classes must be positive, got {self.num_classes}")
        if n and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise MLLeakDataError(f"class labels must lie in [0, {self.num_classes})")
        if n and (images.min() < 0.0 or images.max() > 1.0):
            raise MLLeakDataError("pixel values must lie in [0, 1]")
        attributes = self.attribute_labels
        if attributes is not None:
            attributes = np.asarray(attributes, dtype=np.int64)
            if attributes.shape != (n,) or (n and not np.isin(attributes, (0, 1)).all()):
                raise MLLeakDataError("attribute labels must be N binary values")
        indices = np.arange(n) if self.indices is None else np.asarray(self.indices, dtype=np.int64)
        if indices.shape != (n,):
            raise MLLeakDimensionError(f"indices must have length {n}, got {indices.shape}")
        for name, value in (
            ("images", images),
            ("class_labels", labels),
            ("attribute_labels", attributes),
            ("indices", indices),
        ):
            if value is not None:
                value = value.copy() if value.flags.writeable else value
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __len__(self) -> int:
        return len(self.class_labels)

    @property
    def channels(self) -> int:
        return self.images.shape[1]

    @property
    def has_attributes(self) -> bool:
        return self.attribute_labels is not None

    def subset(self, positions: np.ndarray, name: str | None = None) -> LabeledDataset:
        """View of the samples at `positions` (positions, not source ids)."""
        positions = np.asarray(positions, dtype=np.int64)
        return LabeledDataset(
            images=self.images[positions],
            class_labels=self.class_labels[positions],
            num_classes=self.num_classes,
            name=name or self.name,
            attribute_labels=None
            if self.attribute_labels is None
            else self.attribute_labels[positions],
            indices=self.indices[positions],
        )

    def __repr__(self) -> str:
        return (
            f"LabeledDataset(name={self.name!r}, n={len(self)}, "
            f"shape={self.images.shape[1:]}, num_classes={self.num_classes}, "
            f"attributes={self.has_attributes})"
        )


@dataclass(frozen=True)
class FourWaySplit:
    """
    Four equal, pairwise disjoint parts of one dataset.

    target_train trains the target models (and supplies evaluation members),
    target_test evaluates targets and attacks, shadow_train trains shadow
    models, shadow_test supplies shadow non-members.
    """

    target_train: LabeledDataset
    target_test: LabeledDataset
    shadow_train: LabeledDataset
    shadow_test: LabeledDataset
    seed: int

    def parts(self) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset, LabeledDataset]:
        return (self.target_train, self.target_test, self.shadow_train, self.shadow_test)


def synth_generate(spec: SynthSpec, name: str = "synthetic") -> LabeledDataset:
    """
    Generate a synthetic dataset from a SynthSpec.

    Each class has a fixed random template; a sample is its class template
    plus Gaussian noise. A binary attribute, drawn independently of the class,
    adds a fixed spatial pattern scaled by attribute_strength. Values are
    clipped to [0, 1].

    Args:
        spec: Generation recipe (deterministic given spec.seed)
        name: Dataset identifier

    Returns:
        LabeledDataset of num_classes * samples_per_class samples, with
        attribute labels

    Example:
        >>> ds = synth_generate(SynthSpec(num_classes=4, samples_per_class=10,
        ...                               noise_sigma=0.0, seed=1))
        >>> len(ds)
        40
    """
    rng = make_rng(spec.seed)
    shape = (spec.channels, IMAGE_SIZE, IMAGE_SIZE)
    k, per_class = spec.num_classes, spec.samples_per_class
    n = k * per_class

    templates = np.clip(0.5 + spec.class_separation * (rng.random((k, *shape)) - 0.5), 0.0, 1.0)
    pattern = rng.uniform(-1.0, 1.0, size=shape)
    labels = np.repeat(np.arange(k), per_class)
    attributes = rng.integers(0, 2, size=n)
    noise = rng.standard_normal((n, *shape))

    images = (
        templates[labels]
        + spec.noise_sigma * noise
        + spec.attribute_strength * attributes[:, None, None, None] * pattern
    )
    _log.debug(f"Generated {n} synthetic samples ({k} classes, {spec.channels} channels)")
    return LabeledDataset(
        images=np.clip(images, 0.0, 1.0),
        class_labels=labels,
        num_classes=k,
        name=name,
        attribute_labels=attributes,
    )


def four_way_split(ds: LabeledDataset, seed: int) -> FourWaySplit:
    """
    Shuffle and cut a dataset into four equal disjoint parts.

    The N mod 4 samples left after quartering are dropped.

    Args:
        ds: Source dataset (N >= 8)
        seed: Shuffle seed

    Returns:
        FourWaySplit with parts of N // 4 samples

    Raises:
        MLLeakSizeError: If N < 8
    """
    n = len(ds)
    if n < 8:
        raise MLLeakSizeError(f"four_way_split needs at least 8 samples, got {n}")
    order = make_rng(seed).permutation(n)
    quarter = n // 4
    parts = [order[i * quarter : (i + 1) * quarter] for i in range(4)]
    names = ("target_train", "target_test", "shadow_train", "shadow_test")
    views = [ds.subset(p, name=f"{ds.name}:{part}") for p, part in zip(parts, names)]
    if n % 4:
        _log.debug(f"four_way_split dropped {n % 4} remainder samples of {ds.name}")
    return FourWaySplit(*views, seed=seed)


def _floor_count(fraction: float, n: int) -> int:
    # tolerance keeps e.g. 0.7 * 30 from landing just below 21
    return math.floor(fraction * n + 1e-9)


def partial_subset(
    target_train: LabeledDataset, fraction: float = 0.7, seed: int = 0
) -> LabeledDataset:
    """
    Draw floor(fraction * N) samples uniformly without replacement.

    Args:
        target_train: Dataset to draw from
        fraction: Share of samples, in (0, 1]
        seed: Sampling seed

    Returns:
        The drawn subset (source ids preserved)

    Raises:
        MLLeakConfigurationError: If fraction is outside (0, 1]
        MLLeakSizeError: If the draw would be empty
    """
    if not 0.0 < fraction <= 1.0:
        raise MLLeakConfigurationError(f"fraction must lie in (0, 1], got {fraction}")
    count = _floor_count(fraction, len(target_train))
    if count == 0:
        raise MLLeakSizeError(
            f"partial subset of {len(target_train)} samples at fraction {fraction} is empty"
        )
    return sample(target_train, count, seed, name=f"{target_train.name}:partial")


def sample(ds: LabeledDataset, count: int, seed: int, name: str | None = None) -> LabeledDataset:
    """Seeded draw of `count` samples without replacement."""
    if not 0 < count <= len(ds):
        raise MLLeakSizeError(f"cannot draw {count} samples from {len(ds)}")
    positions = make_rng(seed).choice(len(ds), size=count, replace=False)
    return ds.subset(positions, name=name)


def concatenate(
    first: LabeledDataset, second: LabeledDataset, name: str | None = None
) -> LabeledDataset:
    """Samples of `first` followed by those of `second` (same source, same classes)."""
    if first.num_classes != second.num_classes or first.images.shape[1:] != second.images.shape[1:]:
        raise MLLeakDataError(f"cannot concatenate {first.name} and {second.name}: shapes differ")
    attributes = None
    if first.attribute_labels is not None and second.attribute_labels is not None:
        attributes = np.concatenate([first.attribute_labels, second.attribute_labels])
    return LabeledDataset(
        images=np.concatenate([first.images, second.images]),
        class_labels=np.concatenate([first.class_labels, second.class_labels]),
        num_classes=first.num_classes,
        name=name or f"{first.name}+{second.name}",
        attribute_labels=attributes,
        indices=np.concatenate([first.indices, second.indices]),
    )


def majority_baseline(ds: LabeledDataset) -> float:
    """Accuracy of always guessing the more frequent attribute value."""
    if ds.attribute_labels is None:
        raise MLLeakDataError(f"{ds.name} has no attribute labels")
    if len(ds) == 0:
        raise MLLeakSizeError(f"{ds.name} is empty")
    share = float(ds.attribute_labels.mean())
    return max(share, 1.0 - share)


def nearest_neighbor_accuracy(ds: LabeledDataset) -> float:
    """1-NN accuracy on a fixed 20% holdout of (at most 2000 of) the samples."""
    n = len(ds)
    if n < 2:
        raise MLLeakSizeError("nearest-neighbour accuracy needs at least 2 samples")
    order = make_rng(0).permutation(n)[:_NN_MAX_SAMPLES]
    holdout = max(1, int(len(order) * _NN_HOLDOUT))
    test, train = order[:holdout], order[holdout:]
    flat = ds.images.reshape(n, -1)
    knn = KNeighborsClassifier(n_neighbors=1)
    knn.fit(flat[train], ds.class_labels[train])
    return float(knn.score(flat[test], ds.class_labels[test]))


@handle_numeric_errors
def complexity_rank(ds: LabeledDataset) -> float:
    """
    Ordinal complexity score used to order datasets in reports.

    score = (channels - 1) * 1 + num_classes * 0.1 + (1 - nn_accuracy) * 2,
    where nn_accuracy is the 1-nearest-neighbour holdout accuracy. Only the
    ordering is meaningful.
    """
    nn_error = 1.0 - nearest_neighbor_accuracy(ds)
    score = (
        (ds.channels - 1) * WEIGHT_CHANNELS
        + ds.num_classes * WEIGHT_CLASSES
        + nn_error * WEIGHT_NN_ERROR
    )
    _log.debug(f"complexity_rank({ds.name}) = {score:.4f} (nn error {nn_error:.4f})")
    return score

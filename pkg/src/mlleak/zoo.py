"""
Model zoo and training harness.

Architectures are pydantic descriptors (see schemas.Architecture); their
parameters live in an engine Parameters collection named "<layer>.weight" /
"<layer>.bias" in declaration order (residual bodies use "<layer>.<i>.*").

## Usage Example

```python
from mlleak.zoo import simple_cnn, train, predict, accuracy
from mlleak.schemas import TrainConfig

arch = simple_cnn(channels=1, num_classes=4)
model = train(arch, split.target_train, TrainConfig(epochs=15), seed=3)
print(accuracy(model, split.target_test))
```
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .base import handle_numeric_errors, make_rng
from .data import IMAGE_SIZE, LabeledDataset
from .engine import (
    OptimizerState,
    Parameters,
    Tensor,
    add,
    conv2d,
    flatten,
    matmul,
    optimizer_step,
    relu,
    soft_cross_entropy,
    softmax,
    softmax_cross_entropy,
)
from .exceptions import (
    MLLeakCapabilityError,
    MLLeakConfigurationError,
    MLLeakDimensionError,
    MLLeakNumericError,
    MLLeakSizeError,
    MLLeakTrainingError,
)
from .schemas import Architecture, LayerKind, LayerSpec, TrainConfig

_log = logging.getLogger(__name__)

_PREDICT_CHUNK = 256


# Architectures


def simple_cnn(channels: int, num_classes: int) -> Architecture:
    """
    Two convolution and two fully connected layers:
    conv(3x3,16) -> relu -> conv(3x3,32) -> relu -> flatten -> dense(128)
    -> relu -> dense(num_classes). Convolutions use stride 2, padding 1.
    """
    return Architecture(
        name="simple_cnn",
        input_shape=(channels, IMAGE_SIZE, IMAGE_SIZE),
        layers=(
            LayerSpec.conv(16, 3, stride=2, padding=1),
            LayerSpec.relu(),
            LayerSpec.conv(32, 3, stride=2, padding=1),
            LayerSpec.relu(),
            LayerSpec.flatten(),
            LayerSpec.dense(128),
            LayerSpec.relu(),
            LayerSpec.dense(num_classes),
        ),
    )


def small_mlp(channels: int, num_classes: int) -> Architecture:
    """flatten -> dense(128) -> relu -> dense(64) -> relu -> dense(num_classes)."""
    return Architecture(
        name="small_mlp",
        input_shape=(channels, IMAGE_SIZE, IMAGE_SIZE),
        layers=(
            LayerSpec.flatten(),
            LayerSpec.dense(128),
            LayerSpec.relu(),
            LayerSpec.dense(64),
            LayerSpec.relu(),
            LayerSpec.dense(num_classes),
        ),
    )


def tiny_residual(channels: int, num_classes: int) -> Architecture:
    """
    Two convolution blocks with one additive skip connection between them,
    followed by the same dense head as simple_cnn.
    """
    return Architecture(
        name="tiny_residual",
        input_shape=(channels, IMAGE_SIZE, IMAGE_SIZE),
        layers=(
            LayerSpec.conv(16, 3, stride=2, padding=1),
            LayerSpec.relu(),
            LayerSpec.residual(
                LayerSpec.conv(16, 3, stride=1, padding=1),
                LayerSpec.relu(),
                LayerSpec.conv(16, 3, stride=1, padding=1),
            ),
            LayerSpec.relu(),
            LayerSpec.conv(32, 3, stride=2, padding=1),
            LayerSpec.relu(),
            LayerSpec.flatten(),
            LayerSpec.dense(128),
            LayerSpec.relu(),
            LayerSpec.dense(num_classes),
        ),
    )


ARCHITECTURES: dict[str, Callable[[int, int], Architecture]] = {
    "simple_cnn": simple_cnn,
    "small_mlp": small_mlp,
    "tiny_residual": tiny_residual,
}


def build_architecture(name: str, channels: int, num_classes: int) -> Architecture:
    """Look up a named architecture and size it for a dataset."""
    try:
        factory = ARCHITECTURES[name]
    except KeyError:
        raise MLLeakConfigurationError(
            f"Unknown architecture {name!r}; expected one of {sorted(ARCHITECTURES)}"
        ) from None
    return factory(channels, num_classes)


# Parameters


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6 / fan_in)."""
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def dense_params(
    params: Parameters,
    prefix: str,
    fan_in: int,
    units: int,
    rng: np.random.Generator,
    *,
    zeros: bool = False,
) -> None:
    """Add "<prefix>.weight" (fan_in, units) and "<prefix>.bias" (units,)."""
    weight = np.zeros((fan_in, units)) if zeros else kaiming_uniform(rng, (fan_in, units), fan_in)
    params.add(f"{prefix}.weight", Tensor(weight, requires_grad=True))
    params.add(f"{prefix}.bias", Tensor(np.zeros(units), requires_grad=True))


def dense(params: Parameters, prefix: str, x: Tensor) -> Tensor:
    return add(matmul(x, params[f"{prefix}.weight"]), params[f"{prefix}.bias"])


def _conv_out(extent: int, layer: LayerSpec) -> int:
    assert layer.kernel_size is not None
    return (extent + 2 * layer.padding - layer.kernel_size) // layer.stride + 1


def _init_layers(
    layers: tuple[LayerSpec, ...],
    shape: tuple[int, ...],
    params: Parameters,
    rng: np.random.Generator,
    prefix: str,
    zero_head: bool,
) -> tuple[int, ...]:
    for i, layer in enumerate(layers):
        name = f"{prefix}{i}"
        if layer.kind == LayerKind.CONV:
            assert layer.out_channels is not None and layer.kernel_size is not None
            if len(shape) != 3:
                raise MLLeakConfigurationError(f"conv layer {name} needs a CHW input, got {shape}")
            c, h, w = shape
            k = layer.kernel_size
            if _conv_out(h, layer) < 1 or _conv_out(w, layer) < 1:
                raise MLLeakConfigurationError(f"conv layer {name} does not fit a {h}x{w} input")
            kernel = kaiming_uniform(rng, (layer.out_channels, c, k, k), c * k * k)
            params.add(f"{name}.weight", Tensor(kernel, requires_grad=True))
            params.add(f"{name}.bias", Tensor(np.zeros(layer.out_channels), requires_grad=True))
            shape = (layer.out_channels, _conv_out(h, layer), _conv_out(w, layer))
        elif layer.kind == LayerKind.DENSE:
            assert layer.units is not None
            if len(shape) != 1:
                raise MLLeakConfigurationError(
                    f"dense layer {name} needs a flat input, got {shape}"
                )
            is_head = zero_head and i == len(layers) - 1
            dense_params(params, name, shape[0], layer.units, rng, zeros=is_head)
            shape = (layer.units,)
        elif layer.kind == LayerKind.FLATTEN:
            shape = (math.prod(shape),)
        elif layer.kind == LayerKind.RESIDUAL:
            out = _init_layers(layer.body, shape, params, rng, f"{name}.", False)
            if out != shape:
                raise MLLeakConfigurationError(
                    f"residual body {name} maps {shape} to {out}; shapes must match"
                )
    return shape


def init_params(arch: Architecture, seed: int, head_init: str = "kaiming") -> Parameters:
    """
    Seeded Kaiming-uniform initialization with zero biases.

    Args:
        arch: Architecture descriptor
        seed: Initialization seed
        head_init: "zeros" starts the classification layer at zero

    Returns:
        Parameters in layer declaration order
    """
    params = Parameters()
    zero_head = head_init == "zeros"
    _init_layers(arch.layers, arch.input_shape, params, make_rng(seed), "", zero_head)
    return params


def head_names(arch: Architecture) -> tuple[str, str]:
    """Parameter names of the final (classification) dense layer."""
    last = len(arch.layers) - 1
    return (f"{last}.weight", f"{last}.bias")


# Forward pass


def _run_layers(
    layers: tuple[LayerSpec, ...], params: Parameters, x: Tensor, prefix: str
) -> Tensor:
    for i, layer in enumerate(layers):
        name = f"{prefix}{i}"
        if layer.kind == LayerKind.CONV:
            x = conv2d(
                x,
                params[f"{name}.weight"],
                stride=layer.stride,
                padding=layer.padding,
                bias=params[f"{name}.bias"],
            )
        elif layer.kind == LayerKind.DENSE:
            x = dense(params, name, x)
        elif layer.kind == LayerKind.RELU:
            x = relu(x)
        elif layer.kind == LayerKind.FLATTEN:
            x = flatten(x)
        elif layer.kind == LayerKind.RESIDUAL:
            x = add(x, _run_layers(layer.body, params, x, f"{name}."))
    return x


def forward_embedding(arch: Architecture, params: Parameters, x: Tensor) -> Tensor:
    """Activations entering the classification layer."""
    return _run_layers(arch.layers[:-1], params, x, "")


def forward(arch: Architecture, params: Parameters, x: Tensor) -> Tensor:
    """Logits of an (N, C, 32, 32) batch."""
    weight, bias = head_names(arch)
    h = forward_embedding(arch, params, x)
    return add(matmul(h, params[weight]), params[bias])


# Training


@dataclass(frozen=True)
class EpochRecord:
    """Mean training loss and accuracy over one epoch."""

    epoch: int
    loss: float
    accuracy: float


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """
    A trained classifier: descriptor, frozen parameters and training record.

    Inference through predict() is deterministic.
    """

    architecture: Architecture
    params: Parameters
    num_classes: int
    history: tuple[EpochRecord, ...]
    train_config: TrainConfig
    seed: int

    @property
    def name(self) -> str:
        return self.architecture.name

    def __repr__(self) -> str:
        return (
            f"TrainedModel(arch={self.name!r}, num_classes={self.num_classes}, "
            f"epochs={len(self.history)}, seed={self.seed})"
        )


StepLoss = Callable[[np.ndarray], tuple[Tensor, int]]


def fit(
    params: Parameters,
    num_samples: int,
    step_loss: StepLoss,
    cfg: TrainConfig,
    *,
    label: str = "model",
) -> tuple[EpochRecord, ...]:
    """
    Shared mini-batch loop.

    Each epoch draws a fresh permutation from a generator seeded with
    cfg.shuffle_seed, then for every batch calls `step_loss(positions)`,
    which returns the batch loss tensor and the number of correct
    predictions, back-propagates, and applies one optimizer step.

    Raises:
        MLLeakTrainingError: If the loss stops being finite or a batch hits an
            invalid floating-point operation
    """
    if num_samples < 1:
        raise MLLeakSizeError(f"cannot train {label} on an empty set")
    guarded_step = handle_numeric_errors(step_loss)
    rng = make_rng(cfg.shuffle_seed)
    state = OptimizerState()
    history: list[EpochRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(num_samples)
        total_loss, correct = 0.0, 0
        for start in range(0, num_samples, cfg.batch_size):
            positions = order[start : start + cfg.batch_size]
            params.zero_grad()
            try:
                loss, hits = guarded_step(positions)
            except MLLeakNumericError as e:
                raise MLLeakTrainingError(
                    f"{label} diverged in epoch {epoch}: {e}", epoch=epoch
                ) from e
            value = loss.item()
            if not math.isfinite(value):
                raise MLLeakTrainingError(
                    f"{label} loss became {value} in epoch {epoch}", epoch=epoch
                )
            loss.backward()
            optimizer_step(params, cfg.optimizer, state)
            total_loss += value * len(positions)
            correct += hits
        record = EpochRecord(epoch, total_loss / num_samples, correct / num_samples)
        history.append(record)
        _log.debug(f"{label} epoch {epoch}: loss={record.loss:.4f} acc={record.accuracy:.4f}")
    return tuple(history)


def train(
    arch: Architecture,
    ds: LabeledDataset,
    cfg: TrainConfig,
    seed: int = 0,
    *,
    soft_targets: np.ndarray | None = None,
    initial_params: Parameters | None = None,
) -> TrainedModel:
    """
    Train a classifier with mini-batch cross-entropy.

    Args:
        arch: Architecture whose output width equals ds.num_classes
        ds: Training set (non-empty)
        cfg: Batch size, epochs, optimizer and shuffle seed
        seed: Initialization seed
        soft_targets: Optional (N, K) target distributions replacing the
            class labels (used to train surrogates on posteriors)
        initial_params: Start from a copy of these instead of a fresh
            initialization

    Returns:
        TrainedModel with frozen parameters and per-epoch history

    Raises:
        MLLeakSizeError: If ds is empty
        MLLeakDimensionError: If the output width or input shape is wrong
        MLLeakTrainingError: If the loss diverges

    Example:
        >>> model = train(small_mlp(1, 4), ds, TrainConfig(epochs=5), seed=1)
        >>> len(model.history)
        5
    """
    if len(ds) == 0:
        raise MLLeakSizeError(f"cannot train on empty dataset {ds.name}")
    if arch.output_width() != ds.num_classes:
        raise MLLeakDimensionError(
            f"{arch.name} outputs {arch.output_width()} classes, {ds.name} has {ds.num_classes}",
            expected=(ds.num_classes,),
            actual=(arch.output_width(),),
        )
    _check_input(arch, ds.images)
    if soft_targets is not None and soft_targets.shape != (len(ds), ds.num_classes):
        raise MLLeakDimensionError(
            "soft targets must be one distribution per sample",
            expected=(len(ds), ds.num_classes),
            actual=soft_targets.shape,
        )

    params = (
        initial_params.copy(requires_grad=True)
        if initial_params is not None
        else init_params(arch, seed, cfg.head_init)
    )
    images, labels = ds.images, ds.class_labels
    if soft_targets is not None:
        labels = soft_targets.argmax(axis=1)

    def step_loss(positions: np.ndarray) -> tuple[Tensor, int]:
        logits = forward(arch, params, Tensor(images[positions]))
        if soft_targets is not None:
            loss = soft_cross_entropy(logits, soft_targets[positions])
        else:
            loss = softmax_cross_entropy(logits, labels[positions])
        hits = int((logits.data.argmax(axis=1) == labels[positions]).sum())
        return loss, hits

    history = fit(params, len(ds), step_loss, cfg, label=f"{arch.name}/{ds.name}")
    if history:
        _log.info(
            f"Trained {arch.name} on {ds.name}: {cfg.epochs} epochs, "
            f"final loss {history[-1].loss:.4f}, train acc {history[-1].accuracy:.4f}"
        )
    return TrainedModel(
        architecture=arch,
        params=params.frozen(),
        num_classes=ds.num_classes,
        history=history,
        train_config=cfg,
        seed=seed,
    )


# Inference


def _check_input(arch: Architecture, batch: np.ndarray) -> None:
    if batch.ndim != 4 or tuple(batch.shape[1:]) != arch.input_shape:
        raise MLLeakDimensionError(
            f"{arch.name} expects batches of shape (N, {', '.join(map(str, arch.input_shape))})",
            expected=arch.input_shape,
            actual=tuple(batch.shape[1:]),
        )


def _chunks(batch: np.ndarray) -> list[np.ndarray]:
    return [batch[i : i + _PREDICT_CHUNK] for i in range(0, len(batch), _PREDICT_CHUNK)]


def logits(model: TrainedModel, batch: np.ndarray) -> np.ndarray:
    """Raw classification-layer outputs for a batch."""
    batch = np.asarray(batch, dtype=np.float64)
    _check_input(model.architecture, batch)
    if len(batch) == 0:
        return np.zeros((0, model.num_classes))
    return np.concatenate(
        [forward(model.architecture, model.params, Tensor(c)).data for c in _chunks(batch)]
    )


def predict(model: TrainedModel, batch: np.ndarray) -> np.ndarray:
    """
    Softmax posteriors, one row per sample.

    Raises:
        MLLeakDimensionError: If the batch shape does not match the architecture
    """
    return softmax(Tensor(logits(model, batch))).data


def accuracy(model: TrainedModel, ds: LabeledDataset) -> float:
    """Fraction of samples whose argmax posterior equals the class label."""
    if len(ds) == 0:
        raise MLLeakSizeError(f"accuracy of {ds.name} is undefined: no samples")
    predicted = predict(model, ds.images).argmax(axis=1)
    return float((predicted == ds.class_labels).mean())


def embedding(model: TrainedModel, batch: np.ndarray) -> np.ndarray:
    """
    Penultimate-layer activations (the input to the classification layer).

    Raises:
        MLLeakCapabilityError: If the architecture has no hidden dense layer
    """
    arch = model.architecture
    if not arch.has_hidden_dense():
        raise MLLeakCapabilityError(
            f"{arch.name} has no hidden dense layer to take embeddings from",
            required="hidden dense layer",
        )
    batch = np.asarray(batch, dtype=np.float64)
    _check_input(arch, batch)
    if len(batch) == 0:
        return np.zeros((0, model.params[head_names(arch)[0]].shape[0]))
    return np.concatenate(
        [forward_embedding(arch, model.params, Tensor(c)).data for c in _chunks(batch)]
    )

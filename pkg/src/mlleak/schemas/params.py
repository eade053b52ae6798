"""Training and data-generation parameter models for mlleak."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from .enums import OptimizerKind


class OptimizerConfig(BaseModel):
    """
    Optimizer hyperparameters.

    SGD ignores beta1/beta2/epsilon; Adam ignores momentum.

    Example:
        >>> OptimizerConfig()  # lr 1e-3, momentum 0.9, weight decay 5e-4
        >>> OptimizerConfig(kind=OptimizerKind.ADAM, learning_rate=1e-3, weight_decay=0.0)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: OptimizerKind = OptimizerKind.SGD
    # 0 is accepted so a run can leave parameters at their initialization
    learning_rate: float = Field(1e-3, ge=0.0)
    momentum: float = Field(0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(5e-4, ge=0.0)
    beta1: float = Field(0.9, gt=0.0, lt=1.0)
    beta2: float = Field(0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)


class TrainConfig(BaseModel):
    """
    Mini-batch training configuration.

    Defaults are the target-model recipe: batch 64, 100 epochs, SGD with
    learning rate 1e-3, momentum 0.9 and weight decay 5e-4.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(64, ge=1)
    epochs: int = Field(100, ge=0)
    optimizer: OptimizerConfig = OptimizerConfig()
    shuffle_seed: int = Field(0, ge=0)
    # "zeros" starts the classification layer at zero (uniform posteriors)
    head_init: Literal["kaiming", "zeros"] = "kaiming"


def attack_train_config(epochs: int = 50, shuffle_seed: int = 0) -> TrainConfig:
    """Adam lr=1e-3, batch 64: the recipe shared by every attack classifier."""
    return TrainConfig(
        batch_size=64,
        epochs=epochs,
        optimizer=OptimizerConfig(
            kind=OptimizerKind.ADAM, learning_rate=1e-3, weight_decay=0.0
        ),
        shuffle_seed=shuffle_seed,
    )


class SynthSpec(BaseModel):
    """
    Recipe for a synthetic image classification dataset.

    Complexity grows with num_classes, with channels, and as
    class_separation shrinks.

    Example:
        >>> easy = SynthSpec(num_classes=4, samples_per_class=50, channels=1,
        ...                  class_separation=2.0, noise_sigma=0.05, seed=7)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_classes: int = Field(..., ge=2)
    samples_per_class: int = Field(..., ge=1)
    channels: Literal[1, 3] = 1
    class_separation: float = Field(1.0, gt=0.0)
    noise_sigma: float = Field(0.1, ge=0.0)
    attribute_strength: float = Field(0.0, ge=0.0)
    seed: int = Field(0, ge=0, lt=2**64)


# Stand-ins for the four benchmark datasets, simplest first.
SYNTH_PRESETS: dict[str, SynthSpec] = {
    "fmnist-like": SynthSpec(
        num_classes=10,
        samples_per_class=200,
        channels=1,
        class_separation=1.5,
        noise_sigma=0.15,
        attribute_strength=0.3,
    ),
    "utkface-like": SynthSpec(
        num_classes=4,
        samples_per_class=400,
        channels=3,
        class_separation=0.6,
        noise_sigma=0.25,
        attribute_strength=0.3,
    ),
    "celeba-like": SynthSpec(
        num_classes=8,
        samples_per_class=250,
        channels=3,
        class_separation=0.4,
        noise_sigma=0.3,
        attribute_strength=0.3,
    ),
    "stl10-like": SynthSpec(
        num_classes=10,
        samples_per_class=200,
        channels=3,
        class_separation=0.25,
        noise_sigma=0.35,
        attribute_strength=0.3,
    ),
}

"""
Adversary access to a target model.

Everything an attack observes about a target goes through a TargetAccess.
Black-box access answers posterior queries only; WhiteBoxAccess adds
embeddings, losses and last-layer gradients. White-box operations called
with black-box access raise MLLeakCapabilityError.

## Usage Example

```python
from mlleak.threat import grant_access, query, whitebox_features
from mlleak.schemas import ThreatModel

access = grant_access(model, ThreatModel.parse("white_box/shadow"))
posteriors = query(access, batch)
features = whitebox_features(access, batch, labels)
```
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from .engine import Parameters, Tensor, add, matmul, softmax_cross_entropy
from .exceptions import MLLeakCapabilityError, MLLeakConfigurationError, MLLeakLabelError
from .schemas import Architecture, ThreatModel
from .zoo import TrainedModel, embedding, head_names, predict

_log = logging.getLogger(__name__)


class TargetAccess:
    """
    Black-box view of a target: posterior queries only.

    The architecture descriptor is visible (the adversary is assumed to know
    the target's structure); parameters are not.
    """

    __slots__ = ("_model", "_threat")

    def __init__(self, model: TrainedModel, threat: ThreatModel) -> None:
        self._model = model
        self._threat = threat

    @property
    def threat(self) -> ThreatModel:
        return self._threat

    @property
    def white_box(self) -> bool:
        return False

    @property
    def architecture(self) -> Architecture:
        return self._model.architecture

    @property
    def num_classes(self) -> int:
        return self._model.num_classes

    def __repr__(self) -> str:
        return f"{type(self).__name__}(model={self._model.name!r}, threat={self._threat.label!r})"


class WhiteBoxAccess(TargetAccess):
    """Full view of a target: the model, its parameters and internals."""

    __slots__ = ()

    def __init__(self, model: TrainedModel, threat: ThreatModel) -> None:
        if not threat.white_box:
            raise MLLeakCapabilityError(
                f"threat model {threat.label} does not grant white-box access",
                required="white_box",
            )
        super().__init__(model, threat)

    @property
    def white_box(self) -> bool:
        return True

    @property
    def model(self) -> TrainedModel:
        return self._model


def grant_access(model: TrainedModel, threat: ThreatModel) -> TargetAccess:
    """Wrap a model in the access level its threat model allows."""
    if threat.white_box:
        return WhiteBoxAccess(model, threat)
    return TargetAccess(model, threat)


def _require_white_box(access: TargetAccess, operation: str) -> WhiteBoxAccess:
    if not isinstance(access, WhiteBoxAccess):
        _log.debug(f"Denied {operation} under {access.threat.label}")
        raise MLLeakCapabilityError(
            f"{operation} needs white-box access; threat model is {access.threat.label}",
            required="white_box",
        )
    return access


def _check_labels(labels: np.ndarray, n: int, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise MLLeakConfigurationError(f"expected {n} labels, got shape {labels.shape}")
    if n and (labels.min() < 0 or labels.max() >= num_classes):
        raise MLLeakLabelError(f"labels must lie in [0, {num_classes})")
    return labels


# Observations available under every threat model


def query(access: TargetAccess, batch: np.ndarray) -> np.ndarray:
    """Posterior matrix for a batch; identical to zoo.predict on the model."""
    return predict(access._model, batch)


def predicted_classes(access: TargetAccess, batch: np.ndarray) -> np.ndarray:
    return query(access, batch).argmax(axis=1)


class BlackBoxFeatures(NamedTuple):
    """Membership features observable through queries."""

    sorted_posteriors: np.ndarray
    correct: np.ndarray


def sort_posteriors(posteriors: np.ndarray) -> np.ndarray:
    """Each row sorted in descending order."""
    return -np.sort(-posteriors, axis=1)


def blackbox_features(
    access: TargetAccess, batch: np.ndarray, labels: np.ndarray
) -> BlackBoxFeatures:
    """
    Descending posteriors and a correctness bit per sample.

    Args:
        access: Any access level
        batch: Samples to query
        labels: The adversary's class labels for the samples

    Returns:
        BlackBoxFeatures with sorted_posteriors (N, K) and correct (N, 1)
    """
    posteriors = query(access, batch)
    labels = _check_labels(labels, len(posteriors), access.num_classes)
    correct = (posteriors.argmax(axis=1) == labels).astype(np.float64)
    return BlackBoxFeatures(sort_posteriors(posteriors), correct[:, None])


# White-box only


class WhiteBoxFeatures(NamedTuple):
    """
    The four membership inputs available with white-box access.

    Attributes:
        sorted_posteriors: (N, K) descending posteriors
        loss: (N, 1) per-sample cross-entropy loss
        last_layer_gradient: (N, (D + 1) * K) loss gradient with respect to
            the classification layer, weights then bias, flattened
        label_one_hot: (N, K) one-hot true labels
    """

    sorted_posteriors: np.ndarray
    loss: np.ndarray
    last_layer_gradient: np.ndarray
    label_one_hot: np.ndarray


def embeddings(access: TargetAccess, batch: np.ndarray) -> np.ndarray:
    """Penultimate-layer activations of the target (white-box only)."""
    access = _require_white_box(access, "embeddings")
    return embedding(access.model, batch)


def parameters(access: TargetAccess) -> Parameters:
    """The target's frozen parameters (white-box only)."""
    return _require_white_box(access, "parameters").model.params


def whitebox_features(
    access: TargetAccess, batch: np.ndarray, labels: np.ndarray
) -> WhiteBoxFeatures:
    """
    Posteriors, loss, last-layer gradient and one-hot label per sample.

    The loss and gradient of each sample are taken on a batch of one,
    replaying the classification layer on the gradient tape.

    Raises:
        MLLeakCapabilityError: If access is black-box
    """
    wb = _require_white_box(access, "whitebox_features")
    model = wb.model
    weight_name, bias_name = head_names(model.architecture)
    weight, bias = model.params[weight_name].data, model.params[bias_name].data
    hidden = embedding(model, batch)
    n, k = len(hidden), model.num_classes
    labels = _check_labels(labels, n, k)

    one_hot = np.zeros((n, k))
    one_hot[np.arange(n), labels] = 1.0
    grads = np.zeros((n, weight.size + bias.size))
    losses = np.zeros((n, 1))
    for i in range(n):
        w = Tensor(weight, requires_grad=True)
        b = Tensor(bias, requires_grad=True)
        logits = add(matmul(Tensor(hidden[i : i + 1]), w), b)
        loss = softmax_cross_entropy(logits, labels[i : i + 1])
        loss.backward()
        assert w.grad is not None and b.grad is not None
        losses[i, 0] = loss.item()
        grads[i] = np.concatenate([w.grad.reshape(-1), b.grad])

    posteriors = query(access, batch)
    return WhiteBoxFeatures(sort_posteriors(posteriors), losses, grads, one_hot)

"""
Tensor and reverse-mode tape for the mlleak numerical engine.

A Tensor holds a float64 numpy array. Every differentiable operation is a
Function subclass; applying it records the Function as the creator of its
output, so the recorded creators form the tape that `Tensor.backward`
replays in reverse topological order.
"""

from __future__ import annotations

import logging
from abc import abstractmethod
from collections.abc import Iterable, Iterator, Mapping, Sequence
from typing import Any

import numpy as np

from ..exceptions import MLLeakConfigurationError, MLLeakDimensionError

_log = logging.getLogger(__name__)

ArrayLike = np.ndarray | float | int | Sequence[Any]


class Function:
    """
    Base class for differentiable operations.

    Subclasses implement `forward` on raw arrays and `backward`, which maps
    the gradient of the output to one gradient per input (None for inputs
    that take no gradient, such as integer labels passed as kwargs).
    """

    def __init__(self, *inputs: Tensor) -> None:
        self.inputs = inputs

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *tensors: Tensor, **kwargs: Any) -> Tensor:
        """
        Run the forward pass and record the op on the tape when any input
        requires a gradient.
        """
        func = cls(*tensors)
        out_data = func.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = any(t.requires_grad for t in tensors)
        return Tensor(
            out_data,
            requires_grad=requires_grad,
            _creator=func if requires_grad else None,
        )

    @staticmethod
    def unbroadcast(grad: np.ndarray, to_shape: tuple[int, ...]) -> np.ndarray:
        """Sum out broadcast dimensions so `grad` matches `to_shape`."""
        if grad.shape == to_shape:
            return grad
        while grad.ndim > len(to_shape):
            grad = grad.sum(axis=0)
        for axis, extent in enumerate(to_shape):
            if extent == 1 and grad.shape[axis] != 1:
                grad = grad.sum(axis=axis, keepdims=True)
        return grad


class Tensor:
    """
    n-dimensional float64 array taking part in the gradient tape.

    Attributes:
        data: Values in row-major order (product(shape) == data.size)
        requires_grad: Whether backward() accumulates into `grad`
        grad: Same-shape gradient, or None before the first backward pass
    """

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        *,
        _creator: Function | None = None,
    ) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._creator = _creator

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        """Return the underlying array."""
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise MLLeakDimensionError(
                "item() needs a single-element tensor", actual=self.shape
            )
        return float(self.data.reshape(-1)[0])

    def detach(self) -> Tensor:
        """Copy of the values outside the tape."""
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: ArrayLike | None = None) -> None:
        """
        Replay the tape in reverse and accumulate gradients into every leaf
        that requires them.

        Args:
            grad: Seed gradient (defaults to 1 for single-element tensors)

        Raises:
            MLLeakDimensionError: If no seed is given for a non-scalar output
                or the seed has the wrong shape
        """
        if grad is None:
            if self.data.size != 1:
                raise MLLeakDimensionError(
                    "backward() without a seed gradient needs a single-element tensor",
                    actual=self.shape,
                )
            seed = np.ones_like(self.data)
        else:
            seed = np.asarray(grad, dtype=np.float64)
            if seed.shape != self.shape:
                raise MLLeakDimensionError(
                    "Seed gradient shape differs from the tensor shape",
                    expected=self.shape,
                    actual=seed.shape,
                )

        grads: dict[int, np.ndarray] = {id(self): seed}
        for node in reversed(_topological_order(self)):
            node_grad = grads.pop(id(node), None)
            if node_grad is None:
                continue
            creator = node._creator
            if creator is None:
                if node.requires_grad:
                    node.grad = node_grad.copy() if node.grad is None else node.grad + node_grad
                continue
            for parent, parent_grad in zip(creator.inputs, creator.backward(node_grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                # fan-out: contributions add up
                grads[key] = grads[key] + parent_grad if key in grads else parent_grad

    def __add__(self, other: Tensor | float) -> Tensor:
        from .ops import add

        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other: Tensor | float) -> Tensor:
        from .ops import mul

        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other: Tensor) -> Tensor:
        from .ops import matmul

        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _topological_order(root: Tensor) -> list[Tensor]:
    """Tape order: every tensor appears after the inputs it was computed from."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        if node._creator is not None:
            for parent in node._creator.inputs:
                if id(parent) not in seen:
                    stack.append((parent, False))
    return order


def as_tensor(value: Tensor | ArrayLike) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


class Parameters(Mapping[str, Tensor]):
    """
    Named, ordered collection of trainable tensors.

    Iteration follows insertion order, which is the layer declaration order
    used by checkpoints and optimizers.
    """

    def __init__(self, items: Iterable[tuple[str, Tensor]] = ()) -> None:
        self._tensors: dict[str, Tensor] = {}
        for name, tensor in items:
            self.add(name, tensor)

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._tensors:
            raise MLLeakConfigurationError(f"Duplicate parameter name {name!r}")
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def grads(self) -> dict[str, np.ndarray | None]:
        return {name: t.grad for name, t in self._tensors.items()}

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.grad = None

    def num_values(self) -> int:
        return sum(t.data.size for t in self._tensors.values())

    def copy(self, *, requires_grad: bool = True) -> Parameters:
        """Independent copy (fresh writable arrays, no gradients)."""
        return Parameters(
            (name, Tensor(t.data.copy(), requires_grad=requires_grad))
            for name, t in self._tensors.items()
        )

    def frozen(self) -> Parameters:
        """Read-only copy for a finished model."""
        out = self.copy(requires_grad=False)
        for tensor in out.values():
            tensor.data.setflags(write=False)
        return out

    def equals(self, other: Parameters) -> bool:
        """Bitwise equality of names, shapes and values."""
        if list(self) != list(other):
            return False
        return all(np.array_equal(self[name].data, other[name].data) for name in self)

    def __repr__(self) -> str:
        return f"Parameters({len(self)} tensors, {self.num_values()} values)"

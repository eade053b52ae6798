"""
Differentiable operations for the mlleak engine.

Each operation is a Function subclass plus a small functional wrapper that
validates shapes and raises toolkit errors before touching the tape.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import MLLeakDimensionError, MLLeakLabelError, MLLeakNumericError
from .tensor import ArrayLike, Function, Tensor, as_tensor

# Smallest probability fed to log() in cross_entropy
_PROB_FLOOR = 1e-300


class Add(Function):
    def forward(self, a: np.ndarray, b: np.ndarray, **_: Any) -> np.ndarray:
        self.shapes = (a.shape, b.shape)
        return a + b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        sa, sb = self.shapes
        return self.unbroadcast(grad, sa), self.unbroadcast(grad, sb)


class Mul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray, **_: Any) -> np.ndarray:
        self.a, self.b = a, b
        return a * b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (
            self.unbroadcast(grad * self.b, self.a.shape),
            self.unbroadcast(grad * self.a, self.b.shape),
        )


class MatMul(Function):
    def forward(self, a: np.ndarray, b: np.ndarray, **_: Any) -> np.ndarray:
        self.a, self.b = a, b
        return a @ b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return grad @ self.b.T, self.a.T @ grad


class ReLU(Function):
    def forward(self, x: np.ndarray, **_: Any) -> np.ndarray:
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad * self.mask,)


class Reshape(Function):
    def forward(self, x: np.ndarray, *, shape: tuple[int, ...], **_: Any) -> np.ndarray:
        self.in_shape = x.shape
        return x.reshape(shape)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (grad.reshape(self.in_shape),)


class Concat(Function):
    def forward(self, *arrays: np.ndarray, axis: int = 1, **_: Any) -> np.ndarray:
        self.axis = axis
        self.bounds = np.cumsum([a.shape[axis] for a in arrays])[:-1]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return tuple(np.split(grad, self.bounds, axis=self.axis))


class Sum(Function):
    def forward(self, x: np.ndarray, **_: Any) -> np.ndarray:
        self.in_shape = x.shape
        return np.asarray(x.sum())

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (np.broadcast_to(grad, self.in_shape).copy(),)


class Conv2d(Function):
    """Cross-correlation (no kernel flip) with symmetric zero padding."""

    def forward(
        self,
        x: np.ndarray,
        kernel: np.ndarray,
        *,
        stride: int,
        padding: int,
        **_: Any,
    ) -> np.ndarray:
        n, c, h, w = x.shape
        o, _, kh, kw = kernel.shape
        ho = (h + 2 * padding - kh) // stride + 1
        wo = (w + 2 * padding - kw) // stride + 1
        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))
        windows = windows[:, :, ::stride, ::stride][:, :, :ho, :wo]
        # im2col: one row per output position
        self.cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * ho * wo, c * kh * kw)
        self.kernel = kernel
        self.geometry = (x.shape, xp.shape, ho, wo, stride, padding)
        out = self.cols @ kernel.reshape(o, -1).T
        return out.reshape(n, ho, wo, o).transpose(0, 3, 1, 2)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        x_shape, xp_shape, ho, wo, stride, padding = self.geometry
        n, c, h, w = x_shape
        o, _, kh, kw = self.kernel.shape
        g2 = grad.transpose(0, 2, 3, 1).reshape(-1, o)
        d_kernel = (g2.T @ self.cols).reshape(self.kernel.shape)
        d_cols = (g2 @ self.kernel.reshape(o, -1)).reshape(n, ho, wo, c, kh, kw)
        d_xp = np.zeros(xp_shape)
        for i in range(kh):
            for j in range(kw):
                d_xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                    d_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        d_x = d_xp[:, :, padding : padding + h, padding : padding + w]
        return d_x, d_kernel


class Softmax(Function):
    def forward(self, x: np.ndarray, **_: Any) -> np.ndarray:
        self.out = _softmax(x)
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        s = self.out
        return (s * (grad - (grad * s).sum(axis=1, keepdims=True)),)


class CrossEntropy(Function):
    """Mean negative log-probability of the labelled class, on posteriors."""

    def forward(self, p: np.ndarray, *, labels: np.ndarray, **_: Any) -> np.ndarray:
        self.p, self.labels = p, labels
        picked = np.maximum(p[np.arange(len(labels)), labels], _PROB_FLOOR)
        return np.asarray(-np.mean(np.log(picked)) + 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        n = len(self.labels)
        rows = np.arange(n)
        d_p = np.zeros_like(self.p)
        d_p[rows, self.labels] = -1.0 / (n * np.maximum(self.p[rows, self.labels], _PROB_FLOOR))
        return (d_p * grad,)


class SoftmaxCrossEntropy(Function):
    """Fused softmax + cross-entropy against soft or one-hot targets, on logits."""

    def forward(self, logits: np.ndarray, *, targets: np.ndarray, **_: Any) -> np.ndarray:
        log_probs = _log_softmax(logits)
        self.probs = np.exp(log_probs)
        self.targets = targets
        return np.asarray(-np.mean((targets * log_probs).sum(axis=1)) + 0.0)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray | None, ...]:
        n = len(self.targets)
        mass = self.targets.sum(axis=1, keepdims=True)
        return ((self.probs * mass - self.targets) * (grad / n),)


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _check_labels(labels: ArrayLike, num_rows: int, num_classes: int) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or len(arr) != num_rows:
        raise MLLeakDimensionError(
            "Need one label per row", expected=(num_rows,), actual=arr.shape
        )
    if not np.issubdtype(arr.dtype, np.integer):
        raise MLLeakLabelError(f"Labels must be integer class indices, got {arr.dtype}")
    if len(arr) and (arr.min() < 0 or arr.max() >= num_classes):
        raise MLLeakLabelError(
            f"Label out of range [0, {num_classes}): min={arr.min()}, max={arr.max()}"
        )
    return arr.astype(np.intp)


def add(a: Tensor | ArrayLike, b: Tensor | ArrayLike) -> Tensor:
    """Element-wise sum with numpy broadcasting."""
    return Add.apply(as_tensor(a), as_tensor(b))


def mul(a: Tensor | ArrayLike, b: Tensor | ArrayLike) -> Tensor:
    """Element-wise product with numpy broadcasting."""
    return Mul.apply(as_tensor(a), as_tensor(b))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Rank-2 matrix product.

    Raises:
        MLLeakDimensionError: If either operand is not rank 2 or the inner
            extents differ
    """
    if a.ndim != 2 or b.ndim != 2:
        raise MLLeakDimensionError(
            f"matmul needs rank-2 operands, got {a.shape} and {b.shape}"
        )
    if a.shape[1] != b.shape[0]:
        raise MLLeakDimensionError(
            f"matmul inner extents differ: {a.shape} x {b.shape}",
            expected=(a.shape[1],),
            actual=(b.shape[0],),
        )
    return MatMul.apply(a, b)


def relu(x: Tensor) -> Tensor:
    return ReLU.apply(x)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))


def flatten(x: Tensor) -> Tensor:
    """Collapse everything but the batch axis."""
    return reshape(x, (x.shape[0], -1))


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def tensor_sum(x: Tensor) -> Tensor:
    return Sum.apply(x)


def conv2d(
    x: Tensor,
    kernel: Tensor,
    stride: int = 1,
    padding: int = 0,
    bias: Tensor | None = None,
) -> Tensor:
    """
    2-D cross-correlation of an NCHW batch with an OIKK kernel.

    Args:
        x: Input batch (N, C, H, W)
        kernel: Kernel (O, C, KH, KW)
        stride: Positive step between windows
        padding: Zero padding added to each spatial side
        bias: Optional per-output-channel bias (O,)

    Returns:
        Output batch (N, O, HO, WO)

    Raises:
        MLLeakDimensionError: On rank or channel mismatch, or when the
            output would be spatially empty
    """
    if x.ndim != 4 or kernel.ndim != 4:
        raise MLLeakDimensionError(
            f"conv2d needs NCHW input and OIKK kernel, got {x.shape} and {kernel.shape}"
        )
    if stride < 1 or padding < 0:
        raise MLLeakDimensionError(f"Invalid stride={stride} or padding={padding}")
    if x.shape[1] != kernel.shape[1]:
        raise MLLeakDimensionError(
            f"Input has {x.shape[1]} channels, kernel expects {kernel.shape[1]}",
            expected=(kernel.shape[1],),
            actual=(x.shape[1],),
        )
    _, _, h, w = x.shape
    _, _, kh, kw = kernel.shape
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise MLLeakDimensionError(
            f"Kernel {kh}x{kw} does not fit a {h}x{w} input with padding {padding}"
        )
    out = Conv2d.apply(x, kernel, stride=stride, padding=padding)
    if bias is not None:
        out = add(out, reshape(bias, (1, -1, 1, 1)))
    return out


def _check_finite(x: Tensor, op: str) -> None:
    if not np.all(np.isfinite(x.data)):
        raise MLLeakNumericError(f"{op} received non-finite input")


def softmax(logits: Tensor) -> Tensor:
    """
    Row-wise softmax with max-subtraction.

    Raises:
        MLLeakDimensionError: If logits are not rank 2
        MLLeakNumericError: On NaN or infinite input
    """
    if logits.ndim != 2:
        raise MLLeakDimensionError(f"softmax needs a rank-2 tensor, got {logits.shape}")
    _check_finite(logits, "softmax")
    return Softmax.apply(logits)


def cross_entropy(posteriors: Tensor, labels: ArrayLike) -> Tensor:
    """
    Mean over the batch of -log p[label].

    Raises:
        MLLeakLabelError: If a label is outside [0, num_classes)
    """
    if posteriors.ndim != 2:
        raise MLLeakDimensionError(
            f"cross_entropy needs a rank-2 posterior matrix, got {posteriors.shape}"
        )
    _check_finite(posteriors, "cross_entropy")
    idx = _check_labels(labels, posteriors.shape[0], posteriors.shape[1])
    return CrossEntropy.apply(posteriors, labels=idx)


def softmax_cross_entropy(logits: Tensor, labels: ArrayLike) -> Tensor:
    """cross_entropy(softmax(logits), labels) computed in log space."""
    if logits.ndim != 2:
        raise MLLeakDimensionError(f"Expected rank-2 logits, got {logits.shape}")
    _check_finite(logits, "softmax_cross_entropy")
    idx = _check_labels(labels, logits.shape[0], logits.shape[1])
    targets = np.zeros(logits.shape)
    targets[np.arange(len(idx)), idx] = 1.0
    return SoftmaxCrossEntropy.apply(logits, targets=targets)


def soft_cross_entropy(logits: Tensor, target_probs: np.ndarray) -> Tensor:
    """
    Cross-entropy between softmax(logits) and full target distributions
    (KL divergence up to the targets' entropy).
    """
    targets = np.asarray(target_probs, dtype=np.float64)
    if targets.shape != logits.shape:
        raise MLLeakDimensionError(
            "Target distributions must match the logits shape",
            expected=logits.shape,
            actual=targets.shape,
        )
    _check_finite(logits, "soft_cross_entropy")
    return SoftmaxCrossEntropy.apply(logits, targets=targets)

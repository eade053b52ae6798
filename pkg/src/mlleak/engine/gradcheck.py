"""Central finite-difference oracle for the engine's gradients."""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np

from .ops import mul, tensor_sum
from .tensor import Tensor


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[np.ndarray],
    *,
    step: float = 1e-5,
    seed: int = 0,
) -> float:
    """
    Compare reverse-mode gradients of `fn` against central differences.

    The output is reduced to a scalar through a fixed random projection so
    non-scalar ops are checked on every output element.

    Args:
        fn: Function of Tensors returning a Tensor
        inputs: Input arrays (each becomes a leaf that requires gradients)
        step: Finite-difference step
        seed: Seed of the projection

    Returns:
        Worst relative error over all inputs:
        ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-12)
    """
    arrays = [np.array(a, dtype=np.float64) for a in inputs]
    sample_out = fn(*(Tensor(a) for a in arrays))
    projection = np.random.default_rng(seed).uniform(-1.0, 1.0, size=sample_out.shape)

    def scalar(*values: np.ndarray) -> float:
        out = fn(*(Tensor(v) for v in values))
        return float(np.sum(out.data * projection))

    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    tensor_sum(mul(fn(*leaves), Tensor(projection))).backward()

    worst = 0.0
    for index, leaf in enumerate(leaves):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)
        numeric = np.zeros_like(arrays[index])
        flat = numeric.reshape(-1)
        for k in range(arrays[index].size):
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[index].reshape(-1)[k] += step
            minus[index].reshape(-1)[k] -= step
            flat[k] = (scalar(*plus) - scalar(*minus)) / (2.0 * step)
        scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / scale))
    return worst

"""
SGD (heavy-ball momentum) and Adam update rules.

Both rules update parameter arrays in place and return the optimizer state,
so one training run owns its parameters and state exclusively.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import MLLeakOptimizerStateError
from ..schemas import OptimizerConfig, OptimizerKind
from .tensor import Parameters

_log = logging.getLogger(__name__)

Grads = Mapping[str, np.ndarray | None]


@dataclass
class OptimizerState:
    """
    Per-parameter optimizer buffers.

    Attributes:
        velocity: SGD momentum buffers
        first_moment: Adam first-moment estimates
        second_moment: Adam second-moment estimates
        t: Number of Adam steps taken so far
    """

    velocity: dict[str, np.ndarray] = field(default_factory=dict)
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def _grad_for(name: str, grads: Grads, shape: tuple[int, ...]) -> np.ndarray:
    grad = grads.get(name)
    if grad is None:
        raise MLLeakOptimizerStateError(f"Missing gradient for parameter {name!r}")
    if grad.shape != shape:
        raise MLLeakOptimizerStateError(
            f"Gradient for {name!r} has shape {grad.shape}, parameter has {shape}"
        )
    return grad


def sgd_step(
    params: Parameters,
    grads: Grads,
    cfg: OptimizerConfig,
    state: OptimizerState,
) -> OptimizerState:
    """
    One heavy-ball SGD step.

    g_eff = g + weight_decay * theta; v = momentum * v + g_eff;
    theta = theta - lr * v.

    Args:
        params: Parameters updated in place
        grads: Gradient per parameter name
        cfg: Optimizer configuration (beta1/beta2/epsilon unused)
        state: Momentum buffers, updated in place

    Returns:
        The updated state

    Raises:
        MLLeakOptimizerStateError: If a parameter has no gradient

    Example:
        >>> # theta=1.0, g=0.5, lr=0.1, no momentum, no decay -> 0.95
    """
    for name, tensor in params.items():
        theta = tensor.data
        grad = _grad_for(name, grads, theta.shape)
        g_eff = grad + cfg.weight_decay * theta if cfg.weight_decay else grad
        velocity = state.velocity.get(name)
        if velocity is None:
            velocity = np.zeros_like(theta)
        velocity = cfg.momentum * velocity + g_eff
        state.velocity[name] = velocity
        theta -= cfg.learning_rate * velocity
    return state


def adam_step(
    params: Parameters,
    grads: Grads,
    cfg: OptimizerConfig,
    state: OptimizerState,
    t: int,
) -> OptimizerState:
    """
    One bias-corrected Adam step.

    Args:
        params: Parameters updated in place
        grads: Gradient per parameter name
        cfg: Optimizer configuration (momentum unused)
        state: Moment buffers, updated in place
        t: Step index, starting at 1 and increasing by one per call

    Returns:
        The updated state

    Raises:
        MLLeakOptimizerStateError: If t < 1, t skips a step, or a gradient
            is missing
    """
    if t < 1:
        raise MLLeakOptimizerStateError(f"Adam step index must start at 1, got {t}")
    if t != state.t + 1:
        raise MLLeakOptimizerStateError(
            f"Adam step index must increase by one: previous {state.t}, got {t}"
        )
    b1, b2 = cfg.beta1, cfg.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for name, tensor in params.items():
        theta = tensor.data
        grad = _grad_for(name, grads, theta.shape)
        if cfg.weight_decay:
            grad = grad + cfg.weight_decay * theta
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None or v is None:
            m, v = np.zeros_like(theta), np.zeros_like(theta)
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        state.first_moment[name], state.second_moment[name] = m, v
        theta -= cfg.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.epsilon)
    state.t = t
    return state


def optimizer_step(
    params: Parameters, cfg: OptimizerConfig, state: OptimizerState
) -> OptimizerState:
    """Apply the configured rule using the gradients stored on the parameters."""
    grads = params.grads()
    if cfg.kind == OptimizerKind.ADAM:
        return adam_step(params, grads, cfg, state, state.t + 1)
    return sgd_step(params, grads, cfg, state)

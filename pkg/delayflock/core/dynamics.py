"""
Right-hand side of the delayed Cucker-Smale system

    x_a' = v_a
    v_a' = sum_{b != a} H_ab(t) (v_b(t - tau) - v_a(t)),
    H_ab(t) = psi(|x_a(t) - x_b(t - tau)|) / (N - 1).
"""
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from delayflock.core.errors import DomainError, IntegrationFault
from delayflock.core.kernels import KernelSpec
from delayflock.core.models import SystemConfig

DelayedLookup = Callable[[float], tuple[np.ndarray, np.ndarray]]


def influence(kernel: KernelSpec, agent_count: int, x_now: ArrayLike, x_delayed: ArrayLike) -> float:
    """
    Normalized weight H_ab between a current and a delayed position.

    Args:
        kernel: Influence kernel
        agent_count: N >= 2
        x_now: Current position of agent a
        x_delayed: Delayed position of agent b

    Returns:
        psi(|x_now - x_delayed|) / (N - 1)

    Raises:
        DomainError: On dimension mismatch or N < 2
    """
    x_now = np.asarray(x_now, dtype=float)
    x_delayed = np.asarray(x_delayed, dtype=float)
    if x_now.shape != x_delayed.shape:
        raise DomainError(f"dimension mismatch: {x_now.shape} vs {x_delayed.shape}")
    if agent_count < 2:
        raise DomainError("at least two agents are required")
    return float(kernel.evaluate(float(np.linalg.norm(x_now - x_delayed)))) / (agent_count - 1)


def influence_matrix(kernel: KernelSpec, positions: np.ndarray, delayed_positions: np.ndarray) -> np.ndarray:
    """
    All weights H_ab at once.

    Args:
        kernel: Influence kernel
        positions: Current positions (N, d)
        delayed_positions: Delayed positions (N, d)

    Returns:
        (N, N) matrix with zero diagonal
    """
    agent_count = positions.shape[0]
    gaps = positions[:, None, :] - delayed_positions[None, :, :]
    weights = kernel.evaluate(np.linalg.norm(gaps, axis=-1)) / (agent_count - 1)
    np.fill_diagonal(weights, 0.0)
    return weights


def acceleration(
    kernel: KernelSpec,
    positions: np.ndarray,
    velocities: np.ndarray,
    delayed_positions: np.ndarray,
    delayed_velocities: np.ndarray,
) -> np.ndarray:
    """
    Velocity derivative of every agent from current and delayed states.

    Returns:
        (N, d) accelerations
    """
    weights = influence_matrix(kernel, positions, delayed_positions)
    return weights @ delayed_velocities - weights.sum(axis=1)[:, None] * velocities


def rhs_velocity(
    config: SystemConfig,
    t: float,
    velocities_now: ArrayLike,
    lookup_delayed: DelayedLookup,
    positions_now: ArrayLike,
) -> np.ndarray:
    """
    Evaluate the velocity equation at time t.

    Args:
        config: System configuration
        t: Time, t >= 0 (t = 0 gives the right derivative)
        velocities_now: Current velocities (N, d)
        lookup_delayed: Maps t - tau to delayed (positions, velocities), each (N, d)
        positions_now: Current positions (N, d)

    Returns:
        (N, d) accelerations

    Raises:
        IntegrationFault: If the delayed lookup fails or t < 0
    """
    if t < 0:
        raise IntegrationFault("velocity equation evaluated before t=0", t)
    try:
        delayed_positions, delayed_velocities = lookup_delayed(t - config.delay)
    except DomainError as e:
        raise IntegrationFault(f"delayed lookup failed: {e}", t) from e

    return acceleration(
        config.kernel,
        np.asarray(positions_now, dtype=float),
        np.asarray(velocities_now, dtype=float),
        np.asarray(delayed_positions, dtype=float),
        np.asarray(delayed_velocities, dtype=float),
    )

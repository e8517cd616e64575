"""
Initial data on [-tau, 0].

Histories are queried in batches: states(times) returns positions and
velocities of shape (len(times), N, d). Position and velocity channels are
independent; nothing forces x0' = v0.
"""
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from delayflock.core.errors import DomainError

TIME_SLACK = 1e-12

ChannelFn = Callable[[np.ndarray], np.ndarray]


class HistorySet:
    """Per-agent position and velocity histories on [-tau, 0]."""

    def __init__(self, agent_count: int, dimension: int, delay: float):
        if agent_count < 2 or dimension < 1 or delay <= 0:
            raise DomainError(
                f"invalid history shape: agents={agent_count}, dimension={dimension}, delay={delay}"
            )
        self.agent_count = agent_count
        self.dimension = dimension
        self.delay = delay

    def states(self, times: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        """
        Evaluate the history.

        Args:
            times: Times in [-tau, 0]

        Returns:
            (positions, velocities), each of shape (len(times), N, d)

        Raises:
            DomainError: If a time lies outside [-tau, 0] or a value is not finite
        """
        t = self._checked_times(times)
        positions, velocities = self._evaluate(t)
        expected = (t.size, self.agent_count, self.dimension)
        positions = np.asarray(positions, dtype=float).reshape(expected)
        velocities = np.asarray(velocities, dtype=float).reshape(expected)
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise DomainError("history produced a non-finite value")
        return positions, velocities

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities of shape (N, d) at a single time."""
        positions, velocities = self.states([t])
        return positions[0], velocities[0]

    def sample_times(self, samples: int) -> np.ndarray:
        """Uniform grid of samples + 1 points on [-tau, 0]."""
        return np.linspace(-self.delay, 0.0, samples + 1)

    def _evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _checked_times(self, times: ArrayLike) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        slack = TIME_SLACK * self.delay
        if np.any(t < -self.delay - slack) or np.any(t > slack) or np.any(np.isnan(t)):
            raise DomainError(f"history time outside [-{self.delay}, 0]")
        return np.clip(t, -self.delay, 0.0)


class FunctionHistory(HistorySet):
    """Closed-form histories evaluated on demand."""

    def __init__(
        self,
        agent_count: int,
        dimension: int,
        delay: float,
        positions: ChannelFn,
        velocities: ChannelFn,
    ):
        """
        Args:
            agent_count: Number of agents N
            dimension: Space dimension d
            delay: tau
            positions: Maps times (T,) to positions (T, N, d)
            velocities: Maps times (T,) to velocities (T, N, d)
        """
        super().__init__(agent_count, dimension, delay)
        self._positions = positions
        self._velocities = velocities

    def _evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._positions(t), self._velocities(t)


class ConstantHistory(HistorySet):
    """Every agent frozen at one state for all s in [-tau, 0]."""

    def __init__(self, positions: ArrayLike, velocities: ArrayLike, delay: float):
        positions = np.asarray(positions, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        if positions.ndim != 2 or positions.shape != velocities.shape:
            raise DomainError("constant history needs position and velocity arrays of shape (N, d)")
        super().__init__(positions.shape[0], positions.shape[1], delay)
        self.positions = positions
        self.velocities = velocities

    def _evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        shape = (t.size,) + self.positions.shape
        return np.broadcast_to(self.positions, shape), np.broadcast_to(self.velocities, shape)


class SampledHistory(HistorySet):
    """
    Histories given as samples on the uniform grid {-tau, ..., 0}.

    Positions use cubic Hermite interpolation with the velocity samples as
    derivatives; velocities use monotone piecewise-cubic interpolation, which
    reduces to linear when only two samples exist.
    """

    def __init__(self, positions: ArrayLike, velocities: ArrayLike, delay: float):
        positions = np.asarray(positions, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        if positions.ndim != 3 or positions.shape != velocities.shape or positions.shape[0] < 2:
            raise DomainError("sampled history needs arrays of shape (samples >= 2, N, d)")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise DomainError("history samples must be finite")
        super().__init__(positions.shape[1], positions.shape[2], delay)
        self.grid = np.linspace(-delay, 0.0, positions.shape[0])
        self.positions = positions
        self.velocities = velocities
        self._position_spline = CubicHermiteSpline(self.grid, positions, velocities, axis=0)
        self._velocity_spline = PchipInterpolator(self.grid, velocities, axis=0)

    def _evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self._position_spline(t), self._velocity_spline(t)

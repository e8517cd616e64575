"""
Method-of-steps integrator: fixed-step RK4 with cubic Hermite dense output.

Because h divides tau, every delayed stage time of step k lies either in the
history or inside the completed step k - m, whose dense output is exact at
its nodes and at its midpoint.
"""
import math
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from delayflock.core.dynamics import acceleration
from delayflock.core.errors import ConfigValidationError, DomainError, IntegrationFault
from delayflock.core.history import HistorySet
from delayflock.core.models import AgentState, OrderEstimate, SystemConfig
from delayflock.utils.logging import log_run_event, logger

TIME_SLACK = 1e-12
SPEED_GUARD_FACTOR = 10.0
GUARD_SAMPLES_PER_STEP = 8
ORDER_REFINEMENTS = 3
ROUNDOFF_FLOOR = 1e-13


class Trajectory:
    """
    Solution on [-tau, T].

    Node arrays are indexed from -m: positions[j + m] is x at t_j = j h for
    j = -m, ..., n. accelerations[k] holds v' at t_k for k = 0, ..., n.
    """

    def __init__(
        self,
        config: SystemConfig,
        history: HistorySet,
        positions: np.ndarray,
        velocities: np.ndarray,
        accelerations: np.ndarray,
    ):
        self.config = config
        self.history = history
        self.positions = positions
        self.velocities = velocities
        self.accelerations = accelerations
        for array in (positions, velocities, accelerations):
            array.setflags(write=False)

    @property
    def step(self) -> float:
        return self.config.step

    @property
    def offset(self) -> int:
        return self.config.steps_per_delay

    def grid_times(self) -> np.ndarray:
        """All node times -tau, ..., 0, h, ..., T."""
        return np.arange(-self.offset, self.config.step_count + 1) * self.step

    def sample_times(self, per_step: int) -> np.ndarray:
        """Refinement grid with per_step samples per integration step, covering [-tau, T]."""
        return np.arange(-self.offset * per_step, self.config.step_count * per_step + 1) * (self.step / per_step)

    def states(self, times: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
        """
        Dense evaluation at many times.

        Args:
            times: Times in [-tau, T]

        Returns:
            (positions, velocities), each (len(times), N, d)

        Raises:
            DomainError: If a time lies outside [-tau, T]
        """
        t = np.atleast_1d(np.asarray(times, dtype=float))
        slack = TIME_SLACK * max(1.0, self.config.horizon)
        if np.any(t < -self.config.delay - slack) or np.any(t > self.config.horizon + slack) or np.any(np.isnan(t)):
            raise DomainError(f"time outside [-{self.config.delay}, {self.config.horizon}]")

        shape = (t.size, self.config.agent_count, self.config.dimension)
        positions = np.empty(shape)
        velocities = np.empty(shape)

        past = t <= 0.0
        if np.any(past):
            positions[past], velocities[past] = self.history.states(t[past])

        future = ~past
        if np.any(future):
            positions[future], velocities[future] = self._hermite(t[future])
        return positions, velocities

    def state(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Positions and velocities (N, d) at a single time."""
        positions, velocities = self.states([t])
        return positions[0], velocities[0]

    def _hermite(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h = self.step
        m = self.offset
        # t = T falls in the last step with theta = 1
        k = np.clip(np.floor(t / h).astype(int), 0, self.config.step_count - 1)
        theta = ((t - k * h) / h)[:, None, None]

        h00 = (1.0 + 2.0 * theta) * (1.0 - theta) ** 2
        h10 = theta * (1.0 - theta) ** 2
        h01 = theta ** 2 * (3.0 - 2.0 * theta)
        h11 = theta ** 2 * (theta - 1.0)

        x0, x1 = self.positions[k + m], self.positions[k + m + 1]
        v0, v1 = self.velocities[k + m], self.velocities[k + m + 1]
        a0, a1 = self.accelerations[k], self.accelerations[k + 1]

        positions = h00 * x0 + h10 * h * v0 + h01 * x1 + h11 * h * v1
        velocities = h00 * v0 + h10 * h * a0 + h01 * v1 + h11 * h * a1
        return positions, velocities


def integrate(config: SystemConfig, history: HistorySet, run_id: Optional[str] = None) -> Trajectory:
    """
    Solve the delayed system on [0, T] by the method of steps.

    Args:
        config: System configuration
        history: Initial data on [-tau, 0]
        run_id: Identifier used in log events

    Returns:
        Trajectory covering [-tau, T]

    Raises:
        ConfigValidationError: If the history does not match the configuration
        IntegrationFault: On a non-finite state or a tripped divergence guard
    """
    if (history.agent_count, history.dimension) != (config.agent_count, config.dimension):
        raise ConfigValidationError(
            f"history has {history.agent_count} agents in dimension {history.dimension}, "
            f"config expects {config.agent_count} in dimension {config.dimension}",
            field="history",
        )
    if not math.isclose(history.delay, config.delay, rel_tol=1e-12):
        raise ConfigValidationError(
            f"history delay {history.delay} differs from config delay {config.delay}", field="history"
        )

    run_id = run_id or "-"
    m = config.steps_per_delay
    n = config.step_count
    h = config.step
    kernel = config.kernel

    log_run_event(logger, "integration_started", run_id, agents=config.agent_count, steps=n, step=h)

    shape = (config.agent_count, config.dimension)
    positions = np.empty((m + n + 1,) + shape)
    velocities = np.empty((m + n + 1,) + shape)
    accelerations = np.empty((n + 1,) + shape)

    # rows 0..m are the history nodes t = -tau, ..., 0
    positions[: m + 1], velocities[: m + 1] = history.states(np.arange(-m, 1) * h)
    history_midpoints = history.states((np.arange(-m, 0) + 0.5) * h)

    # 10 R_V0 + 1: the exact solution never leaves the ball of radius R_V0
    guard_times = history.sample_times(m * GUARD_SAMPLES_PER_STEP)
    _, guard_velocities = history.states(guard_times)
    speed_cap = SPEED_GUARD_FACTOR * float(np.linalg.norm(guard_velocities, axis=-1).max()) + 1.0

    # FSAL: stage 1 of step k is the acceleration stored at node k
    accelerations[0] = acceleration(kernel, positions[m], velocities[m], positions[0], velocities[0])

    for k in range(n):
        x0, v0 = positions[m + k], velocities[m + k]
        # delayed stage times are t_{k-m}, its midpoint and t_{k+1-m}
        delayed_step = k - m
        if delayed_step < 0:
            xd_mid = history_midpoints[0][k]
            vd_mid = history_midpoints[1][k]
        else:
            # Hermite midpoint of step k - m; positions use v as slope, velocities use a
            xd_mid = 0.5 * (positions[k] + positions[k + 1]) + h * (velocities[k] - velocities[k + 1]) / 8.0
            vd_mid = 0.5 * (velocities[k] + velocities[k + 1]) + h * (
                accelerations[delayed_step] - accelerations[delayed_step + 1]
            ) / 8.0
        xd_end, vd_end = positions[k + 1], velocities[k + 1]

        # classical RK4; only the velocity equation sees the delay

        kv1 = accelerations[k]
        x2 = x0 + 0.5 * h * v0
        v2 = v0 + 0.5 * h * kv1
        kv2 = acceleration(kernel, x2, v2, xd_mid, vd_mid)
        x3 = x0 + 0.5 * h * v2
        v3 = v0 + 0.5 * h * kv2
        kv3 = acceleration(kernel, x3, v3, xd_mid, vd_mid)
        x4 = x0 + h * v3
        v4 = v0 + h * kv3
        kv4 = acceleration(kernel, x4, v4, xd_end, vd_end)

        x_next = x0 + h / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4)
        v_next = v0 + h / 6.0 * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4)

        t_next = (k + 1) * h
        if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(v_next))):
            raise IntegrationFault("non-finite state", t_next)
        if float(np.linalg.norm(v_next, axis=-1).max()) > speed_cap:
            raise IntegrationFault(f"speed exceeded divergence guard {speed_cap}", t_next)

        # node k+1 is final from here on; later steps read it as delayed data
        positions[m + k + 1] = x_next
        velocities[m + k + 1] = v_next
        accelerations[k + 1] = acceleration(kernel, x_next, v_next, positions[k + 1], velocities[k + 1])

    log_run_event(logger, "integration_finished", run_id, horizon=config.horizon)
    return Trajectory(config, history, positions, velocities, accelerations)


def dense_eval(traj: Trajectory, agent: int, t: float) -> AgentState:
    """
    State of one agent at any time in [-tau, T].

    Raises:
        DomainError: If the agent index or the time is out of range
    """
    if not 0 <= agent < traj.config.agent_count:
        raise DomainError(f"agent index {agent} out of range")
    positions, velocities = traj.state(t)
    return AgentState(position=tuple(positions[agent]), velocity=tuple(velocities[agent]))


def convergence_orders(errors: list[float], scale: float) -> list[float]:
    """
    log2 ratios of consecutive self-convergence errors.

    A ratio is skipped when either error sits at the roundoff floor
    1e-13 * scale; such a pair carries no order information.
    """
    floor = ROUNDOFF_FLOOR * scale
    return [
        math.log2(coarse / fine)
        for coarse, fine in zip(errors, errors[1:])
        if coarse > floor and fine > floor
    ]


def estimate_order(config: SystemConfig, history: HistorySet, at_time: float) -> OrderEstimate:
    """
    Self-convergence order of the state at `at_time`.

    Runs the integrator with steps m, 2m, 4m and 8m per delay and measures
    the errors of the first three against the finest run.

    Args:
        config: Base configuration (its m is the coarsest grid)
        history: Initial data
        at_time: Time in (0, T]

    Returns:
        OrderEstimate; order is NaN and degenerate is set when no error pair
        rises above roundoff
    """
    if not 0.0 < at_time <= config.horizon:
        raise DomainError(f"time {at_time} outside (0, {config.horizon}]")

    solutions = []
    for level in range(ORDER_REFINEMENTS + 1):
        refined = config.model_copy(update={"steps_per_delay": config.steps_per_delay * 2 ** level})
        positions, velocities = integrate(refined, history).state(at_time)
        solutions.append(np.concatenate([positions.ravel(), velocities.ravel()]))

    reference = solutions[-1]
    errors = [float(np.linalg.norm(s - reference)) for s in solutions[:-1]]
    scale = max(1.0, float(np.linalg.norm(reference)))

    successive = convergence_orders(errors, scale)
    if not successive:
        return OrderEstimate(
            order=float("nan"), successive_orders=[], errors=errors, degenerate=True, at_time=at_time
        )

    return OrderEstimate(
        order=float(np.mean(successive)),
        successive_orders=successive,
        errors=errors,
        degenerate=False,
        at_time=at_time,
    )

"""
Flocking observables computed from a trajectory.

Continuous maxima are taken over the refinement grid with
settings.DENSE_SAMPLES_PER_STEP samples per integration step; every
integration node belongs to that grid.
"""
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import cumulative_simpson, trapezoid
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from delayflock.config import settings
from delayflock.core.errors import DomainError
from delayflock.core.history import HistorySet
from delayflock.core.integrator import Trajectory
from delayflock.core.kernels import KernelSpec
from delayflock.core.models import DiagnosticsSeries
from delayflock.utils.numerics import capped_integral_path

UNIT_TOLERANCE = 1e-12
PDIST_CHUNK = 4096
SPAN_RTOL = 1e-10


def pairwise_diameters(points: np.ndarray) -> np.ndarray:
    """
    Max pairwise Euclidean distance between agents, per time.

    Args:
        points: Array (T, N, d)

    Returns:
        Array (T,)
    """
    agent_count = points.shape[1]
    diameters = np.zeros(points.shape[0])
    for a in range(agent_count - 1):
        gaps = np.linalg.norm(points[:, a + 1:, :] - points[:, a:a + 1, :], axis=-1)
        diameters = np.maximum(diameters, gaps.max(axis=1))
    return diameters


def affine_coordinates(points: np.ndarray) -> np.ndarray:
    """
    Coordinates of a point cloud in an orthonormal basis of its affine span.

    Distances are preserved; the result has one column per non-negligible
    singular direction.
    """
    centered = points - points.mean(axis=0)
    _, singular, basis = np.linalg.svd(centered, full_matrices=False)
    if singular.size == 0 or singular[0] == 0.0:
        return np.zeros((points.shape[0], 0))
    rank = int(np.count_nonzero(singular > SPAN_RTOL * singular[0]))
    return centered @ basis[:rank].T


def cloud_diameter(points: np.ndarray) -> float:
    """
    Diameter of a point cloud (M, d).

    Uses hull vertices when the cloud spans its space. Flat clouds are
    projected onto their affine span first; a collinear cloud reduces to a range.
    """
    if points.shape[0] < 2:
        return 0.0
    if points.shape[1] == 0:
        return 0.0
    if points.shape[1] == 1:
        return float(np.ptp(points))

    candidates = points
    if points.shape[0] > points.shape[1] + 1:
        try:
            candidates = points[ConvexHull(points).vertices]
        except (QhullError, ValueError):
            reduced = affine_coordinates(points)
            if reduced.shape[1] < points.shape[1]:
                return cloud_diameter(reduced)
            # full rank but too thin for qhull's precision checks
            candidates = points[ConvexHull(points, qhull_options="QJ").vertices]

    if candidates.shape[0] <= PDIST_CHUNK:
        return float(pdist(candidates).max()) if candidates.shape[0] > 1 else 0.0

    best = 0.0
    for start in range(0, candidates.shape[0], PDIST_CHUNK):
        block = candidates[start:start + PDIST_CHUNK]
        gaps = np.linalg.norm(block[:, None, :] - candidates[None, :, :], axis=-1)
        best = max(best, float(gaps.max()))
    return best


def diameter_positions(traj: Trajectory, t: float) -> float:
    """d_X(t): max pairwise distance between agent positions."""
    positions, _ = traj.states([t])
    return float(pairwise_diameters(positions)[0])


def diameter_velocities(traj: Trajectory, t: float) -> float:
    """d_V(t): max pairwise distance between agent velocities."""
    _, velocities = traj.states([t])
    return float(pairwise_diameters(velocities)[0])


def _interval_samples(n: int, delay: float, per_delay: int) -> np.ndarray:
    return (n - 1) * delay + np.arange(per_delay + 1) * (delay / per_delay)


def interval_diameter(traj: Trajectory, n: int, samples_per_step: Optional[int] = None) -> float:
    """
    I_n: diameter of all velocities over all agents and times in [n tau - tau, n tau].

    The maximum runs over sampled times, so it lower-bounds the continuous value.

    Raises:
        DomainError: If the interval leaves [-tau, T]
    """
    per_step = samples_per_step or settings.DENSE_SAMPLES_PER_STEP
    config = traj.config
    if n < 0 or n > config.delay_count:
        raise DomainError(f"interval {n} outside [0, {config.delay_count}]")
    times = _interval_samples(n, config.delay, config.steps_per_delay * per_step)
    _, velocities = traj.states(times)
    return cloud_diameter(velocities.reshape(-1, config.dimension))


def history_interval_diameter(history: HistorySet, steps_per_delay: int, samples_per_step: Optional[int] = None) -> float:
    """I_0 from the history alone."""
    per_step = samples_per_step or settings.DENSE_SAMPLES_PER_STEP
    _, velocities = history.states(history.sample_times(steps_per_delay * per_step))
    return cloud_diameter(velocities.reshape(-1, history.dimension))


def initial_speed_bound(history: HistorySet, steps_per_delay: Optional[int] = None, samples_per_step: Optional[int] = None) -> float:
    """
    R_V0: max speed over agents and s in [-tau, 0].

    Args:
        history: Initial data
        steps_per_delay: Integration steps per delay, m
        samples_per_step: Refinement factor

    Returns:
        Max Euclidean speed over the refinement grid
    """
    m = steps_per_delay or settings.DEFAULT_STEPS_PER_DELAY
    per_step = samples_per_step or settings.DENSE_SAMPLES_PER_STEP
    _, velocities = history.states(history.sample_times(m * per_step))
    return float(np.linalg.norm(velocities, axis=-1).max())


def directional_velocity_gap(traj: Trajectory, a: int, b: int, u: ArrayLike, t: float) -> float:
    """
    <v_a(t) - v_b(t), u> for a unit vector u.

    Raises:
        DomainError: If u is not a unit vector or an index is out of range
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (traj.config.dimension,) or abs(float(np.linalg.norm(u)) - 1.0) > UNIT_TOLERANCE:
        raise DomainError("direction must be a unit vector of the space dimension")
    for agent in (a, b):
        if not 0 <= agent < traj.config.agent_count:
            raise DomainError(f"agent index {agent} out of range")
    _, velocities = traj.state(t)
    return float(np.dot(velocities[a] - velocities[b], u))


def phi_eval(kernel: KernelSpec, tau: float, speed_bound: float, running_max_dx: ArrayLike):
    """
    phi = min{ e^{-K tau} psi(tau R_V0 + max_{[0,t]} d_X), e^{-2 K tau} / tau }.

    Args:
        kernel: Influence kernel
        tau: Delay
        speed_bound: R_V0
        running_max_dx: max of d_X over [0, t] (scalar or array)

    Returns:
        phi, a float for scalar input and an array otherwise
    """
    k_sup = kernel.sup()
    first = np.exp(-k_sup * tau) * np.asarray(kernel.evaluate(tau * speed_bound + np.asarray(running_max_dx, dtype=float)))
    values = np.minimum(first, np.exp(-2.0 * k_sup * tau) / tau)
    return float(values) if np.ndim(values) == 0 else values


def relative_state(traj: Trajectory, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Relative position and velocity of the first two agents, x_0 - x_1 and v_0 - v_1."""
    positions, velocities = traj.state(t)
    return positions[0] - positions[1], velocities[0] - velocities[1]


def _integrate_segment(values: np.ndarray, spacing: float) -> np.ndarray:
    """Running integral of samples starting at 0."""
    if values.size == 1:
        return np.zeros(1)
    if values.size == 2:
        return np.array([0.0, trapezoid(values, dx=spacing)])
    return cumulative_simpson(values, dx=spacing, initial=0.0)


def sample_series(traj: Trajectory, samples_per_step: Optional[int] = None) -> DiagnosticsSeries:
    """
    d_X, d_V, running max of d_X, phi and every I_n on the refinement grid.

    Args:
        traj: Trajectory
        samples_per_step: Refinement factor (settings default when None)

    Returns:
        DiagnosticsSeries without the Lyapunov functions
    """
    config = traj.config
    per_step = samples_per_step or settings.DENSE_SAMPLES_PER_STEP
    per_delay = config.steps_per_delay * per_step

    times = traj.sample_times(per_step)
    positions, velocities = traj.states(times)
    d_x = pairwise_diameters(positions)
    d_v = pairwise_diameters(velocities)

    speed_bound = initial_speed_bound(traj.history, config.steps_per_delay, per_step)

    running_max = np.full(times.size, np.nan)
    running_max[per_delay:] = np.maximum.accumulate(d_x[per_delay:])
    phi = np.full(times.size, np.nan)
    phi[per_delay:] = phi_eval(config.kernel, config.delay, speed_bound, running_max[per_delay:])

    interval_diameters = [
        cloud_diameter(velocities[n * per_delay:(n + 1) * per_delay + 1].reshape(-1, config.dimension))
        for n in range(config.delay_count + 1)
    ]

    return DiagnosticsSeries(
        times=times,
        d_x=d_x,
        d_v=d_v,
        running_max_dx=running_max,
        phi=phi,
        interval_diameters=interval_diameters,
        samples_per_step=per_step,
        samples_per_delay=per_delay,
        kernel_sup=config.kernel.sup(),
        speed_bound=speed_bound,
        delay=config.delay,
    )


def lyapunov_series(traj: Trajectory, samples_per_step: Optional[int] = None) -> DiagnosticsSeries:
    """
    Sampled observables together with the Lyapunov functions D and L.

    D(t) = I_0 on [-tau, 2 tau]; on [n tau, (n+1) tau], n >= 2,
    D(t) = D(n tau) (1 - e^{-K tau} int_{n tau}^t phi)^{1/3}.
    L(t) = D(t) + (e^{-K tau}/3) G(tau R_V0 + max_{[0,t]} d_X) for t >= 0.

    Raises:
        DomainError: If the horizon is shorter than two delays
    """
    config = traj.config
    if config.horizon < 2.0 * config.delay * (1.0 - 1e-12):
        raise DomainError("Lyapunov functions need a horizon of at least two delays")

    series = sample_series(traj, samples_per_step)
    per_delay = series.samples_per_delay
    spacing = config.delay / per_delay
    damping = np.exp(-series.kernel_sup * config.delay)
    size = series.times.size

    lyapunov_d = np.full(size, series.interval_diameters[0])
    n = 2
    while series.delay_index(n) < size - 1:
        start = series.delay_index(n)
        stop = min(start + per_delay, size - 1)
        accumulated = _integrate_segment(series.phi[start:stop + 1], spacing)
        factor = np.clip(1.0 - damping * accumulated, 0.0, None)
        lyapunov_d[start:stop + 1] = lyapunov_d[start] * np.cbrt(factor)
        n += 1

    lyapunov_l = np.full(size, np.nan)
    levels = config.delay * series.speed_bound + series.running_max_dx[per_delay:]
    lyapunov_l[per_delay:] = lyapunov_d[per_delay:] + damping / 3.0 * capped_integral_path(
        config.kernel, config.delay, levels
    )

    return series.model_copy(update={"lyapunov_d": lyapunov_d, "lyapunov_l": lyapunov_l})

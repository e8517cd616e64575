"""
Numerical verdicts on every inequality the flocking proof relies on.

Each check reports its worst margin (right side minus left side); a check
passes when that margin is at least -tol with tol = CHECK_TOLERANCE * max(I_0, 1).
"""
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from delayflock.config import settings
from delayflock.core.diagnostics import lyapunov_series
from delayflock.core.errors import DomainError
from delayflock.core.integrator import Trajectory
from delayflock.core.models import (
    DiagnosticsSeries,
    FlockingCertificate,
    Inequality,
    InequalityVerdict,
    RunSummary,
    VerdictReport,
)
from delayflock.utils.logging import log_run_event, logger

HULL_SEED = 20240601
LYAPUNOV_START_DELAYS = 2


def _verdict(inequality: Inequality, margins: np.ndarray, locations: np.ndarray, tolerance: float) -> InequalityVerdict:
    margins = np.asarray(margins, dtype=float).ravel()
    locations = np.asarray(locations, dtype=float).ravel()
    if margins.size == 0:
        return InequalityVerdict(
            inequality=inequality, worst_margin=float("inf"), worst_location=float("nan"), passed=True, evaluations=0
        )
    worst = int(np.argmin(margins))
    return InequalityVerdict(
        inequality=inequality,
        worst_margin=float(margins[worst]),
        worst_location=float(locations[worst]),
        passed=bool(margins[worst] >= -tolerance),
        evaluations=int(margins.size),
    )


def hull_directions(dimension: int, count: Optional[int] = None) -> np.ndarray:
    """Seeded random unit directions together with their negatives, shape (2 count, d)."""
    count = count or settings.VELOCITY_HULL_DIRECTIONS
    rng = np.random.Generator(np.random.PCG64(HULL_SEED))
    directions = rng.standard_normal((count, dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return np.vstack([directions, -directions])


def _velocity_hull(velocities: np.ndarray, series: DiagnosticsSeries, interval_count: int):
    """
    Projections of later velocities never exceed the projections over the
    interval [n tau - tau, n tau].
    """
    per_delay = series.samples_per_delay
    directions = hull_directions(velocities.shape[-1])

    block_maxima = []
    start = 0
    while start < velocities.shape[0]:
        stop = min(start + per_delay + 1, velocities.shape[0])
        projections = velocities[start:stop] @ directions.T
        block_maxima.append(projections.max(axis=(0, 1)))
        start += per_delay
    block_maxima = np.asarray(block_maxima)

    later = np.maximum.accumulate(block_maxima[::-1], axis=0)[::-1]
    margins = block_maxima[:interval_count] - later[:interval_count]
    locations = np.repeat(np.arange(interval_count), directions.shape[0]).reshape(margins.shape)
    return margins, locations


def check_paper_inequalities(
    traj: Trajectory,
    cert: FlockingCertificate,
    series: Optional[DiagnosticsSeries] = None,
    notes: Optional[list[str]] = None,
    run_id: Optional[str] = None,
) -> VerdictReport:
    """
    Check every proven inequality along a simulated trajectory.

    Args:
        traj: Trajectory with horizon >= 3 tau
        cert: Certificate computed from the same history
        series: Precomputed Lyapunov series (computed here when None)
        notes: Free-form notes copied to the report summary
        run_id: Identifier used in log events

    Returns:
        VerdictReport with one verdict per inequality

    Raises:
        DomainError: If the horizon is shorter than three delays
    """
    config = traj.config
    tau = config.delay
    if config.horizon < 3.0 * tau * (1.0 - 1e-12):
        raise DomainError("verification needs a horizon of at least three delays")

    series = series if series is not None and series.lyapunov_d is not None else lyapunov_series(traj)
    per_delay = series.samples_per_delay
    times = series.times
    zero = per_delay
    damping = np.exp(-series.kernel_sup * tau)
    intervals = np.asarray(series.interval_diameters)
    initial_diameter = float(intervals[0])
    tolerance = settings.CHECK_TOLERANCE * max(initial_diameter, 1.0)
    spacing = tau / per_delay

    positions, velocities = traj.states(times)
    verdicts = []

    # Bounds on the velocity field
    # I_{n+1} <= I_n
    verdicts.append(_verdict(
        Inequality.INTERVAL_MONOTONE, intervals[:-1] - intervals[1:], np.arange(1, intervals.size), tolerance
    ))

    # support function over [n tau - tau, n tau] bounds every later velocity
    hull_margins, hull_locations = _velocity_hull(velocities, series, intervals.size)
    verdicts.append(_verdict(Inequality.VELOCITY_HULL, hull_margins, hull_locations, tolerance))

    # |v_a(t)| <= R_V0
    speeds = np.linalg.norm(velocities, axis=-1).max(axis=1)
    verdicts.append(_verdict(Inequality.SPEED_BOUND, series.speed_bound - speeds, times, tolerance))

    # |x_a(t - tau) - x_b(t)| <= tau R_V0 + d_X(t - tau)
    delayed = positions[:-per_delay]
    current = positions[per_delay:]
    cross = np.zeros(current.shape[0])
    for a in range(config.agent_count):
        gaps = np.linalg.norm(delayed[:, a:a + 1, :] - current, axis=-1)
        cross = np.maximum(cross, gaps.max(axis=1))
    verdicts.append(_verdict(
        Inequality.CROSS_DELAY_POSITION,
        tau * series.speed_bound + series.d_x[:-per_delay] - cross,
        times[per_delay:],
        tolerance,
    ))

    # Interval recursions
    n_values = np.arange(intervals.size - 1)
    dv_at_delays = series.d_v[[series.delay_index(n) for n in n_values]]
    # I_{n+1} <= e^{-K tau} d_V(n tau) + (1 - e^{-K tau}) I_n
    gronwall_rhs = damping * dv_at_delays + (1.0 - damping) * intervals[:-1]
    verdicts.append(_verdict(
        Inequality.ENDPOINT_GRONWALL, gronwall_rhs - intervals[1:], (n_values + 1) * tau, tolerance
    ))

    # I_{n+1} <= (1 - e^{-K tau} int phi) I_{n-2}, phi integrated over [(n-2) tau, (n-1) tau]
    contraction_margins = []
    contraction_locations = []
    for n in range(2, intervals.size - 1):
        window = series.phi[series.delay_index(n - 2):series.delay_index(n - 1) + 1]
        phi_integral = float(simpson(window, dx=spacing))
        contraction_margins.append((1.0 - damping * phi_integral) * intervals[n - 2] - intervals[n + 1])
        contraction_locations.append((n + 1) * tau)
    verdicts.append(_verdict(Inequality.CONTRACTION, contraction_margins, contraction_locations, tolerance))

    # Lyapunov functions
    # D >= d_V everywhere and D(n tau) >= I_n
    dominate_margins = [series.lyapunov_d - series.d_v]
    dominate_locations = [times]
    for n in range(intervals.size - 1):
        dominate_margins.append(np.atleast_1d(series.lyapunov_d[series.delay_index(n + 1)] - intervals[n + 1]))
        dominate_locations.append(np.atleast_1d((n + 1) * tau))
    verdicts.append(_verdict(
        Inequality.LYAPUNOV_DOMINATES,
        np.concatenate(dominate_margins),
        np.concatenate(dominate_locations),
        tolerance,
    ))

    # L is non-increasing from 2 tau on; compared against the running minimum
    window_start = series.delay_index(LYAPUNOV_START_DELAYS)
    lyapunov = series.lyapunov_l[window_start:]
    earlier_min = np.minimum.accumulate(lyapunov[:-1])
    verdicts.append(_verdict(
        Inequality.LYAPUNOV_MONOTONE, earlier_min - lyapunov[1:], times[window_start + 1:], tolerance
    ))

    # Certificate consequences
    max_dx = float(series.d_x[zero:].max())
    sup_dx = float(series.d_x.max())
    position_budget = tau * series.speed_bound + max_dx
    if cert.exists:
        # d_V <= I_0 e^{-C (t - 2 tau)}; tau R_V0 + max_{t >= 0} d_X <= d* and sup d_X <= d*
        verdicts.append(_verdict(Inequality.ENVELOPE, cert.envelope(times) - series.d_v, times, tolerance))
        worst_dx = zero + int(np.argmax(series.d_x[zero:]))
        verdicts.append(_verdict(
            Inequality.POSITION_BOUND, [cert.dstar - position_budget], [times[worst_dx]], tolerance
        ))
        verdicts.append(_verdict(
            Inequality.POSITION_BOUND_SUP, [cert.dstar - sup_dx], [times[int(np.argmax(series.d_x))]], tolerance
        ))

    summary = RunSummary(
        max_dv_first_delay=float(series.d_v[zero:series.delay_index(1) + 1].max()),
        final_dv=float(series.d_v[-1]),
        max_dx=max_dx,
        position_budget=position_budget,
        sup_dx=sup_dx,
        samples_per_step=series.samples_per_step,
        notes=list(notes or []),
    )
    passed = all(v.passed for v in verdicts)
    log_run_event(
        logger,
        "verdicts_computed",
        run_id,
        passed=passed,
        failures=",".join(v.inequality.value for v in verdicts if not v.passed) or "none",
    )
    return VerdictReport(certificate=cert, verdicts=verdicts, passed=passed, tolerance=tolerance, summary=summary)


"""
A-priori flocking certificate: the position bound d* and the decay rate C.

Everything here depends on the history only; no simulation is needed.
"""
import logging
import math
import sys
from typing import Optional

from delayflock.config import settings
from delayflock.core.diagnostics import history_interval_diameter, initial_speed_bound, pairwise_diameters
from delayflock.core.errors import DomainError
from delayflock.core.history import HistorySet
from delayflock.core.kernels import KernelSpec
from delayflock.core.models import CertificateAbsence, FlockingCertificate, SystemConfig
from delayflock.utils.logging import log_run_event, logger
from delayflock.utils.numerics import (
    INITIAL_PANELS,
    capped_integral_limit,
    capped_log_integral,
    solve_increasing,
)

ROOT_RTOL = 1e-12
ROOT_CONVERGENCE = 1e-6
MAX_PANEL_DOUBLINGS = 8
CAP_SLACK = 1e-12
LOG_FLOAT_MAX = math.log(sys.float_info.max)


def log_dstar_bound(
    kernel: KernelSpec,
    tau: float,
    speed_bound: float,
    initial_diameter: float,
    start_diameter: float = 0.0,
) -> Optional[float]:
    """
    ln(1 + d*), where (e^{-K tau}/3) int_{y0}^{d*} min{e^{-K tau} psi, e^{-2 K tau}/tau} ds = I_0.

    The lower limit is y0 = tau R_V0 + start_diameter, the largest value the
    integral's upper limit can take before L starts decreasing. The equation
    is solved in ln(1 + d), which stays finite when d* itself overflows.

    Args:
        kernel: Influence kernel
        tau: Delay
        speed_bound: R_V0
        initial_diameter: I_0
        start_diameter: Bound on d_X before the Lyapunov function is non-increasing

    Returns:
        ln(1 + d*), or None when the kernel's finite integral cannot absorb I_0

    Raises:
        DomainError: If an input is negative, tau is zero, or ln(1 + d*) exceeds 1e300
    """
    if min(tau, speed_bound, initial_diameter, start_diameter) < 0 or tau == 0:
        raise DomainError("dstar inputs must be non-negative with tau > 0")

    lower = tau * speed_bound + start_diameter
    log_lower = math.log1p(lower)
    if initial_diameter == 0:
        return log_lower

    target = 3.0 * initial_diameter * math.exp(kernel.sup() * tau)

    if not kernel.integral_diverges():
        budget = capped_integral_limit(kernel, tau, lower)
        if budget <= target:
            logger.info(f"Kernel integral {budget:.6g} cannot absorb {target:.6g}, no d* exists")
            return None

    root = None
    panels = INITIAL_PANELS
    for _ in range(MAX_PANEL_DOUBLINGS):
        current = solve_increasing(
            lambda v: capped_log_integral(kernel, tau, v, log_lower, panels) - target,
            log_lower,
            rtol=ROOT_RTOL,
        )
        if current is None:
            raise DomainError("d* bracket exceeded the floating-point range in ln(1 + d)")
        # absolute in ln(1 + d) is relative in d once d is large
        if root is not None and abs(current - root) <= ROOT_CONVERGENCE * min(1.0, current):
            return current
        root = current
        panels *= 2

    logger.warning(f"d* quadrature did not settle after {MAX_PANEL_DOUBLINGS} refinements")
    return root


def dstar_bound(
    kernel: KernelSpec,
    tau: float,
    speed_bound: float,
    initial_diameter: float,
    start_diameter: float = 0.0,
) -> Optional[float]:
    """
    d* itself: inf when it lies past the float range, None when no root exists.

    See log_dstar_bound for the equation.
    """
    log_dstar = log_dstar_bound(kernel, tau, speed_bound, initial_diameter, start_diameter)
    if log_dstar is None:
        return None
    if initial_diameter == 0:
        return tau * speed_bound + start_diameter
    return from_log1p(log_dstar)


def from_log1p(value: float) -> float:
    """e^value - 1, or inf past the float range."""
    return math.inf if value > LOG_FLOAT_MAX else math.expm1(value)


def decay_rate(kernel_sup: float, tau: float, phi_floor: float) -> float:
    """
    C = ln(1 / (1 - e^{-K tau} tau phi)) / (3 tau).

    Args:
        kernel_sup: K > 0
        tau: Delay > 0
        phi_floor: 0 < phi <= e^{-2 K tau} / tau

    Returns:
        Positive decay rate

    Raises:
        DomainError: If an argument is outside its admissible range
    """
    if kernel_sup <= 0 or tau <= 0:
        raise DomainError("decay rate needs K > 0 and tau > 0")
    cap = math.exp(-2.0 * kernel_sup * tau) / tau
    if not 0 < phi_floor <= cap * (1.0 + CAP_SLACK):
        raise DomainError(f"phi floor {phi_floor} outside (0, {cap}]")
    return -math.log1p(-math.exp(-kernel_sup * tau) * tau * min(phi_floor, cap)) / (3.0 * tau)


def certify(
    config: SystemConfig,
    history: HistorySet,
    samples_per_step: Optional[int] = None,
    run_id: Optional[str] = None,
) -> FlockingCertificate:
    """
    Build the flocking certificate from the history.

    start_diameter bounds d_X on [-tau, 2 tau]: d_X moves at most at speed
    d_V <= I_0 after t = 0.

    Args:
        config: System configuration
        history: Initial data
        samples_per_step: Refinement factor (settings default when None)
        run_id: Identifier used in log events

    Returns:
        FlockingCertificate; phi floor and C are None without a certificate,
        and `absence` says why
    """
    per_step = samples_per_step or settings.DENSE_SAMPLES_PER_STEP
    m = config.steps_per_delay
    kernel = config.kernel
    tau = config.delay

    k_sup = kernel.sup()
    speed_bound = initial_speed_bound(history, m, per_step)
    initial_diameter = history_interval_diameter(history, m, per_step)

    positions, _ = history.states(history.sample_times(m * per_step))
    history_dx = pairwise_diameters(positions)
    start_diameter = max(float(history_dx.max()), float(history_dx[-1]) + 2.0 * tau * initial_diameter)

    diverges = kernel.integral_diverges()
    fields = dict(
        kernel_sup=k_sup,
        speed_bound=speed_bound,
        initial_diameter=initial_diameter,
        integral_diverges=diverges,
        delay=tau,
        start_diameter=start_diameter,
    )

    if not diverges:
        log_run_event(logger, "certificate_absent", run_id, logging.WARNING, reason=CertificateAbsence.FINITE_INTEGRAL)
        return FlockingCertificate(**fields, absence=CertificateAbsence.FINITE_INTEGRAL)

    log_dstar = log_dstar_bound(kernel, tau, speed_bound, initial_diameter, start_diameter)
    dstar = tau * speed_bound + start_diameter if initial_diameter == 0 else from_log1p(log_dstar)

    # math.exp rounds to 0.0 on underflow
    log_phi = min(-k_sup * tau + kernel.log_evaluate_expm1(log_dstar), -2.0 * k_sup * tau - math.log(tau))
    phi_floor = math.exp(log_phi)
    if phi_floor == 0.0:
        log_run_event(
            logger, "certificate_absent", run_id, logging.WARNING,
            reason=CertificateAbsence.PHI_UNDERFLOW, log1p_dstar=log_dstar, log_phi=log_phi,
        )
        return FlockingCertificate(**fields, dstar=dstar, absence=CertificateAbsence.PHI_UNDERFLOW)

    rate = decay_rate(k_sup, tau, phi_floor)
    log_run_event(logger, "certificate_computed", run_id, dstar=dstar, phi_floor=phi_floor, decay_rate=rate)
    return FlockingCertificate(**fields, dstar=dstar, phi_floor=phi_floor, decay_rate=rate)

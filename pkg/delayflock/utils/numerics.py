"""
Quadrature and root-finding helpers for the capped influence integral

    G(y) = integral_0^y min{ e^{-K tau} psi(s), e^{-2 K tau} / tau } ds.

The integral is taken in u = ln(1 + s) so that very large upper limits
keep a fixed panel count. For kernels decaying like 1/s the root d* can
lie past the float range, so it is sought in u as well.
"""
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, simpson
from scipy.optimize import bisect

from delayflock.core.kernels import KernelSpec

INITIAL_PANELS = 10_000
MAX_BRACKET = 1e300


def capped_integrand(kernel: KernelSpec, tau: float) -> Callable[[np.ndarray], np.ndarray]:
    """
    Build s -> min{e^{-K tau} psi(s), e^{-2 K tau} / tau}.

    Args:
        kernel: Influence kernel
        tau: Delay

    Returns:
        Vectorized integrand
    """
    k_sup = kernel.sup()
    damping = np.exp(-k_sup * tau)
    cap = np.exp(-2.0 * k_sup * tau) / tau

    def integrand(s):
        return np.minimum(damping * np.asarray(kernel.evaluate(s)), cap)

    return integrand


def capped_log_integrand(kernel: KernelSpec, tau: float) -> Callable[[np.ndarray], np.ndarray]:
    """
    Build u -> min{e^{-K tau} psi(s), e^{-2 K tau} / tau} e^u with s = e^u - 1.

    Evaluated in log space, so it stays finite for log-radii far past the float range.
    """
    k_sup = kernel.sup()
    log_damping = -k_sup * tau
    log_cap = -2.0 * k_sup * tau - np.log(tau)

    def integrand(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(np.minimum(log_damping + kernel.log_evaluate_expm1(u), log_cap) + u)

    return integrand


def capped_log_integral(
    kernel: KernelSpec,
    tau: float,
    log_upper: float,
    log_lower: float = 0.0,
    panels: int = INITIAL_PANELS,
) -> float:
    """
    Integrate the capped kernel between ln(1 + s) limits with composite Simpson.

    Args:
        kernel: Influence kernel
        tau: Delay
        log_upper: ln(1 + upper)
        log_lower: ln(1 + lower), >= 0
        panels: Even number of Simpson panels

    Returns:
        Integral value, 0 when log_upper <= log_lower
    """
    if log_upper <= log_lower:
        return 0.0
    u = np.linspace(log_lower, log_upper, panels + 1)
    return float(simpson(capped_log_integrand(kernel, tau)(u), x=u))


def capped_integral(
    kernel: KernelSpec,
    tau: float,
    upper: float,
    lower: float = 0.0,
    panels: int = INITIAL_PANELS,
) -> float:
    """
    Integrate the capped kernel over [lower, upper] with composite Simpson in ln(1 + s).

    Args:
        kernel: Influence kernel
        tau: Delay
        upper: Upper limit
        lower: Lower limit (>= 0)
        panels: Even number of Simpson panels

    Returns:
        Integral value, 0 when upper <= lower
    """
    if upper <= lower:
        return 0.0
    return capped_log_integral(kernel, tau, float(np.log1p(upper)), float(np.log1p(lower)), panels)


def capped_integral_path(kernel: KernelSpec, tau: float, levels: np.ndarray) -> np.ndarray:
    """
    Evaluate G along a non-decreasing sequence of upper limits.

    The first level gets a full quadrature; every later level adds a
    two-panel Simpson increment, which is exact enough because consecutive
    levels sit one sampling step apart.

    Args:
        kernel: Influence kernel
        tau: Delay
        levels: Non-decreasing upper limits

    Returns:
        G(levels)
    """
    levels = np.asarray(levels, dtype=float)
    if levels.size == 0:
        return levels.copy()
    g = capped_integrand(kernel, tau)
    a = levels[:-1]
    b = levels[1:]
    increments = (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b))
    start = capped_integral(kernel, tau, float(levels[0]))
    return start + np.concatenate(([0.0], np.cumsum(increments)))


def capped_integral_limit(kernel: KernelSpec, tau: float, lower: float = 0.0) -> float:
    """
    Integral of the capped kernel over [lower, inf).

    Only meaningful for kernels with a finite integral.

    Args:
        kernel: Influence kernel
        tau: Delay
        lower: Lower limit

    Returns:
        Tail integral
    """
    g = capped_integrand(kernel, tau)
    value, _ = quad(lambda s: float(g(s)), lower, np.inf, limit=200)
    return float(value)


def bracket_increasing(fn: Callable[[float], float], lower: float) -> Optional[float]:
    """
    Find upper > lower with fn(upper) >= 0 for a non-decreasing fn.

    Args:
        fn: Non-decreasing function with fn(lower) <= 0
        lower: Left end of the search

    Returns:
        Right bracket, or None if none exists below MAX_BRACKET
    """
    step = max(1.0, abs(lower))
    upper = lower + step
    while fn(upper) < 0:
        if upper >= MAX_BRACKET:
            return None
        step *= 10.0
        upper = min(lower + step, MAX_BRACKET)
    return upper


def solve_increasing(fn: Callable[[float], float], lower: float, rtol: float = 1e-12) -> Optional[float]:
    """
    Root of a non-decreasing function by bracketing and bisection.

    Args:
        fn: Non-decreasing function with fn(lower) <= 0
        lower: Left end of the search
        rtol: Relative tolerance passed to bisection

    Returns:
        Root, or None if fn never reaches 0
    """
    if fn(lower) >= 0:
        return lower
    upper = bracket_increasing(fn, lower)
    if upper is None:
        return None
    return float(bisect(fn, lower, upper, xtol=1e-14, rtol=rtol, maxiter=2000))

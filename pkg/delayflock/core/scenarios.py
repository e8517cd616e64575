"""
Built-in scenarios: initial data from the flocking literature plus seeded random flocks.
"""
from typing import Optional

import numpy as np

from delayflock.config import settings
from delayflock.core.errors import ConfigValidationError, DomainError
from delayflock.core.history import ConstantHistory, FunctionHistory, HistorySet, SampledHistory
from delayflock.core.kernels import KernelSpec, PowerLawKernel, example_kernel
from delayflock.core.models import (
    Example1Scenario,
    Example2Scenario,
    InlineScenario,
    NoFlockScenario,
    RandomGenerator,
    RandomScenario,
    ScenarioSpec,
    SystemConfig,
)

BIT_GENERATORS = {"PCG64": np.random.PCG64}

# Default horizons in units of tau
DEFAULT_HORIZONS = {
    "example1": 5,
    "example2": 20,
    "noflock": 50,
    "random": 30,
    "inline": 10,
}

EXAMPLE1_GAP = 10.0


def _config(
    agent_count: int,
    dimension: int,
    tau: float,
    kernel: KernelSpec,
    name: str,
    steps_per_delay: Optional[int],
    horizon: Optional[float],
) -> SystemConfig:
    return SystemConfig(
        agent_count=agent_count,
        dimension=dimension,
        delay=tau,
        kernel=kernel,
        steps_per_delay=steps_per_delay or settings.DEFAULT_STEPS_PER_DELAY,
        horizon=horizon if horizon is not None else DEFAULT_HORIZONS[name] * tau,
    )


def _stack(*agents: np.ndarray) -> np.ndarray:
    """Per-agent (T,) series to an array (T, N, 1)."""
    return np.stack(agents, axis=1)[:, :, None]


def scenario_example1(
    tau: float = 1.0,
    epsilon: float = 0.2,
    kernel: Optional[KernelSpec] = None,
    steps_per_delay: Optional[int] = None,
    horizon: Optional[float] = None,
) -> tuple[SystemConfig, HistorySet]:
    """
    Two agents on a line whose velocities swap during the last epsilon of the history.

    v_a = 1 on [-tau, -eps], then falls linearly to 0; v_b = 0, then rises
    linearly to 1. The positions integrate these velocities from
    x_a(-tau) = 0 and x_b(-tau) = 10.
    """
    if not 0 < epsilon < tau:
        raise DomainError("epsilon must lie in (0, tau)")
    kernel = kernel or example_kernel()

    def velocities(s):
        late = s > -epsilon
        v_a = np.where(late, -s / epsilon, 1.0)
        v_b = np.where(late, 1.0 + s / epsilon, 0.0)
        return _stack(v_a, v_b)

    def positions(s):
        late = s > -epsilon
        x_a = np.where(late, (tau - epsilon) + (epsilon ** 2 - s ** 2) / (2.0 * epsilon), s + tau)
        x_b = np.where(late, EXAMPLE1_GAP + (s + epsilon) + (s ** 2 - epsilon ** 2) / (2.0 * epsilon), EXAMPLE1_GAP)
        return _stack(x_a, x_b)

    history = FunctionHistory(2, 1, tau, positions, velocities)
    return _config(2, 1, tau, kernel, "example1", steps_per_delay, horizon), history


def scenario_example2(
    kernel: Optional[KernelSpec] = None,
    steps_per_delay: Optional[int] = None,
    horizon: Optional[float] = None,
) -> tuple[SystemConfig, HistorySet]:
    """
    tau = 1, x_a = 1 + (1 + s)^2, x_b = (1 + s)^2, both with v = 2 (1 + s).

    d_V vanishes on the history yet becomes positive right after t = 0.
    """
    tau = 1.0
    kernel = kernel or example_kernel()

    def positions(s):
        return _stack(1.0 + (1.0 + s) ** 2, (1.0 + s) ** 2)

    def velocities(s):
        return _stack(2.0 * (1.0 + s), 2.0 * (1.0 + s))

    history = FunctionHistory(2, 1, tau, positions, velocities)
    return _config(2, 1, tau, kernel, "example2", steps_per_delay, horizon), history


def noflock_offset(tau: float, beta: float) -> float:
    """Initial gap term tau^{1/(2 beta)} + 2 tau + (3 * 2^beta / (2 beta - 1))^{1/(2 beta - 1)}."""
    return tau ** (1.0 / (2.0 * beta)) + 2.0 * tau + (3.0 * 2.0 ** beta / (2.0 * beta - 1.0)) ** (1.0 / (2.0 * beta - 1.0))


def scenario_noflock(
    tau: float = 1.0,
    beta: float = 0.75,
    steps_per_delay: Optional[int] = None,
    horizon: Optional[float] = None,
) -> tuple[SystemConfig, HistorySet]:
    """
    Two agents moving apart at unit speed, far enough that psi(r) = (1 + r^2)^{-beta}
    with beta > 1/2 can never pull them together.
    """
    if beta <= 0.5:
        raise DomainError("the no-flock construction needs beta > 1/2")
    kernel = PowerLawKernel(amplitude=1.0, sigma=1.0, beta=beta)
    offset = noflock_offset(tau, beta)

    def positions(s):
        return _stack(s + offset, -s)

    def velocities(s):
        ones = np.ones_like(s)
        return _stack(ones, -ones)

    history = FunctionHistory(2, 1, tau, positions, velocities)
    return _config(2, 1, tau, kernel, "noflock", steps_per_delay, horizon), history


def scenario_random(
    seed: int,
    agents: int,
    dimension: int,
    tau: float,
    kernel: KernelSpec,
    pos_spread: float = 1.0,
    vel_spread: float = 1.0,
    steps_per_delay: Optional[int] = None,
    horizon: Optional[float] = None,
    generator: RandomGenerator = "PCG64",
) -> tuple[SystemConfig, HistorySet]:
    """
    Constant histories: positions uniform in [0, pos_spread]^d, velocities
    uniform in [-vel_spread/2, vel_spread/2]^d, drawn in that order.
    """
    rng = np.random.Generator(BIT_GENERATORS[generator](seed))
    positions = rng.uniform(0.0, pos_spread, size=(agents, dimension))
    velocities = rng.uniform(-0.5 * vel_spread, 0.5 * vel_spread, size=(agents, dimension))
    history = ConstantHistory(positions, velocities, tau)
    return _config(agents, dimension, tau, kernel, "random", steps_per_delay, horizon), history


def build_scenario(
    spec: ScenarioSpec,
    kernel: Optional[KernelSpec] = None,
    steps_per_delay: Optional[int] = None,
    horizon: Optional[float] = None,
) -> tuple[SystemConfig, HistorySet]:
    """
    Build (config, history) for any scenario specification.

    Raises:
        ConfigValidationError: If the scenario needs a kernel that was not given,
            or rejects one that was
    """
    if isinstance(spec, Example1Scenario):
        return scenario_example1(spec.tau, spec.epsilon, kernel, steps_per_delay, horizon)
    if isinstance(spec, Example2Scenario):
        return scenario_example2(kernel, steps_per_delay, horizon)
    if isinstance(spec, NoFlockScenario):
        if kernel is not None:
            raise ConfigValidationError("noflock fixes its own kernel from beta", field="kernel")
        return scenario_noflock(spec.tau, spec.beta, steps_per_delay, horizon)
    if kernel is None:
        raise ConfigValidationError(f"scenario {spec.name} requires a kernel", field="kernel")
    if isinstance(spec, RandomScenario):
        return scenario_random(
            spec.seed, spec.agents, spec.dimension, spec.tau, kernel,
            spec.pos_spread, spec.vel_spread, steps_per_delay, horizon, spec.generator,
        )
    if isinstance(spec, InlineScenario):
        history = SampledHistory(spec.positions, spec.velocities, spec.tau)
        config = _config(
            history.agent_count, history.dimension, spec.tau, kernel, "inline", steps_per_delay, horizon
        )
        return config, history
    raise ConfigValidationError(f"unknown scenario {spec!r}", field="scenario")


def scenario_notes(spec: ScenarioSpec) -> list[str]:
    """Human-readable notes recorded in reports and metadata."""
    if isinstance(spec, Example1Scenario):
        return [
            f"example1 position anchors x_a(-tau)=0, x_b(-tau)={EXAMPLE1_GAP}; velocities interpolate linearly on [-eps, 0]"
        ]
    if isinstance(spec, NoFlockScenario):
        return [f"noflock initial gap offset {noflock_offset(spec.tau, spec.beta)!r}"]
    if isinstance(spec, RandomScenario):
        return [f"random histories drawn with numpy {spec.generator} seed {spec.seed}"]
    return []

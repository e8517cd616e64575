"""
Tests for the built-in scenarios.
"""
import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from delayflock.core.errors import ConfigValidationError, DomainError
from delayflock.core.integrator import integrate
from delayflock.core.kernels import PowerLawKernel, example_kernel
from delayflock.core.models import NoFlockScenario, RandomScenario, ScenarioSpec
from delayflock.core.scenarios import (
    build_scenario,
    noflock_offset,
    scenario_example1,
    scenario_example2,
    scenario_noflock,
    scenario_notes,
    scenario_random,
)

SCENARIOS = TypeAdapter(ScenarioSpec)


def test_example1_history():
    """Velocities swap linearly during the last epsilon; positions integrate them."""
    config, history = scenario_example1(1.0, 0.2)
    assert config.delay == 1.0 and config.horizon == 5.0 and config.steps_per_delay == 64
    x, v = history.states([-1.0, -0.5, -0.1, 0.0])
    assert v[:, 0, 0] == pytest.approx([1.0, 1.0, 0.5, 0.0])
    assert v[:, 1, 0] == pytest.approx([0.0, 0.0, 0.5, 1.0])
    assert x[0, :, 0] == pytest.approx([0.0, 10.0])
    assert x[-1, 0, 0] == pytest.approx(0.8 + 0.1)
    assert x[-1, 1, 0] == pytest.approx(10.0 + 0.1)


def test_example1_positions_are_continuous():
    """No jump at s = -epsilon."""
    _, history = scenario_example1(1.0, 0.2)
    x, _ = history.states([-0.2 - 1e-12, -0.2 + 1e-12])
    assert np.allclose(x[0], x[1], atol=1e-10)


def test_example1_rejects_epsilon_above_tau():
    """epsilon must lie in (0, tau)."""
    with pytest.raises(DomainError):
        scenario_example1(1.0, 1.5)


def test_example2_history():
    """Parabolic positions, equal velocities."""
    config, history = scenario_example2()
    x, v = history.states([-1.0, -0.5, 0.0])
    assert x[:, 0, 0] == pytest.approx([1.0, 1.25, 2.0])
    assert x[:, 1, 0] == pytest.approx([0.0, 0.25, 1.0])
    assert np.array_equal(v[:, 0], v[:, 1])
    assert config.horizon == 20.0


def test_noflock_offset_value():
    """tau^{1/(2 beta)} + 2 tau + (3 2^beta / (2 beta - 1))^{1/(2 beta - 1)}."""
    expected = 1.0 + 2.0 + (3.0 * 2.0 ** 0.75 / 0.5) ** 2.0
    assert noflock_offset(1.0, 0.75) == pytest.approx(expected)


def test_noflock_rejects_small_beta():
    """The construction needs beta > 1/2."""
    with pytest.raises(DomainError):
        scenario_noflock(1.0, 0.5)
    with pytest.raises(ValidationError):
        NoFlockScenario(beta=0.4)


@pytest.mark.parametrize("tau, beta", [(1.0, 0.75), (1.0, 0.6), (0.5, 0.75)])
def test_noflock_velocity_gap_never_closes(tau, beta):
    """V = v_a - v_b stays at least 1 up to T = 50."""
    config, history = scenario_noflock(tau, beta, horizon=50.0)
    traj = integrate(config, history)
    gap = traj.velocities[:, 0, 0] - traj.velocities[:, 1, 0]
    assert gap.min() >= 1.0 - 1e-9
    assert config.kernel == PowerLawKernel(amplitude=1.0, sigma=1.0, beta=beta)


def test_random_is_deterministic():
    """Same seed, same history; the velocity box is centered."""
    kernel = example_kernel()
    _, first = scenario_random(9, 6, 3, 1.0, kernel, pos_spread=4.0, vel_spread=2.0)
    _, second = scenario_random(9, 6, 3, 1.0, kernel, pos_spread=4.0, vel_spread=2.0)
    _, other = scenario_random(10, 6, 3, 1.0, kernel, pos_spread=4.0, vel_spread=2.0)
    assert np.array_equal(first.positions, second.positions)
    assert np.array_equal(first.velocities, second.velocities)
    assert not np.array_equal(first.positions, other.positions)
    assert np.all((first.positions >= 0.0) & (first.positions <= 4.0))
    assert np.all(np.abs(first.velocities) <= 1.0)


def test_random_default_horizon():
    """Thirty delays unless told otherwise."""
    config, _ = scenario_random(1, 3, 2, 0.5, example_kernel())
    assert config.horizon == pytest.approx(15.0)


def test_build_scenario_dispatch():
    """Every scenario kind is built from its specification."""
    kernel = example_kernel()
    config, _ = build_scenario(SCENARIOS.validate_python({"name": "example1", "epsilon": 0.3}))
    assert config.agent_count == 2
    config, _ = build_scenario(SCENARIOS.validate_python({"name": "noflock", "beta": 0.6}), horizon=10.0)
    assert config.kernel.beta == 0.6
    config, _ = build_scenario(
        SCENARIOS.validate_python({"name": "random", "seed": 1, "agents": 4, "dimension": 3}), kernel
    )
    assert (config.agent_count, config.dimension) == (4, 3)
    inline = {
        "name": "inline",
        "tau": 1.0,
        "positions": [[[0.0], [1.0], [5.0]], [[0.5], [1.0], [5.5]]],
        "velocities": [[[0.5], [0.0], [0.5]], [[0.5], [0.0], [0.5]]],
    }
    config, history = build_scenario(SCENARIOS.validate_python(inline), kernel)
    assert (config.agent_count, config.dimension, config.horizon) == (3, 1, 10.0)
    x, _ = history.states([-0.5])
    assert x[0, 0, 0] == pytest.approx(0.25)


def test_build_scenario_kernel_rules():
    """noflock fixes its kernel; random and inline need one."""
    with pytest.raises(ConfigValidationError):
        build_scenario(NoFlockScenario(), example_kernel())
    with pytest.raises(ConfigValidationError):
        build_scenario(RandomScenario(seed=1, agents=3))


def test_scenario_notes():
    """Notes name the generator and the constructed offsets."""
    assert "PCG64" in scenario_notes(RandomScenario(seed=3, agents=3))[0]
    assert repr(noflock_offset(1.0, 0.75)) in scenario_notes(NoFlockScenario())[0]
    assert scenario_notes(SCENARIOS.validate_python({"name": "example2"})) == []


def test_random_scenario_names_its_generator():
    """The serialized scenario records the bit generator; unknown ones are rejected."""
    spec = SCENARIOS.validate_python({"name": "random", "seed": 3, "agents": 3})
    assert spec.model_dump(mode="json")["generator"] == "PCG64"
    kernel = PowerLawKernel(amplitude=1.0, sigma=1.0, beta=0.3)
    _, built = build_scenario(spec, kernel)
    _, direct = scenario_random(3, 3, 2, 1.0, kernel)
    assert np.array_equal(built.states([0.0])[1], direct.states([0.0])[1])
    with pytest.raises(ValidationError):
        SCENARIOS.validate_python({"name": "random", "seed": 3, "agents": 3, "generator": "MT19937"})

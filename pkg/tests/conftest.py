"""
Shared fixtures: scenario trajectories are expensive, so they are built once per session.
"""
import json
from pathlib import Path

import numpy as np
import pytest

from delayflock.core.history import ConstantHistory
from delayflock.core.integrator import integrate
from delayflock.core.kernels import PowerLawKernel, example_kernel
from delayflock.core.models import SystemConfig
from delayflock.core.scenarios import scenario_example1, scenario_example2, scenario_noflock


@pytest.fixture(scope="session")
def example1():
    """Example 1 with tau = 1, eps = 0.2 on [0, 3]."""
    config, history = scenario_example1(1.0, 0.2, horizon=3.0)
    return config, history, integrate(config, history)


@pytest.fixture(scope="session")
def example2():
    """Example 2 on [0, 20] at h = 1/64."""
    config, history = scenario_example2()
    return config, history, integrate(config, history)


@pytest.fixture(scope="session")
def noflock():
    """No-flock data with beta = 0.75, tau = 1 on [0, 50]."""
    config, history = scenario_noflock(1.0, 0.75, horizon=50.0)
    return config, history, integrate(config, history)


def make_constant_system(positions, velocities, kernel=None, delay=1.0, steps_per_delay=16, horizon=5.0):
    """(config, history) for frozen initial data."""
    history = ConstantHistory(np.asarray(positions, dtype=float), np.asarray(velocities, dtype=float), delay)
    config = SystemConfig(
        agent_count=history.agent_count,
        dimension=history.dimension,
        delay=delay,
        kernel=kernel or example_kernel(),
        steps_per_delay=steps_per_delay,
        horizon=horizon,
    )
    return config, history


@pytest.fixture
def consensus():
    """Three agents in the plane sharing one velocity."""
    config, history = make_constant_system(
        [[0.0, 0.0], [1.0, 0.5], [-0.5, 2.0]],
        [[0.5, -0.25]] * 3,
        kernel=PowerLawKernel(amplitude=1.0, sigma=1.0, beta=0.3),
    )
    return config, history, integrate(config, history)


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a run config dict (or raw text) to a file and return its path."""

    def _write(content, name: str = "config.json") -> Path:
        path = tmp_path / name
        text = content if isinstance(content, str) else json.dumps(content, indent=2)
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def constant_system():
    """Factory for systems with frozen initial data."""
    return make_constant_system

"""
Tests for the delayed velocity equation.
"""
import math

import numpy as np
import pytest

from delayflock.core.dynamics import acceleration, influence, influence_matrix, rhs_velocity
from delayflock.core.errors import DomainError, IntegrationFault
from delayflock.core.kernels import PowerLawKernel, example_kernel
from delayflock.core.models import SystemConfig


def make_config(agent_count, dimension, kernel=None):
    return SystemConfig(
        agent_count=agent_count,
        dimension=dimension,
        delay=1.0,
        kernel=kernel or example_kernel(),
        steps_per_delay=8,
        horizon=2.0,
    )


@pytest.mark.parametrize("agents, x_now, x_delayed, expected", [
    (2, [0.3, 0.3], [0.3, 0.3], 1.0),
    (3, [0.3, 0.3], [0.3, 0.3], 0.5),
    (2, [0.0], [2.0], 1.0 / math.sqrt(5.0)),
])
def test_influence_examples(agents, x_now, x_delayed, expected):
    """psi of the distance, normalized by N - 1."""
    assert influence(example_kernel(), agents, x_now, x_delayed) == pytest.approx(expected, rel=1e-12)


def test_influence_dimension_mismatch():
    """Positions must live in the same space."""
    with pytest.raises(DomainError):
        influence(example_kernel(), 2, [0.0, 1.0], [0.0])


def test_influence_matrix_zero_diagonal_and_bounded():
    """No self-interaction; every entry at most K/(N-1)."""
    rng = np.random.default_rng(3)
    positions = rng.normal(size=(6, 2))
    delayed = rng.normal(size=(6, 2))
    weights = influence_matrix(example_kernel(), positions, delayed)
    assert np.all(np.diag(weights) == 0.0)
    assert np.all(weights <= 1.0 / 5.0)
    assert weights[1, 4] == pytest.approx(influence(example_kernel(), 6, positions[1], delayed[4]))


def test_rhs_zero_when_delayed_velocities_match():
    """Every difference vanishes."""
    config = make_config(3, 2)
    velocities = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    positions = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, -1.0]])
    out = rhs_velocity(config, 0.5, velocities, lambda s: (positions - 0.5, velocities), positions)
    assert np.allclose(out, 0.0, atol=1e-15)


def test_rhs_constant_kernel():
    """With psi = K and N = 2 the acceleration is K u."""
    amplitude = 1.7
    config = make_config(2, 2, PowerLawKernel(amplitude=amplitude, sigma=1.0, beta=0.0))
    u = np.array([0.3, -0.4])
    velocities = np.array([[0.0, 0.0], [1.0, 1.0]])
    delayed_velocities = np.array([[1.0, 1.0], u])
    positions = np.array([[0.0, 0.0], [5.0, 5.0]])
    out = rhs_velocity(config, 1.0, velocities, lambda s: (positions, delayed_velocities), positions)
    assert out[0] == pytest.approx(amplitude * u, rel=1e-12)
    assert out[1] == pytest.approx([0.0, 0.0], abs=1e-15)


def test_rhs_lookup_failure_is_integration_fault():
    """Lookups outside the known solution abort integration."""
    config = make_config(2, 1)

    def lookup(s):
        raise DomainError("outside history")

    with pytest.raises(IntegrationFault) as excinfo:
        rhs_velocity(config, 0.25, np.zeros((2, 1)), lookup, np.zeros((2, 1)))
    assert excinfo.value.time == 0.25


def test_acceleration_bounded_by_kernel_sup():
    """|a_i| <= K max_j |v_j(t - tau) - v_i(t)| on random states."""
    rng = np.random.default_rng(11)
    kernel = PowerLawKernel(amplitude=2.0, sigma=0.7, beta=0.3)
    for _ in range(50):
        x, v, xd, vd = (rng.normal(size=(5, 3)) for _ in range(4))
        out = acceleration(kernel, x, v, xd, vd)
        for i in range(5):
            others = [j for j in range(5) if j != i]
            worst = max(np.linalg.norm(vd[j] - v[i]) for j in others)
            assert np.linalg.norm(out[i]) <= kernel.sup() * worst + 1e-12


def test_acceleration_permutation_equivariant():
    """Relabeling agents permutes the output."""
    rng = np.random.default_rng(5)
    x, v, xd, vd = (rng.normal(size=(4, 2)) for _ in range(4))
    order = np.array([2, 0, 3, 1])
    kernel = example_kernel()
    out = acceleration(kernel, x, v, xd, vd)
    permuted = acceleration(kernel, x[order], v[order], xd[order], vd[order])
    assert np.allclose(permuted, out[order], atol=1e-14)


def test_acceleration_translation_invariant():
    """Shifting all positions, or all velocities, changes nothing."""
    rng = np.random.default_rng(9)
    x, v, xd, vd = (rng.normal(size=(4, 2)) for _ in range(4))
    kernel = example_kernel()
    out = acceleration(kernel, x, v, xd, vd)
    shift = np.array([3.0, -2.0])
    assert np.allclose(acceleration(kernel, x + shift, v, xd + shift, vd), out, atol=1e-12)
    assert np.allclose(acceleration(kernel, x, v + shift, xd, vd + shift), out, atol=1e-12)

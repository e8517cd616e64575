"""
Tests for flocking observables and the Lyapunov functions.
"""
import math

import numpy as np
import pytest

from delayflock.core.diagnostics import (
    cloud_diameter,
    diameter_positions,
    diameter_velocities,
    directional_velocity_gap,
    history_interval_diameter,
    initial_speed_bound,
    interval_diameter,
    lyapunov_series,
    pairwise_diameters,
    phi_eval,
    relative_state,
    sample_series,
)
from delayflock.core.errors import DomainError
from delayflock.core.integrator import integrate
from delayflock.core.kernels import PowerLawKernel, TabulatedKernel, example_kernel
from delayflock.core.scenarios import scenario_example1, scenario_random


def test_pairwise_diameters_collinear():
    """Agents at 0, 1 and 3 on a line."""
    points = np.array([[[0.0], [1.0], [3.0]], [[0.0], [0.0], [0.0]]])
    assert pairwise_diameters(points) == pytest.approx([3.0, 0.0])


def test_cloud_diameter_cases():
    """Line, full-dimensional and degenerate clouds."""
    assert cloud_diameter(np.array([[2.0], [-1.0], [0.5]])) == 3.0
    square = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]])
    assert cloud_diameter(square) == pytest.approx(math.sqrt(2.0))
    collinear = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    assert cloud_diameter(collinear) == pytest.approx(3.0 * math.sqrt(2.0))
    assert cloud_diameter(np.zeros((6, 3))) == 0.0
    assert cloud_diameter(np.ones((1, 2))) == 0.0


def test_cloud_diameter_matches_brute_force():
    """Hull shortcut against every pair."""
    rng = np.random.default_rng(4)
    points = rng.normal(size=(300, 3))
    brute = max(np.linalg.norm(points[i] - points[j]) for i in range(300) for j in range(i))
    assert cloud_diameter(points) == pytest.approx(brute, rel=1e-12)


def test_cloud_diameter_large_collinear_cloud():
    """Thousands of points on one line reduce to a range along it."""
    rng = np.random.default_rng(11)
    steps = rng.permutation(np.linspace(0.0, 1.0, 12_000))
    points = np.outer(steps, [0.6, 0.8]) + np.array([2.0, -1.0])
    assert cloud_diameter(points) == pytest.approx(1.0, rel=1e-12)


def test_cloud_diameter_flat_cloud_in_space():
    """A planar cloud in 3-D matches every pair."""
    rng = np.random.default_rng(5)
    plane = rng.normal(size=(200, 2))
    points = plane @ np.array([[1.0, 0.0, 1.0], [0.0, 1.0, -1.0]]) + 3.0
    brute = max(np.linalg.norm(points[i] - points[j]) for i in range(200) for j in range(i))
    assert cloud_diameter(points) == pytest.approx(brute, rel=1e-10)


def test_interval_diameter_axis_aligned_motion(constant_system):
    """Motion along one axis of the plane gives a collinear velocity cloud."""
    config, history = constant_system(
        [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]],
        [[1.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
        steps_per_delay=16,
        horizon=3.0,
    )
    traj = integrate(config, history)
    assert interval_diameter(traj, 0) == pytest.approx(2.0)
    first, second = interval_diameter(traj, 1), interval_diameter(traj, 2)
    assert first == pytest.approx(2.0)
    assert 0.0 < second <= first + 1e-12


def test_agent_speeds_stay_below_initial_bound():
    """|v_a(t)| <= R_V0 for every agent at every sampled time."""
    config, history = scenario_random(
        9, 6, 2, 1.0, PowerLawKernel(amplitude=1.0, sigma=1.0, beta=0.4), steps_per_delay=16, horizon=10.0
    )
    traj = integrate(config, history)
    bound = initial_speed_bound(history, config.steps_per_delay)
    _, velocities = traj.states(traj.sample_times(4))
    speeds = np.linalg.norm(velocities, axis=-1)
    assert speeds.max() <= bound + 1e-9
    assert np.linalg.norm(traj.velocities, axis=-1).max() <= bound + 1e-9


def test_example2_initial_observables(example2):
    """d_X(0) = 1, d_V(0) = 0, R_V0 = 2 and I_0 = 2."""
    config, history, traj = example2
    assert diameter_positions(traj, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert diameter_velocities(traj, 0.0) == 0.0
    assert initial_speed_bound(history, config.steps_per_delay) == pytest.approx(2.0)
    assert interval_diameter(traj, 0) == pytest.approx(2.0)
    assert history_interval_diameter(history, config.steps_per_delay) == pytest.approx(2.0)


def test_example2_velocity_gap_exceeds_tenth_of_i0(example2):
    """The gap opened during the first delay reaches more than I_0 / 10."""
    config, history, traj = example2
    series = sample_series(traj)
    first_delay = series.d_v[series.delay_index(0):series.delay_index(1) + 1]
    assert first_delay.max() > 0.2


def test_example1_interval_diameters(example1):
    """Velocities span {0, 1} on the history and the first delay."""
    config, history, traj = example1
    assert interval_diameter(traj, 0) == pytest.approx(1.0, abs=1e-12)
    assert interval_diameter(traj, 1) == pytest.approx(1.0, abs=1e-6)
    assert diameter_velocities(traj, 0.4) == pytest.approx(1.0, abs=1e-6)


def test_interval_out_of_domain(example1):
    """Intervals must lie inside [-tau, T]."""
    config, history, traj = example1
    with pytest.raises(DomainError):
        interval_diameter(traj, config.delay_count + 1)
    with pytest.raises(DomainError):
        interval_diameter(traj, -1)


def test_noflock_speed_bound(noflock):
    """Both agents move at unit speed on the history."""
    config, history, traj = noflock
    assert initial_speed_bound(history, config.steps_per_delay) == pytest.approx(1.0)


def test_consensus_diameters(consensus):
    """Shared velocities give zero velocity diameters."""
    config, history, traj = consensus
    assert diameter_velocities(traj, 2.0) == pytest.approx(0.0, abs=1e-13)
    assert interval_diameter(traj, 3) == pytest.approx(0.0, abs=1e-13)


def test_directional_velocity_gap(example2):
    """Inner product with unit vectors along the line."""
    config, history, traj = example2
    _, velocities = traj.state(0.5)
    gap = velocities[0, 0] - velocities[1, 0]
    assert directional_velocity_gap(traj, 0, 1, [1.0], 0.5) == pytest.approx(gap)
    assert directional_velocity_gap(traj, 0, 1, [-1.0], 0.5) == pytest.approx(-gap)
    assert directional_velocity_gap(traj, 1, 1, [1.0], 0.5) == 0.0


def test_directional_velocity_gap_in_plane(constant_system):
    """Aligned direction recovers the pairwise gap; orthogonal gives zero."""
    config, history = constant_system([[0.0, 0.0], [1.0, 0.0]], [[1.0, 2.0], [0.0, 0.0]])
    traj = integrate(config, history)
    _, velocities = traj.state(0.0)
    diff = velocities[0] - velocities[1]
    aligned = diff / np.linalg.norm(diff)
    orthogonal = np.array([-aligned[1], aligned[0]])
    assert directional_velocity_gap(traj, 0, 1, aligned, 0.0) == pytest.approx(np.linalg.norm(diff))
    assert directional_velocity_gap(traj, 0, 1, orthogonal, 0.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("u", [[1.0, 1.0], [0.5, 0.0], [1.0]])
def test_directional_velocity_gap_rejects_non_unit(consensus, u):
    """Only unit vectors of the right dimension are accepted."""
    config, history, traj = consensus
    with pytest.raises(DomainError):
        directional_velocity_gap(traj, 0, 1, u, 1.0)


def test_relative_state(example2):
    """First agent minus second agent."""
    config, history, traj = example2
    dx, dv = relative_state(traj, 0.0)
    assert dx == pytest.approx([1.0])
    assert dv == pytest.approx([0.0])


def test_phi_eval_branches():
    """First branch, capped branch and the zero kernel."""
    assert phi_eval(example_kernel(), 1.0, 2.0, 1.0) == pytest.approx(math.exp(-1.0) / math.sqrt(10.0), rel=1e-12)
    flat = PowerLawKernel(amplitude=1.0, sigma=1e-3, beta=0.0)
    assert phi_eval(flat, 1.0, 0.0, 0.0) == pytest.approx(math.exp(-2.0), rel=1e-12)
    zero = TabulatedKernel(radii=(0.0,), values=(0.0,), lipschitz=0.0)
    assert phi_eval(zero, 1.0, 1.0, 1.0) == 0.0


def test_phi_eval_vectorized_and_non_increasing():
    """phi never grows with the running maximum."""
    values = phi_eval(example_kernel(), 1.0, 2.0, np.linspace(0.0, 50.0, 101))
    assert values.shape == (101,)
    assert np.all(np.diff(values) <= 0.0)


def test_sample_series_layout(example2):
    """Samples start at -tau; observables before zero are undefined."""
    config, history, traj = example2
    series = sample_series(traj)
    assert series.times[0] == pytest.approx(-1.0)
    assert series.times[series.delay_index(0)] == pytest.approx(0.0)
    assert series.times[series.delay_index(3)] == pytest.approx(3.0)
    assert series.index_of(3.0) == series.delay_index(3)
    assert np.all(np.isnan(series.phi[:series.delay_index(0)]))
    assert np.all(np.diff(series.running_max_dx[series.delay_index(0):]) >= 0.0)
    assert len(series.interval_diameters) == config.delay_count + 1
    assert series.interval_diameters[0] == pytest.approx(2.0)


def test_lyapunov_d_constant_until_two_delays(example2):
    """D = I_0 exactly on [-tau, 2 tau]."""
    config, history, traj = example2
    series = lyapunov_series(traj)
    head = series.lyapunov_d[:series.delay_index(2) + 1]
    assert np.all(head == series.interval_diameters[0])
    assert np.all(np.diff(series.lyapunov_d) <= 0.0)


def test_lyapunov_l_non_increasing_example2(example2):
    """L never rises above an earlier value after two delays."""
    config, history, traj = example2
    series = lyapunov_series(traj)
    window = series.lyapunov_l[series.delay_index(2):]
    assert np.all(window[1:] <= np.minimum.accumulate(window[:-1]) + 1e-4)


def test_lyapunov_d_dominates_dv(example2):
    """d_V never exceeds D."""
    config, history, traj = example2
    series = lyapunov_series(traj)
    assert np.all(series.d_v <= series.lyapunov_d + 1e-4 * max(series.interval_diameters[0], 1.0))


def test_lyapunov_consensus(consensus):
    """Zero velocity diameter keeps D at zero and L constant."""
    config, history, traj = consensus
    series = lyapunov_series(traj)
    assert np.all(series.lyapunov_d == 0.0)
    tail = series.lyapunov_l[series.delay_index(0):]
    assert np.allclose(tail, tail[0], atol=1e-12)


def test_lyapunov_short_horizon():
    """Less than two delays is rejected."""
    config, history = scenario_example1(1.0, 0.2, steps_per_delay=16, horizon=1.5)
    with pytest.raises(DomainError):
        lyapunov_series(integrate(config, history))

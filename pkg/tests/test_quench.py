"""Layered quench evolution, Porter-Thomas convergence, temporal memory."""

import numpy as np
import pytest

from mblq import (
    ChainParams,
    PropagatorConfig,
    anticoncentration_fraction,
    build_period_propagator,
    composite_propagator,
    initial_state,
    porter_thomas_kld_curve,
    run_quench_sequence,
    temporal_memory,
)
from mblq.quench import EvolutionTrace, sample_schedule

from oracles import eigh_expm, kron_static_hamiltonian

CFG = PropagatorConfig()


def test_initial_state_is_all_up_basis_state():
    psi = initial_state(ChainParams(L=4, omega=8.0))
    assert psi.shape == (16,)
    assert psi[0] == 1.0
    assert np.all(psi[1:] == 0.0)


def test_sample_schedule():
    p = ChainParams(L=3, omega=8.0, W=5.0)
    sched = sample_schedule(p, 7, np.random.default_rng(0))
    assert sched.shape == (7, 3)
    assert np.all((sched >= 0.0) & (sched <= 5.0))
    again = sample_schedule(p, 7, np.random.default_rng(0))
    np.testing.assert_array_equal(sched, again)
    assert sample_schedule(p, 0, np.random.default_rng(0)).shape == (0, 3)
    with pytest.raises(ValueError):
        sample_schedule(p, -1, np.random.default_rng(0))


def test_empty_schedule_records_initial_distribution():
    p = ChainParams(L=3, omega=8.0)
    trace = run_quench_sequence(p, np.empty((0, 3)), CFG)
    assert trace.distributions.shape == (1, 8)
    np.testing.assert_array_equal(trace.distributions[0], np.eye(8)[0])
    assert trace.layers == 0


def test_schedule_shape_validation():
    p = ChainParams(L=3, omega=8.0)
    with pytest.raises(ValueError):
        run_quench_sequence(p, np.zeros((2, 4)), CFG)
    with pytest.raises(ValueError):
        composite_propagator(p, np.zeros((0, 3)), CFG)


def test_static_repeated_layers_match_hamiltonian_exponential():
    # F = 0 with identical layers is plain evolution under H0 for time 2T
    p = ChainParams(L=3, h=2.5, F=0.0, omega=8.0)
    theta = np.array([0.3, 0.7, 0.1])
    trace = run_quench_sequence(
        p, np.stack([theta, theta]), PropagatorConfig(exact_static=True))
    H = kron_static_hamiltonian(3, p.J, p.h, theta)
    psi = eigh_expm(H, 2.0 * p.period) @ initial_state(p)
    np.testing.assert_allclose(
        trace.distributions[-1], np.abs(psi) ** 2, rtol=0, atol=1e-12)


def test_composite_single_layer_equals_period_propagator():
    p = ChainParams(L=3, h=2.5, F=2.5, omega=8.0, W=20.0)
    theta = np.array([13.0, 2.2, 7.7])
    U1 = composite_propagator(p, theta[None, :], CFG)
    U2 = build_period_propagator(p, theta, CFG)
    np.testing.assert_array_equal(U1, U2)


def test_composite_matches_sequential_distributions():
    p = ChainParams(L=3, h=2.5, F=2.5, omega=8.0, W=20.0)
    sched = sample_schedule(p, 5, np.random.default_rng(2))
    trace = run_quench_sequence(p, sched, CFG)
    U = composite_propagator(p, sched, CFG)
    final = np.abs(U @ initial_state(p)) ** 2
    np.testing.assert_allclose(trace.distributions[-1], final, rtol=0, atol=1e-10)


def test_probability_conservation_every_layer():
    p = ChainParams(L=4, h=2.5, F=2.5, omega=8.0, W=1.0)
    sched = sample_schedule(p, 6, np.random.default_rng(4))
    trace = run_quench_sequence(p, sched, CFG)
    np.testing.assert_allclose(
        trace.distributions.sum(axis=1), np.ones(7), rtol=0, atol=1e-9)


def test_layer_order_changes_the_distribution():
    p = ChainParams(L=3, h=2.5, F=2.5, omega=8.0, W=20.0)
    A, B = sample_schedule(p, 2, np.random.default_rng(3))
    ab = run_quench_sequence(p, np.stack([A, B]), CFG).distributions[-1]
    ba = run_quench_sequence(p, np.stack([B, A]), CFG).distributions[-1]
    assert 0.5 * np.abs(ab - ba).sum() > 0.01


def test_kld_curve_starts_at_point_mass_value():
    # m = 0 is a point mass; N p = 16 falls outside the [0, 12] bins, so all
    # in-range mass sits in the first bin and the KLD is -ln q_0
    p = ChainParams(L=4, h=2.5, F=2.5, omega=8.0, W=1.0)
    curve = porter_thomas_kld_curve(run_quench_sequence(p, np.empty((0, 4)), CFG))
    assert curve.shape == (1, 2)
    expected = -np.log((1.0 - np.exp(-0.2)) / (1.0 - np.exp(-12.0)))
    assert curve[0, 1] == pytest.approx(expected, abs=1e-6)


def test_kld_curve_decays_under_thermal_drive():
    p = ChainParams(L=5, h=2.5, F=2.5, omega=8.0, W=1.0)
    sched = sample_schedule(p, 20, np.random.default_rng(11))
    curve = porter_thomas_kld_curve(run_quench_sequence(p, sched, CFG))
    assert curve.shape == (21, 2)
    np.testing.assert_array_equal(curve[:, 0], np.arange(21))
    assert curve[0, 1] > 1.5
    assert np.all(curve[10:, 1] < 0.6)


def test_kld_curve_is_permutation_invariant():
    # the statistic depends only on the multiset of probabilities per layer
    p = ChainParams(L=4, h=2.5, F=2.5, omega=8.0, W=1.0)
    sched = sample_schedule(p, 3, np.random.default_rng(12))
    trace = run_quench_sequence(p, sched, CFG)
    perm = np.random.default_rng(13).permutation(16)
    shuffled = EvolutionTrace(distributions=trace.distributions[:, perm])
    np.testing.assert_allclose(
        porter_thomas_kld_curve(trace), porter_thomas_kld_curve(shuffled),
        rtol=0, atol=1e-15)


def test_anticoncentration_examples():
    N = 32
    assert anticoncentration_fraction(np.full(N, 1.0 / N), 0.5) == 1.0
    assert anticoncentration_fraction(np.eye(N)[0], 1.0) == pytest.approx(1.0 / N, abs=0)
    with pytest.raises(ValueError):
        anticoncentration_fraction(np.full(N, 1.0 / N), 0.0)
    with pytest.raises(ValueError):
        anticoncentration_fraction(np.full(N, 0.5 / N), 1.0)


def test_temporal_memory_window_validation():
    p = ChainParams(L=3, omega=8.0, W=1.0)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        temporal_memory(p, CFG, 0, 2, 2, rng)
    with pytest.raises(ValueError):
        temporal_memory(p, CFG, 3, 0, 2, rng)
    with pytest.raises(ValueError):
        temporal_memory(p, CFG, 3, 2, 0, rng)


def test_temporal_memory_shape_and_determinism():
    p = ChainParams(L=3, h=2.5, F=2.5, omega=8.0, W=20.0)
    out = temporal_memory(p, CFG, 3, 2, 2, np.random.default_rng(9))
    assert out.shape == (2, 2)
    np.testing.assert_array_equal(out[:, 0], [1, 2])
    assert np.all(out[:, 1] >= 0)
    again = temporal_memory(p, CFG, 3, 2, 2, np.random.default_rng(9))
    np.testing.assert_array_equal(out, again)
    reverse = temporal_memory(p, CFG, 3, 2, 2, np.random.default_rng(9), reverse=True)
    assert not np.array_equal(out, reverse)


def test_localized_drive_remembers_more_than_thermal():
    # strong disorder retains layer-to-layer correlation; weak disorder
    # decorrelates, so its one-layer KLD is much larger
    strong = ChainParams(L=5, h=2.5, F=2.5, omega=8.0, W=20.0)
    weak = ChainParams(L=5, h=2.5, F=2.5, omega=8.0, W=1.0)
    def mean_dm1(p):
        vals = [temporal_memory(p, CFG, 20, 5, 2, np.random.default_rng(100 + k))[0, 1]
                for k in range(4)]
        return float(np.mean(vals))
    assert mean_dm1(strong) < 0.6 < mean_dm1(weak)


def test_evolution_trace_validation():
    with pytest.raises(ValueError):
        EvolutionTrace(distributions=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        EvolutionTrace(distributions=np.array([[0.5, 0.4]]))
    with pytest.raises(ValueError):
        EvolutionTrace(distributions=np.array([[1.2, -0.2]]))
    trace = EvolutionTrace(distributions=np.array([[0.5, 0.5]]), seed_manifest={"k": 1})
    assert trace.layers == 0
    assert trace.seed_manifest == {"k": 1}

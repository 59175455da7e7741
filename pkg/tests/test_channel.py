import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_pure
from qnetdeco.channel import (
    ConvergenceStatus,
    apply_map,
    apply_map_dense,
    converge,
    evolve,
    iterate,
    sample_trajectories,
    superoperator_matrix,
    trajectory_csv,
)
from qnetdeco.entanglement import concurrence
from qnetdeco.exceptions import SizeError
from qnetdeco.linalg import partial_trace, projector, trace_distance, unvec, vec
from qnetdeco.network import (
    Edge,
    NetworkSpec,
    StatePreset,
    build_gate,
    phi_state,
    preset_network,
    realize_state,
    realize_vector,
)

PHI = 2 * math.pi / 3


def benchmark_setup(n, literal=False):
    spec = preset_network(2, n, PHI)
    rho_s = realize_state(StatePreset("psi2"), 2, PHI)
    rho_e = realize_state(StatePreset("delta", {"literal": literal}), n, PHI)
    return spec, np.kron(rho_s, rho_e)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(1, 2), (2, 1), (2, 2)]))
def test_apply_map_matches_dense_and_superoperator(seed, kn):
    rng = np.random.default_rng(seed)
    spec = preset_network(*kn, rng.uniform(0, 2 * math.pi))
    rho = random_density(spec.dim, rng)
    out = apply_map(rho, spec)
    assert np.max(np.abs(out - apply_map_dense(rho, spec))) <= 1e-12
    s = superoperator_matrix(spec)
    assert np.max(np.abs(unvec(s @ vec(rho)) - out)) <= 1e-12


def test_all_zero_state_is_fixed():
    spec = preset_network(2, 2, PHI)
    rho = np.zeros((16, 16), dtype=complex)
    rho[0, 0] = 1
    assert np.allclose(apply_map(rho, spec), rho)


def test_unital():
    spec = preset_network(2, 2, 1.0)
    eye = np.eye(16) / 16
    assert np.max(np.abs(apply_map(eye, spec) - eye)) <= 1e-12


def test_single_edge_is_plain_conjugation(rng):
    spec = NetworkSpec(1, 1, 0.9, (Edge(0, 1, 1.0),))
    psi = random_pure(4, rng)
    u = build_gate(spec, spec.edges[0])
    assert np.allclose(apply_map(projector(psi), spec), projector(u @ psi))


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError):
        apply_map(np.eye(4) / 4, preset_network(1, 2, PHI))


def test_trace_hermiticity_positivity_over_many_steps(rng):
    spec = preset_network(1, 2, 1.0)
    rho = random_density(8, rng)
    for _ in range(1000):
        rho = apply_map(rho, spec)
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.max(np.abs(rho - rho.conj().T)) <= 1e-12
    assert np.linalg.eigvalsh(rho)[0] >= -1e-12


def test_iterate_record_count_and_step_zero():
    spec, rho0 = benchmark_setup(2)
    recs = iterate(rho0, spec, 5)
    assert [r.step for r in recs] == list(range(6))
    assert recs[0].concurrence == pytest.approx(1)
    assert recs[0].distance_to_prediction is None
    assert len(iterate(rho0, spec, 0)) == 1


@pytest.mark.parametrize("observe", [(0, 0), (0, 2), (5, 1)])
def test_iterate_rejects_bad_observe(observe):
    spec, rho0 = benchmark_setup(2)
    with pytest.raises(ValueError):
        iterate(rho0, spec, 1, observe)


def test_iterate_rejects_negative_steps():
    spec, rho0 = benchmark_setup(2)
    with pytest.raises(ValueError):
        iterate(rho0, spec, -1)


def test_phi_environment_keeps_concurrence_constant():
    spec, rho0 = benchmark_setup(2, literal=True)
    recs = iterate(rho0, spec, 30)
    assert all(abs(r.concurrence - 1) <= 1e-10 for r in recs)


def test_prediction_distance_recorded():
    spec, rho0 = benchmark_setup(2)
    pred = partial_trace(rho0, [0, 1])
    recs = iterate(rho0, spec, 2, prediction=pred)
    assert recs[0].distance_to_prediction == pytest.approx(0, abs=1e-14)
    assert recs[2].distance_to_prediction > 0


def test_converge_stationary_for_benchmark_setup():
    spec, rho0 = benchmark_setup(2)
    res = converge(rho0, spec)
    assert res.status == ConvergenceStatus.STATIONARY
    assert concurrence(partial_trace(res.state, [0, 1])) == pytest.approx(11 / 32, abs=1e-8)


def test_converge_period_two_for_single_env_qubit():
    spec, rho0 = benchmark_setup(1)
    res = converge(rho0, spec)
    assert res.status == ConvergenceStatus.PERIOD2
    a, b = res.final_states
    assert trace_distance(apply_map(a, spec), b) <= 1e-10
    assert trace_distance(apply_map(b, spec), a) <= 1e-10
    assert res.state_for_parity("even") is not res.state_for_parity("odd")


def test_converge_fixed_point_stops_immediately():
    spec = preset_network(1, 2, PHI)
    res = converge(np.eye(8) / 8, spec, tol=1e-1)
    assert res.status == ConvergenceStatus.STATIONARY
    assert res.steps_used <= 2


def test_converge_reports_max_iter():
    spec, rho0 = benchmark_setup(2)
    assert converge(rho0, spec, max_iter=3).status == ConvergenceStatus.MAX_ITER


def test_converge_rejects_bad_tol():
    spec, rho0 = benchmark_setup(2)
    with pytest.raises(ValueError):
        converge(rho0, spec, tol=0)


def test_converged_state_is_close_to_true_limit():
    # a slow network: one edge carries most of the weight
    spec = preset_network(1, 2, PHI)
    probs = np.full(len(spec.edges), 0.01)
    probs[0] = 1 - probs[1:].sum()
    spec = spec.with_probabilities(probs)
    rng = np.random.default_rng(5)
    rho0 = np.kron(random_density(2, rng), random_density(4, rng))
    loose = converge(rho0, spec, tol=1e-10, max_iter=100000)
    tight = rho0
    for _ in range(3 * loose.steps_used):
        tight = apply_map(tight, spec)
    assert trace_distance(loose.state, tight) <= 1e-10


def test_superoperator_properties():
    single = NetworkSpec(1, 1, 0.4, (Edge(0, 1, 1.0),))
    s = superoperator_matrix(single)
    assert np.allclose(s.conj().T @ s, np.eye(16))
    spec = preset_network(2, 2, PHI)
    s = superoperator_matrix(spec)
    assert np.allclose(s @ vec(np.eye(16)), vec(np.eye(16)))


def test_superoperator_respects_cap():
    with pytest.raises(SizeError):
        superoperator_matrix(preset_network(2, 4, PHI))


def test_monte_carlo_single_shot_single_edge_is_exact(rng):
    spec = NetworkSpec(1, 1, 0.9, (Edge(0, 1, 1.0),))
    psi = random_pure(4, rng)
    u = build_gate(spec, spec.edges[0])
    est = sample_trajectories(psi, spec, 3, 1, seed=7)
    assert np.allclose(est, projector(u @ u @ u @ psi))


def test_monte_carlo_zero_steps_and_determinism():
    spec = preset_network(2, 2, PHI)
    psi = np.kron(realize_vector(StatePreset("psi2"), 2, PHI), realize_vector(StatePreset("delta"), 2, PHI))
    assert np.allclose(sample_trajectories(psi, spec, 0, 5, seed=1), projector(psi))
    a = sample_trajectories(psi, spec, 10, 50, seed=3)
    b = sample_trajectories(psi, spec, 10, 50, seed=3)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_trajectories(psi, spec, 1, 0)


def test_monte_carlo_approaches_exact_iterate():
    spec = preset_network(1, 2, PHI)
    psi = np.kron(phi_state(0.3), realize_vector(StatePreset("delta"), 2, PHI))
    exact = list(evolve(projector(psi), spec, 8))[-1]
    assert trace_distance(sample_trajectories(psi, spec, 8, 3000, seed=11), exact) <= 0.05


def test_trajectory_csv_leaves_missing_values_empty():
    spec, rho0 = benchmark_setup(2)
    text = trajectory_csv(iterate(rho0, spec, 1))
    lines = text.splitlines()
    assert lines[0] == "step,concurrence,coherence_norm,distance_to_prediction"
    assert lines[1].endswith(",")
    assert len(lines) == 3

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density
from qnetdeco.asymptotics import (
    Provenance,
    asymptotic_system_state,
    decoherence_factor,
    decoherence_factor_correlated,
    decoherence_factor_product,
    phi_n_state,
    project_asymptotic,
)
from qnetdeco.attractors import analytic_basis, dualize, oracle_space
from qnetdeco.channel import apply_map, converge
from qnetdeco.exceptions import InvalidStateError, ParityRequiredError
from qnetdeco.linalg import partial_trace, projector, trace_distance
from qnetdeco.network import StatePreset, preset_network, realize_state

PHI = 2 * math.pi / 3


def test_projection_matches_iteration(rng):
    spec = preset_network(1, 2, PHI)
    basis = dualize(analytic_basis(1, 2, PHI))
    rho0 = np.kron(random_density(2, rng), random_density(4, rng))
    limit = converge(rho0, spec).state
    assert trace_distance(project_asymptotic(rho0, basis), limit) <= 1e-8


def test_projection_is_a_fixed_point(rng):
    spec = preset_network(2, 2, 1.0)
    basis = dualize(analytic_basis(2, 2, 1.0))
    fixed = project_asymptotic(random_density(16, rng), basis)
    assert np.allclose(apply_map(fixed, spec), fixed, atol=1e-12)


def test_period_two_projection_needs_parity(rng):
    spec = preset_network(2, 1, PHI)
    basis = dualize(oracle_space(spec))
    rho0 = np.kron(realize_state(StatePreset("psi2"), 2, PHI), realize_state(StatePreset("delta"), 1, PHI))
    with pytest.raises(ParityRequiredError):
        project_asymptotic(rho0, basis)
    even = project_asymptotic(rho0, basis, "even")
    odd = project_asymptotic(rho0, basis, "odd")
    res = converge(rho0, spec)
    assert trace_distance(even, res.state_for_parity("even")) <= 1e-8
    assert trace_distance(odd, res.state_for_parity("odd")) <= 1e-8
    assert np.allclose(project_asymptotic(rho0, basis, 7), odd)


def test_projection_requires_dual_basis():
    with pytest.raises(ValueError):
        project_asymptotic(np.eye(8) / 8, analytic_basis(1, 2, PHI))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_closed_form_keeps_diagonal_and_scales_coherences(seed, r):
    rho = random_density(4, np.random.default_rng(seed))
    out = asymptotic_system_state(rho, r)
    assert np.allclose(np.diag(out), np.diag(rho))
    off = ~np.eye(4, dtype=bool)
    assert np.allclose(out[off], r * rho[off])
    assert np.linalg.eigvalsh(out)[0] >= -1e-12


def test_closed_form_endpoints(rng):
    rho = random_density(4, rng)
    assert np.allclose(asymptotic_system_state(rho, 1.0), rho)
    assert np.allclose(asymptotic_system_state(rho, 0.0), np.diag(np.diag(rho)))
    with pytest.raises(ValueError):
        asymptotic_system_state(rho, 1.1)


def test_decoherence_factor_of_phi_environment_is_one():
    rho = projector(phi_n_state(PHI, 3))
    assert decoherence_factor(rho, PHI, 3).value == pytest.approx(1)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_product_factor_matches_general(rng, n):
    xi = random_density(2, rng)
    rho_e = xi
    for _ in range(n - 1):
        rho_e = np.kron(rho_e, xi)
    general = decoherence_factor(rho_e, PHI, n)
    product = decoherence_factor_product(xi, n, PHI)
    assert product.value == pytest.approx(general.value, abs=1e-12)
    assert product.provenance is Provenance.PRODUCT_POWER
    assert general.provenance is Provenance.GENERAL


@pytest.mark.parametrize("alpha", [0, math.pi / 6, math.pi / 3, math.pi / 2])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_correlated_factor(alpha, n):
    r = decoherence_factor_correlated(alpha, n, PHI)
    assert abs(r.value - math.cos(alpha) ** 2) <= 1e-10
    assert float(r) == r.value


def test_decoherence_factor_errors():
    with pytest.raises(ValueError):
        decoherence_factor(np.eye(4) / 4, PHI, 3)
    with pytest.raises(InvalidStateError):
        decoherence_factor(np.diag([2.0, -1.0]), PHI)
    with pytest.raises(ValueError):
        decoherence_factor_product(np.eye(2) / 2, 0, PHI)


def test_closed_form_matches_iteration_for_benchmark_state():
    spec = preset_network(2, 3, PHI)
    rho_s = realize_state(StatePreset("psi2"), 2, PHI)
    rho_e = realize_state(StatePreset("delta"), 3, PHI)
    r = decoherence_factor(rho_e, PHI, 3).value
    assert r == pytest.approx(0.75**3)
    limit = partial_trace(converge(np.kron(rho_s, rho_e), spec).state, [0, 1])
    assert trace_distance(limit, asymptotic_system_state(rho_s, r)) <= 1e-8

import math

import numpy as np
import pytest

from conftest import random_density
from qnetdeco.attractors import (
    Attractor,
    AttractorBasis,
    analytic_basis,
    analytic_count,
    block_projection,
    dualize,
    gram_condition,
    oracle_space,
    orthonormalize,
    verify_basis,
)
from qnetdeco.exceptions import IllConditionedBasisError, SizeError
from qnetdeco.linalg import vec
from qnetdeco.network import Edge, NetworkSpec, preset_network

PHI = 2 * math.pi / 3


def span_residual(inner: AttractorBasis, outer: AttractorBasis) -> float:
    """Largest distance from an ``inner`` matrix to the span of ``outer``."""
    q, _ = np.linalg.qr(np.array([vec(a.matrix) for a in outer.attractors]).T)
    worst = 0.0
    for a in inner.attractors:
        v = vec(a.matrix)
        worst = max(worst, np.linalg.norm(v - q @ (q.conj().T @ v)) / np.linalg.norm(v))
    return worst


@pytest.mark.parametrize("k, want", [(1, 11), (2, 29)])
def test_analytic_count(k, want):
    assert analytic_count(k) == want
    assert len(analytic_basis(k, 3, PHI)) == want


@pytest.mark.parametrize("phi", [PHI, math.pi / 5, 1.0])
@pytest.mark.parametrize("k, n", [(1, 2), (2, 2), (2, 3)])
def test_analytic_basis_verifies(k, n, phi):
    basis = analytic_basis(k, n, phi)
    rep = verify_basis(basis, preset_network(k, n, phi))
    assert rep.max_residual <= 1e-10
    assert rep.independent


def test_analytic_basis_is_incomplete_without_env_env_edges():
    # every listed operator is still fixed, but the attractor space grows
    spec = NetworkSpec(1, 2, PHI, (Edge(0, 1, 0.5), Edge(0, 2, 0.5)))
    assert verify_basis(analytic_basis(1, 2, PHI), spec).max_residual <= 1e-10
    assert oracle_space(spec).dimension(1.0) > analytic_count(1)


def test_cnot_commutant_dimension():
    # u(pi/2) is X, so one edge with p = 1 is a CNOT: eigenvalues (1, 1, 1, -1)
    spec = NetworkSpec(1, 1, math.pi / 2, (Edge(0, 1, 1.0),))
    oracle = oracle_space(spec)
    assert oracle.dimension(1.0) == 10
    assert oracle.dimension(-1.0) == 6
    assert verify_basis(oracle, spec).max_residual <= 1e-10


@pytest.mark.parametrize("k, n", [(1, 2), (2, 2)])
def test_oracle_and_analytic_spans_coincide(k, n):
    spec = preset_network(k, n, PHI)
    oracle = oracle_space(spec)
    analytic = analytic_basis(k, n, PHI)
    assert oracle.eigenvalues == [1.0]
    assert len(oracle) == len(analytic)
    assert span_residual(analytic, oracle) <= 1e-10
    assert span_residual(oracle, analytic) <= 1e-10


def test_oracle_blocks_are_orthonormal():
    oracle = oracle_space(preset_network(2, 1, PHI))
    for b in oracle.blocks:
        assert np.allclose(b.gram, np.eye(len(b.indices)), atol=1e-10)


def test_oracle_respects_cap():
    with pytest.raises(SizeError):
        oracle_space(preset_network(2, 4, PHI))


def test_projection_is_idempotent_and_keeps_attractors(rng):
    basis = dualize(analytic_basis(1, 2, PHI))
    block = basis.blocks[0]
    rho = random_density(8, rng)
    once = block_projection(basis, block, rho)
    assert np.allclose(block_projection(basis, block, once), once, atol=1e-12)
    x = basis.attractors[3].matrix
    assert np.allclose(block_projection(basis, block, x), x, atol=1e-12)


def test_projection_requires_dual_basis(rng):
    basis = analytic_basis(1, 2, PHI)
    with pytest.raises(ValueError):
        block_projection(basis, basis.blocks[0], np.eye(8) / 8)


def test_orthonormalize_preserves_span():
    basis = analytic_basis(1, 2, PHI)
    ortho = orthonormalize(basis)
    assert span_residual(basis, ortho) <= 1e-10
    assert gram_condition(ortho) == pytest.approx(1, abs=1e-8)


def test_dependent_basis_is_rejected():
    m = np.eye(4, dtype=complex)
    dup = AttractorBasis((Attractor(1.0, m, "a"), Attractor(1.0, 2 * m, "b")))
    with pytest.raises(IllConditionedBasisError):
        dualize(dup)
    assert not verify_basis(dup, NetworkSpec(1, 1, PHI, (Edge(0, 1, 1.0),))).independent


def test_verify_basis_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        verify_basis(analytic_basis(1, 2, PHI), preset_network(1, 3, PHI))

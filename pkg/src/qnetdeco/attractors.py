"""Attractor spaces of the collision map.

An attractor ``X`` with eigenvalue ``lam`` (``|lam| = 1``) satisfies
``U_e X U_e^dagger = lam X`` for every edge. Iterates of the map converge
onto their span, so projecting the initial state onto it gives the
asymptotic state.

Two independent sources of attractors are provided: the closed-form family
from :func:`analytic_basis` and the exhaustive numerical solve in
:func:`oracle_space`.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace

import numpy as np

from ._tensor import conjugate_edge
from .config import DEFAULT, Tolerances
from .exceptions import IllConditionedBasisError, SizeError
from .linalg import kron, nullspace, projector, unvec, vec
from .network import NetworkSpec, gates, local_gate, phi_state


@dataclass(frozen=True)
class Attractor:
    eigenvalue: complex
    matrix: np.ndarray
    label: str


@dataclass(frozen=True)
class Block:
    eigenvalue: complex
    indices: tuple[int, ...]
    gram: np.ndarray
    gram_inv: np.ndarray | None = None


def _same_eigenvalue(a: complex, b: complex, tol: float) -> bool:
    return abs(cmath.phase(a / b)) <= tol


def _stack(mats) -> np.ndarray:
    """Rows are the column-stacked attractor matrices."""
    return np.array([vec(m) for m in mats])


@dataclass(frozen=True)
class AttractorBasis:
    attractors: tuple[Attractor, ...]
    blocks: tuple[Block, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "attractors", tuple(self.attractors))
        if not self.blocks:
            object.__setattr__(self, "blocks", tuple(_group(self.attractors)))

    def __len__(self) -> int:
        return len(self.attractors)

    @property
    def eigenvalues(self) -> list[complex]:
        return [b.eigenvalue for b in self.blocks]

    @property
    def dualized(self) -> bool:
        return all(b.gram_inv is not None for b in self.blocks)

    def block_for(self, lam: complex, tol: float = DEFAULT.eigenvalue_dedup) -> Block | None:
        for b in self.blocks:
            if _same_eigenvalue(b.eigenvalue, lam, tol):
                return b
        return None

    def dimension(self, lam: complex) -> int:
        b = self.block_for(lam)
        return 0 if b is None else len(b.indices)

    def matrices(self, block: Block) -> list[np.ndarray]:
        return [self.attractors[i].matrix for i in block.indices]


def _group(attractors, tol: float = DEFAULT.eigenvalue_dedup) -> list[Block]:
    groups: list[tuple[complex, list[int]]] = []
    for i, a in enumerate(attractors):
        for lam, idx in groups:
            if _same_eigenvalue(lam, a.eigenvalue, tol):
                idx.append(i)
                break
        else:
            groups.append((a.eigenvalue, [i]))
    blocks = []
    for lam, idx in groups:
        v = _stack([attractors[i].matrix for i in idx])
        blocks.append(Block(lam, tuple(idx), v.conj() @ v.T))
    return blocks


def _basis_ket(index: int, qubits: int) -> np.ndarray:
    e = np.zeros(1 << qubits, dtype=complex)
    e[index] = 1.0
    return e


def _label(x: int, k: int) -> str:
    return format(x, f"0{k}b")


def analytic_basis(k: int, n: int, phi: float) -> AttractorBasis:
    """Closed-form eigenvalue-1 attractors, ``4**k + 3 * 2**k + 1`` of them.

    Families, in order (``x``, ``y`` run over the system computational
    basis, ``0`` is the all-zero label, ``phi_n`` the coupling eigenstate on
    every environment qubit):

    1. ``|x><x| (x) I_n``
    2. ``|0><x| (x) |0_n><phi_n|``
    3. ``|x><0| (x) |phi_n><0_n|``
    4. ``|x><y| (x) |phi_n><phi_n|``
    5. ``|0><0| (x) |0_n><0_n|``
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    ds = 1 << k
    zero_n = _basis_ket(0, n)
    phi_n = np.array([1.0 + 0j])
    for _ in range(n):
        phi_n = np.kron(phi_n, phi_state(phi))
    ident_n = np.eye(1 << n, dtype=complex)
    zero_phi = np.outer(zero_n, phi_n.conj())
    phi_zero = np.outer(phi_n, zero_n.conj())
    phi_phi = projector(phi_n)
    zero_zero = projector(zero_n)

    def sys(x, y):
        return np.outer(_basis_ket(x, k), _basis_ket(y, k))

    out = []
    for x in range(ds):
        out.append((kron(sys(x, x), ident_n), f"diag|{_label(x, k)}>"))
    for x in range(ds):
        out.append((kron(sys(0, x), zero_phi), f"row0<{_label(x, k)}|"))
    for x in range(ds):
        out.append((kron(sys(x, 0), phi_zero), f"col0|{_label(x, k)}>"))
    for x in range(ds):
        for y in range(ds):
            out.append((kron(sys(x, y), phi_phi), f"phi|{_label(x, k)}><{_label(y, k)}|"))
    out.append((kron(sys(0, 0), zero_zero), "zero"))
    return AttractorBasis(tuple(Attractor(1.0 + 0j, m, label) for m, label in out))


def analytic_count(k: int) -> int:
    return 4**k + 3 * 2**k + 1


@dataclass
class ResidualReport:
    max_residual: float
    argmax: tuple[int, int] | None
    per_attractor: list[float]
    gram_rank: int
    gram_size: int

    @property
    def independent(self) -> bool:
        return self.gram_rank == self.gram_size


def residual(x: np.ndarray, lam: complex, spec: NetworkSpec, edge_index: int) -> float:
    e = spec.edges[edge_index]
    m = spec.num_qubits
    g = local_gate(spec.phi).reshape(2, 2, 2, 2)
    t = np.asarray(x, dtype=complex).reshape([2] * (2 * m))
    y = conjugate_edge(t, g, e.control, e.target, m).reshape(spec.dim, spec.dim)
    return float(np.max(np.abs(y - lam * x)))


def verify_basis(basis: AttractorBasis, spec: NetworkSpec, *, tol: Tolerances = DEFAULT) -> ResidualReport:
    """Max-entry residual of the eigenvalue equation over all attractors and edges."""
    best, arg = 0.0, None
    per = []
    for i, a in enumerate(basis.attractors):
        if a.matrix.shape != (spec.dim, spec.dim):
            raise ValueError(f"attractor {i} has shape {a.matrix.shape}, network needs {spec.dim}")
        worst = 0.0
        for j in range(len(spec.edges)):
            r = residual(a.matrix, a.eigenvalue, spec, j)
            worst = max(worst, r)
            if arg is None or r > best:
                best, arg = r, (i, j)
        per.append(worst)
    rank = sum(int(np.linalg.matrix_rank(b.gram, tol=tol.nullspace * max(1.0, np.abs(b.gram).max())))
               for b in basis.blocks)
    return ResidualReport(best, arg, per, rank, len(basis))


def _candidate_eigenvalues(spec: NetworkSpec, tol: float) -> list[complex]:
    cands: list[complex] | None = None
    for u in gates(spec):
        mu = np.linalg.eigvals(u)
        here: list[complex] = []
        for a in mu:
            for b in mu:
                lam = complex(a * np.conj(b))
                lam /= abs(lam)
                if not any(_same_eigenvalue(lam, c, tol) for c in here):
                    here.append(lam)
        if cands is None:
            cands = here
        else:
            cands = [c for c in cands if any(_same_eigenvalue(c, h, tol) for h in here)]
    cands = cands or []
    # snap to +-1 when numerically indistinguishable, and list lam = 1 first
    snapped = []
    for c in cands:
        for exact in (1.0 + 0j, -1.0 + 0j):
            if _same_eigenvalue(c, exact, tol):
                c = exact
        snapped.append(c)
    return sorted(snapped, key=lambda c: (abs(cmath.phase(c)), cmath.phase(c)))


def oracle_space(spec: NetworkSpec, *, tol: Tolerances = DEFAULT) -> AttractorBasis:
    """All attractors of ``spec`` by brute-force null-space intersection.

    For each candidate eigenvalue the null spaces of
    ``conj(U_e) (x) U_e - lam I`` are intersected edge by edge. Each block
    of the result is Hilbert-Schmidt orthonormal.
    """
    if spec.num_qubits > tol.oracle_qubits:
        raise SizeError(
            f"register of {spec.num_qubits} qubits exceeds oracle cap {tol.oracle_qubits}"
        )
    d = spec.dim
    sup = [np.kron(u.conj(), u) for u in gates(spec)]
    eye = np.eye(d * d, dtype=complex)
    attractors = []
    for lam in _candidate_eigenvalues(spec, tol.eigenvalue_dedup):
        basis = eye
        for s in sup:
            constraint = s - lam * eye
            scale = np.linalg.norm(constraint, 2)
            basis = basis @ nullspace(constraint @ basis, tol.nullspace, scale=scale)
            if basis.shape[1] == 0:
                break
        if basis.shape[1] == 0:
            continue
        # re-orthonormalize to wash out accumulated roundoff
        q, _ = np.linalg.qr(basis)
        for i in range(q.shape[1]):
            attractors.append(Attractor(lam, unvec(q[:, i], d), "oracle"))
    return AttractorBasis(tuple(attractors))


def dualize(basis: AttractorBasis, *, tol: Tolerances = DEFAULT) -> AttractorBasis:
    """Attach inverse Gram matrices so projections can use a non-orthogonal basis."""
    blocks = []
    for b in basis.blocks:
        g = 0.5 * (b.gram + b.gram.conj().T)
        w = np.linalg.eigvalsh(g)
        if w[0] <= 0 or w[-1] / w[0] > tol.gram_condition:
            cond = np.inf if w[0] <= 0 else w[-1] / w[0]
            raise IllConditionedBasisError(
                f"Gram block for eigenvalue {b.eigenvalue} has condition number {cond:.3e}"
            )
        blocks.append(replace(b, gram_inv=np.linalg.inv(g)))
    return replace(basis, blocks=tuple(blocks))


def gram_condition(basis: AttractorBasis) -> float:
    worst = 1.0
    for b in basis.blocks:
        w = np.linalg.eigvalsh(0.5 * (b.gram + b.gram.conj().T))
        worst = max(worst, np.inf if w[0] <= 0 else w[-1] / w[0])
    return float(worst)


def orthonormalize(basis: AttractorBasis) -> AttractorBasis:
    """Gram-Schmidt (via QR) within each eigenvalue block."""
    out = []
    for b in basis.blocks:
        mats = basis.matrices(b)
        d = mats[0].shape[0]
        q, _ = np.linalg.qr(_stack(mats).T)
        out += [Attractor(b.eigenvalue, unvec(q[:, i], d), "orthonormalized") for i in range(q.shape[1])]
    return AttractorBasis(tuple(out))


def block_projection(basis: AttractorBasis, block: Block, rho) -> np.ndarray:
    """Orthogonal projection of ``rho`` onto the span of one block."""
    if block.gram_inv is None:
        raise ValueError("basis must be dualized before projecting")
    rho = np.asarray(rho, dtype=complex)
    v = _stack(basis.matrices(block))
    coeffs = block.gram_inv @ (v.conj() @ vec(rho))
    return unvec(coeffs @ v, rho.shape[0])

"""Dense complex linear algebra on qubit registers.

Conventions used throughout the package:

* Matrices are plain ``numpy`` complex arrays.
* Qubit 0 is the most significant tensor factor, so the basis label
  ``|q0 q1 ... q_{m-1}>`` maps to the integer with ``q0`` as the high bit.
* ``vec`` stacks columns. For ``X = [[a, b], [c, d]]`` it returns
  ``[a, c, b, d]``, and ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .exceptions import (
    InvalidStateError,
    NotHermitianError,
    NotPSDError,
    SizeError,
)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf")
    return a


def qubit_count(dim: int) -> int:
    m = int(dim).bit_length() - 1
    if dim < 1 or (1 << m) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return m


def kron(a, b, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > tol.max_dim:
        raise SizeError(f"kron result {rows}x{cols} exceeds cap {tol.max_dim}")
    return np.kron(a, b)


def kron_all(factors: Sequence, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = kron(out, f, tol=tol)
    return out


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep``.

    The kept qubits appear in their original relative order regardless of
    the order given in ``keep``.
    """
    rho = as_matrix(rho)
    m = qubit_count(rho.shape[0])
    keep = sorted(int(q) for q in keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= m:
        raise ValueError(f"invalid keep indices {keep} for {m} qubits")
    traced = [q for q in range(m) if q not in keep]
    t = rho.reshape([2] * (2 * m))
    # einsum labels: ket axes 0..m-1, bra axes m..2m-1; traced bra axes reuse ket labels
    ket = list(range(m))
    bra = [q if q in traced else m + q for q in range(m)]
    out = [q for q in keep] + [m + q for q in keep]
    red = np.einsum(t, ket + bra, out)
    d = 1 << len(keep)
    return red.reshape(d, d)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr(a^dagger b)``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def is_hermitian(m, atol: float) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= atol)


def hermitian_eig(m, *, tol: Tolerances = DEFAULT):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1] or not is_hermitian(m, tol.eig_hermitian):
        raise NotHermitianError("hermitian_eig requires a Hermitian matrix")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def nullspace(m, tol: float = DEFAULT.nullspace, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space of ``m``.

    A singular direction is null when its singular value is at most
    ``tol * sigma_max``. Directions beyond the row count are always null.
    Pass ``scale`` to measure the cutoff against a known reference norm
    instead of ``sigma_max`` (needed when ``m`` may be numerically zero).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=complex)
    # vh is already square when rows >= cols, so the thin SVD suffices
    _, s, vh = np.linalg.svd(m, full_matrices=rows < cols)
    ref = scale if scale is not None else (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol * ref))
    return vh[rank:].conj().T.copy()


def sqrt_psd(m, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    w, v = hermitian_eig(m, tol=tol)
    if w.size and w[-1] < -tol.psd_reject:
        raise NotPSDError(f"eigenvalue {w[-1]:.3e} below -{tol.psd_reject:g}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_distance(a, b, *, tol: Tolerances = DEFAULT) -> float:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    w, _ = hermitian_eig(a - b, tol=tol)
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def vec(x) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def check_pure_state(psi, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    qubit_count(psi.size)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol.pure_norm:
        raise InvalidStateError(f"state norm {norm!r} is not 1")
    return psi


def check_density_matrix(rho, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Validate and return ``rho`` as a complex array.

    Raises InvalidStateError when ``rho`` is not square of power-of-two
    size, not Hermitian, not unit trace, or has an eigenvalue below the
    clamp threshold.
    """
    try:
        rho = as_matrix(rho)
        if rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got {rho.shape}")
        qubit_count(rho.shape[0])
    except ValueError as exc:
        raise InvalidStateError(str(exc)) from exc
    if not is_hermitian(rho, tol.hermitian):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol.trace:
        raise InvalidStateError(f"trace {tr!r} is not 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w[0] < -tol.psd_clamp:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e}")
    return rho

"""Asymptotic states, by projection onto attractors and in closed form.

The closed form applies to an uncorrelated input ``rho_S (x) rho_E``: the
reduced system state keeps its pointer-basis diagonal and every coherence
is multiplied by the decoherence factor ``r = <phi_n|rho_E|phi_n>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .attractors import AttractorBasis, block_projection
from .config import DEFAULT, Tolerances
from .exceptions import InvalidStateError, ParityRequiredError
from .linalg import as_matrix, check_density_matrix, qubit_count
from .network import StatePreset, phi_state, realize_state


class Provenance(str, Enum):
    GENERAL = "general"
    PRODUCT_POWER = "product_power"
    CORRELATED = "correlated"


@dataclass(frozen=True)
class DecoherenceFactor:
    value: float
    provenance: Provenance = Provenance.GENERAL

    def __float__(self) -> float:
        return self.value


def project_asymptotic(rho_in, basis: AttractorBasis, parity="limit") -> np.ndarray:
    """``sum_lam lam**N P_lam(rho_in)`` over the eigenvalue blocks of ``basis``.

    ``parity`` is ``"limit"`` (only valid when every block has eigenvalue
    1), ``"even"``, ``"odd"``, or an explicit step count ``N``.
    """
    if not basis.dualized:
        raise ValueError("basis must be dualized before projecting")
    rho_in = as_matrix(rho_in)
    if parity == "limit":
        for b in basis.blocks:
            if abs(b.eigenvalue - 1) > 1e-8:
                raise ParityRequiredError(
                    f"attractor block with eigenvalue {b.eigenvalue:.6g} present: "
                    "the asymptote is not stationary, pass parity='even'/'odd'"
                )
        steps = 0
    elif parity == "even":
        steps = 0
    elif parity == "odd":
        steps = 1
    else:
        steps = int(parity)
    out = np.zeros_like(rho_in)
    for b in basis.blocks:
        out += b.eigenvalue**steps * block_projection(basis, b, rho_in)
    return out


def asymptotic_system_state(rho_s, r, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Pointer-basis diagonal of ``rho_s`` kept, off-diagonals scaled by ``r``."""
    r = float(r)
    if not -1e-12 <= r <= 1.0 + 1e-12:
        raise ValueError(f"decoherence factor {r} outside [0, 1]")
    r = min(1.0, max(0.0, r))
    rho_s = check_density_matrix(rho_s, tol=tol)
    d = np.diag(np.diag(rho_s))
    return d + r * (rho_s - d)


def _clamp(r: complex, tol: Tolerances) -> float:
    if abs(r.imag) > tol.decoherence_reject:
        raise InvalidStateError(f"decoherence factor has imaginary part {r.imag:.3e}")
    x = r.real
    if x < -tol.decoherence_reject or x > 1 + tol.decoherence_reject:
        raise InvalidStateError(f"decoherence factor {x} outside [0, 1]")
    return min(1.0, max(0.0, x))


def phi_n_state(phi: float, n: int) -> np.ndarray:
    v = np.array([1.0 + 0j])
    for _ in range(n):
        v = np.kron(v, phi_state(phi))
    return v


def decoherence_factor(rho_e, phi: float, n: int | None = None, *, tol: Tolerances = DEFAULT) -> DecoherenceFactor:
    """``<phi_n|rho_e|phi_n>`` for an ``n``-qubit environment state."""
    rho_e = as_matrix(rho_e)
    m = qubit_count(rho_e.shape[0])
    if n is not None and n != m:
        raise ValueError(f"environment state has {m} qubits, expected {n}")
    v = phi_n_state(phi, m)
    return DecoherenceFactor(_clamp(complex(v.conj() @ rho_e @ v), tol))


def decoherence_factor_product(xi, n: int, phi: float, *, tol: Tolerances = DEFAULT) -> DecoherenceFactor:
    if n < 1:
        raise ValueError("n must be >= 1")
    q = decoherence_factor(xi, phi, 1, tol=tol).value
    return DecoherenceFactor(q**n, Provenance.PRODUCT_POWER)


def decoherence_factor_correlated(alpha: float, n: int, phi: float, *, tol: Tolerances = DEFAULT) -> DecoherenceFactor:
    if n < 1:
        raise ValueError("n must be >= 1")
    rho_e = realize_state(StatePreset("correlated", {"alpha": alpha}), n, phi)
    r = decoherence_factor(rho_e, phi, n, tol=tol).value
    return DecoherenceFactor(r, Provenance.CORRELATED)

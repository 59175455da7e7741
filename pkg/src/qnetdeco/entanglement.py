"""Two-qubit concurrence and the fragile/robust classification.

Fragile states lose all entanglement at a strictly positive decoherence
factor; robust ones keep some for every ``r > 0``. Which of the two a
state is follows from its four pointer-basis populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .asymptotics import asymptotic_system_state
from .config import DEFAULT, Tolerances
from .exceptions import InvalidStateError, NoFiniteSizeError
from .linalg import check_density_matrix, hermitian_eig, sqrt_psd

SIGMA_YY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)


def _two_qubit(rho, tol: Tolerances) -> np.ndarray:
    rho = check_density_matrix(rho, tol=tol)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a two-qubit state, got shape {rho.shape}")
    return rho


def wootters_values(rho, *, tol: Tolerances = DEFAULT, cutoff: float = 1e-13) -> np.ndarray:
    """Decreasing square roots of the eigenvalues of ``rho (Y (x) Y) rho* (Y (x) Y)``.

    With ``rho = W W^dagger`` these are the singular values of
    ``W^T (Y (x) Y) W``, which avoids square-rooting roundoff-level
    eigenvalues. Eigenvalues of ``rho`` below ``cutoff`` are dropped.
    """
    rho = _two_qubit(rho, tol)
    w, v = hermitian_eig(rho, tol=tol)
    keep = w > cutoff
    if not np.any(keep):
        return np.zeros(4)
    factor = v[:, keep] * np.sqrt(w[keep])
    tau = factor.T @ SIGMA_YY @ factor
    lam = np.zeros(4)
    sv = np.linalg.svd(tau, compute_uv=False)
    lam[: sv.size] = sv
    return np.sort(lam)[::-1]


def wootters_values_hermitian(rho, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Same values via ``sqrt(sqrt(rho) rho~ sqrt(rho))``.

    Loses about eight digits on rank-deficient states; kept as an
    independent cross-check.
    """
    rho = _two_qubit(rho, tol)
    s = sqrt_psd(rho, tol=tol)
    spin_flipped = SIGMA_YY @ rho.conj() @ SIGMA_YY
    m = s @ spin_flipped @ s
    r = sqrt_psd(0.5 * (m + m.conj().T), tol=tol)
    w, _ = hermitian_eig(r, tol=tol)
    return np.clip(w, 0.0, None)


def concurrence(rho, *, tol: Tolerances = DEFAULT) -> float:
    lam = wootters_values(rho, tol=tol)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def _check_r(r: float) -> float:
    r = float(r)
    if not -1e-12 <= r <= 1 + 1e-12:
        raise ValueError(f"decoherence factor {r} outside [0, 1]")
    return min(1.0, max(0.0, r))


def concurrence_psi1_asymptotic(a: complex, b: complex, r: float) -> float:
    """Asymptotic concurrence of ``a|00> + b|11>``: ``2|ab| r``."""
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > DEFAULT.normalization:
        raise InvalidStateError("|a|^2 + |b|^2 must equal 1")
    return 2.0 * abs(a * b) * _check_r(r)


def concurrence_psi2_asymptotic(r: float) -> float:
    """Asymptotic concurrence of the maximally entangled psi2 state."""
    return 0.5 * max(0.0, 3.0 * _check_r(r) - 1.0)


def n_sep(q: float) -> int:
    """Smallest environment size at which the psi2 asymptotic entanglement vanishes.

    ``q`` is the single-qubit overlap ``<phi|xi|phi>`` of a product
    environment, so the decoherence factor at size ``n`` is ``q**n``.
    """
    q = float(q)
    if q <= 0:
        raise ValueError(f"overlap q={q} must be positive")
    if q >= 1:
        raise NoFiniteSizeError(f"overlap q={q} >= 1: entanglement never vanishes")
    n = max(1, math.ceil(math.log(3.0) / -math.log(q)))
    # the log-space guess can be off by one at ties; settle it on the exact predicate
    while n > 1 and concurrence_psi2_asymptotic(q ** (n - 1)) == 0.0:
        n -= 1
    while concurrence_psi2_asymptotic(q**n) > 0.0:
        n += 1
    return n


class Fragility(str, Enum):
    FRAGILE = "Fragile"
    ROBUST = "Robust"
    SEPARABLE = "Separable"


@dataclass(frozen=True)
class FragilityClass:
    tag: Fragility
    diagonal_product: float
    initial_concurrence: float
    r_star: float | None = None

    def to_dict(self) -> dict:
        out = {
            "class": self.tag.value,
            "diagonal_product": self.diagonal_product,
            "initial_concurrence": self.initial_concurrence,
        }
        if self.r_star is not None:
            out["r_star"] = self.r_star
        return out


def fragility_threshold(
    rho_s, *, tol: Tolerances = DEFAULT, resolution: float = 1e-10
) -> float:
    """Infimum of ``r`` for which the dephased state is still entangled.

    Found by bisection; returns 1.0 for a separable input.
    """
    rho_s = _two_qubit(rho_s, tol)

    def entangled(r):
        return concurrence(asymptotic_system_state(rho_s, r, tol=tol), tol=tol) > tol.separable

    if not entangled(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if entangled(mid):
            hi = mid
        else:
            lo = mid
    return hi


def classify_fragility(
    rho_s, *, tol: Tolerances = DEFAULT, diagnose: bool = False
) -> FragilityClass:
    rho_s = _two_qubit(rho_s, tol)
    diag = np.real(np.diag(rho_s))
    product = float(np.prod(diag))
    c0 = concurrence(rho_s, tol=tol)
    r_star = fragility_threshold(rho_s, tol=tol) if diagnose else None
    if c0 <= tol.separable:
        tag = Fragility.SEPARABLE
    elif np.all(diag > tol.diagonal_zero * float(np.real(np.trace(rho_s)))):
        tag = Fragility.FRAGILE
    else:
        tag = Fragility.ROBUST
    return FragilityClass(tag, product, c0, r_star)

"""The random-unitary collision map and its iteration.

One step replaces ``rho`` by ``sum_e p_e U_e rho U_e^dagger``. Gates are
applied as local 4x4 contractions on the register tensor instead of
full-register products, which keeps a step at ``O(|E| d^2)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from ._tensor import conjugate_edge, contract
from .config import DEFAULT, Tolerances
from .entanglement import concurrence
from .exceptions import SizeError
from .linalg import as_matrix, check_pure_state, partial_trace, trace_distance
from .network import NetworkSpec, gates, local_gate


@dataclass(frozen=True)
class TrajectoryRecord:
    step: int
    concurrence: float | None
    coherence_norm: float
    distance_to_prediction: float | None = None


class ConvergenceStatus(str, Enum):
    STATIONARY = "stationary"
    PERIOD2 = "period2"
    MAX_ITER = "max_iter_reached"


@dataclass(frozen=True)
class ConvergenceResult:
    status: ConvergenceStatus
    steps_used: int
    final_states: tuple[np.ndarray, ...]
    # step index of each entry in final_states
    final_steps: tuple[int, ...]

    @property
    def state(self) -> np.ndarray:
        return self.final_states[-1]

    def state_for_parity(self, parity: str) -> np.ndarray:
        want = 0 if parity == "even" else 1
        for s, rho in zip(self.final_steps, self.final_states):
            if s % 2 == want:
                return rho
        return self.final_states[-1]


def _check_dim(rho: np.ndarray, spec: NetworkSpec) -> None:
    if rho.shape != (spec.dim, spec.dim):
        raise ValueError(f"state has shape {rho.shape}, network needs {(spec.dim, spec.dim)}")


def apply_map(rho, spec: NetworkSpec) -> np.ndarray:
    """One collision step: ``sum_e p_e U_e rho U_e^dagger``."""
    rho = as_matrix(rho)
    _check_dim(rho, spec)
    m = spec.num_qubits
    g = local_gate(spec.phi).reshape(2, 2, 2, 2)
    t = rho.reshape([2] * (2 * m))
    out = np.zeros_like(t)
    for e in spec.edges:
        out += e.probability * conjugate_edge(t, g, e.control, e.target, m)
    return out.reshape(spec.dim, spec.dim)


def apply_map_dense(rho, spec: NetworkSpec) -> np.ndarray:
    """Reference implementation with full-register gate matrices."""
    rho = as_matrix(rho)
    _check_dim(rho, spec)
    return sum(e.probability * u @ rho @ u.conj().T for e, u in zip(spec.edges, gates(spec)))


def coherence_norm(rho_s: np.ndarray) -> float:
    """Sum of absolute off-diagonal entries in the computational basis."""
    return float(np.sum(np.abs(rho_s)) - np.sum(np.abs(np.diag(rho_s))))


def observe_state(
    rho: np.ndarray,
    spec: NetworkSpec,
    step: int,
    observe: tuple[int, int] | None,
    prediction: np.ndarray | None = None,
) -> TrajectoryRecord:
    rho_s = partial_trace(rho, range(spec.k))
    conc = None
    if observe is not None:
        conc = concurrence(partial_trace(rho, observe))
    dist = None
    if prediction is not None:
        dist = trace_distance(rho_s, prediction)
    return TrajectoryRecord(step, conc, coherence_norm(rho_s), dist)


def _check_observe(spec: NetworkSpec, observe) -> tuple[int, int] | None:
    if observe is None:
        return None
    a, b = (int(q) for q in observe)
    if a == b or not (spec.is_system(a) and spec.is_system(b)):
        raise ValueError(f"observe pair {observe} must be two distinct system qubits")
    return (min(a, b), max(a, b))


def evolve(rho0, spec: NetworkSpec, steps: int) -> Iterator[np.ndarray]:
    """Yield ``rho(0), rho(1), ..., rho(steps)``."""
    rho = as_matrix(rho0)
    _check_dim(rho, spec)
    yield rho
    for _ in range(steps):
        rho = apply_map(rho, spec)
        yield rho


def iterate(
    rho0,
    spec: NetworkSpec,
    steps: int,
    observe: tuple[int, int] | None = (0, 1),
    prediction: np.ndarray | None = None,
) -> list[TrajectoryRecord]:
    """Observables at every step ``0..steps``.

    ``prediction`` is an optional reduced system state to measure the
    trace distance against.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    return observe_series(evolve(rho0, spec, steps), spec, observe, prediction)


def observe_series(states, spec: NetworkSpec, observe=(0, 1), prediction=None) -> list[TrajectoryRecord]:
    observe = _check_observe(spec, observe)
    return [observe_state(rho, spec, n, observe, prediction) for n, rho in enumerate(states)]


def converge(
    rho0,
    spec: NetworkSpec,
    tol: float = DEFAULT.converge,
    max_iter: int = DEFAULT.max_iter,
    min_amplitude: float = 1e-6,
    noise_floor: float = 1e-14,
) -> ConvergenceResult:
    """Iterate until the state stops moving or settles into a 2-cycle.

    Stationary: one step moves the state by at most ``tol`` (trace
    distance) and so does the whole remaining geometric tail
    ``d * ratio / (1 - ratio)`` (held to half of ``tol`` since the ratio is
    an estimate), with ``ratio`` the latest contraction of
    successive step distances. Without the tail bound a slow mode
    (eigenvalue near 1) stops the loop far from the limit. Steps below
    ``noise_floor`` are roundoff and always count as stationary. The
    ratio slightly underestimates the slowest rate when several slow
    modes are nearly degenerate, so the bound is a heuristic there.

    Period-2: two steps move the state by at most ``tol`` while one step
    still moves it by more than ``min_amplitude``. The amplitude floor
    keeps a slowly damped oscillation (a contracting mode with negative
    eigenvalue) from being mistaken for a true 2-cycle.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    prev2 = None
    prev1 = as_matrix(rho0)
    _check_dim(prev1, spec)
    two_step = np.inf
    last_step = np.inf
    for step in range(1, max_iter + 1):
        cur = apply_map(prev1, spec)
        one_step = trace_distance(cur, prev1)
        if one_step <= tol:
            ratio = one_step / last_step if last_step > 0 else 0.0
            tail = one_step * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
            if tail <= 0.5 * tol or one_step <= noise_floor:
                return ConvergenceResult(ConvergenceStatus.STATIONARY, step, (cur,), (step,))
        if prev2 is not None:
            two_step = trace_distance(cur, prev2)
            if two_step <= tol and one_step > min_amplitude:
                return ConvergenceResult(
                    ConvergenceStatus.PERIOD2, step, (prev1, cur), (step - 1, step)
                )
        prev2, prev1 = prev1, cur
        last_step = one_step
    if two_step <= tol and last_step > min_amplitude:
        return ConvergenceResult(
            ConvergenceStatus.PERIOD2, max_iter, (prev2, prev1), (max_iter - 1, max_iter)
        )
    return ConvergenceResult(ConvergenceStatus.MAX_ITER, max_iter, (prev1,), (max_iter,))


def superoperator_matrix(spec: NetworkSpec, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Matrix ``S`` with ``S @ vec(rho) == vec(P(rho))`` under column stacking."""
    if spec.num_qubits > tol.oracle_qubits:
        raise SizeError(
            f"register of {spec.num_qubits} qubits exceeds oracle cap {tol.oracle_qubits}"
        )
    d2 = spec.dim**2
    s = np.zeros((d2, d2), dtype=complex)
    for e, u in zip(spec.edges, gates(spec)):
        s += e.probability * np.kron(u.conj(), u)
    return s


def _edge_sequences(spec: NetworkSpec, steps: int, shots: int, seed: int) -> np.ndarray:
    probs = spec.probabilities
    probs = probs / probs.sum()
    seqs = [
        np.random.default_rng([seed, j]).choice(len(spec.edges), size=steps, p=probs)
        for j in range(shots)
    ]
    return np.array(seqs, dtype=int).reshape(shots, steps)


def sampled_estimates(psi0, spec: NetworkSpec, steps: int, shots: int, seed: int = 0) -> Iterator[np.ndarray]:
    """Yield the Monte-Carlo density-matrix estimate after ``0..steps`` collisions."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    psi0 = check_pure_state(psi0)
    if psi0.size != spec.dim:
        raise ValueError(f"state has dimension {psi0.size}, network needs {spec.dim}")
    m = spec.num_qubits
    seqs = _edge_sequences(spec, steps, shots, seed)
    g = local_gate(spec.phi).reshape(2, 2, 2, 2)
    psi = np.broadcast_to(psi0, (shots, spec.dim)).copy().reshape([shots] + [2] * m)

    def estimate():
        a = psi.reshape(shots, spec.dim)
        return a.T @ a.conj() / shots

    yield estimate()
    for s in range(steps):
        col = seqs[:, s]
        for ei, e in enumerate(spec.edges):
            idx = np.nonzero(col == ei)[0]
            if idx.size:
                psi[idx] = contract(psi[idx], g, (1 + e.control, 1 + e.target))
        yield estimate()


def sample_trajectories(psi0, spec: NetworkSpec, steps: int, shots: int, seed: int = 0) -> np.ndarray:
    """Monte-Carlo estimate of ``P^steps(|psi0><psi0|)`` from random collision sequences.

    Shot ``j`` draws its edge sequence from a generator seeded with
    ``(seed, j)``, so the estimate does not depend on evaluation order.
    """
    for rho in sampled_estimates(psi0, spec, steps, shots, seed):
        pass
    return rho


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.12g}"


def trajectory_csv(records: Sequence[TrajectoryRecord]) -> str:
    """CSV text with one row per step; unavailable values are left empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "concurrence", "coherence_norm", "distance_to_prediction"])
    for r in records:
        w.writerow([r.step, _fmt(r.concurrence), _fmt(r.coherence_norm), _fmt(r.distance_to_prediction)])
    return buf.getvalue()

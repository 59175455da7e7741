"""Interaction graphs and the controlled-unitary gates they generate.

A network has ``k`` system qubits (indices ``0..k-1``) followed by ``n``
environment qubits (indices ``k..k+n-1``). Each directed edge picks a
control and a target and carries the probability with which that pair
collides in one step.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .exceptions import InvalidNetworkError, InvalidStateError
from .io import parse_angle, parse_complex
from .linalg import check_density_matrix, kron_all, projector

P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Edge:
    control: int
    target: int
    probability: float


@dataclass(frozen=True)
class NetworkSpec:
    k: int
    n: int
    phi: float
    edges: tuple[Edge, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def num_qubits(self) -> int:
        return self.k + self.n

    @property
    def dim(self) -> int:
        return 1 << (self.k + self.n)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([e.probability for e in self.edges], dtype=float)

    def is_system(self, q: int) -> bool:
        return 0 <= q < self.k

    def with_probabilities(self, probs: Sequence[float]) -> "NetworkSpec":
        if len(probs) != len(self.edges):
            raise ValueError("one probability per edge required")
        edges = tuple(Edge(e.control, e.target, float(p)) for e, p in zip(self.edges, probs))
        return NetworkSpec(self.k, self.n, self.phi, edges)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors), "warnings": list(self.warnings)}


def single_qubit_coupling(phi: float) -> np.ndarray:
    """The reflection ``cos(phi) Z + sin(phi) X`` applied to a target qubit."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [s, -c]], dtype=complex)


def phi_state(phi: float) -> np.ndarray:
    """The +1 eigenvector of the coupling, ``cos(phi/2)|0> + sin(phi/2)|1>``."""
    return np.array([math.cos(phi / 2), math.sin(phi / 2)], dtype=complex)


def phi_perp_state(phi: float) -> np.ndarray:
    return np.array([-math.sin(phi / 2), math.cos(phi / 2)], dtype=complex)


def local_gate(phi: float) -> np.ndarray:
    """4x4 controlled coupling on the ordered pair (control, target)."""
    return np.kron(P0, I2) + np.kron(P1, single_qubit_coupling(phi))


def embed(op: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Embed an operator on ``qubits`` (in the given order) into the register."""
    qubits = list(qubits)
    m = len(qubits)
    d = 1 << num_qubits
    t = np.asarray(op, dtype=complex).reshape([2] * (2 * m))
    eye = np.eye(d, dtype=complex).reshape([2] * (2 * num_qubits))
    # contract op's input legs with the identity's output legs on the chosen qubits
    out = np.tensordot(t, eye, axes=(list(range(m, 2 * m)), qubits))
    out = np.moveaxis(out, list(range(m)), qubits)
    return out.reshape(d, d)


def _check_edge(spec: NetworkSpec, e: Edge) -> None:
    nq = spec.num_qubits
    if not (0 <= e.control < nq and 0 <= e.target < nq):
        raise InvalidNetworkError(f"edge {e.control}->{e.target} out of range for {nq} qubits")
    if e.control == e.target:
        raise InvalidNetworkError(f"edge {e.control}->{e.target} has control == target")


@functools.lru_cache(maxsize=512)
def _cached_gate(num_qubits: int, phi: float, control: int, target: int) -> np.ndarray:
    g = embed(local_gate(phi), [control, target], num_qubits)
    g.flags.writeable = False
    return g


def build_gate(spec: NetworkSpec, e: Edge) -> np.ndarray:
    """Full-register unitary for one edge. The returned array is read-only."""
    _check_edge(spec, e)
    return _cached_gate(spec.num_qubits, float(spec.phi), e.control, e.target)


def gates(spec: NetworkSpec) -> list[np.ndarray]:
    return [build_gate(spec, e) for e in spec.edges]


def validate(spec: NetworkSpec, *, tol: Tolerances = DEFAULT) -> ValidationReport:
    rep = ValidationReport()
    if spec.k < 1:
        rep.errors.append(f"system qubit count k={spec.k} must be >= 1")
    if spec.n < 1:
        rep.errors.append(f"environment qubit count n={spec.n} must be >= 1")
    if not spec.edges:
        rep.errors.append("network has no edges")
    nq = spec.num_qubits
    has_env_env = False
    for i, e in enumerate(spec.edges):
        label = f"edge #{i} ({e.control}->{e.target})"
        if not (0 <= e.control < nq and 0 <= e.target < nq):
            rep.errors.append(f"{label}: index out of range for {nq} qubits")
            continue
        if e.control == e.target:
            rep.errors.append(f"{label}: control equals target")
        if not e.probability > 0:
            rep.errors.append(f"{label}: probability {e.probability} must be > 0")
        if spec.is_system(e.control) and spec.is_system(e.target):
            rep.errors.append(f"{label}: system-system interaction is not allowed")
        elif spec.is_system(e.target):
            rep.warnings.append(
                f"{label}: environment controls a system qubit, outside the modelled system-to-environment coupling"
            )
        elif not spec.is_system(e.control):
            has_env_env = True
    total = float(np.sum(spec.probabilities)) if spec.edges else 0.0
    if abs(total - 1.0) > tol.probability_sum:
        rep.errors.append(f"edge probabilities sum to {total:.12g}, expected 1 (normalization)")
    if spec.n < 2:
        rep.warnings.append("n < 2: the asymptotic state may oscillate (eigenvalue -1 attractors)")
    if not has_env_env:
        rep.warnings.append(
            "no environment-environment edge: closed-form asymptotics are not guaranteed"
        )
    return rep


def require_valid(spec: NetworkSpec, *, tol: Tolerances = DEFAULT) -> None:
    rep = validate(spec, tol=tol)
    if not rep.ok:
        raise InvalidNetworkError("; ".join(rep.errors))


def preset_network(
    k: int, n: int, phi: float, topology: str = "all_to_all", probabilities=None
) -> NetworkSpec:
    """Uniform-weight network builder.

    ``all_to_all`` couples every system qubit (as control) to every
    environment qubit, and every ordered pair of environment qubits.
    """
    if topology != "all_to_all":
        raise ValueError(f"unknown topology {topology!r}")
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    env = range(k, k + n)
    pairs = [(s, t) for s in range(k) for t in env]
    pairs += list(itertools.permutations(env, 2))
    if probabilities is None:
        probabilities = [1.0 / len(pairs)] * len(pairs)
    edges = tuple(Edge(c, t, float(p)) for (c, t), p in zip(pairs, probabilities, strict=True))
    return NetworkSpec(k, n, float(phi), edges)


def random_weights(
    spec: NetworkSpec, rng: np.random.Generator, concentration: float = 1.0
) -> NetworkSpec:
    """Same topology, edge probabilities drawn from a symmetric Dirichlet.

    ``concentration=1`` is uniform on the simplex; larger values keep
    weights away from zero, where relaxation times grow like ``1/p_min``.
    """
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    w = rng.dirichlet(np.full(len(spec.edges), float(concentration)))
    return spec.with_probabilities(w)


# --------------------------------------------------------------------------
# state presets


@dataclass(frozen=True)
class StatePreset:
    """Tagged description of an initial state.

    Tags: ``zero``, ``one``, ``phi_eigenstate``, ``bloch`` (``theta``,
    optional ``phase``), ``delta`` (optional ``literal``), ``psi1`` (``a``,
    ``b``), ``psi2``, ``maximally_mixed``, ``product`` (``states``: list of
    single-qubit presets, one per qubit or a single one to repeat),
    ``correlated`` (``alpha``), ``explicit`` (``matrix``).
    """

    tag: str
    params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "StatePreset":
        if "tag" not in d:
            raise InvalidStateError(f"state preset needs a 'tag': {d!r}")
        params = {key: v for key, v in d.items() if key != "tag"}
        if "states" in params:
            params["states"] = tuple(
                s if isinstance(s, StatePreset) else cls.from_dict(s) for s in params["states"]
            )
        return cls(str(d["tag"]), params)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"tag": self.tag}
        for key, v in self.params.items():
            if key == "states":
                v = [s.to_dict() for s in v]
            elif isinstance(v, np.ndarray):
                v = v.tolist()
            out[key] = v
        return out


PURE_TAGS = {"zero", "one", "phi_eigenstate", "bloch", "delta", "psi1", "psi2", "product", "correlated"}


def delta_state(literal: bool = False) -> np.ndarray:
    """Single-qubit environment factor ``cos(pi/6)|0> + sin(pi/6)|1>``.

    With ``literal=True`` the coefficients are swapped, giving
    ``sin(pi/6)|0> + cos(pi/6)|1>``. That state equals the coupling
    eigenstate at ``phi = 2 pi / 3`` and so does not decohere anything.
    """
    a, b = math.cos(math.pi / 6), math.sin(math.pi / 6)
    if literal:
        a, b = b, a
    return np.array([a, b], dtype=complex)


def _pure_vector(preset: StatePreset, num_qubits: int, phi: float) -> np.ndarray:
    tag, p = preset.tag, preset.params

    def replicate(v1):
        return kron_all([v1.reshape(-1, 1)] * num_qubits).reshape(-1)

    if tag == "zero":
        return replicate(np.array([1, 0], dtype=complex))
    if tag == "one":
        return replicate(np.array([0, 1], dtype=complex))
    if tag == "phi_eigenstate":
        return replicate(phi_state(phi))
    if tag == "bloch":
        theta = parse_angle(p["theta"])
        phase = parse_angle(p.get("phase", 0.0))
        v = np.array([math.cos(theta / 2), np.exp(1j * phase) * math.sin(theta / 2)], dtype=complex)
        return replicate(v)
    if tag == "delta":
        return replicate(delta_state(bool(p.get("literal", False))))
    if tag in ("psi1", "psi2"):
        if num_qubits != 2:
            raise InvalidStateError(f"{tag} is a two-qubit state, register has {num_qubits} qubits")
        if tag == "psi2":
            return 0.5 * np.array([-1, 1, 1, 1], dtype=complex)
        a, b = parse_complex(p["a"]), parse_complex(p["b"])
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > DEFAULT.normalization:
            raise InvalidStateError(f"psi1 needs |a|^2+|b|^2 = 1, got {abs(a)**2 + abs(b)**2!r}")
        return np.array([a, 0, 0, b], dtype=complex)
    if tag == "product":
        states = p["states"]
        if len(states) == 1:
            states = list(states) * num_qubits
        if len(states) != num_qubits:
            raise InvalidStateError(
                f"product lists {len(states)} factors for a {num_qubits}-qubit register"
            )
        factors = [_pure_vector(s, 1, phi).reshape(-1, 1) for s in states]
        return kron_all(factors).reshape(-1)
    if tag == "correlated":
        alpha = parse_angle(p["alpha"])
        phi_n = replicate(phi_state(phi))
        nu = kron_all(
            [phi_perp_state(phi).reshape(-1, 1)]
            + [phi_state(phi).reshape(-1, 1)] * (num_qubits - 1)
        ).reshape(-1)
        return math.cos(alpha) * phi_n + math.sin(alpha) * nu
    raise InvalidStateError(f"preset {tag!r} is not a pure state")


def realize_vector(preset: StatePreset, num_qubits: int, phi: float) -> np.ndarray:
    """State vector for a pure preset."""
    psi = _pure_vector(preset, num_qubits, phi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-12:
        raise InvalidStateError(f"preset {preset.tag!r} produced norm {norm!r}")
    return psi


def realize_state(
    preset: StatePreset, num_qubits: int, phi: float, *, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """Density matrix on ``num_qubits`` qubits described by ``preset``."""
    if preset.tag in PURE_TAGS:
        return projector(realize_vector(preset, num_qubits, phi))
    d = 1 << num_qubits
    if preset.tag == "maximally_mixed":
        return np.eye(d, dtype=complex) / d
    if preset.tag == "explicit":
        rows = preset.params["matrix"]
        m = np.array([[parse_complex(c) for c in row] for row in rows], dtype=complex)
        if m.shape != (d, d):
            raise InvalidStateError(f"explicit matrix has shape {m.shape}, expected {(d, d)}")
        return check_density_matrix(m, tol=tol)
    raise InvalidStateError(f"unknown state preset {preset.tag!r}")


def single_qubit_factor(preset: StatePreset, phi: float) -> np.ndarray | None:
    """If ``preset`` is a product of identical single-qubit states, return that factor."""
    tag = preset.tag
    if tag in ("zero", "one", "phi_eigenstate", "bloch", "delta"):
        return projector(realize_vector(preset, 1, phi))
    if tag == "maximally_mixed":
        return I2 / 2
    if tag == "product":
        states = preset.params["states"]
        if len({s.to_dict().__repr__() for s in states}) == 1:
            return single_qubit_factor(states[0], phi)
    return None


# --------------------------------------------------------------------------
# JSON


def network_from_dict(d: Mapping[str, Any]) -> NetworkSpec:
    try:
        k, n, phi = int(d["k"]), int(d["n"]), parse_angle(d["phi"])
    except KeyError as exc:
        raise InvalidNetworkError(f"network config missing field {exc}") from None
    if "topology" in d:
        spec = preset_network(k, n, phi, d["topology"])
        if "p" in d:
            spec = spec.with_probabilities(d["p"])
        return spec
    edges = []
    for e in d.get("edges", []):
        prob = e.get("p", e.get("probability"))
        if prob is None:
            raise InvalidNetworkError(f"edge {e!r} needs a probability 'p'")
        edges.append(Edge(int(e["control"]), int(e["target"]), float(prob)))
    return NetworkSpec(k, n, phi, tuple(edges))


def network_to_dict(spec: NetworkSpec) -> dict:
    return {
        "k": spec.k,
        "n": spec.n,
        "phi": spec.phi,
        "edges": [{"control": e.control, "target": e.target, "p": e.probability} for e in spec.edges],
    }

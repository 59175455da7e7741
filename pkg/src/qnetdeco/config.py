"""Numerical tolerances and size caps shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    trace: float = 1e-10
    psd_clamp: float = 1e-10
    psd_reject: float = 1e-8
    pure_norm: float = 1e-12
    eig_hermitian: float = 1e-8
    probability_sum: float = 1e-9
    residual: float = 1e-10
    nullspace: float = 1e-8
    eigenvalue_dedup: float = 1e-8
    gram_condition: float = 1e12
    decoherence_reject: float = 1e-8
    separable: float = 1e-9
    diagonal_zero: float = 1e-12
    normalization: float = 1e-10
    converge: float = 1e-10
    max_iter: int = 10_000

    # dimension caps
    max_dim: int = 4096
    oracle_qubits: int = 5

    def with_overrides(self, **kwargs) -> "Tolerances":
        unknown = set(kwargs) - set(self.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown tolerance fields: {sorted(unknown)}")
        return replace(self, **kwargs)


DEFAULT = Tolerances()

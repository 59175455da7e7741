"""Exactly solvable collision-model decoherence on qubit networks."""

from .asymptotics import (
    DecoherenceFactor,
    asymptotic_system_state,
    decoherence_factor,
    decoherence_factor_correlated,
    decoherence_factor_product,
    project_asymptotic,
)
from .attractors import (
    AttractorBasis,
    analytic_basis,
    dualize,
    oracle_space,
    verify_basis,
)
from .channel import (
    ConvergenceResult,
    TrajectoryRecord,
    apply_map,
    converge,
    iterate,
    sample_trajectories,
    superoperator_matrix,
)
from .config import DEFAULT, Tolerances
from .entanglement import (
    FragilityClass,
    classify_fragility,
    concurrence,
    concurrence_psi1_asymptotic,
    concurrence_psi2_asymptotic,
    n_sep,
)
from .network import (
    Edge,
    NetworkSpec,
    StatePreset,
    build_gate,
    preset_network,
    realize_state,
    single_qubit_coupling,
    validate,
)

__version__ = "0.1.0"

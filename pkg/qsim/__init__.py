"""
qsim - state-vector simulation of weak-measurement protected entanglement
"""

__version__ = "0.1.0"

from .qstate import (
    BellLabel,
    DensityMatrix,
    QubitOperator,
    StateVector,
    apply_op,
    basis_state,
    fidelity,
    from_amplitudes,
    normalize,
    partial_trace,
    project_bell,
    tensor,
)
from .channels import (
    AmplitudeDamping,
    TrajectoryBranch,
    optimal_p1,
    optimal_p1_w,
    protect_unknown_qubit,
)
from .entanglement import concurrence, entanglement_report, three_tangle
from .protocols import (
    NormalizationMode,
    bell_generate,
    economical_clone,
    search_pairings,
    teleport_case,
    w_generate,
)
from .reports import ProtocolReport
from .verification import run_acceptance

__all__ = [
    "BellLabel",
    "DensityMatrix",
    "QubitOperator",
    "StateVector",
    "apply_op",
    "basis_state",
    "fidelity",
    "from_amplitudes",
    "normalize",
    "partial_trace",
    "project_bell",
    "tensor",
    "AmplitudeDamping",
    "TrajectoryBranch",
    "optimal_p1",
    "optimal_p1_w",
    "protect_unknown_qubit",
    "concurrence",
    "entanglement_report",
    "three_tangle",
    "NormalizationMode",
    "bell_generate",
    "economical_clone",
    "search_pairings",
    "teleport_case",
    "w_generate",
    "ProtocolReport",
    "run_acceptance",
]

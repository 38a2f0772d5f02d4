"""
Entanglement diagnostics: concurrence, 3-tangle and Schmidt coefficients.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.linalg import svdvals

from .config import EIGEN_CLAMP
from .exceptions import DimensionError, ValidationError
from .qstate import PAULI_Y, DensityMatrix, StateVector, partial_trace

logger = logging.getLogger(__name__)

_YY = np.kron(PAULI_Y.matrix, PAULI_Y.matrix)


@dataclass
class EntanglementReport:
    """Entanglement figures of a pure state.

    Attributes:
        concurrence: Two-qubit states only
        three_tangle: Three-qubit states only
        schmidt_coeffs: Descending Schmidt coefficients across bipartition | rest
        bipartition: Qubits on the first side of the Schmidt cut
    """

    concurrence: Optional[float] = None
    three_tangle: Optional[float] = None
    schmidt_coeffs: List[float] = field(default_factory=list)
    bipartition: Tuple[int, ...] = (0,)

    @property
    def is_product(self) -> bool:
        return bool(self.schmidt_coeffs) and self.schmidt_coeffs[0] >= 1.0 - 1e-10

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {}
        if self.concurrence is not None:
            data["concurrence"] = float(self.concurrence)
        if self.three_tangle is not None:
            data["three_tangle"] = float(self.three_tangle)
        if self.schmidt_coeffs:
            data["schmidt_coeffs"] = [float(c) for c in self.schmidt_coeffs]
        return data


def _require_qubits(state: StateVector, count: int, what: str) -> None:
    if state.qubit_count != count:
        raise DimensionError(f"{what} needs a {count}-qubit state, got {state.qubit_count}")


def concurrence(state: StateVector) -> float:
    """Pure-state concurrence |<psi| Y(x)Y |psi*>|."""
    _require_qubits(state, 2, "concurrence")
    psi = state.amplitudes
    value = abs(np.vdot(psi, _YY @ psi.conj()))
    return float(min(1.0, value))


def mixed_concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    Uses the eigenvalues of sqrt(rho) rho~ sqrt(rho), which share their
    spectrum with rho rho~ but are Hermitian; values below 1e-12 count as 0.
    """
    if rho.qubit_count != 2:
        raise DimensionError(f"concurrence needs a 2-qubit density matrix, got {rho.qubit_count}")
    mat = rho.matrix
    w, v = np.linalg.eigh(mat)
    w = np.where(w < EIGEN_CLAMP, 0.0, w)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    rho_tilde = _YY @ mat.conj() @ _YY
    m = sqrt_rho @ rho_tilde @ sqrt_rho
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    lam = np.where(lam < EIGEN_CLAMP, 0.0, lam)
    s = np.sort(np.sqrt(lam))[::-1]
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def three_tangle(state: StateVector) -> float:
    """3-tangle as four times the modulus of Cayley's 2x2x2 hyperdeterminant."""
    _require_qubits(state, 3, "three_tangle")
    a = state.as_tensor()
    d1 = (
        a[0, 0, 0] ** 2 * a[1, 1, 1] ** 2
        + a[0, 0, 1] ** 2 * a[1, 1, 0] ** 2
        + a[0, 1, 0] ** 2 * a[1, 0, 1] ** 2
        + a[1, 0, 0] ** 2 * a[0, 1, 1] ** 2
    )
    d2 = (
        a[0, 0, 0] * a[1, 1, 1] * a[0, 1, 1] * a[1, 0, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 0, 0] * a[1, 1, 1] * a[1, 1, 0] * a[0, 0, 1]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 0, 1] * a[0, 1, 0]
        + a[0, 1, 1] * a[1, 0, 0] * a[1, 1, 0] * a[0, 0, 1]
        + a[1, 0, 1] * a[0, 1, 0] * a[1, 1, 0] * a[0, 0, 1]
    )
    d3 = a[0, 0, 0] * a[1, 1, 0] * a[1, 0, 1] * a[0, 1, 1] + a[1, 1, 1] * a[0, 0, 1] * a[0, 1, 0] * a[1, 0, 0]
    return float(min(1.0, 4.0 * abs(d1 - 2.0 * d2 + 4.0 * d3)))


def residual_tangle(state: StateVector) -> float:
    """CKW residual tangle C^2_A(BC) - C^2_AB - C^2_AC, with qubit 0 as A."""
    _require_qubits(state, 3, "residual_tangle")
    rho_a = partial_trace(state, [0]).matrix
    c2_a_bc = 2.0 * (1.0 - float(np.real(np.trace(rho_a @ rho_a))))
    c_ab = mixed_concurrence(partial_trace(state, [0, 1]))
    c_ac = mixed_concurrence(partial_trace(state, [0, 2]))
    return c2_a_bc - c_ab**2 - c_ac**2


def schmidt(state: StateVector, bipartition: Iterable[int]) -> List[float]:
    """Schmidt coefficients (descending) across bipartition | rest.

    Raises:
        ValidationError: If bipartition is empty, the whole register, or out of range
    """
    n = state.qubit_count
    side = sorted(set(int(q) for q in bipartition))
    if not side or len(side) >= n or side[0] < 0 or side[-1] >= n:
        raise ValidationError("bipartition", f"{side} is not a proper nonempty subset of {n} qubits")
    rest = [q for q in range(n) if q not in side]
    psi = np.moveaxis(state.as_tensor(), side + rest, list(range(n)))
    values = svdvals(psi.reshape(1 << len(side), -1))
    return [float(v) for v in np.sort(values)[::-1]]


def entanglement_report(state: StateVector, bipartition: Iterable[int] = (0,)) -> EntanglementReport:
    """Concurrence or 3-tangle as applicable, plus the Schmidt profile."""
    n = state.qubit_count
    report = EntanglementReport(bipartition=tuple(bipartition))
    if n == 2:
        report.concurrence = concurrence(state)
    elif n == 3:
        report.three_tangle = three_tangle(state)
    if n >= 2:
        report.schmidt_coeffs = schmidt(state, bipartition)
    return report

"""
Pure multi-qubit states, small operators and the density-matrix oracle.

Basis index convention: qubit 0 is the leftmost ket symbol and the most
significant bit, so |b0 b1 ... b(n-1)> sits at index sum_k b_k 2^(n-1-k).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import unitary_group

from .config import EXACT_TOL, MAX_QUBITS, NORM_FLOOR
from .exceptions import DimensionError, ImpossibleBranchError, ValidationError

logger = logging.getLogger(__name__)

# Normalized inputs are accepted within this distance of unit norm.
_NORM_SLACK = 1e-10


def as_complex(value: Union[complex, float], name: str = "value") -> complex:
    """Coerce a scalar to a finite Python complex.

    Raises:
        ValidationError: If the value is NaN or infinite
    """
    z = complex(value)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValidationError(name, f"{value!r} is not finite")
    return z


def _finite_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(name, "contains NaN or Inf")
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector over a register of qubits.

    A zero-qubit register (one amplitude) is allowed; it is what remains
    after a Bell projection consumes every qubit.
    """

    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = _finite_array(self.amplitudes, "amplitudes").reshape(-1)
        size = amps.size
        n = size.bit_length() - 1
        if size < 1 or (1 << n) != size:
            raise DimensionError(f"amplitude count {size} is not a power of two")
        if n > MAX_QUBITS:
            raise DimensionError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm_sq() - 1.0) > EXACT_TOL:
            raise ValidationError(
                "amplitudes", f"tagged normalized but squared norm is {self.norm_sq()!r}"
            )

    @property
    def qubit_count(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def as_tensor(self) -> np.ndarray:
        """View the amplitudes as an n-axis tensor, axis k being qubit k."""
        return self.amplitudes.reshape((2,) * self.qubit_count)

    def equal_up_to_phase(self, other: "StateVector", tol: float = EXACT_TOL) -> bool:
        return fidelity(self, other) >= 1.0 - tol

    def tolist(self) -> list:
        return self.amplitudes.tolist()

    def __repr__(self):
        return f"StateVector(qubits={self.qubit_count}, amplitudes={self.amplitudes!r})"


@dataclass(frozen=True, eq=False)
class QubitOperator:
    """A 2x2 or 4x4 complex matrix acting on one or two qubits."""

    matrix: np.ndarray
    name: str = "U"
    _unitary: bool = field(init=False, repr=False, default=False)

    def __post_init__(self):
        mat = _finite_array(self.matrix, f"operator {self.name}")
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] not in (2, 4):
            raise DimensionError(f"operator {self.name} must be 2x2 or 4x4, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        eye = np.eye(mat.shape[0])
        object.__setattr__(
            self, "_unitary", bool(np.max(np.abs(mat.conj().T @ mat - eye)) <= EXACT_TOL)
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def target_count(self) -> int:
        return 1 if self.dim == 2 else 2

    def is_unitary(self) -> bool:
        return self._unitary

    def dagger(self) -> "QubitOperator":
        return QubitOperator(self.matrix.conj().T, name=f"{self.name}^dag")

    def __matmul__(self, other: "QubitOperator") -> "QubitOperator":
        if other.dim != self.dim:
            raise DimensionError(f"cannot compose {self.dim}x{self.dim} with {other.dim}x{other.dim}")
        return QubitOperator(self.matrix @ other.matrix, name=f"{self.name}*{other.name}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix over n qubits; only used as a cross-check oracle."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _finite_array(self.matrix, "density matrix")
        size = mat.shape[0] if mat.ndim == 2 else 0
        n = size.bit_length() - 1
        if mat.ndim != 2 or mat.shape[1] != size or size < 1 or (1 << n) != size:
            raise DimensionError(f"density matrix shape {mat.shape} is not 2^n x 2^n")
        if np.max(np.abs(mat - mat.conj().T)) > EXACT_TOL:
            raise ValidationError("density matrix", "not Hermitian")
        trace = np.trace(mat)
        if abs(trace - 1.0) > EXACT_TOL:
            raise ValidationError("density matrix", f"trace is {trace!r}")
        if np.min(np.linalg.eigvalsh(mat)) < -1e-10:
            raise ValidationError("density matrix", "has a negative eigenvalue")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def qubit_count(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


class BellLabel(Enum):
    """Bell basis on an ordered qubit pair."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def vector(self) -> np.ndarray:
        s = 1.0 / np.sqrt(2.0)
        return {
            BellLabel.PHI_PLUS: np.array([s, 0, 0, s], dtype=np.complex128),
            BellLabel.PHI_MINUS: np.array([s, 0, 0, -s], dtype=np.complex128),
            BellLabel.PSI_PLUS: np.array([0, s, s, 0], dtype=np.complex128),
            BellLabel.PSI_MINUS: np.array([0, s, -s, 0], dtype=np.complex128),
        }[self]


BELL_CONVENTION = "phi+-=(|00>+-|11>)/sqrt2, psi+-=(|01>+-|10>)/sqrt2"


# Standard gates
IDENTITY = QubitOperator(np.eye(2), name="I")
PAULI_X = QubitOperator([[0, 1], [1, 0]], name="X")
PAULI_Y = QubitOperator([[0, -1j], [1j, 0]], name="Y")
PAULI_Z = QubitOperator([[1, 0], [0, -1]], name="Z")
HADAMARD = QubitOperator(np.array([[1, 1], [1, -1]]) / np.sqrt(2.0), name="H")
MINUS_I_SIGMA_Y = QubitOperator([[0, -1], [1, 0]], name="-iY")


def non_maximal_hadamard(u: float) -> QubitOperator:
    """|0> -> u|0> + v|1>, |1> -> v|0> - u|1> with v = sqrt(1 - u^2)."""
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValidationError("u", f"{u} is outside [0, 1]")
    v = np.sqrt(1.0 - u * u)
    return QubitOperator([[u, v], [v, -u]], name=f"NMH({u:g})")


def from_amplitudes(values: Iterable[complex], normalized: bool = True) -> StateVector:
    """Build a state from raw amplitudes.

    With normalized=True the amplitudes must already have unit norm (to within
    1e-10) and are rescaled exactly onto the unit sphere.
    """
    amps = _finite_array(list(values), "amplitudes")
    if normalized:
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > _NORM_SLACK:
            raise ValidationError("amplitudes", f"squared norm {norm_sq!r} is not 1")
        amps = amps / np.sqrt(norm_sq)
    return StateVector(amps, normalized=normalized)


def basis_state(bits: Union[str, Sequence[int]]) -> StateVector:
    """Computational basis state, e.g. basis_state("010")."""
    digits = [int(b) for b in bits]
    if any(b not in (0, 1) for b in digits):
        raise ValidationError("bits", f"{bits!r} is not a bit string")
    amps = np.zeros(1 << len(digits), dtype=np.complex128)
    amps[int("".join(str(b) for b in digits) or "0", 2)] = 1.0
    return StateVector(amps, normalized=True)


def random_state(qubit_count: int, rng: np.random.Generator) -> StateVector:
    """Haar-distributed pure state."""
    size = 1 << qubit_count
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return StateVector(amps / np.linalg.norm(amps), normalized=True)


def random_unitary(dim: int, rng: np.random.Generator) -> QubitOperator:
    """Haar-random unitary of the given dimension (2 or 4)."""
    return QubitOperator(unitary_group.rvs(dim, random_state=rng), name="Haar")


def _check_targets(targets: Sequence[int], count: int, qubit_count: int) -> Tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != count:
        raise DimensionError(f"expected {count} target qubit(s), got {len(targets)}")
    if len(set(targets)) != len(targets):
        raise DimensionError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < qubit_count:
            raise DimensionError(f"qubit index {t} out of range for {qubit_count} qubits")
    return targets


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; a's qubits come first."""
    amps = np.kron(a.amplitudes, b.amplitudes)
    normalized = a.normalized and b.normalized
    if normalized:
        amps = amps / np.linalg.norm(amps)
    return StateVector(amps, normalized=normalized)


def apply_op(state: StateVector, op: QubitOperator, targets: Sequence[int]) -> StateVector:
    """Apply op to the given target qubits.

    The normalized tag survives only if the input was normalized and op is
    unitary; measurement operators therefore return unnormalized states.

    Raises:
        DimensionError: On out-of-range or duplicate targets
    """
    k = op.target_count
    targets = _check_targets(targets, k, state.qubit_count)
    gate = op.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(gate, state.as_tensor(), axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets)).reshape(-1)
    normalized = state.normalized and op.is_unitary()
    if normalized:
        out = out / np.linalg.norm(out)
    return StateVector(out, normalized=normalized)


def normalize(state: StateVector) -> Tuple[StateVector, float]:
    """Rescale to unit norm.

    Returns:
        Tuple of (normalized state, squared norm before rescaling)

    Raises:
        ImpossibleBranchError: If the squared norm is below 1e-24
    """
    norm_sq = state.norm_sq()
    if norm_sq < NORM_FLOOR:
        raise ImpossibleBranchError(f"cannot normalize a state with squared norm {norm_sq!r}")
    return StateVector(state.amplitudes / np.sqrt(norm_sq), normalized=True), norm_sq


def _require_unit(state: StateVector, name: str) -> None:
    if abs(state.norm_sq() - 1.0) > _NORM_SLACK:
        raise ValidationError(name, f"state is not normalized (norm^2 = {state.norm_sq()!r})")


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized pure states, clipped into [0, 1].

    Raises:
        DimensionError: If the qubit counts differ
    """
    if a.qubit_count != b.qubit_count:
        raise DimensionError(f"fidelity of {a.qubit_count}- and {b.qubit_count}-qubit states")
    _require_unit(a, "a")
    _require_unit(b, "b")
    # fixed argument order keeps fidelity(a, b) == fidelity(b, a) bit for bit
    if a.amplitudes.tobytes() > b.amplitudes.tobytes():
        a, b = b, a
    overlap = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, max(0.0, abs(overlap) ** 2)))


def project_bell(
    state: StateVector, pair: Tuple[int, int], outcome: BellLabel
) -> Tuple[float, Optional[StateVector]]:
    """Project a qubit pair onto one Bell vector.

    Returns:
        Tuple of (probability, residual state on the remaining qubits in their
        original order). The residual is None for a zero-probability outcome.
    """
    a, b = _check_targets(pair, 2, state.qubit_count)
    _require_unit(state, "state")
    bra = outcome.vector.conj().reshape(2, 2)
    out = np.tensordot(bra, state.as_tensor(), axes=([0, 1], [a, b]))
    amps = np.asarray(out).reshape(-1)
    prob = float(np.vdot(amps, amps).real)
    if prob < NORM_FLOOR:
        return 0.0, None
    return prob, StateVector(amps / np.sqrt(prob), normalized=True)


def density_matrix(state: StateVector) -> DensityMatrix:
    _require_unit(state, "state")
    amps = state.amplitudes
    return DensityMatrix(np.outer(amps, amps.conj()))


def partial_trace(state: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix over the kept qubits (in ascending order).

    Raises:
        ValidationError: If keep is empty
        DimensionError: If a kept index is out of range
    """
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValidationError("keep", "at least one qubit must be kept")
    n = state.qubit_count
    _check_targets(keep, len(keep), n)
    _require_unit(state, "state")
    traced = [q for q in range(n) if q not in keep]
    psi = np.moveaxis(state.as_tensor(), keep + traced, list(range(n)))
    mat = psi.reshape(1 << len(keep), -1)
    rho = mat @ mat.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def embed_operator(op: QubitOperator, targets: Sequence[int], qubit_count: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of op acting on targets of an n-qubit register."""
    k = op.target_count
    targets = _check_targets(targets, k, qubit_count)
    size = 1 << qubit_count
    eye = np.eye(size, dtype=np.complex128).reshape((2,) * qubit_count + (size,))
    gate = op.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(gate, eye, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(size, size)

"""
Unit tests for state vectors, operators and Bell projections.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsim.exceptions import DimensionError, ImpossibleBranchError, ValidationError
from qsim.qstate import (
    HADAMARD,
    IDENTITY,
    MINUS_I_SIGMA_Y,
    PAULI_X,
    PAULI_Z,
    BellLabel,
    DensityMatrix,
    QubitOperator,
    StateVector,
    apply_op,
    basis_state,
    density_matrix,
    embed_operator,
    fidelity,
    from_amplitudes,
    non_maximal_hadamard,
    normalize,
    partial_trace,
    project_bell,
    random_state,
    random_unitary,
    tensor,
)

CNOT = QubitOperator([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], name="CNOT")


def test_state_vector_rejects_bad_sizes():
    with pytest.raises(DimensionError):
        StateVector(np.ones(3))
    with pytest.raises(DimensionError):
        StateVector(np.zeros(0))


def test_state_vector_rejects_non_finite():
    with pytest.raises(ValidationError):
        StateVector(np.array([np.nan, 0.0]))


def test_normalized_tag_is_checked():
    with pytest.raises(ValidationError):
        StateVector(np.array([1.0, 1.0]), normalized=True)


def test_zero_qubit_state_is_allowed():
    state = StateVector(np.array([1.0]), normalized=True)
    assert state.qubit_count == 0


def test_amplitudes_are_read_only():
    state = basis_state("01")
    with pytest.raises(ValueError):
        state.amplitudes[0] = 1.0


def test_basis_state_index_convention():
    """Qubit 0 is the most significant bit."""
    state = basis_state("010")
    assert state.qubit_count == 3
    assert state.amplitudes[2] == 1.0
    assert state.norm_sq() == 1.0


def test_from_amplitudes_requires_unit_norm():
    with pytest.raises(ValidationError):
        from_amplitudes([1.0, 1.0])
    raw = from_amplitudes([1.0, 1.0], normalized=False)
    assert not raw.normalized


def test_tensor_puts_first_argument_first():
    assert fidelity(tensor(basis_state("1"), basis_state("0")), basis_state("10")) == 1.0


def test_single_qubit_gate_targets():
    zero = basis_state("00")
    assert fidelity(apply_op(zero, PAULI_X, [0]), basis_state("10")) == 1.0
    assert fidelity(apply_op(zero, PAULI_X, [1]), basis_state("01")) == 1.0


def test_two_qubit_gate_target_order():
    assert fidelity(apply_op(basis_state("10"), CNOT, [0, 1]), basis_state("11")) == 1.0
    # qubit 1 acts as control when listed first
    assert fidelity(apply_op(basis_state("01"), CNOT, [1, 0]), basis_state("11")) == 1.0
    assert fidelity(apply_op(basis_state("10"), CNOT, [1, 0]), basis_state("10")) == 1.0


def test_apply_op_rejects_bad_targets():
    with pytest.raises(DimensionError):
        apply_op(basis_state("00"), CNOT, [0, 0])
    with pytest.raises(DimensionError):
        apply_op(basis_state("00"), PAULI_X, [2])
    with pytest.raises(DimensionError):
        apply_op(basis_state("00"), PAULI_X, [0, 1])


def test_non_unitary_op_drops_normalized_tag():
    out = apply_op(basis_state("0"), QubitOperator(np.diag([0.5, 1.0])), [0])
    assert not out.normalized
    assert out.norm_sq() == pytest.approx(0.25)


def test_normalize_returns_prior_norm():
    state, norm_sq = normalize(StateVector(np.array([3.0, 4.0])))
    assert norm_sq == pytest.approx(25.0)
    np.testing.assert_allclose(state.amplitudes, [0.6, 0.8])


def test_normalize_zero_vector():
    with pytest.raises(ImpossibleBranchError):
        normalize(StateVector(np.zeros(2)))


def test_operator_shape_validation():
    with pytest.raises(DimensionError):
        QubitOperator(np.eye(3))


def test_standard_gates_are_unitary():
    for gate in (IDENTITY, PAULI_X, PAULI_Z, HADAMARD, MINUS_I_SIGMA_Y, CNOT):
        assert gate.is_unitary()
    assert not QubitOperator(np.diag([1.0, 0.5])).is_unitary()


def test_non_maximal_hadamard():
    np.testing.assert_allclose(non_maximal_hadamard(1 / math.sqrt(2)).matrix, HADAMARD.matrix, atol=1e-12)
    assert non_maximal_hadamard(0.6).is_unitary()
    with pytest.raises(ValidationError):
        non_maximal_hadamard(1.2)


def test_fidelity_ignores_global_phase(random_qubit):
    shifted = StateVector(random_qubit.amplitudes * np.exp(0.7j), normalized=True)
    assert fidelity(random_qubit, shifted) == pytest.approx(1.0, abs=1e-12)
    assert random_qubit.equal_up_to_phase(shifted)


def test_fidelity_is_symmetric(random_states):
    a, b = random_states(2, 2)
    assert fidelity(a, b) == fidelity(b, a)


def test_fidelity_dimension_mismatch():
    with pytest.raises(DimensionError):
        fidelity(basis_state("0"), basis_state("00"))


def test_bell_vectors_are_orthonormal():
    vectors = np.array([label.vector for label in BellLabel])
    np.testing.assert_allclose(vectors.conj() @ vectors.T, np.eye(4), atol=1e-12)


def test_project_bell_examples():
    prob, residual = project_bell(basis_state("010"), (0, 2), BellLabel.PHI_PLUS)
    assert prob == pytest.approx(0.5, abs=1e-12)
    assert fidelity(residual, basis_state("1")) == pytest.approx(1.0, abs=1e-12)

    prob, residual = project_bell(basis_state("011"), (0, 2), BellLabel.PSI_PLUS)
    assert prob == pytest.approx(0.5, abs=1e-12)
    assert fidelity(residual, basis_state("1")) == pytest.approx(1.0, abs=1e-12)

    prob, residual = project_bell(basis_state("010"), (0, 2), BellLabel.PSI_PLUS)
    assert prob == 0.0
    assert residual is None


def test_project_bell_consuming_whole_register(phi_plus):
    prob, residual = project_bell(phi_plus, (0, 1), BellLabel.PHI_PLUS)
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert residual.qubit_count == 0


def test_project_bell_is_complete(random_states):
    state = random_states(3, 1)[0]
    for pair in ((0, 1), (0, 2), (2, 1)):
        total = sum(project_bell(state, pair, label)[0] for label in BellLabel)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_of_bell_pair(phi_plus):
    rho = partial_trace(phi_plus, [0])
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-12)
    with pytest.raises(ValidationError):
        partial_trace(phi_plus, [])


def test_density_matrix_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.eye(2))
    rho = density_matrix(basis_state("1"))
    assert rho.purity() == pytest.approx(1.0)


def test_embed_operator_matches_kron():
    np.testing.assert_allclose(embed_operator(PAULI_X, [1], 2), np.kron(np.eye(2), PAULI_X.matrix))
    np.testing.assert_allclose(embed_operator(CNOT, [0, 1], 2), CNOT.matrix)


@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=4))
@settings(max_examples=50, deadline=None)
def test_unitaries_preserve_norm(seed, qubit_count):
    rng = np.random.default_rng(seed)
    state = random_state(qubit_count, rng)
    targets = list(rng.choice(qubit_count, size=min(2, qubit_count), replace=False))
    op = random_unitary(2 ** len(targets), rng)
    out = apply_op(state, op, targets)
    assert out.normalized
    assert abs(out.norm_sq() - 1.0) <= 1e-12


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_apply_op_matches_embedded_matrix(seed):
    rng = np.random.default_rng(seed)
    state = random_state(3, rng)
    op = random_unitary(4, rng)
    direct = apply_op(state, op, [2, 0]).amplitudes
    dense = embed_operator(op, [2, 0], 3) @ state.amplitudes
    np.testing.assert_allclose(direct, dense, atol=1e-12)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=40, deadline=None)
def test_apply_op_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    psi, phi = random_state(3, rng), random_state(3, rng)
    op = random_unitary(4, rng)
    mixed = StateVector(a * psi.amplitudes + b * phi.amplitudes)
    lhs = apply_op(mixed, op, [1, 2]).amplitudes
    rhs = a * apply_op(psi, op, [1, 2]).amplitudes + b * apply_op(phi, op, [1, 2]).amplitudes
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_local_operators_commute_with_tensor(seed):
    rng = np.random.default_rng(seed)
    psi, phi = random_state(1, rng), random_state(1, rng)
    u, v = random_unitary(2, rng), random_unitary(2, rng)
    joint = QubitOperator(np.kron(u.matrix, v.matrix))
    lhs = apply_op(tensor(psi, phi), joint, [0, 1])
    rhs = tensor(apply_op(psi, u, [0]), apply_op(phi, v, [0]))
    np.testing.assert_allclose(lhs.amplitudes, rhs.amplitudes, atol=1e-12)

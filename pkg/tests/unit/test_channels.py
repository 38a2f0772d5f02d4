"""
Unit tests for weak measurements, damping and the trajectory engine.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsim.channels import (
    AmplitudeDamping,
    BranchLabel,
    Orientation,
    PostWeakMeasurement,
    WeakMeasurement,
    canonical_order,
    channel_density_oracle,
    damping_branch,
    feed_forward_for,
    is_complete,
    mixture_density,
    optimal_p1,
    optimal_p1_w,
    pre_weak_branch,
    protect_unknown_qubit,
    resolve_damping,
)
from qsim.exceptions import InfeasibleParameterError, ValidationError
from qsim.qstate import IDENTITY, PAULI_X, basis_state, density_matrix, fidelity, random_state

SQRT_HALF = 1.0 / math.sqrt(2.0)
SUCCESS = (BranchLabel.NO_JUMP, BranchLabel.POST_PASS)


def test_measurements_are_complete():
    assert is_complete([op for _, op in WeakMeasurement(0.3).operators()])
    for orientation in Orientation:
        assert is_complete([op for _, op in PostWeakMeasurement(0.4, orientation).operators()])
    assert is_complete([op for _, op in AmplitudeDamping(0.7).operators()])


def test_measurement_strength_domain():
    with pytest.raises(ValidationError):
        WeakMeasurement(1.5)
    with pytest.raises(ValidationError):
        AmplitudeDamping(-0.1)


def test_damping_parameterizations_agree():
    channel = AmplitudeDamping.from_gamma_tau(0.5)
    assert channel.r == pytest.approx(1.0 - math.exp(-0.5), abs=1e-15)
    assert channel.survival == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert channel.gamma_tau == pytest.approx(0.5, abs=1e-12)
    assert AmplitudeDamping(1.0).gamma_tau == math.inf
    with pytest.raises(ValidationError):
        AmplitudeDamping.from_gamma_tau(-1.0)


def test_resolve_damping_needs_exactly_one():
    with pytest.raises(ValidationError):
        resolve_damping()
    with pytest.raises(ValidationError):
        resolve_damping(0.5, 0.3)
    assert resolve_damping(r=0.25).r == 0.25


def test_optimal_p1_formula():
    assert optimal_p1(0.6, 0.5) == pytest.approx(1.0 - 0.4 * math.exp(-0.5) / 0.6, abs=1e-15)
    assert optimal_p1(0.6, r=0.2) == pytest.approx(1.0 - 0.4 * 0.8 / 0.6, abs=1e-15)


def test_optimal_p1_infeasible():
    with pytest.raises(InfeasibleParameterError) as excinfo:
        optimal_p1(0.1, 0.0)
    assert excinfo.value.value == pytest.approx(-8.0)
    with pytest.raises(ValidationError):
        optimal_p1(0.0, 0.5)


def test_optimal_p1_w_reduces_at_equal_weights():
    assert optimal_p1_w(0.7, 0.3, SQRT_HALF, SQRT_HALF) == pytest.approx(optimal_p1(0.7, 0.3), abs=1e-12)
    with pytest.raises(ValidationError):
        optimal_p1_w(0.7, 0.3, 0.6, 0.6)
    with pytest.raises(InfeasibleParameterError):
        optimal_p1_w(0.5, 0.0, 0.2, math.sqrt(0.96))


def test_feed_forward_mapping():
    assert feed_forward_for(BranchLabel.M1) is IDENTITY
    assert feed_forward_for("M2") is PAULI_X
    with pytest.raises(ValidationError):
        feed_forward_for(BranchLabel.JUMP)


def test_impossible_branch_keeps_no_state():
    branches = damping_branch(basis_state("0"), 0, 0.3)
    jump = [b for b in branches if b.path == (BranchLabel.JUMP,)][0]
    assert not jump.possible
    assert jump.joint_prob == 0.0
    assert sum(b.joint_prob for b in branches) == pytest.approx(1.0)


def test_pre_weak_branch_probabilities():
    state = basis_state("1")
    m1, m2 = pre_weak_branch(state, 0, 0.3)
    assert m1.joint_prob == pytest.approx(0.7)
    assert m2.joint_prob == pytest.approx(0.3)
    assert m1.label == "M1"


def test_mixture_matches_channel(random_states):
    state = random_states(2, 1)[0]
    for r in (0.0, 0.4, 1.0):
        mixed = mixture_density(damping_branch(state, 0, r))
        exact = channel_density_oracle(density_matrix(state), AmplitudeDamping(r), 0)
        np.testing.assert_allclose(mixed.matrix, exact.matrix, atol=1e-12)


def test_protect_equal_superposition_without_decay():
    report = protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.5, 0.0)
    assert report.probabilities["success_path_prob"] == pytest.approx(0.5, abs=1e-12)
    assert report.parameters["p1"] == pytest.approx(0.0, abs=1e-15)
    assert report.target_fidelity == pytest.approx(1.0, abs=1e-12)


def test_protect_recovers_random_states(random_states):
    for state in random_states(1, 10):
        alpha, beta = state.amplitudes
        report = protect_unknown_qubit(alpha, beta, 0.8, 0.7)
        assert report.metrics["m1_recovery_fidelity"] >= 1.0 - 1e-12
        assert report.metrics["m2_recovery_fidelity"] >= 1.0 - 1e-12
        assert report.leaf_probability_total() == pytest.approx(1.0, abs=1e-12)
        expected = 0.2 * math.exp(-0.7)
        assert report.probabilities["success_path_prob"] == pytest.approx(expected, abs=1e-12)
        assert report.probabilities["m2_success_prob"] == pytest.approx(expected, abs=1e-12)


def test_no_jump_probability_joint_and_conditional():
    report = protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.8, 0.7)
    joint = 0.5 * 0.8 + 0.5 * 0.2 * math.exp(-0.7)
    assert report.probabilities["m1_prob"] == pytest.approx(0.5, abs=1e-12)
    assert report.probabilities["m1_no_jump_joint_prob"] == pytest.approx(joint, abs=1e-12)
    assert report.probabilities["m1_no_jump_conditional_prob"] == pytest.approx(joint / 0.5, abs=1e-12)


def test_leaves_are_in_canonical_order(random_qubit):
    alpha, beta = random_qubit.amplitudes
    report = protect_unknown_qubit(alpha, beta, 0.8, r=0.3)
    labels = [b.label for b in report.branches]
    assert labels == [b.label for b in canonical_order(report.branches)]
    assert len(report.branches) == 8


def test_m2_jump_branch_flips_ground_state():
    report = protect_unknown_qubit(1.0, 0.0, 0.8, 0.7)
    leaf = [b for b in report.branches if b.path == (BranchLabel.M2, BranchLabel.JUMP, BranchLabel.POST_PASS)][0]
    assert fidelity(leaf.state, basis_state("1")) == pytest.approx(1.0, abs=1e-12)
    for b in report.branches:
        if b.possible and b.path[0] is BranchLabel.M1:
            assert fidelity(b.state, basis_state("0")) == pytest.approx(1.0, abs=1e-12)


def test_explicit_p1_override():
    report = protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.8, 0.7, p1=0.1)
    assert report.parameters["p1_source"] == "explicit"
    assert report.metrics["m1_recovery_fidelity"] < 1.0 - 1e-6


def test_projective_strength_is_flagged():
    report = protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 1.0, 0.5)
    assert report.flags
    assert report.probabilities["success_path_prob"] == 0.0
    assert report.leaf_probability_total() == pytest.approx(1.0, abs=1e-12)


def test_zero_strength_needs_explicit_p1():
    with pytest.raises(ValidationError):
        protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.0, 0.5)
    report = protect_unknown_qubit(SQRT_HALF, SQRT_HALF, 0.0, 0.5, p1=0.3)
    assert report.flags
    assert report.probabilities["m1_prob"] == pytest.approx(0.5, abs=1e-12)
    assert report.leaf_probability_total() == pytest.approx(1.0, abs=1e-12)


def test_unnormalized_input_rejected():
    with pytest.raises(ValidationError):
        protect_unknown_qubit(1.0, 1.0, 0.8, 0.5)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.floats(min_value=0.55, max_value=0.95),
    st.floats(min_value=0.1, max_value=3.0),
)
@settings(max_examples=40, deadline=None)
def test_success_probability_is_state_independent(seed, p, gamma_tau):
    state = random_state(1, np.random.default_rng(seed))
    report = protect_unknown_qubit(state.amplitudes[0], state.amplitudes[1], p, gamma_tau)
    m1_success = [b for b in report.branches if b.path == (BranchLabel.M1,) + SUCCESS][0]
    assert m1_success.joint_prob == pytest.approx((1 - p) * math.exp(-gamma_tau), abs=1e-12)

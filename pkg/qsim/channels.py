"""
Weak measurements, amplitude damping and the jump/no-jump branching engine.

Every branching operation returns one TrajectoryBranch per Kraus element.
A branch whose conditional probability vanishes keeps state=None and ends
its part of the tree, so the joint probabilities of any full leaf set still
add up to one.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import EXACT_TOL, NORM_FLOOR, check_unit_interval
from .exceptions import InfeasibleParameterError, ValidationError
from .qstate import (
    IDENTITY,
    PAULI_X,
    DensityMatrix,
    QubitOperator,
    StateVector,
    apply_op,
    embed_operator,
    fidelity,
    from_amplitudes,
)
from .reports import ProtocolReport

logger = logging.getLogger(__name__)


class BranchLabel(Enum):
    M1 = "M1"
    M2 = "M2"
    JUMP = "jump"
    NO_JUMP = "no-jump"
    POST_PASS = "post-pass"
    POST_FAIL = "post-fail"


class Orientation(Enum):
    """Which basis state a post-weak measurement attenuates."""

    SUPPRESS_ZERO = "suppress-zero"
    SUPPRESS_ONE = "suppress-one"


KrausList = List[Tuple[BranchLabel, QubitOperator]]


def is_complete(operators: Sequence[QubitOperator], tol: float = EXACT_TOL) -> bool:
    """Check sum_i K_i^dag K_i = I."""
    total = sum(op.matrix.conj().T @ op.matrix for op in operators)
    return bool(np.max(np.abs(total - np.eye(operators[0].dim))) <= tol)


@dataclass(frozen=True)
class WeakMeasurement:
    """Pre-weak measurement {M1, M2} of strength p."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", check_unit_interval("p", self.p))

    def m1(self) -> QubitOperator:
        return QubitOperator(np.diag([math.sqrt(self.p), math.sqrt(1.0 - self.p)]), name="M1")

    def m2(self) -> QubitOperator:
        return QubitOperator(np.diag([math.sqrt(1.0 - self.p), math.sqrt(self.p)]), name="M2")

    def operators(self) -> KrausList:
        return [(BranchLabel.M1, self.m1()), (BranchLabel.M2, self.m2())]


@dataclass(frozen=True)
class PostWeakMeasurement:
    """Post-weak measurement O with its completion O'."""

    p1: float
    orientation: Orientation = Orientation.SUPPRESS_ZERO

    def __post_init__(self):
        object.__setattr__(self, "p1", check_unit_interval("p1", self.p1))

    def operator(self) -> QubitOperator:
        keep = math.sqrt(1.0 - self.p1)
        if self.orientation is Orientation.SUPPRESS_ZERO:
            return QubitOperator(np.diag([keep, 1.0]), name="O1")
        return QubitOperator(np.diag([1.0, keep]), name="O2")

    def completion(self) -> QubitOperator:
        lost = math.sqrt(self.p1)
        if self.orientation is Orientation.SUPPRESS_ZERO:
            return QubitOperator(np.diag([lost, 0.0]), name="O1'")
        return QubitOperator(np.diag([0.0, lost]), name="O2'")

    def operators(self) -> KrausList:
        return [(BranchLabel.POST_PASS, self.operator()), (BranchLabel.POST_FAIL, self.completion())]


@dataclass(frozen=True)
class AmplitudeDamping:
    """Amplitude damping with decay magnitude r = 1 - exp(-gamma_tau)."""

    r: float

    def __post_init__(self):
        object.__setattr__(self, "r", check_unit_interval("r", self.r))

    @classmethod
    def from_gamma_tau(cls, gamma_tau: float) -> "AmplitudeDamping":
        gamma_tau = float(gamma_tau)
        if not gamma_tau >= 0.0:
            raise ValidationError("gamma_tau", f"{gamma_tau} must be >= 0")
        return cls(-math.expm1(-gamma_tau))

    @property
    def survival(self) -> float:
        """exp(-gamma_tau), the amplitude-squared kept by |1> on no jump."""
        return 1.0 - self.r

    @property
    def gamma_tau(self) -> float:
        return math.inf if self.r == 1.0 else -math.log1p(-self.r)

    def k1(self) -> QubitOperator:
        return QubitOperator(np.diag([1.0, math.sqrt(1.0 - self.r)]), name="K1")

    def k2(self) -> QubitOperator:
        return QubitOperator([[0.0, math.sqrt(self.r)], [0.0, 0.0]], name="K2")

    def operators(self) -> KrausList:
        return [(BranchLabel.NO_JUMP, self.k1()), (BranchLabel.JUMP, self.k2())]


def resolve_damping(
    gamma_tau: Optional[float] = None, r: Optional[float] = None
) -> AmplitudeDamping:
    """Accept either gamma_tau or r (exactly one) and return the channel."""
    if (gamma_tau is None) == (r is None):
        raise ValidationError("gamma_tau", "give exactly one of gamma_tau and r")
    if r is not None:
        return AmplitudeDamping(r)
    return AmplitudeDamping.from_gamma_tau(gamma_tau)


@dataclass(frozen=True, eq=False)
class TrajectoryBranch:
    """One node of a measurement/jump tree.

    Attributes:
        path: Outcome labels from the root
        joint_prob: Probability of the whole path
        conditional_prob: Probability of the last outcome given its parent
        state: Normalized post-outcome state, None if the outcome is impossible
    """

    path: Tuple[BranchLabel, ...]
    joint_prob: float
    conditional_prob: float
    state: Optional[StateVector]

    @property
    def possible(self) -> bool:
        return self.state is not None

    @property
    def label(self) -> str:
        return "/".join(l.value for l in self.path)

    def endswith(self, *labels: BranchLabel) -> bool:
        return self.path[-len(labels):] == tuple(labels)


def branch_on(
    state: StateVector,
    qubit: int,
    operators: KrausList,
    parent: Optional[TrajectoryBranch] = None,
) -> List[TrajectoryBranch]:
    """Split state over a complete set of single-qubit Kraus elements."""
    if abs(state.norm_sq() - 1.0) > 1e-10:
        raise ValidationError("state", "branching requires a normalized state")
    base_path = parent.path if parent is not None else ()
    base_prob = parent.joint_prob if parent is not None else 1.0
    branches = []
    for label, op in operators:
        raw = apply_op(state, op, [qubit])
        cond = raw.norm_sq()
        if cond < NORM_FLOOR:
            branches.append(TrajectoryBranch(base_path + (label,), 0.0, 0.0, None))
            continue
        out = StateVector(raw.amplitudes / math.sqrt(cond), normalized=True)
        branches.append(TrajectoryBranch(base_path + (label,), base_prob * cond, cond, out))
    logger.debug(
        "branched %s on qubit %d: %s",
        "/".join(l.value for l in base_path) or "root",
        qubit,
        ", ".join(f"{b.path[-1].value}={b.conditional_prob:.6g}" for b in branches),
    )
    return branches


def pre_weak_branch(
    state: StateVector, q: int, p: float, parent: Optional[TrajectoryBranch] = None
) -> List[TrajectoryBranch]:
    """M1 and M2 branches of a pre-weak measurement of strength p."""
    return branch_on(state, q, WeakMeasurement(p).operators(), parent)


def damping_branch(
    state: StateVector, q: int, r: float, parent: Optional[TrajectoryBranch] = None
) -> List[TrajectoryBranch]:
    """No-jump (K1) and jump (K2) branches of amplitude damping r."""
    return branch_on(state, q, AmplitudeDamping(r).operators(), parent)


def post_weak_branch(
    state: StateVector,
    q: int,
    p1: float,
    orientation: Orientation = Orientation.SUPPRESS_ZERO,
    parent: Optional[TrajectoryBranch] = None,
) -> List[TrajectoryBranch]:
    """Pass (O) and fail (O') branches of a post-weak measurement."""
    return branch_on(state, q, PostWeakMeasurement(p1, orientation).operators(), parent)


def _check_gamma_tau(gamma_tau: float) -> float:
    gamma_tau = float(gamma_tau)
    if not gamma_tau >= 0.0:
        raise ValidationError("gamma_tau", f"{gamma_tau} must be >= 0")
    return gamma_tau


def _survival(gamma_tau: Optional[float], r: Optional[float]) -> float:
    if (gamma_tau is None) == (r is None):
        raise ValidationError("gamma_tau", "give exactly one of gamma_tau and r")
    if r is not None:
        return 1.0 - check_unit_interval("r", r)
    return math.exp(-_check_gamma_tau(gamma_tau))


def _feasible(value: float, what: str) -> float:
    if value < 0.0 or value > 1.0 or value != value:
        raise InfeasibleParameterError(
            f"{what} gives p1 = {value!r}; recovery is infeasible at this strength", value
        )
    return value


def optimal_p1(p: float, gamma_tau: Optional[float] = None, *, r: Optional[float] = None) -> float:
    """Post-weak strength that undoes the no-jump distortion.

    p1 = 1 - (1 - p) exp(-gamma_tau) / p

    Raises:
        InfeasibleParameterError: If p < (1 - p) exp(-gamma_tau)
    """
    p = check_unit_interval("p", p, open_low=True)
    survival = _survival(gamma_tau, r)
    return _feasible(1.0 - (1.0 - p) * survival / p, f"p={p}, survival={survival}")


def optimal_p1_w(
    p: float,
    gamma_tau: Optional[float],
    u: float,
    v: float,
    *,
    r: Optional[float] = None,
) -> float:
    """Post-weak strength for a qubit prepared by a non-maximal Hadamard (u, v).

    p1 = 1 - v^2 (1 - p) exp(-gamma_tau) / (u^2 p)
    """
    p = check_unit_interval("p", p, open_low=True)
    u, v = float(u), float(v)
    if abs(u * u + v * v - 1.0) > EXACT_TOL:
        raise ValidationError("u", f"u^2 + v^2 = {u * u + v * v!r}, expected 1")
    if u == 0.0:
        raise ValidationError("u", "u must be nonzero")
    survival = _survival(gamma_tau, r)
    return _feasible(
        1.0 - v * v * (1.0 - p) * survival / (u * u * p), f"p={p}, u={u}, survival={survival}"
    )


def feed_forward_for(outcome: Union[BranchLabel, str]) -> QubitOperator:
    """I after outcome M1, sigma_x after M2; both are their own reversal."""
    outcome = BranchLabel(outcome)
    if outcome is BranchLabel.M1:
        return IDENTITY
    if outcome is BranchLabel.M2:
        return PAULI_X
    raise ValidationError("outcome", f"no feed-forward operation for {outcome.value}")


def channel_density_oracle(rho: DensityMatrix, kraus: AmplitudeDamping, q: int) -> DensityMatrix:
    """sum_i K_i rho K_i^dag with the channel acting on qubit q."""
    n = rho.qubit_count
    out = np.zeros_like(rho.matrix)
    for _, op in kraus.operators():
        full = embed_operator(op, [q], n)
        out = out + full @ rho.matrix @ full.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def mixture_density(branches: Sequence[TrajectoryBranch]) -> DensityMatrix:
    """Probability-weighted mixture of the possible branch states."""
    live = [b for b in branches if b.possible]
    size = live[0].state.amplitudes.size
    rho = np.zeros((size, size), dtype=np.complex128)
    for b in live:
        amps = b.state.amplitudes
        rho += b.joint_prob * np.outer(amps, amps.conj())
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def canonical_order(branches: Sequence[TrajectoryBranch]) -> List[TrajectoryBranch]:
    """Sort leaves by their path labels."""
    return sorted(branches, key=lambda b: tuple(l.value for l in b.path))


def transmit(
    root: TrajectoryBranch,
    q: int,
    damping: AmplitudeDamping,
    p1: float,
) -> List[TrajectoryBranch]:
    """Feed-forward, damping, reversal and post-weak measurement of one pre-weak branch.

    The M2 branch mirrors the M1 branch: sigma_x is applied around the
    channel and the post-weak measurement suppresses |1> instead of |0>.
    """
    if not root.possible:
        return [root]
    outcome = root.path[-1]
    forward = feed_forward_for(outcome)
    orientation = Orientation.SUPPRESS_ZERO if outcome is BranchLabel.M1 else Orientation.SUPPRESS_ONE
    sent = apply_op(root.state, forward, [q])
    leaves = []
    for hop in branch_on(sent, q, damping.operators(), root):
        if not hop.possible:
            leaves.append(hop)
            continue
        received = apply_op(hop.state, forward.dagger(), [q])
        leaves.extend(post_weak_branch(received, q, p1, orientation, hop))
    return leaves


def protect_unknown_qubit(
    alpha: complex,
    beta: complex,
    p: float,
    gamma_tau: Optional[float] = None,
    *,
    r: Optional[float] = None,
    p1: Optional[float] = None,
) -> ProtocolReport:
    """Run the full weak-measurement protection scheme on alpha|0> + beta|1>.

    Both pre-weak outcomes are followed to the end. With the default
    p1 (the optimal strength) every (Mi, no-jump, post-pass) leaf holds
    the input state again.

    Args:
        alpha: Amplitude of |0>
        beta: Amplitude of |1>
        p: Pre-weak measurement strength
        gamma_tau: Channel exposure; give this or r
        r: Damping magnitude 1 - exp(-gamma_tau)
        p1: Explicit post-weak strength (None selects the optimal one)

    Raises:
        ValidationError: If the amplitudes are not normalized
        InfeasibleParameterError: If the optimal p1 lies outside [0, 1]
    """
    psi = from_amplitudes([alpha, beta])
    damping = resolve_damping(gamma_tau, r)
    p = check_unit_interval("p", p)
    flags = []
    if p1 is None:
        p1 = optimal_p1(p, r=damping.r)
        p1_source = "optimal"
    else:
        p1 = check_unit_interval("p1", p1)
        p1_source = "explicit"
    if p in (0.0, 1.0):
        flags.append(f"pre-weak strength p={p:g} is projective; the protection identity is vacuous")
        logger.warning(flags[-1])

    leaves = []
    for root in pre_weak_branch(psi, 0, p):
        leaves.extend(transmit(root, 0, damping, p1))
    leaves = canonical_order(leaves)

    probabilities = {}
    metrics = {}
    recovered = []
    for outcome in (BranchLabel.M1, BranchLabel.M2):
        key = outcome.value.lower()
        tree = [b for b in leaves if b.path[0] is outcome]
        probabilities[f"{key}_prob"] = sum(b.joint_prob for b in tree)
        success = [b for b in tree if b.path[1:] == (BranchLabel.NO_JUMP, BranchLabel.POST_PASS)]
        probabilities[f"{key}_success_prob"] = success[0].joint_prob if success else 0.0
        if success and success[0].possible:
            f = fidelity(success[0].state, psi)
            metrics[f"{key}_recovery_fidelity"] = f
            recovered.append(f)
    # no-jump probability after M1, both as a joint and as a conditional quantity
    probabilities["m1_no_jump_joint_prob"] = sum(
        b.joint_prob for b in leaves if b.path[:2] == (BranchLabel.M1, BranchLabel.NO_JUMP)
    )
    probabilities["m1_no_jump_conditional_prob"] = (
        probabilities["m1_no_jump_joint_prob"] / probabilities["m1_prob"] if probabilities["m1_prob"] > 0.0 else 0.0
    )
    probabilities["success_path_prob"] = probabilities["m1_success_prob"]
    probabilities["total_success_prob"] = probabilities["m1_success_prob"] + probabilities["m2_success_prob"]
    probabilities["expected_success_path_prob"] = (1.0 - p) * damping.survival

    report = ProtocolReport(
        command="protect",
        branches=leaves,
        final_state=next(
            (b.state for b in leaves if b.path == (BranchLabel.M1, BranchLabel.NO_JUMP, BranchLabel.POST_PASS)),
            None,
        ),
        target_fidelity=min(recovered) if recovered else None,
        probabilities=probabilities,
        parameters={
            "alpha": psi.amplitudes[0],
            "beta": psi.amplitudes[1],
            "p": p,
            "gamma_tau": damping.gamma_tau,
            "r": damping.r,
            "p1": p1,
            "p1_source": p1_source,
        },
        metrics=metrics,
        flags=flags,
    )
    logger.info(
        "protect: p=%g r=%g p1=%g success path %.12g",
        p,
        damping.r,
        p1,
        probabilities["success_path_prob"],
    )
    return report

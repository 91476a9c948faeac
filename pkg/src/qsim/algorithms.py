"""QFT, phase estimation with register-size planning, Grover search with
quantum counting, and small-modulus order finding.

Phase estimation follows the two-stage procedure: a Hadamard layer on the
b-qubit register, the controlled-U^(2^j) ladder (register qubit j controls
U^(2^(b-1-j))), an inverse QFT, and a register measurement whose value
over 2^b estimates the eigenphase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import statharness
from .errors import DomainError, InternalError, ResourceError, ValidationError
from .gates import (
    BooleanOracle,
    Circuit,
    GateOp,
    controlled,
    hadamard,
    hadamard_layer,
    inverse_circuit,
    phase_gate,
    run_circuit,
    swap_gate,
)
from .qstate import StateVector, _apply_matrix, basis_state, qubit_cap
from .rng import Stream, sample_index


def register_size(zeta: float, epsilon: float) -> int:
    """Register qubits needed for accuracy zeta at failure probability
    epsilon: ceil(log2(1/zeta)) + ceil(log2(2 + 1/(2 epsilon)))."""
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"accuracy zeta = {zeta} must lie in (0, 1)")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"failure probability epsilon = {epsilon} must lie in (0, 1)")
    return math.ceil(math.log2(1.0 / zeta)) + math.ceil(math.log2(2.0 + 1.0 / (2.0 * epsilon)))


@dataclass(frozen=True)
class PhasePlan:
    """Accuracy/confidence plan for phase estimation; b is derived."""

    zeta: float
    epsilon: float
    b: int = 0

    def __post_init__(self):
        derived = register_size(self.zeta, self.epsilon)
        if self.b == 0:
            object.__setattr__(self, "b", derived)
        elif self.b != derived:
            raise ValidationError(
                f"register size {self.b} does not match the plan formula ({derived})"
            )


def phase_distance(a: float, b: float) -> float:
    """Distance on the phase circle (modulo 1)."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


# ---------------------------------------------------------------------------
# quantum Fourier transform


def qft(n: int) -> Circuit:
    """QFT circuit from the product representation: Hadamards, controlled
    phase rotations, and the closing swap network. O(n^2) gates."""
    if n < 1:
        raise DomainError("QFT needs at least one qubit")
    ops = []
    for i in range(n):
        ops.append(hadamard(i))
        for m in range(i + 1, n):
            angle = 2.0 * math.pi / (1 << (m - i + 1))
            ops.append(controlled(phase_gate(angle, i), m))
    for i in range(n // 2):
        ops.append(swap_gate(i, n - 1 - i))
    return Circuit(n, tuple(ops))


def inverse_qft(n: int) -> Circuit:
    return inverse_circuit(qft(n))


def apply_qft(s: StateVector) -> StateVector:
    return run_circuit(qft(s.qubits), s)


def dft_matrix(n: int) -> np.ndarray:
    """Dense 2^n DFT matrix |j> -> sum_k e^{2 pi i jk / 2^n} |k> / sqrt(2^n);
    the brute-force oracle for the QFT circuit."""
    dim = 1 << n
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    return np.exp(2j * math.pi * j * k / dim).T / math.sqrt(dim)


# ---------------------------------------------------------------------------
# phase estimation


def _controlled_power_ladder(u: GateOp, b: int):
    """GateOps for the controlled-U^(2^j) ladder by repeated squaring of
    the dense gate matrix; register qubit j controls U^(2^(b-1-j))."""
    k = len(u.targets)
    powers = [u.matrix]
    for _ in range(b - 1):
        powers.append(powers[-1] @ powers[-1])
    ladder = []
    for j in range(b):
        mat = powers[b - 1 - j]
        targets = [b + t for t in range(k)]
        ladder.append(GateOp(f"{u.name}^2^{b - 1 - j}", mat, targets, controls=(j,)))
    return ladder


def _pe_register_distribution(u: GateOp, state: StateVector, b: int) -> np.ndarray:
    """Probability distribution of the register measurement after the
    phase-estimation circuit, for an arbitrary second-register input."""
    if u.controls:
        raise DomainError("phase estimation takes an uncontrolled unitary")
    k = len(u.targets)
    if state.qubits != k:
        raise DomainError(
            f"eigenstate register has {state.qubits} qubits, unitary acts on {k}"
        )
    total = b + k
    cap = qubit_cap()
    if total > cap:
        raise ResourceError(f"phase estimation needs {total} qubits, cap is {cap}")
    amps = np.kron(hadamard_layer(b).amps, state.amps)
    for op in _controlled_power_ladder(u, b):
        amps = _apply_matrix(
            amps, total, op.matrix, list(op.targets), list(op.controls),
            op._perm_src, op._diag,
        )
    for op in inverse_qft(b).ops:
        amps = _apply_matrix(
            amps, total, op.matrix, list(op.targets), list(op.controls),
            op._perm_src, op._diag,
        )
    probs = np.abs(amps.reshape(1 << b, 1 << k)) ** 2
    return probs.sum(axis=1)


EIGENSTATE_TOL = 1e-8


def phase_estimate(u: GateOp, eigenstate: StateVector, plan: PhasePlan, rng: Stream) -> float:
    """Estimate the eigenphase phi of u (eigenvalue e^{2 pi i phi}).

    Exactly b-bit phases are recovered deterministically; otherwise
    |estimate - phi| <= zeta (mod 1) with probability at least 1 - epsilon.
    """
    applied = u.matrix @ eigenstate.amps
    lam = complex(np.vdot(eigenstate.amps, applied))
    if np.linalg.norm(applied - lam * eigenstate.amps) > EIGENSTATE_TOL:
        raise ValidationError("input state is not an eigenvector of the unitary")
    dist = _pe_register_distribution(u, eigenstate, plan.b)
    idx, _ = sample_index(dist, rng)
    return idx / float(1 << plan.b)


# ---------------------------------------------------------------------------
# Grover search


@dataclass(frozen=True)
class GroverPlan:
    """Rotation geometry for N = 2^b items with M solutions."""

    N: int
    M: int
    theta: float
    R: int

    @classmethod
    def for_counts(cls, N: int, M: int) -> "GroverPlan":
        if M < 1 or 2 * M > N:
            raise DomainError(f"solution count M = {M} must satisfy 1 <= M <= N/2")
        theta = 2.0 * math.asin(math.sqrt(M / N))
        r = round(math.acos(math.sqrt(M / N)) / theta)
        if r > (math.pi / 4.0) * math.sqrt(N / M) + 1.0:
            raise InternalError("iteration count exceeded its analytic bound")
        return cls(N=N, M=M, theta=theta, R=r)


def grover_iterations(N: int, M: int) -> int:
    """R = round(arccos(sqrt(M/N)) / theta), at most (pi/4) sqrt(N/M) + 1."""
    return GroverPlan.for_counts(N, M).R


def _oracle_signs(f: BooleanOracle) -> np.ndarray:
    return 1.0 - 2.0 * f.values().astype(float)


def _grover_amps(signs: np.ndarray, r: int) -> np.ndarray:
    """Amplitudes after r Grover iterations from the uniform start: each
    iteration is the oracle phase flip then inversion about the mean."""
    n = signs.shape[0]
    amps = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(r):
        amps = amps * signs
        amps = 2.0 * amps.mean() - amps
    return amps


def grover_solution_amplitude(f: BooleanOracle, M: int, r: int) -> float:
    """sqrt of the probability mass on the solution subspace after r
    iterations; equals sin((2r+1) theta / 2)."""
    GroverPlan.for_counts(1 << f.b, M)
    amps = _grover_amps(_oracle_signs(f), r)
    return float(np.sqrt(np.sum(amps[f.values() == 1] ** 2)))


def grover_search(f: BooleanOracle, M: int, rng: Stream) -> int:
    """Run Grover search and measure; the returned index satisfies f with
    probability at least 1 - M/N."""
    N = 1 << f.b
    plan = GroverPlan.for_counts(N, M)
    actual = f.solution_count()
    if actual != M:
        raise ValidationError(f"oracle marks {actual} solutions, caller claimed {M}")
    amps = _grover_amps(_oracle_signs(f), plan.R)
    idx, _ = sample_index(amps**2, rng)
    return idx


def grover_operator_matrix(f: BooleanOracle) -> np.ndarray:
    """Dense N x N Grover operator: oracle phase flip followed by the
    reflection about the uniform state."""
    N = 1 << f.b
    signs = _oracle_signs(f)
    reflect = 2.0 / N * np.ones((N, N)) - np.eye(N)
    return (reflect * signs[np.newaxis, :]).astype(complex)


def quantum_count(f: BooleanOracle, plan: PhasePlan, rng: Stream) -> int:
    """Estimate the solution count by phase-estimating the Grover operator.

    The uniform state splits over the e^{+-i theta} eigenvectors; estimates
    above one half are folded down before inverting sin^2(theta/2) = M/N.
    """
    N = 1 << f.b
    gate = GateOp("grover", grover_operator_matrix(f), list(range(f.b)))
    dist = _pe_register_distribution(gate, hadamard_layer(f.b), plan.b)
    idx, _ = sample_index(dist, rng)
    omega = idx / float(1 << plan.b)
    if omega > 0.5:
        omega = 1.0 - omega
    theta = 2.0 * math.pi * omega
    m_hat = round(N * math.sin(theta / 2.0) ** 2)
    return min(max(m_hat, 0), N)


# ---------------------------------------------------------------------------
# order finding

ORDER_MAX_MODULUS = 64


def modmul_unitary(x: int, N: int) -> GateOp:
    """Permutation gate |y> -> |x y mod N> on ceil(log2 N) qubits,
    identity on padding states y >= N."""
    if N < 2:
        raise DomainError("modulus must be at least 2")
    if not 1 <= x < N:
        raise DomainError(f"base x = {x} must satisfy 1 <= x < N")
    if math.gcd(x, N) != 1:
        raise DomainError(f"gcd({x}, {N}) != 1; modular multiplication is not invertible")
    k = max(1, math.ceil(math.log2(N)))
    dim = 1 << k
    mat = np.zeros((dim, dim), dtype=complex)
    for y in range(dim):
        mat[(x * y) % N if y < N else y, y] = 1.0
    return GateOp(f"modmul({x},{N})", mat, list(range(k)))


def order_brute_force(x: int, N: int) -> int:
    """Smallest r with x^r = 1 (mod N), by direct scan."""
    if math.gcd(x, N) != 1:
        raise DomainError(f"gcd({x}, {N}) != 1")
    value = x % N
    for r in range(1, N + 1):
        if value == 1:
            return r
        value = (value * x) % N
    raise InternalError("order scan failed; inputs were not coprime")


def _order_candidate(phi: float, x: int, N: int, window: float):
    """Denominator scan: the unique reduced fraction c/d (d <= N) inside the
    window around phi, extended over multiples of d and minimized over
    divisors once a verified order is found."""
    for d in range(1, N + 1):
        c = round(phi * d)
        if abs(phi - c / d) <= window:
            mult = d
            while mult <= N:
                if pow(x, mult, N) == 1:
                    for div in range(1, mult + 1):
                        if mult % div == 0 and pow(x, div, N) == 1:
                            return div
                mult += d
            return None
    return None


def order_find(x: int, N: int, rng: Stream, max_runs: int = 25) -> int:
    """Find the order of x modulo N by phase estimation on the modular
    multiplication gate, started from register state |1> (the uniform
    mixture of the eigenvectors u_s with phases s/r).

    Each run measures a phase estimate, recovers a candidate denominator,
    and verifies x^r = 1 (mod N); repetition is driven by the verified
    repetition strategy. Raises NotFoundError when the budget is exhausted.
    """
    if N > ORDER_MAX_MODULUS:
        raise ResourceError(f"order finding is dense desk scale: N <= {ORDER_MAX_MODULUS}")
    gate = modmul_unitary(x, N)
    k = len(gate.targets)
    b = 2 * k + 4
    window = 0.5 ** (2 * k + 1)
    dist = _pe_register_distribution(gate, basis_state(k, 1), b)
    scale = float(1 << b)

    def run(attempt: int):
        idx, _ = sample_index(dist, rng.substream(attempt))
        return _order_candidate(idx / scale, x, N, window)

    def verify(candidate):
        return candidate is not None and pow(x, candidate, N) == 1

    report = statharness.repeat_verified(run, verify, max_runs)
    return report.estimate

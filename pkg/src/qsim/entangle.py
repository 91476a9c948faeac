"""Bell states and the three entanglement experiments: spin
anti-correlation on the singlet, teleportation, and CHSH correlations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qstate
from .errors import DomainError, ValidationError
from .gates import (
    PAULI_X,
    PAULI_Z,
    bell_circuit,
    cnot,
    hadamard,
    apply_gate,
    run_circuit,
)
from .qstate import (
    Observable,
    StateVector,
    basis_state,
    measure_observable,
    measure_qubits,
    tensor,
)
from .pool import shot_map
from .rng import Stream

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)
_ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinAxis:
    """Real unit vector (a_x, a_y, a_z) defining a spin measurement axis."""

    a_x: float
    a_y: float
    a_z: float

    def __post_init__(self):
        norm = self.a_x**2 + self.a_y**2 + self.a_z**2
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"axis norm^2 = {norm!r} is not 1 within 1e-12")


def spin_observable(axis: SpinAxis) -> Observable:
    """a_x sigma_x + a_y sigma_y + a_z sigma_z; eigenvalues are +-1."""
    from .gates import PAULI_Y

    mat = axis.a_x * PAULI_X + axis.a_y * PAULI_Y + axis.a_z * PAULI_Z
    return Observable(mat)


@dataclass(frozen=True)
class ChshSetting:
    """Four +-1-valued single-qubit observables: x1, x2 for Alice and
    x3, x4 for Bob."""

    x1: Observable
    x2: Observable
    x3: Observable
    x4: Observable

    def __post_init__(self):
        for label, obs in zip(("x1", "x2", "x3", "x4"), (self.x1, self.x2, self.x3, self.x4)):
            if obs.dim != 2:
                raise ValidationError(f"{label} must be a single-qubit observable")
            if np.max(np.abs(obs.mat @ obs.mat - _ID2)) > 1e-9:
                raise ValidationError(f"{label} does not square to the identity")


def default_chsh_setting() -> ChshSetting:
    """The maximally violating setting: sigma_z, sigma_x for Alice and the
    two diagonal combinations for Bob."""
    s = 1.0 / math.sqrt(2.0)
    return ChshSetting(
        x1=Observable(PAULI_Z),
        x2=Observable(PAULI_X),
        x3=Observable(-s * (PAULI_Z + PAULI_X)),
        x4=Observable(s * (PAULI_Z - PAULI_X)),
    )


def bell_state(x1: int, x2: int) -> StateVector:
    """Output of the H-then-CNOT circuit on computational input |x1 x2>."""
    if x1 not in (0, 1) or x2 not in (0, 1):
        raise DomainError("bell_state takes two bits")
    return run_circuit(bell_circuit(), basis_state(2, (x1 << 1) | x2))


def singlet() -> StateVector:
    """(|01> - |10>)/sqrt(2), the antisymmetric Bell state."""
    return bell_state(1, 1)


def anticorrelation_experiment(axis: SpinAxis, shots: int, rng: Stream, threads: int = 1):
    """Measure the same spin axis on both qubits of the singlet.

    Alice measures first; Bob measures the collapsed state. Returns the
    list of (alice, bob) outcomes; they are opposite in every shot.
    """
    if shots < 1:
        raise DomainError("need at least one shot")
    obs = spin_observable(axis)
    alice_obs = Observable(np.kron(obs.mat, _ID2))
    bob_obs = Observable(np.kron(_ID2, obs.mat))
    base = singlet()

    def one_shot(shot: int):
        stream = rng.substream(shot)
        a, collapsed = measure_observable(base, alice_obs, stream)
        b, _ = measure_observable(collapsed, bob_obs, stream)
        return (int(round(a)), int(round(b)))

    return shot_map(one_shot, shots, threads)


# ---------------------------------------------------------------------------
# teleportation

_CORRECTIONS = {
    "00": None,
    "01": PAULI_X,
    "10": PAULI_Z,
    "11": PAULI_Z @ PAULI_X,  # sigma_x first, then sigma_z
}


def teleport(psi: StateVector, rng: Stream):
    """Teleport a single-qubit state over a shared Bell pair.

    Runs the three-qubit protocol: CNOT on Alice's qubits, Hadamard on the
    first, measurement of Alice's two qubits, then the classical correction
    on Bob's qubit. Returns (bob_state, classical_bits).
    """
    if psi.qubits != 1:
        raise DomainError("teleport takes a single-qubit state")
    state = tensor(psi, bell_state(0, 0))
    state = apply_gate(state, cnot(0, 1))
    state = apply_gate(state, hadamard(0))
    bits, post, _ = measure_qubits(state, [0, 1], rng)
    bob = _extract_bob(post, bits)
    correction = _CORRECTIONS[bits]
    if correction is not None:
        bob = qstate.apply_unitary(bob, correction, [0])
    return bob, bits


def _extract_bob(post: StateVector, bits: str) -> StateVector:
    block = post.amps.reshape(2, 2, 2)[int(bits[0]), int(bits[1]), :]
    return StateVector(1, block.copy(), _trusted=True)


def teleport_branches(psi: StateVector):
    """All four measurement branches of the protocol, deterministically.

    Returns a list of (bits, probability, pre_correction, corrected)
    entries; each branch has probability 1/4 and corrected state psi.
    """
    if psi.qubits != 1:
        raise DomainError("teleport takes a single-qubit state")
    state = tensor(psi, bell_state(0, 0))
    state = apply_gate(state, cnot(0, 1))
    state = apply_gate(state, hadamard(0))
    grid = state.amps.reshape(2, 2, 2)
    branches = []
    for b0 in (0, 1):
        for b1 in (0, 1):
            bits = f"{b0}{b1}"
            block = grid[b0, b1, :]
            prob = float(np.sum(np.abs(block) ** 2))
            pre = StateVector(1, block / math.sqrt(prob), _trusted=True)
            correction = _CORRECTIONS[bits]
            fixed = (
                pre
                if correction is None
                else qstate.apply_unitary(pre, correction, [0])
            )
            branches.append((bits, prob, pre, fixed))
    return branches


# ---------------------------------------------------------------------------
# CHSH

_PAIR_LABELS = ("13", "23", "24", "14")


def chsh_quantum_value(state, setting: ChshSetting) -> float:
    """E(X1 X3) + E(X2 X3) + E(X2 X4) - E(X1 X4) with tensor-product
    observables on a two-qubit state."""
    dim = state.dim if hasattr(state, "dim") else 0
    if dim != 4:
        raise DomainError("CHSH needs a two-qubit state")
    pairs = {
        "13": (setting.x1, setting.x3),
        "23": (setting.x2, setting.x3),
        "24": (setting.x2, setting.x4),
        "14": (setting.x1, setting.x4),
    }
    corr = {
        label: qstate._expect_matrix(state, np.kron(a.mat, b.mat))
        for label, (a, b) in pairs.items()
    }
    return corr["13"] + corr["23"] + corr["24"] - corr["14"]


def classical_chsh_maximum() -> float:
    """Exhaustive maximum of x1 x3 + x2 x3 + x2 x4 - x1 x4 over the 16
    deterministic +-1 assignments (the classical bound, exactly 2)."""
    best = -math.inf
    for x1 in (-1, 1):
        for x2 in (-1, 1):
            for x3 in (-1, 1):
                for x4 in (-1, 1):
                    best = max(best, x1 * x3 + x2 * x3 + x2 * x4 - x1 * x4)
    return float(best)


@dataclass(frozen=True)
class ChshResult:
    value: float
    stderr: float
    correlators: dict
    counts: dict
    shots: int
    rows: tuple


def chsh_experiment(
    shots: int, rng: Stream, collect_rows: bool = False, threads: int = 1
) -> ChshResult:
    """Monte Carlo CHSH on the singlet with the default setting.

    Each shot draws one of the four observable pairs uniformly, measures
    Alice's observable and then Bob's on the collapsed state, and
    accumulates the per-pair correlators.
    """
    if shots < 1:
        raise DomainError("chsh_experiment needs at least one shot")
    setting = default_chsh_setting()
    alice = {
        "13": Observable(np.kron(setting.x1.mat, _ID2)),
        "23": Observable(np.kron(setting.x2.mat, _ID2)),
        "24": Observable(np.kron(setting.x2.mat, _ID2)),
        "14": Observable(np.kron(setting.x1.mat, _ID2)),
    }
    bob = {
        "13": Observable(np.kron(_ID2, setting.x3.mat)),
        "23": Observable(np.kron(_ID2, setting.x3.mat)),
        "24": Observable(np.kron(_ID2, setting.x4.mat)),
        "14": Observable(np.kron(_ID2, setting.x4.mat)),
    }
    base = singlet()

    def one_shot(shot: int):
        stream = rng.substream(shot)
        label = _PAIR_LABELS[stream.integer(4)]
        a, collapsed = measure_observable(base, alice[label], stream)
        b, _ = measure_observable(collapsed, bob[label], stream)
        return label, int(round(a)), int(round(b))

    outcomes = shot_map(one_shot, shots, threads)
    sums = {label: 0.0 for label in _PAIR_LABELS}
    counts = {label: 0 for label in _PAIR_LABELS}
    rows = [] if collect_rows else None
    for shot, (label, a, b) in enumerate(outcomes):
        sums[label] += a * b
        counts[label] += 1
        if rows is not None:
            rows.append((shot, label, a, b))
    for label in _PAIR_LABELS:
        if counts[label] == 0:
            raise DomainError(f"no shots landed on pair {label}; increase shots")
    corr = {label: sums[label] / counts[label] for label in _PAIR_LABELS}
    value = corr["13"] + corr["23"] + corr["24"] - corr["14"]
    # products are +-1, so Var = 1 - mean^2 per pair; pairs are independent
    variance = sum(
        (1.0 - corr[label] ** 2) / counts[label] for label in _PAIR_LABELS
    )
    return ChshResult(
        value=value,
        stderr=math.sqrt(variance),
        correlators=corr,
        counts=counts,
        shots=shots,
        rows=tuple(rows) if rows is not None else (),
    )

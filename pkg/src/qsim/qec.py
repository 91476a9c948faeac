"""Bit-flip and phase-flip channels, the three-qubit codes with syndrome
measurement and recovery, and the nine-qubit concatenated code.

Decoding the nine-qubit code runs the canonical two-level procedure:
bit-flip syndrome and recovery inside each three-qubit block, then
phase-level detection across blocks from the two X-parity observables,
fixed by one sigma_z on the offending block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .gates import HADAMARD_MATRIX, PAULI_X, PAULI_Z, apply_gate, pauli_x, pauli_z
from .linalg import kron_all
from .pool import shot_map
from .qstate import Observable, StateVector, apply_unitary, fidelity, measure_observable
from .rng import Stream

LOGICAL_FAILURE_TOL = 1e-9

BIT_FLIP = "bit-flip"
PHASE_FLIP = "phase-flip"


@dataclass(frozen=True)
class NoiseChannel:
    """Independent per-qubit flips: sigma_x (bit) or sigma_z (phase),
    each with probability p."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in (BIT_FLIP, PHASE_FLIP):
            raise DomainError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"flip probability {self.p} not in [0, 1]")


@dataclass(frozen=True)
class Syndrome:
    """Three-qubit code syndrome: 0 = clean, k = flip on qubit k."""

    value: int

    def __post_init__(self):
        if self.value not in (0, 1, 2, 3):
            raise DomainError(f"syndrome value {self.value} not in 0..3")


def encode_bitflip(q: StateVector) -> StateVector:
    """a0|0> + a1|1>  ->  a0|000> + a1|111>."""
    if q.qubits != 1:
        raise DomainError("encode_bitflip takes a single-qubit state")
    amps = np.zeros(8, dtype=complex)
    amps[0] = q.amps[0]
    amps[7] = q.amps[1]
    return StateVector(3, amps, _trusted=True)


@lru_cache(maxsize=None)
def _flip_gate(kind: str, q: int):
    return pauli_x(q) if kind == BIT_FLIP else pauli_z(q)


def apply_channel(s: StateVector, ch: NoiseChannel, rng: Stream):
    """Flip each qubit independently with probability p; returns the new
    state and the realized flip mask (qubit 0 = most significant bit)."""
    mask = 0
    state = s
    for q in range(s.qubits):
        if rng.uniform() < ch.p:
            mask |= 1 << (s.qubits - 1 - q)
            state = apply_gate(state, _flip_gate(ch.kind, q))
    return state, mask


def _basis_projector(indices, dim: int) -> np.ndarray:
    proj = np.zeros((dim, dim), dtype=complex)
    for i in indices:
        proj[i, i] = 1.0
    return proj


@lru_cache(maxsize=None)
def _bitflip_syndrome_observable() -> Observable:
    """Eigenvalues 0..3 with projectors onto the no-error and
    single-position-flip pairs of codewords."""
    pairs = [(0b000, 0b111), (0b100, 0b011), (0b010, 0b101), (0b001, 0b110)]
    spectrum = [(float(k), _basis_projector(pair, 8)) for k, pair in enumerate(pairs)]
    mat = sum(x * q for x, q in spectrum)
    return Observable(mat, spectrum)


def syndrome_measure(s: StateVector, rng: Stream = None):
    """Measure the error syndrome of a three-qubit bit-flip codeword.

    For a codeword with at most one flip the outcome is deterministic and
    the state is untouched; states outside the code+single-error span are
    still sampled by the Born rule. Returns (Syndrome, post_state).
    """
    if s.qubits != 3:
        raise DomainError("syndrome measurement takes a three-qubit state")
    if rng is None:
        rng = Stream(0, "qec/syndrome")
    value, post = measure_observable(s, _bitflip_syndrome_observable(), rng)
    return Syndrome(int(round(value))), post


def recover_bitflip(s: StateVector, syn: Syndrome) -> StateVector:
    """Undo the flip named by the syndrome (1..3 -> qubit index 0..2)."""
    if syn.value == 0:
        return s
    return apply_unitary(s, PAULI_X, [syn.value - 1])


_H3 = kron_all([HADAMARD_MATRIX] * 3)


def encode_phaseflip(q: StateVector) -> StateVector:
    """|0> -> |+++>, |1> -> |--->; the bit-flip code conjugated by H x H x H."""
    encoded = encode_bitflip(q)
    return StateVector(3, _H3 @ encoded.amps, _trusted=True)


def syndrome_measure_phase(s: StateVector, rng: Stream = None):
    """Phase-code syndrome: the bit-flip measurement in the |+->, basis."""
    if s.qubits != 3:
        raise DomainError("syndrome measurement takes a three-qubit state")
    rotated = StateVector(3, _H3 @ s.amps, _trusted=True)
    syn, post = syndrome_measure(rotated, rng)
    return syn, StateVector(3, _H3 @ post.amps, _trusted=True)


def recover_phaseflip(s: StateVector, syn: Syndrome) -> StateVector:
    """sigma_z on the flagged qubit (= H sigma_x H in the rotated basis)."""
    if syn.value == 0:
        return s
    return apply_unitary(s, PAULI_Z, [syn.value - 1])


# ---------------------------------------------------------------------------
# nine-qubit code

_BLOCKS = ((0, 1, 2), (3, 4, 5), (6, 7, 8))


def _block_states():
    plus = np.zeros(8, dtype=complex)
    minus = np.zeros(8, dtype=complex)
    plus[0] = plus[7] = 1.0 / math.sqrt(2.0)
    minus[0] = 1.0 / math.sqrt(2.0)
    minus[7] = -1.0 / math.sqrt(2.0)
    return plus, minus


def encode_shor9(q: StateVector) -> StateVector:
    """|0> -> product of (|000>+|111>)/sqrt2 blocks, |1> with minus signs."""
    if q.qubits != 1:
        raise DomainError("encode_shor9 takes a single-qubit state")
    plus, minus = _block_states()
    zero_l = kron_all([plus, plus, plus])
    one_l = kron_all([minus, minus, minus])
    return StateVector(9, q.amps[0] * zero_l + q.amps[1] * one_l, _trusted=True)


@lru_cache(maxsize=None)
def _block_syndrome_observable(block: int) -> Observable:
    """The three-qubit syndrome projectors embedded on one block of nine."""
    base = _bitflip_syndrome_observable()
    eyes = [np.eye(8, dtype=complex)] * 3
    spectrum = []
    for value, proj in base.spectrum:
        mats = list(eyes)
        mats[block] = proj
        spectrum.append((value, kron_all(mats)))
    mat = sum(x * q for x, q in spectrum)
    return Observable(mat, spectrum)


@lru_cache(maxsize=None)
def _block_parity_observable(first: int, second: int) -> Observable:
    """X^(x)3 on two blocks, identity on the third; eigenvalues +-1."""
    xxx = kron_all([PAULI_X] * 3)
    mats = [np.eye(8, dtype=complex)] * 3
    mats[first] = xxx
    mats[second] = xxx
    a = kron_all(mats)
    eye = np.eye(512, dtype=complex)
    spectrum = [(1.0, 0.5 * (eye + a)), (-1.0, 0.5 * (eye - a))]
    return Observable(a, spectrum)


_PARITY_TO_BLOCK = {(1, 1): None, (-1, 1): 0, (-1, -1): 1, (1, -1): 2}


def shor9_correct(s: StateVector, rng: Stream = None) -> StateVector:
    """Correct any single-qubit sigma_x, sigma_z, or combined error.

    Step one measures and fixes the bit-flip syndrome inside each block;
    step two measures the two block X-parities and fixes the flagged
    block's sign with one sigma_z.
    """
    if s.qubits != 9:
        raise DomainError("shor9_correct takes a nine-qubit state")
    if rng is None:
        rng = Stream(0, "qec/shor9")
    state = s
    for block in range(3):
        value, state = measure_observable(state, _block_syndrome_observable(block), rng)
        syn = int(round(value))
        if syn:
            state = apply_unitary(state, PAULI_X, [_BLOCKS[block][syn - 1]])
    p12, state = measure_observable(state, _block_parity_observable(0, 1), rng)
    p23, state = measure_observable(state, _block_parity_observable(1, 2), rng)
    flagged = _PARITY_TO_BLOCK[(int(round(p12)), int(round(p23)))]
    if flagged is not None:
        state = apply_unitary(state, PAULI_Z, [_BLOCKS[flagged][0]])
    return state


# ---------------------------------------------------------------------------
# Monte Carlo sweep


def predicted_logical_rate(p: float) -> float:
    """P(two or more flips among three) = 3 p^2 - 2 p^3."""
    return 3.0 * p * p - 2.0 * p**3


def logical_error_rate(
    code: str, p: float, shots: int, rng: Stream, threads: int = 1
) -> float:
    """Empirical failure rate of the three-qubit bit-flip code.

    Each shot encodes |0>, passes the codeword through the channel,
    measures the syndrome, recovers, and compares with the original
    codeword; failure means fidelity below 1 - 1e-9 (two or more flips).
    """
    if code != "bit-flip-3":
        raise DomainError(f"unknown code {code!r}")
    if shots < 1:
        raise DomainError("need at least one shot")
    channel = NoiseChannel(BIT_FLIP, p)
    reference = encode_bitflip(StateVector(1, [1.0, 0.0]))

    def one_shot(shot: int) -> bool:
        stream = rng.substream(shot)
        noisy, _ = apply_channel(reference, channel, stream)
        syn, post = syndrome_measure(noisy, stream)
        decoded = recover_bitflip(post, syn)
        return fidelity(decoded, reference) < 1.0 - LOGICAL_FAILURE_TOL

    return sum(shot_map(one_shot, shots, threads)) / shots


def qec_sweep(ps, shots: int, seed: int, threads: int = 1):
    """Logical-rate sweep rows: (p, shots, failures, rate, predicted, stderr)."""
    rows = []
    for p in ps:
        rng = Stream(seed, f"qec/sweep/{p}")
        rate = logical_error_rate("bit-flip-3", p, shots, rng, threads=threads)
        failures = round(rate * shots)
        stderr = math.sqrt(max(rate * (1.0 - rate), 0.0) / shots)
        rows.append(
            {
                "p": p,
                "shots": shots,
                "failures": failures,
                "rate": rate,
                "predicted": predicted_logical_rate(p),
                "stderr": stderr,
            }
        )
    return rows

"""Gate constructors, circuit composition, Boolean oracles, and the
uniform-superposition layer.

A GateOp binds a small unitary to explicit target qubits, with optional
control qubits listed before targets; the active block of a controlled
gate is the all-controls-one subspace. Circuits are ordered GateOp lists
applied by a strided kernel over the amplitude array; the full 2^b
embedding is never materialized outside the dense test oracles.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DomainError, ResourceError, ValidationError
from .qstate import (
    StateVector,
    _apply_matrix,
    _check_targets,
    basis_state,
    diagonal_vector,
    permutation_vector,
    qubit_cap,
)

SQRT2_INV = 1.0 / math.sqrt(2.0)

HADAMARD_MATRIX = np.array([[SQRT2_INV, SQRT2_INV], [SQRT2_INV, -SQRT2_INV]], dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_NAMED_MATRICES = {"h": HADAMARD_MATRIX, "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}

# dense oracle_uf matrices are test-scale only
_ORACLE_DENSE_MAX_BITS = 8
_ORACLE_TABLE_MAX_BITS = 20


class GateOp:
    """A unitary on `targets`, optionally conditioned on `controls`."""

    __slots__ = ("name", "matrix", "targets", "controls", "_perm_src", "_diag")

    def __init__(self, name: str, matrix, targets, controls=()):
        self.name = name
        self.matrix = linalg.require_unitary(matrix)
        self.targets = tuple(int(q) for q in targets)
        self.controls = tuple(int(q) for q in controls)
        if len(set(self.targets) | set(self.controls)) != len(self.targets) + len(
            self.controls
        ):
            raise ValidationError("targets and controls must be disjoint")
        if self.matrix.shape[0] != 1 << len(self.targets):
            raise ValidationError(
                f"matrix dim {self.matrix.shape[0]} does not match "
                f"{len(self.targets)} target qubits"
            )
        self._perm_src = permutation_vector(self.matrix)
        self._diag = diagonal_vector(self.matrix)

    def qubits_touched(self):
        return self.controls + self.targets

    def full_matrix(self) -> np.ndarray:
        """Dense block matrix over (controls + targets): identity except the
        all-controls-one block, which holds the gate matrix."""
        k = len(self.targets)
        nc = len(self.controls)
        dim = 1 << (nc + k)
        out = np.eye(dim, dtype=complex)
        out[dim - (1 << k) :, dim - (1 << k) :] = self.matrix
        return out

    def dagger(self) -> "GateOp":
        return GateOp(
            self.name + "†", self.matrix.conj().T, self.targets, self.controls
        )

    def __repr__(self):
        ctrl = f", controls={self.controls}" if self.controls else ""
        return f"GateOp({self.name!r}, targets={self.targets}{ctrl})"


@dataclass(frozen=True)
class Circuit:
    """Ordered gate applications on a fixed-width register."""

    qubits: int
    ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        for op in self.ops:
            for q in op.qubits_touched():
                if not 0 <= q < self.qubits:
                    raise DomainError(
                        f"gate {op.name!r} touches qubit {q}, register has {self.qubits}"
                    )

    def then(self, *ops) -> "Circuit":
        return Circuit(self.qubits, self.ops + tuple(ops))

    def __len__(self):
        return len(self.ops)


class BooleanOracle:
    """A total function {0,..,2^b - 1} -> {0, 1}.

    Values are materialized as a lookup table up to 20 input bits; beyond
    that the callable is evaluated on demand.
    """

    __slots__ = ("b", "table", "fn")

    def __init__(self, b: int, fn=None, table=None):
        if b < 1:
            raise DomainError("oracle needs at least one input bit")
        self.b = int(b)
        if table is not None:
            arr = np.asarray(table, dtype=np.uint8)
            if arr.shape != (1 << b,) or not np.all((arr == 0) | (arr == 1)):
                raise ValidationError("oracle table must hold 2^b zero/one entries")
            self.table = arr
            self.fn = None
        elif fn is not None:
            if b <= _ORACLE_TABLE_MAX_BITS:
                self.table = np.array(
                    [1 if fn(x) else 0 for x in range(1 << b)], dtype=np.uint8
                )
                self.fn = None
            else:
                self.table = None
                self.fn = fn
        else:
            raise DomainError("provide either a callable or a table")

    @classmethod
    def from_solutions(cls, b: int, solutions) -> "BooleanOracle":
        table = np.zeros(1 << b, dtype=np.uint8)
        for x in solutions:
            if not 0 <= x < (1 << b):
                raise DomainError(f"solution {x} out of range for {b} bits")
            table[x] = 1
        return cls(b, table=table)

    def __call__(self, x: int) -> int:
        if not 0 <= x < (1 << self.b):
            raise DomainError(f"oracle input {x} out of range")
        if self.table is not None:
            return int(self.table[x])
        return 1 if self.fn(x) else 0

    def values(self) -> np.ndarray:
        if self.table is None:
            raise ResourceError("oracle too large for a materialized table")
        return self.table

    def solution_count(self) -> int:
        return int(self.values().sum())


# ---------------------------------------------------------------------------
# gate factories


def hadamard(q: int = 0) -> GateOp:
    return GateOp("h", HADAMARD_MATRIX, [q])


def pauli_x(q: int = 0) -> GateOp:
    return GateOp("x", PAULI_X, [q])


def pauli_y(q: int = 0) -> GateOp:
    return GateOp("y", PAULI_Y, [q])


def pauli_z(q: int = 0) -> GateOp:
    return GateOp("z", PAULI_Z, [q])


def phase_gate(angle: float, q: int = 0) -> GateOp:
    """diag(1, e^{i angle}) on one qubit."""
    mat = np.array([[1, 0], [0, cmath.exp(1j * angle)]], dtype=complex)
    return GateOp(f"phase({angle:.12g})", mat, [q])


def swap_gate(q1: int, q2: int) -> GateOp:
    return GateOp("swap", SWAP_MATRIX, [q1, q2])


def controlled(u: GateOp, control: int) -> GateOp:
    """Prepend a control qubit: u acts only when every control reads 1."""
    if control in u.targets or control in u.controls:
        raise DomainError(f"control qubit {control} already used by the gate")
    return GateOp("c" + u.name, u.matrix, u.targets, (control,) + u.controls)


def cnot(control: int = 0, target: int = 1) -> GateOp:
    return controlled(pauli_x(target), control)


def custom_gate(name: str, matrix, targets, controls=()) -> GateOp:
    return GateOp(name, matrix, targets, controls)


def oracle_uf(f: BooleanOracle) -> GateOp:
    """The reversible embedding |x, y> -> |x, y XOR f(x)> on b+1 qubits.

    Built as a dense permutation matrix; the data register occupies the
    top b qubits, the target qubit is last.
    """
    if f.b > _ORACLE_DENSE_MAX_BITS:
        raise ResourceError(
            f"dense oracle embedding supports at most {_ORACLE_DENSE_MAX_BITS} input bits"
        )
    values = f.values()
    dim = 1 << (f.b + 1)
    mat = np.zeros((dim, dim), dtype=complex)
    for x in range(1 << f.b):
        fx = int(values[x])
        for y in (0, 1):
            mat[(x << 1) | (y ^ fx), (x << 1) | y] = 1.0
    return GateOp("uf", mat, list(range(f.b + 1)))


def hadamard_layer(b: int) -> StateVector:
    """Equal superposition over all 2^b basis states, the output of one
    Hadamard per qubit on |0...0>."""
    if b < 1:
        raise DomainError("need at least one qubit")
    cap = qubit_cap()
    if b > cap:
        raise ResourceError(f"{b} qubits exceeds the configured cap of {cap}")
    amps = np.full(1 << b, 2.0 ** (-b / 2.0), dtype=complex)
    return StateVector(b, amps, _trusted=True)


# ---------------------------------------------------------------------------
# execution


def apply_gate(s: StateVector, op: GateOp) -> StateVector:
    _check_targets(s.qubits, op.targets, op.controls)
    out = _apply_matrix(
        s.amps, s.qubits, op.matrix, list(op.targets), list(op.controls),
        op._perm_src, op._diag,
    )
    return StateVector(s.qubits, out, _trusted=True)


def run_circuit(c: Circuit, input_state: StateVector) -> StateVector:
    """Apply the circuit's gates in order."""
    if input_state.qubits != c.qubits:
        raise DomainError(
            f"circuit expects {c.qubits} qubits, state has {input_state.qubits}"
        )
    state = input_state
    for op in c.ops:
        state = apply_gate(state, op)
    return state


def inverse_circuit(c: Circuit) -> Circuit:
    """Reversed gate order with conjugate-transposed matrices."""
    return Circuit(c.qubits, tuple(op.dagger() for op in reversed(c.ops)))


def bell_circuit() -> Circuit:
    """Hadamard on the first qubit followed by a controlled-NOT."""
    return Circuit(2, (hadamard(0), cnot(0, 1)))


def uniform_with_ancilla(b: int) -> StateVector:
    """Hadamard layer on the data register with a |0> target qubit appended."""
    return StateVector(
        b + 1,
        np.kron(hadamard_layer(b).amps, basis_state(1, 0).amps),
        _trusted=True,
    )


# ---------------------------------------------------------------------------
# serialization


def circuit_to_json(c: Circuit) -> str:
    """JSON list of {name, targets, controls, matrix?}; gates named h/x/y/z
    omit the matrix, anything else embeds it row-major as [re, im] pairs."""
    ops = []
    for op in c.ops:
        entry = {
            "name": op.name,
            "targets": list(op.targets),
            "controls": list(op.controls),
        }
        base = op.name.lstrip("c")
        if not (base in _NAMED_MATRICES and np.array_equal(op.matrix, _NAMED_MATRICES[base])):
            entry["matrix"] = [
                [float(z.real), float(z.imag)] for z in op.matrix.reshape(-1)
            ]
        ops.append(entry)
    return json.dumps({"qubits": c.qubits, "ops": ops})


def circuit_from_json(text: str) -> Circuit:
    data = json.loads(text)
    ops = []
    for entry in data["ops"]:
        targets = entry["targets"]
        controls = entry.get("controls", [])
        if "matrix" in entry:
            dim = 1 << len(targets)
            flat = np.array([complex(re, im) for re, im in entry["matrix"]])
            mat = flat.reshape(dim, dim)
        else:
            base = entry["name"].lstrip("c")
            if base not in _NAMED_MATRICES:
                raise ValidationError(f"gate {entry['name']!r} needs an embedded matrix")
            mat = _NAMED_MATRICES[base]
        ops.append(GateOp(entry["name"], mat, targets, controls))
    return Circuit(int(data["qubits"]), tuple(ops))

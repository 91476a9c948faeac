"""States, density matrices, observables, and projective measurement.

Amplitudes are numpy complex128. Basis labels follow the big-endian
convention: for a b-qubit register the basis index of |x_0 x_1 ... x_{b-1}>
is x_0 * 2^(b-1) + ... + x_{b-1}, i.e. qubit 0 is the most significant bit
and reads leftmost in ket notation.

States and matrices are immutable values: every operation returns a new
object, and all randomness comes from an explicit Stream, so operations
are pure and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    ConditioningError,
    DomainError,
    NumericalConsistencyError,
    ResourceError,
    ValidationError,
)
from .rng import Stream, sample_index

NORM_TOL = 1e-10
DERIVED_TOL = 1e-9
EIGENVALUE_MERGE_TOL = 1e-9
ENTROPY_CLAMP = 1e-14
IMAG_RESIDUE_ERROR = 1e-8
DEFAULT_QUBIT_CAP = 24
QUBIT_CAP_ENV = "QSIM_MAX_QUBITS"


def qubit_cap() -> int:
    """Maximum register size; QSIM_MAX_QUBITS overrides the default of 24."""
    raw = os.environ.get(QUBIT_CAP_ENV)
    if raw is None:
        return DEFAULT_QUBIT_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise DomainError(f"{QUBIT_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise DomainError(f"{QUBIT_CAP_ENV} must be >= 1, got {cap}")
    return cap


def _check_qubit_count(b: int) -> int:
    if not isinstance(b, (int, np.integer)) or b < 1:
        raise DomainError(f"qubit count must be a positive integer, got {b!r}")
    cap = qubit_cap()
    if b > cap:
        raise ResourceError(f"{b} qubits exceeds the configured cap of {cap}")
    return int(b)


class StateVector:
    """Pure state of `qubits` qubits: 2^qubits amplitudes with unit norm."""

    __slots__ = ("qubits", "amps")

    def __init__(self, qubits: int, amps, *, _trusted: bool = False):
        if _trusted:
            self.qubits = qubits
            self.amps = amps
            return
        b = _check_qubit_count(qubits)
        vec = np.asarray(amps, dtype=complex).reshape(-1)
        if vec.shape[0] != 1 << b:
            raise ValidationError(
                f"expected {1 << b} amplitudes for {b} qubits, got {vec.shape[0]}"
            )
        if not np.all(np.isfinite(vec.real)) or not np.all(np.isfinite(vec.imag)):
            raise ValidationError("amplitudes contain non-finite values")
        norm_sq = float(np.sum(np.abs(vec) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm^2 = {norm_sq!r} is not 1 within {NORM_TOL}")
        self.qubits = b
        self.amps = vec.copy()

    @property
    def dim(self) -> int:
        return 1 << self.qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __repr__(self):
        return f"StateVector(qubits={self.qubits})"


class DensityMatrix:
    """Hermitian, positive semi-definite, trace-1 operator on `qubits` qubits."""

    __slots__ = ("qubits", "mat")

    def __init__(self, qubits: int, mat, *, _trusted: bool = False):
        if _trusted:
            self.qubits = qubits
            self.mat = mat
            return
        b = _check_qubit_count(qubits)
        m = linalg.as_complex_matrix(mat)
        if m.shape[0] != 1 << b:
            raise ValidationError(f"expected a {1 << b}-dim matrix for {b} qubits")
        linalg.require_hermitian(m, NORM_TOL)
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > NORM_TOL:
            raise ValidationError(f"trace = {trace!r} is not 1 within {NORM_TOL}")
        eigvals, _ = linalg.jacobi_eigh(m)
        if eigvals[0] < -NORM_TOL:
            raise ValidationError(f"matrix has negative eigenvalue {eigvals[0]:.3e}")
        self.qubits = b
        self.mat = m.copy()

    @property
    def dim(self) -> int:
        return 1 << self.qubits

    def __repr__(self):
        return f"DensityMatrix(qubits={self.qubits})"


class Observable:
    """Hermitian operator with a cached spectral decomposition.

    `spectrum` is a list of (eigenvalue, projector) pairs; eigenvalues
    closer than EIGENVALUE_MERGE_TOL are merged into one projector.
    """

    __slots__ = ("mat", "spectrum")

    def __init__(self, mat, spectrum=None):
        self.mat = linalg.require_hermitian(linalg.as_complex_matrix(mat))
        if spectrum is None:
            spectrum = self._decompose(self.mat)
        self.spectrum = [(float(x), np.asarray(q, dtype=complex)) for x, q in spectrum]
        self._validate()

    @staticmethod
    def _decompose(mat):
        eigvals, eigvecs = linalg.jacobi_eigh(mat)
        groups = []
        start = 0
        for i in range(1, len(eigvals) + 1):
            if i == len(eigvals) or eigvals[i] - eigvals[i - 1] > EIGENVALUE_MERGE_TOL:
                groups.append((start, i))
                start = i
        spectrum = []
        for lo, hi in groups:
            vecs = eigvecs[:, lo:hi]
            projector = vecs @ vecs.conj().T
            spectrum.append((float(np.mean(eigvals[lo:hi])), projector))
        return spectrum

    def _validate(self):
        dim = self.mat.shape[0]
        total = sum(q for _, q in self.spectrum)
        if np.max(np.abs(total - np.eye(dim))) > DERIVED_TOL:
            raise ValidationError("projectors do not sum to the identity")
        recon = sum(x * q for x, q in self.spectrum)
        if np.max(np.abs(recon - self.mat)) > DERIVED_TOL:
            raise ValidationError("spectral decomposition does not reproduce the matrix")
        for i, (_, qa) in enumerate(self.spectrum):
            for _, qc in self.spectrum[i + 1 :]:
                if np.max(np.abs(qa @ qc)) > DERIVED_TOL:
                    raise ValidationError("projectors are not mutually orthogonal")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def eigenvalues(self):
        return [x for x, _ in self.spectrum]

    def __repr__(self):
        return f"Observable(dim={self.dim}, levels={len(self.spectrum)})"


@dataclass(frozen=True)
class MeasurementRecord:
    """One sampled measurement: outcome, its Born probability, and the
    (shot, seed) pair of the stream that produced it."""

    outcome: object
    probability: float
    shot: int
    seed: int


# ---------------------------------------------------------------------------
# gate application kernel


def permutation_vector(mat: np.ndarray):
    """Source-index array if `mat` is an exact 0/1 permutation, else None."""
    ones = mat == 1.0
    if not np.all(ones | (mat == 0.0)):
        return None
    if not (np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1)):
        return None
    return np.argmax(ones, axis=1)


def diagonal_vector(mat: np.ndarray):
    """Diagonal of `mat` if it is exactly diagonal, else None."""
    diag = np.diag(mat)
    if np.count_nonzero(mat - np.diag(diag)):
        return None
    return diag.copy()


def _apply_matrix(amps, b, mat, targets, controls=(), perm_src=None, diag=None):
    """Apply `mat` to the target qubits of a 2^b amplitude array,
    conditioned on all control qubits being 1. Returns a new array.

    Diagonal matrices and matrices on trailing target qubits skip the
    transpose round trip; the general path permutes the target axes to
    the end, applies the matrix blockwise, and permutes back.
    """
    k = len(targets)
    dim_k = 1 << k
    if diag is not None:
        # in-place scaling of the slices selected by controls and target bits
        out = amps.copy()
        view = out.reshape((2,) * b)
        base = [slice(None)] * b
        for c in controls:
            base[c] = 1
        for pattern in range(dim_k):
            d = diag[pattern]
            if d == 1.0:
                continue
            sel = list(base)
            for pos, t in enumerate(targets):
                sel[t] = (pattern >> (k - 1 - pos)) & 1
            view[tuple(sel)] *= d
        return out
    if list(targets) == list(range(b - k, b)) and all(c < b - k for c in controls):
        # trailing targets: the last array axis already enumerates them
        out = amps.copy()
        view = out.reshape((2,) * (b - k) + (dim_k,))
        sel = [slice(None)] * (b - k)
        for c in controls:
            sel[c] = 1
        block = view[tuple(sel)]
        if perm_src is not None:
            block[...] = block[..., perm_src]
        else:
            block[...] = block @ mat.T
        return out
    ctrl = list(controls)
    targ = list(targets)
    rest = [i for i in range(b) if i not in ctrl and i not in targ]
    axes = ctrl + rest + targ
    psi = amps.reshape((2,) * b).transpose(axes).copy()
    flat = psi.reshape(-1, dim_k)
    if ctrl:
        rows = flat.shape[0]
        sub = flat[rows - (rows >> len(ctrl)) :]
    else:
        sub = flat
    if perm_src is not None:
        sub[:] = sub[:, perm_src]
    else:
        sub[:] = sub @ mat.T
    inverse = np.argsort(axes)
    return psi.reshape((2,) * b).transpose(inverse).reshape(-1)


def _check_targets(b, targets, controls=()):
    seen = set()
    for q in list(targets) + list(controls):
        if not isinstance(q, (int, np.integer)) or not 0 <= q < b:
            raise DomainError(f"qubit index {q!r} out of range for {b} qubits")
        if q in seen:
            raise DomainError(f"qubit index {q} repeated across targets/controls")
        seen.add(q)


# ---------------------------------------------------------------------------
# operations


def basis_state(b: int, x: int) -> StateVector:
    """Computational basis state |x> on b qubits."""
    b = _check_qubit_count(b)
    if not 0 <= x < (1 << b):
        raise DomainError(f"basis index {x} out of range for {b} qubits")
    amps = np.zeros(1 << b, dtype=complex)
    amps[x] = 1.0
    return StateVector(b, amps, _trusted=True)


def tensor(a: StateVector, c: StateVector) -> StateVector:
    """Composite state a (x) c; a's qubits become the most significant."""
    b = a.qubits + c.qubits
    cap = qubit_cap()
    if b > cap:
        raise ResourceError(f"tensor product needs {b} qubits, cap is {cap}")
    return StateVector(b, np.kron(a.amps, c.amps), _trusted=True)


def apply_unitary(s: StateVector, u, targets) -> StateVector:
    """Apply unitary u to the listed target qubits (identity elsewhere)."""
    mat = linalg.require_unitary(u)
    targets = list(targets)
    _check_targets(s.qubits, targets)
    if mat.shape[0] != 1 << len(targets):
        raise DomainError(
            f"matrix dimension {mat.shape[0]} does not match {len(targets)} target qubits"
        )
    out = _apply_matrix(s.amps, s.qubits, mat, targets)
    return StateVector(s.qubits, out, _trusted=True)


def measure_qubits(s: StateVector, subset, rng: Stream):
    """Projective measurement of a qubit subset in the computational basis.

    Samples an outcome bitstring by the Born rule over the subset's
    marginal, collapses the state, and returns
    (bits, post_state, MeasurementRecord).
    """
    subset = list(subset)
    if not subset:
        raise DomainError("measurement subset must be non-empty")
    _check_targets(s.qubits, subset)
    b = s.qubits
    psi = s.amps.reshape((2,) * b)
    other = tuple(i for i in range(b) if i not in subset)
    marginal = np.abs(psi) ** 2
    if other:
        marginal = marginal.sum(axis=other)
    ordered = sorted(subset)
    marginal = marginal.transpose([ordered.index(q) for q in subset]).reshape(-1)
    idx, prob = sample_index(marginal, rng)
    bits = format(idx, f"0{len(subset)}b")
    sel = [slice(None)] * b
    for q, bit in zip(subset, bits):
        sel[q] = int(bit)
    post = np.zeros_like(psi)
    post[tuple(sel)] = psi[tuple(sel)]
    post = post.reshape(-1) / math.sqrt(prob)
    record = MeasurementRecord(outcome=bits, probability=float(prob), shot=rng.shot, seed=rng.seed)
    return bits, StateVector(b, post, _trusted=True), record


def measure_observable(s: StateVector, obs: Observable, rng: Stream):
    """Measure an observable: samples eigenvalue x_a with <psi|Q_a|psi>,
    collapses to Q_a|psi>/sqrt(P(a)). Returns (eigenvalue, post_state)."""
    if obs.dim != s.dim:
        raise DomainError(f"observable dim {obs.dim} does not match state dim {s.dim}")
    probs = []
    projected = []
    for _, q in obs.spectrum:
        qpsi = q @ s.amps
        projected.append(qpsi)
        probs.append(float(np.real(np.vdot(s.amps, qpsi))))
    idx, prob = sample_index(probs, rng)
    post = projected[idx] / math.sqrt(prob)
    return obs.spectrum[idx][0], StateVector(s.qubits, post, _trusted=True)


def _expect_matrix(state, mat) -> float:
    if isinstance(state, StateVector):
        value = complex(np.vdot(state.amps, mat @ state.amps))
    elif isinstance(state, DensityMatrix):
        value = complex(np.trace(mat @ state.mat))
    else:
        raise DomainError(f"expected StateVector or DensityMatrix, got {type(state)!r}")
    if abs(value.imag) > IMAG_RESIDUE_ERROR:
        raise NumericalConsistencyError(
            f"expectation has imaginary residue {value.imag:.3e}"
        )
    return value.real


def expectation(state, obs: Observable) -> float:
    """<X> = Tr(X rho) (or <psi|X|psi> for pure states)."""
    if obs.dim != (state.dim if hasattr(state, "dim") else 0):
        raise DomainError("observable dimension does not match state")
    return _expect_matrix(state, obs.mat)


def variance(state, obs: Observable) -> float:
    """Var[X] = tr(X^2 rho) - (tr(X rho))^2."""
    if obs.dim != state.dim:
        raise DomainError("observable dimension does not match state")
    second = _expect_matrix(state, obs.mat @ obs.mat)
    first = _expect_matrix(state, obs.mat)
    return second - first * first


def density_from_ensemble(states, probs) -> DensityMatrix:
    """rho = sum_j p_j |psi_j><psi_j| for an ensemble of pure states."""
    if len(states) != len(probs) or not states:
        raise ValidationError("need equally many states and probabilities")
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0):
        raise ValidationError("ensemble probabilities must be non-negative")
    if abs(float(p.sum()) - 1.0) > NORM_TOL:
        raise ValidationError(f"ensemble probabilities sum to {p.sum()!r}, not 1")
    b = states[0].qubits
    if any(s.qubits != b for s in states):
        raise ValidationError("ensemble states must have equal qubit counts")
    mat = np.zeros((1 << b, 1 << b), dtype=complex)
    for weight, s in zip(p, states):
        mat += weight * np.outer(s.amps, s.amps.conj())
    return DensityMatrix(b, mat)


def posterior_density(rho: DensityMatrix, q):
    """Post-measurement ensemble (Q rho Q / Tr(Q rho), Tr(Q rho))."""
    proj = linalg.require_hermitian(linalg.as_complex_matrix(q), DERIVED_TOL)
    if proj.shape[0] != rho.dim:
        raise DomainError("projector dimension does not match state")
    if np.max(np.abs(proj @ proj - proj)) > DERIVED_TOL:
        raise ValidationError("q is not a projector (q^2 != q)")
    prob = float(np.real(np.trace(proj @ rho.mat)))
    if prob < 1e-14:
        raise ConditioningError(f"conditioning on outcome of probability {prob:.3e}")
    post = proj @ rho.mat @ proj / prob
    post = 0.5 * (post + post.conj().T)  # kill rounding asymmetry
    return DensityMatrix(rho.qubits, post), prob


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum lambda_i log2 lambda_i, in bits."""
    eigvals, _ = linalg.jacobi_eigh(rho.mat)
    s = 0.0
    for lam in eigvals:
        if lam > ENTROPY_CLAMP:
            s -= lam * math.log(lam)
    s /= math.log(2.0)
    return min(max(s, 0.0), float(rho.qubits))


# ---------------------------------------------------------------------------
# comparisons and random instances


def fidelity(a: StateVector, c: StateVector) -> float:
    """|<a|c>|; global phase is irrelevant by construction."""
    if a.qubits != c.qubits:
        raise DomainError("fidelity needs states of equal qubit count")
    return float(abs(np.vdot(a.amps, c.amps)))


def states_equal(a: StateVector, c: StateVector, tol: float = NORM_TOL) -> bool:
    """Equality up to global phase: |<a|c>| >= 1 - tol."""
    return fidelity(a, c) >= 1.0 - tol


def random_state(b: int, rng: Stream) -> StateVector:
    """Haar-ish random pure state: complex Gaussian amplitudes, normalized."""
    b = _check_qubit_count(b)
    amps = np.array(
        [complex(rng.normal(), rng.normal()) for _ in range(1 << b)], dtype=complex
    )
    return StateVector(b, amps / np.linalg.norm(amps), _trusted=True)


def random_density(b: int, rng: Stream) -> DensityMatrix:
    """Random density matrix: A A-dagger normalized to unit trace."""
    b = _check_qubit_count(b)
    dim = 1 << b
    a = np.array(
        [[complex(rng.normal(), rng.normal()) for _ in range(dim)] for _ in range(dim)]
    )
    m = a @ a.conj().T
    m /= np.trace(m).real
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(b, m, _trusted=True)


# ---------------------------------------------------------------------------
# serialization


def state_to_json(s: StateVector) -> str:
    """JSON dump: {"qubits": b, "amps": [[re, im], ...]} in index order."""
    pairs = [[float(z.real), float(z.imag)] for z in s.amps]
    return json.dumps({"qubits": s.qubits, "amps": pairs})


def state_from_json(text: str) -> StateVector:
    data = json.loads(text)
    amps = np.array([complex(re, im) for re, im in data["amps"]], dtype=complex)
    return StateVector(int(data["qubits"]), amps)

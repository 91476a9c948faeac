"""Dense complex linear algebra: Hermitian eigensolver and structural checks.

The eigensolver is a cyclic Jacobi iteration for complex Hermitian
matrices: each sweep annihilates every off-diagonal element with a
phase-adjusted Givens rotation, repeated until the off-diagonal
Frobenius norm falls below threshold. Dimensions in this package are
small (observables and local Hamiltonian terms), where Jacobi is simple,
accurate, and produces orthonormal eigenvectors to near machine precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InternalError, ValidationError

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
JACOBI_THRESHOLD = 1e-12
_MAX_SWEEPS = 60


def as_complex_matrix(mat) -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValidationError("matrix contains non-finite entries")
    return m


def is_unitary(mat: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(mat, dtype=complex)
    eye = np.eye(m.shape[0])
    return bool(np.max(np.abs(m.conj().T @ m - eye)) < tol)


def require_unitary(mat, tol: float = UNITARY_TOL) -> np.ndarray:
    m = as_complex_matrix(mat)
    dev = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
    if dev >= tol:
        raise ValidationError(f"matrix is not unitary: max |U†U - I| = {dev:.3e}")
    return m


def is_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(mat, dtype=complex)
    return bool(np.max(np.abs(m - m.conj().T)) < tol)


def require_hermitian(mat, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_complex_matrix(mat)
    dev = float(np.max(np.abs(m - m.conj().T)))
    if dev >= tol:
        raise ValidationError(f"matrix is not Hermitian: max |A - A†| = {dev:.3e}")
    return m


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence, left factor most significant."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _offdiag_frobenius(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(mat, threshold: float = JACOBI_THRESHOLD):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    Returns (eigenvalues, eigenvectors) with eigenvalues ascending and
    eigenvectors as the corresponding columns. Convergence criterion is an
    off-diagonal Frobenius norm below `threshold` (scaled by the matrix
    norm for matrices far from unit scale).
    """
    a = require_hermitian(mat)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real]), np.eye(1, dtype=complex)

    a = a.copy()
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(a) ** 2))))
    tol = threshold * scale

    for _ in range(_MAX_SWEEPS):
        if _offdiag_frobenius(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol / (n * n):
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                # Phase that makes the pivot real, then a real rotation angle:
                # R has columns (c, -s; conj(s)/|s| pattern) chosen so that
                # R† A R zeroes the (p, q) element.
                phase = apq / abs(apq)
                theta = 0.5 * math.atan2(2.0 * abs(apq), app - aqq)
                c = math.cos(theta)
                s = math.sin(theta) * phase
                # Rows transform by R†, columns (and eigenvectors) by R.
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp + s * rq
                a[q, :] = -np.conj(s) * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp + np.conj(s) * cq
                a[:, q] = -s * cp + c * cq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + np.conj(s) * vq
                v[:, q] = -s * vp + c * vq
    else:
        raise InternalError(
            f"Jacobi eigensolver did not converge in {_MAX_SWEEPS} sweeps "
            f"(off-diagonal norm {_offdiag_frobenius(a):.3e})"
        )

    eigvals = np.diag(a).real.copy()
    order = np.argsort(eigvals, kind="stable")
    return eigvals[order], v[:, order]


def hermitian_function(mat, fn) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    vals, vecs = jacobi_eigh(mat)
    fvals = np.array([fn(x) for x in vals], dtype=complex)
    return (vecs * fvals) @ vecs.conj().T


def expm_hermitian(mat, factor: complex) -> np.ndarray:
    """exp(factor * mat) for Hermitian mat, via eigendecomposition."""
    return hermitian_function(mat, lambda x: np.exp(factor * x))

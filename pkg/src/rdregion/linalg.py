"""Dense symmetric-matrix utilities.

Everything operates on plain numpy arrays. Eigendecompositions use cyclic
Jacobi sweeps: the matrices in this package stay small, and deterministic,
platform-independent output matters more than speed. Determinants and
log-determinants of symmetric matrices are derived from the eigenvalues so
they stay consistent with the Loewner-order tests built on the same spectra.

Parameters
----------
Matrices are float ndarrays of shape (n, n). Symmetry is enforced on entry:
``as_symmetric`` rejects inputs whose asymmetry exceeds a small relative
tolerance and returns an exactly symmetric copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DimMismatch, InvalidMatrix, SingularInput

__all__ = [
    "Spectrum",
    "as_symmetric",
    "eig_sym",
    "det_sym",
    "logdet_sym",
    "inv_sym",
    "min_eig",
    "loewner_leq",
    "householder_to_axis",
]

# Jacobi stops once the off-diagonal Frobenius mass is this small relative
# to the norm of the input.
_JACOBI_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : ndarray
        Ascending eigenvalues, shape (n,).
    basis : ndarray
        Orthonormal eigenvectors as columns, aligned with ``eigenvalues``.
        The first nonzero component of each column is positive, which makes
        the decomposition deterministic up to eigenvalue ties.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.T


def as_symmetric(m, rel_tol: float = 1e-8) -> np.ndarray:
    """Validate a symmetric matrix and return an exactly symmetric copy."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    gap = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if gap > rel_tol * scale:
        raise InvalidMatrix(f"matrix is not symmetric (max asymmetry {gap:.3e})")
    return 0.5 * (a + a.T)


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Cyclic sweeps over (p, q); each rotation zeroes one off-diagonal pair.
    n = a.shape[0]
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    if n == 1 or norm == 0.0:
        return np.diag(a).copy(), v
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= _JACOBI_TOL * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise InvalidMatrix("Jacobi iteration failed to converge")
    return np.diag(a).copy(), v


def eig_sym(m) -> Spectrum:
    """Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations."""
    a = as_symmetric(m)
    w, v = _jacobi(a)
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    # Deterministic sign: first non-negligible component of each column > 0.
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        lead = nz[0] if nz.size else 0
        if col[lead] < 0.0:
            v[:, j] = -col
    return Spectrum(eigenvalues=w, basis=v)


def det_sym(m) -> float:
    """Determinant of a symmetric matrix as the product of its eigenvalues."""
    return float(np.prod(eig_sym(m).eigenvalues))


def logdet_sym(m) -> float:
    """Log-determinant of a symmetric positive definite matrix."""
    w = eig_sym(m).eigenvalues
    if w[0] <= 0.0:
        raise SingularInput(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return float(np.sum(np.log(w)))


def inv_sym(m) -> np.ndarray:
    """Inverse of a symmetric matrix through its eigendecomposition."""
    spec = eig_sym(m)
    w = spec.eigenvalues
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale == 0.0 or np.min(np.abs(w)) <= 1e-14 * scale:
        raise SingularInput("matrix is singular or numerically singular")
    inv = (spec.basis / w) @ spec.basis.T
    return 0.5 * (inv + inv.T)


def min_eig(m) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(eig_sym(m).eigenvalues[0])


def loewner_leq(a, b, tol: float | None = None) -> bool:
    """Test a <= b in the Loewner (positive semidefinite) order.

    True iff the smallest eigenvalue of ``b - a`` is >= -tol. The default
    tolerance is 1e-9 scaled by max(1, max-abs entry of b - a).
    """
    a = as_symmetric(a)
    b = as_symmetric(b)
    if a.shape != b.shape:
        raise DimMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    diff = b - a
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.max(np.abs(diff))) if diff.size else 0.0)
    return min_eig(diff) >= -tol


def householder_to_axis(v, k: int) -> np.ndarray:
    """Orthogonal matrix T with (v @ T) = ||v|| e_k (zero-based axis k).

    The returned matrix is the canonical Householder reflection; T.T @ T is
    the identity to machine precision.
    """
    vec = np.asarray(v, dtype=float).ravel()
    n = vec.shape[0]
    if not 0 <= k < n:
        raise DegenerateInput(f"axis {k} out of range for length {n}")
    nrm = float(np.linalg.norm(vec))
    if not np.isfinite(nrm) or nrm <= 0.0:
        raise DegenerateInput("cannot aim a zero or non-finite vector at an axis")
    u = vec.copy()
    u[k] -= nrm
    uu = float(u @ u)
    if uu <= (1e-15 * nrm) ** 2:
        return np.eye(n)
    h = np.eye(n) - (2.0 / uu) * np.outer(u, u)
    return h

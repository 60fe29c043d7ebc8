"""Dense linear algebra kernels: SVD, spectral partitions, eigenbases,
pseudo-inverses, projectors, and norms.

Matrices are plain 2-d float64 numpy arrays throughout (row-major). All
factorizations apply a deterministic sign convention so repeated runs on
identical input produce identical factors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# numpy 2-d float64 array; validated by as_matrix
DenseMatrix = np.ndarray

# Frobenius tolerance on Q^T Q - I for "orthonormal input"
ORTHONORMAL_TOL = 1e-8
# asymmetry gate relative to ||G||_F before symmetric eigendecomposition
SYMMETRY_TOL = 1e-10
# relative cutoff for treating singular values as zero
PINV_RTOL = 1e-12


class SvdConvergenceError(RuntimeError):
    """Iterative SVD failed to converge; carries the input's shape and norm."""

    def __init__(self, shape, fro_norm):
        self.shape = shape
        self.fro_norm = fro_norm
        super().__init__(
            f"SVD did not converge for {shape[0]}x{shape[1]} input "
            f"(frobenius norm {fro_norm:.6e})"
        )


def as_matrix(M, name: str = "M") -> DenseMatrix:
    """Validate and return a 2-d float64 array with finite entries."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Economy SVD M = U @ diag(sigma) @ V.T.

    For an n x m input with k = min(n, m): U is n x k with orthonormal
    columns, sigma is length k and nonincreasing, V is m x k.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank_numerical(self) -> int:
        """Count of singular values above the relative zero cutoff."""
        if self.sigma.size == 0 or self.sigma[0] == 0.0:
            return 0
        return int(np.sum(self.sigma > PINV_RTOL * self.sigma[0]))

    def reconstruct(self) -> DenseMatrix:
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True)
class SvdPartition:
    """SVD factors split at index r into a head block and a tail block."""

    r: int
    U1: np.ndarray
    U2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray


def _apply_sign_convention(U: np.ndarray, V: np.ndarray | None = None) -> None:
    """Flip column signs in place so each column of U has its largest-magnitude
    entry positive (ties resolved at the lowest index). V columns co-flip to
    preserve the product U @ diag(s) @ V.T."""
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
            if V is not None:
                V[:, j] = -V[:, j]


def svd(M) -> SvdFactors:
    """Economy SVD with the deterministic sign convention applied."""
    A = as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        import scipy.linalg

        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False,
                                        lapack_driver="gesvd")
        except scipy.linalg.LinAlgError:
            raise SvdConvergenceError(A.shape, float(np.linalg.norm(A))) from None
    V = Vt.T.copy()
    U = U.copy()
    _apply_sign_convention(U, V)
    return SvdFactors(U=U, sigma=s, V=V)


def partition_svd(f: SvdFactors, r: int) -> SvdPartition:
    """Split factors into the top-r head and the remaining tail."""
    k = f.sigma.shape[0]
    if not 1 <= r <= k:
        raise ValueError(f"r must be in [1, {k}], got {r}")
    return SvdPartition(
        r=r,
        U1=f.U[:, :r], U2=f.U[:, r:],
        sigma1=f.sigma[:r], sigma2=f.sigma[r:],
        V1=f.V[:, :r], V2=f.V[:, r:],
    )


def eigh_descending(G) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues nonincreasing.

    The input is symmetrized as (G + G.T)/2 after an asymmetry gate of
    SYMMETRY_TOL * ||G||_F on the largest entry of G - G.T.
    """
    A = as_matrix(G, "G")
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"G must be square, got shape {A.shape}")
    fro = float(np.linalg.norm(A))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > SYMMETRY_TOL * fro:
        raise ValueError(
            f"G is not symmetric: max|G - G^T| = {asym:.3e} "
            f"exceeds {SYMMETRY_TOL:.0e} * ||G||_F"
        )
    w, V = np.linalg.eigh((A + A.T) / 2.0)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    _apply_sign_convention(V)
    return w, V


def top_r_eigvecs(G, r: int) -> np.ndarray:
    """Orthonormal eigenvectors of symmetric G for its r largest eigenvalues."""
    A = as_matrix(G, "G")
    if not 1 <= r <= A.shape[0]:
        raise ValueError(f"r must be in [1, {A.shape[0]}], got {r}")
    _, V = eigh_descending(A)
    return V[:, :r]


def pseudo_inverse(M, tol: float = PINV_RTOL) -> DenseMatrix:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values at or below tol * sigma_max are treated as zero.
    """
    f = svd(M)
    if f.sigma.size == 0 or f.sigma[0] == 0.0:
        return np.zeros((f.V.shape[0], f.U.shape[0]))
    cutoff = tol * f.sigma[0]
    inv = np.zeros_like(f.sigma)
    keep = f.sigma > cutoff
    inv[keep] = 1.0 / f.sigma[keep]
    return (f.V * inv) @ f.U.T


def projector(Q) -> DenseMatrix:
    """Orthogonal projector Q @ Q.T onto the column span of an orthonormal Q."""
    A = np.asarray(Q, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"Q must be 2-d, got ndim={A.ndim}")
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], A.shape[0]))
    gram_err = float(np.linalg.norm(A.T @ A - np.eye(A.shape[1])))
    if gram_err > ORTHONORMAL_TOL:
        raise ValueError(
            f"Q does not have orthonormal columns: ||Q^T Q - I||_F = {gram_err:.3e}"
        )
    return A @ A.T


def spectral_norm(M) -> float:
    """Largest singular value."""
    A = as_matrix(M)
    return float(np.linalg.svd(A, compute_uv=False)[0])


def frobenius_norm(M) -> float:
    A = as_matrix(M)
    return float(np.linalg.norm(A))

"""Subspace coherence measures, regularized numerical rank, and the
largest principal angle between subspaces.

Coherence of an orthonormal basis Q with N rows and r columns is
max_i (N/r) * ||Q[i, :]||^2, which lies in [1, N/r]. The combined measure
for a matrix takes the worse of its top-r left and right singular bases.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ORTHONORMAL_TOL,
    PINV_RTOL,
    as_matrix,
    partition_svd,
    svd,
)


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence value with the row indices attaining it.

    arg_row indexes the left basis scan; arg_col indexes the right basis
    scan and is None for single-basis reports.
    """

    mu: float
    arg_row: int
    arg_col: int | None
    r_used: int

    def to_dict(self) -> dict:
        return {"mu": self.mu, "arg_row": self.arg_row,
                "arg_col": self.arg_col, "r": self.r_used}


@dataclass(frozen=True)
class NumericalRankReport:
    """Regularized rank sum_i sigma_i^2 / (sigma_i^2 + m*n*lam) with the
    shifted spectrum and the matching coherence measure."""

    lam: float
    value: float
    mu_lambda: float
    s_diag: np.ndarray  # sigma_i^2 + m*n*lam


def _check_orthonormal(Q, name: str) -> np.ndarray:
    A = np.asarray(Q, dtype=np.float64)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError(f"{name} must be 2-d with at least one column")
    if A.shape[0] < A.shape[1]:
        raise ValueError(f"{name} has more columns than rows: {A.shape}")
    err = float(np.linalg.norm(A.T @ A - np.eye(A.shape[1])))
    if err > ORTHONORMAL_TOL:
        raise ValueError(
            f"{name} does not have orthonormal columns: "
            f"||Q^T Q - I||_F = {err:.3e}"
        )
    return A


def _leverage(Q: np.ndarray) -> np.ndarray:
    return np.sum(Q * Q, axis=1)


def basis_incoherence(Q) -> CoherenceReport:
    """Coherence of one orthonormal basis."""
    A = _check_orthonormal(Q, "Q")
    N, r = A.shape
    lev = _leverage(A)
    arg = int(np.argmax(lev))
    mu = float(N / r * lev[arg])
    _assert_mu_range(mu, N, r)
    return CoherenceReport(mu=mu, arg_row=arg, arg_col=None, r_used=r)


def _assert_mu_range(mu: float, N: int, r: int) -> None:
    if not (1.0 - 1e-9 <= mu <= N / r * (1.0 + 1e-9)):
        raise AssertionError(f"coherence {mu} outside [1, {N}/{r}]")


def _combine(Qu, Qv, r: int) -> CoherenceReport:
    rep_u = basis_incoherence(Qu)
    rep_v = basis_incoherence(Qv)
    return CoherenceReport(mu=max(rep_u.mu, rep_v.mu), arg_row=rep_u.arg_row,
                           arg_col=rep_v.arg_row, r_used=r)


def mu_r(M, r: int) -> CoherenceReport:
    """Coherence of the top-r singular bases of M."""
    A = as_matrix(M)
    part = partition_svd(svd(A), r)
    return _combine(part.U1, part.V1, r)


def mu_hat(U_hat, V_hat) -> CoherenceReport:
    """Coherence of an estimated basis pair."""
    Qu = _check_orthonormal(U_hat, "U_hat")
    Qv = _check_orthonormal(V_hat, "V_hat")
    if Qu.shape[1] != Qv.shape[1]:
        raise ValueError("U_hat and V_hat must have the same column count")
    return _combine(Qu, Qv, Qu.shape[1])


def _weights(sigma: np.ndarray, n: int, m: int, lam: float):
    """Per-direction weights sigma_i / sqrt(sigma_i^2 + m*n*lam) and the
    rank contributions sigma_i^2 / (sigma_i^2 + m*n*lam).

    At lam = 0 directions with sigma at or below the relative zero cutoff
    carry zero weight, so rank-deficient inputs stay well defined.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    s_diag = sigma**2 + m * n * lam
    if lam == 0.0:
        cut = PINV_RTOL * sigma[0] if sigma.size and sigma[0] > 0 else 0.0
        live = sigma > cut
        w = np.where(live, 1.0, 0.0)
        contrib = w.copy()
    else:
        w = sigma / np.sqrt(s_diag)
        contrib = sigma**2 / s_diag
    return w, contrib, s_diag


def numerical_rank(M, lam: float) -> NumericalRankReport:
    """Regularized numerical rank of M at regularization lam."""
    A = as_matrix(M)
    n, m = A.shape
    f = svd(A)
    w, contrib, s_diag = _weights(f.sigma, n, m, lam)
    value = float(np.sum(contrib))
    if value <= 0.0:
        raise ValueError("numerical rank is zero; M has no usable spectrum")
    mul = _mu_lambda_from(f.U, f.V, w, value, n, m)
    return NumericalRankReport(lam=lam, value=value, mu_lambda=mul, s_diag=s_diag)


def _mu_lambda_from(U, V, w, rank_value: float, n: int, m: int) -> float:
    lev_u = _leverage(U * w)
    lev_v = _leverage(V * w)
    mu = max(n / rank_value * float(np.max(lev_u)),
             m / rank_value * float(np.max(lev_v)))
    if mu < 1.0 - 1e-9:
        raise AssertionError(f"weighted coherence {mu} below 1")
    return mu


def mu_lambda(M, lam: float) -> float:
    """Weighted coherence of M's singular bases under regularization lam.

    Left rows scale by n / r(M, lam), right rows by m / r(M, lam), matching
    the unweighted coherence convention; at lam = 0 with full-rank bases it
    reduces to the top-r coherence.
    """
    return numerical_rank(M, lam).mu_lambda


def sin_theta(Q1, Q2) -> float:
    """Sine of the largest principal angle between two subspaces of equal
    dimension, computed from the smallest singular value of Q2^T Q1."""
    A = _check_orthonormal(Q1, "Q1")
    B = _check_orthonormal(Q2, "Q2")
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    cos = np.linalg.svd(B.T @ A, compute_uv=False)
    c = float(np.clip(np.min(cos), 0.0, 1.0))
    return float(np.sqrt(max(0.0, 1.0 - c * c)))

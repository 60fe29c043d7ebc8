"""Sample-size calculators and empirical checkers for the error and
concentration inequalities behind the recovery pipeline.

Every checker returns a BoundReport holding both sides of its inequality,
a holds flag with a fixed relative slack, and a premises_met flag recorded
independently, so Monte-Carlo harnesses can separate "premise not met"
from "bound violated". Natural logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coherence import mu_hat, mu_r, numerical_rank, sin_theta
from .linalg import (
    PINV_RTOL,
    as_matrix,
    eigh_descending,
    partition_svd,
    pseudo_inverse,
    spectral_norm,
    svd,
)
from .recovery import Bases, DesignSystem, assemble_design, strong_convexity_gamma
from .sampling import IndexSet, RngStream, sample_columns, sample_entries

HOLDS_SLACK = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """One inequality check: computed side, bound side, and flags.

    sense "le" checks lhs <= rhs, sense "ge" checks lhs >= rhs, both with
    the same relative slack on the bound side.
    """

    name: str
    lhs: float
    rhs: float
    holds: bool
    premises_met: bool
    params: dict = field(default_factory=dict)
    sense: str = "le"

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "sense": self.sense, "holds": self.holds,
                "premises_met": self.premises_met, "params": self.params}


def make_report(name: str, lhs: float, rhs: float, premises_met: bool,
                params: dict | None = None, sense: str = "le") -> BoundReport:
    slack = HOLDS_SLACK * max(1.0, abs(rhs))
    if sense == "le":
        holds = lhs <= rhs + slack
    elif sense == "ge":
        holds = lhs >= rhs - slack
    else:
        raise ValueError(f"unknown sense {sense!r}")
    return BoundReport(name=name, lhs=float(lhs), rhs=float(rhs),
                       holds=bool(holds), premises_met=bool(premises_met),
                       params=dict(params or {}), sense=sense)


# ---------------------------------------------------------------------------
# sample-size calculators


def sample_size_low_rank(mu: float, r: int, t: float) -> tuple[int, int]:
    """Column/row budget and entry budget sufficient for exact recovery of
    a rank-r matrix with coherence mu at confidence parameter t."""
    if mu < 1.0 or r < 1 or t <= 0:
        raise ValueError("need mu >= 1, r >= 1, t > 0")
    d_min = math.ceil(7.0 * mu * r * (t + math.log(r)))
    omega_min = math.ceil(7.0 * mu**2 * r**2 * (t + 2.0 * math.log(r)))
    return d_min, omega_min


def sample_size_full_rank(mu_l: float, r_num: float, t: float, n: int,
                          d: int, r: int) -> tuple[int, int]:
    """Budgets for numerically low-rank inputs, driven by the weighted
    coherence mu_l and the regularized rank r_num; the entry budget depends
    on the column budget d actually used."""
    if min(mu_l, r_num, t, n, d, r) <= 0:
        raise ValueError("all arguments must be positive")
    core = mu_l * r_num
    d_min = math.ceil(16.0 * (core + 1.0) * (t + math.log(n)))
    inner = 2.0 * core + 72.0 * (n / d) * (core + 1.0) * (t + math.log(n))
    omega_min = math.ceil(7.0 * inner**2 * (t + 2.0 * math.log(r)))
    return d_min, omega_min


def optimal_d(n: int) -> int:
    """Column budget balancing d*n against n^2/d^2, to the nearest integer."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return max(1, int(round(float(np.cbrt(n)))))


def total_observations(n: int, d: int) -> float:
    """Asymptotic observation count d*n + n^2/d^2 for square matrices."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    return float(d) * n + float(n) ** 2 / float(d) ** 2


# ---------------------------------------------------------------------------
# projection-error family


def _sigma_tail(M: np.ndarray, r: int) -> float:
    sig = svd(M).sigma
    return float(sig[r]) if r < sig.size else 0.0


def check_projection(M, V_hat, U_hat, r: int, d: int, t: float = 3.0):
    """Spectral projection errors of both estimated bases against the
    sigma_{r+1}-scaled budgets (1 + 2m/d) and (1 + 2n/d).

    Returns (column-side report, row-side report).
    """
    A = as_matrix(M)
    n, m = A.shape
    s_tail = _sigma_tail(A, r)
    mu = mu_r(A, r).mu
    d_gate, _ = sample_size_low_rank(mu, r, t)
    premises = d >= d_gate
    params = {"n": n, "m": m, "r": r, "d": d, "t": t, "mu_r": mu,
              "d_gate": d_gate, "sigma_r_plus_1": s_tail}
    lhs_v = spectral_norm(A - (A @ V_hat) @ V_hat.T) ** 2
    rhs_v = s_tail**2 * (1.0 + 2.0 * m / d)
    lhs_u = spectral_norm(A - U_hat @ (U_hat.T @ A)) ** 2
    rhs_u = s_tail**2 * (1.0 + 2.0 * n / d)
    return (make_report("projection_error_cols", lhs_v, rhs_v, premises, params),
            make_report("projection_error_rows", lhs_u, rhs_u, premises, params))


def check_delta(M, bases: Bases, r: int, d: int, t: float = 3.0,
                full_rank: bool = False) -> BoundReport:
    """Two-sided projection error Delta = ||M - P_U M P_V||_2^2 against
    4 sigma_{r+1}^2 (1 + (m+n)/d).

    The low-rank gate requires d >= 7 mu(r) r (t + ln r); with full_rank
    the gate is d >= 14 mu(lam) r(M, lam) (t + ln r) at lam = sigma_r^2/mn.
    """
    A = as_matrix(M)
    n, m = A.shape
    sig = svd(A).sigma
    s_tail = float(sig[r]) if r < sig.size else 0.0
    params = {"n": n, "m": m, "r": r, "d": d, "t": t,
              "sigma_r_plus_1": s_tail, "full_rank": full_rank}
    if full_rank:
        lam = float(sig[r - 1]) ** 2 / (m * n)
        rep = numerical_rank(A, lam)
        d_gate = math.ceil(14.0 * rep.mu_lambda * rep.value * (t + math.log(r)))
        params.update({"lam": lam, "mu_lambda": rep.mu_lambda,
                       "numerical_rank": rep.value, "d_gate": d_gate})
    else:
        mu = mu_r(A, r).mu
        d_gate, _ = sample_size_low_rank(mu, r, t)
        params.update({"mu_r": mu, "d_gate": d_gate})
    proj = A - bases.U_hat @ (bases.U_hat.T @ A @ bases.V_hat) @ bases.V_hat.T
    lhs = spectral_norm(proj) ** 2
    rhs = 4.0 * s_tail**2 * (1.0 + (m + n) / d)
    return make_report("delta_bound", lhs, rhs, d >= d_gate, params)


def check_delta_triangle(M, bases: Bases) -> BoundReport:
    """Proof-step identity: Delta never exceeds twice the sum of the
    one-sided projection errors. Holds unconditionally."""
    A = as_matrix(M)
    U, V = bases.U_hat, bases.V_hat
    delta = spectral_norm(A - U @ (U.T @ A @ V) @ V.T) ** 2
    side_v = spectral_norm(A - (A @ V) @ V.T) ** 2
    side_u = spectral_norm(A - U @ (U.T @ A)) ** 2
    return make_report("delta_triangle", delta, 2.0 * side_v + 2.0 * side_u,
                       True, {"side_cols": side_v, "side_rows": side_u})


def check_combine(M, M_hat, delta: float, gamma: float) -> BoundReport:
    """Recovery error against 2(Delta + Delta/gamma), with gamma the
    grid-normalized strong convexity mn*lambda_min(K^T K)/|Omega|.

    Premise: gamma >= 1/2.
    """
    A = as_matrix(M)
    lhs = spectral_norm(A - as_matrix(M_hat, "M_hat")) ** 2
    if gamma <= 0:
        return make_report("error_combine", lhs, float("inf"), False,
                           {"delta": delta, "gamma": gamma})
    rhs = 2.0 * (delta + delta / gamma)
    return make_report("error_combine", lhs, rhs, gamma >= 0.5,
                       {"delta": delta, "gamma": gamma})


# ---------------------------------------------------------------------------
# column-selection family


def _selection_blocks(M: np.ndarray, col_idx: IndexSet, r: int):
    """V1^T S and V2^T S for the canonical selection S of the given columns."""
    part = partition_svd(svd(M), r)
    idx = np.asarray(col_idx.indices)
    omega1 = part.V1[idx, :].T
    omega2 = part.V2[idx, :].T
    return part, omega1, omega2


def check_halko(M, col_idx: IndexSet, r: int) -> BoundReport:
    """Deterministic column-space capture bound: the squared spectral error
    of projecting M onto its selected columns is at most
    ||Sigma2||^2 + ||Sigma2 Omega2 pinv(Omega1)||^2.

    Premise: Omega1 has full row rank.
    """
    A = as_matrix(M)
    n, m = A.shape
    if col_idx.bound != m:
        raise ValueError(f"selection bound {col_idx.bound} does not match m={m}")
    part, omega1, omega2 = _selection_blocks(A, col_idx, r)
    d = len(col_idx.indices)
    sv1 = np.linalg.svd(omega1, compute_uv=False) if omega1.size else np.array([])
    full_rank = sv1.size == r and float(sv1[-1]) > PINV_RTOL * max(float(sv1[0]), 1.0)
    Y = A[:, np.asarray(col_idx.indices)]
    fy = svd(Y)
    keep = fy.sigma > PINV_RTOL * (fy.sigma[0] if fy.sigma[0] > 0 else 1.0)
    Q = fy.U[:, keep]
    lhs = spectral_norm(A - Q @ (Q.T @ A)) ** 2
    tail_norm = float(part.sigma2[0]) if part.sigma2.size else 0.0
    if part.sigma2.size and omega1.size:
        cross = (part.sigma2[:, None] * omega2) @ pseudo_inverse(omega1)
        cross_norm = spectral_norm(cross) if cross.size else 0.0
    else:
        cross_norm = 0.0
    rhs = tail_norm**2 + cross_norm**2
    params = {"r": r, "d": d, "sigma_min_omega1": float(sv1[-1]) if sv1.size else 0.0}
    return make_report("column_space_capture", lhs, rhs, full_rank, params)


def check_omega1_spectrum(M, col_idx: IndexSet, r: int, d: int) -> BoundReport:
    """Lower spectral bound on the selected right-basis rows:
    lambda_min(Omega1 Omega1^T) >= d/(2m)."""
    A = as_matrix(M)
    m = A.shape[1]
    _, omega1, _ = _selection_blocks(A, col_idx, r)
    gram = omega1 @ omega1.T
    lhs = float(np.linalg.eigvalsh(gram)[0]) if gram.size else 0.0
    mu = mu_r(A, r).mu
    fail_prob = r * math.exp(-d / (7.0 * mu * r))
    params = {"r": r, "d": d, "m": m, "mu_r": mu, "fail_prob": fail_prob}
    return make_report("selection_spectrum", lhs, d / (2.0 * m), True,
                       params, sense="ge")


def mean_selection_gram(M, r: int, d: int, trials: int,
                        stream: RngStream) -> np.ndarray:
    """Monte-Carlo mean of Omega1 Omega1^T over repeated column draws;
    converges to (d/m) I_r."""
    A = as_matrix(M)
    part = partition_svd(svd(A), r)
    acc = np.zeros((r, r))
    for k in range(trials):
        idx, _ = sample_columns(A, d, stream.derive(k))
        omega1 = part.V1[np.asarray(idx.indices), :].T
        acc += omega1 @ omega1.T
    return acc / trials


# ---------------------------------------------------------------------------
# strong convexity of the core fit


def check_strong_convexity(system: DesignSystem, n: int, m: int,
                           bases: Bases | None = None,
                           t: float = 3.0) -> BoundReport:
    """lambda_min(K^T K) >= |Omega|/(2mn), gated by the entry budget
    |Omega| >= 7 mu_hat^2 r^2 (t + 2 ln r) when bases are supplied."""
    size = len(system.y)
    lhs = strong_convexity_gamma(system)
    rhs = size / (2.0 * m * n)
    params = {"omega_size": size, "n": n, "m": m, "r": system.r, "t": t}
    if bases is None:
        premises = False
        params["omega_gate"] = None
    else:
        muh = mu_hat(bases.U_hat, bases.V_hat).mu
        gate = math.ceil(7.0 * muh**2 * system.r**2
                         * (t + 2.0 * math.log(system.r)))
        premises = size >= gate
        params.update({"mu_hat": muh, "omega_gate": gate})
    return make_report("strong_convexity", lhs, rhs, premises, params, sense="ge")


def mean_design_gram(bases: Bases, M, s: int, trials: int,
                     stream: RngStream) -> np.ndarray:
    """Monte-Carlo mean of K^T K over repeated entry draws; converges to
    (|Omega|/mn) I_{r^2} for orthonormal bases."""
    A = as_matrix(M)
    r2 = bases.r**2
    acc = np.zeros((r2, r2))
    for k in range(trials):
        omega = sample_entries(A, s, stream.derive(k))
        system = assemble_design(bases, omega)
        acc += system.K.T @ system.K
    return acc / trials


# ---------------------------------------------------------------------------
# regularized Gram sandwich and its consequences


@dataclass(frozen=True)
class HPair:
    """Regularized Gram matrix and its column- or row-sampled counterpart."""

    H: np.ndarray
    H_hat: np.ndarray
    side: str  # "A" (left, n x n) or "B" (right, m x m)
    lam: float
    d: int
    n: int
    m: int
    mu_lambda: float
    rank_value: float


def build_h_pair(M, sample, side: str, lam: float) -> HPair:
    """H = lam*I + Gram(M)/(mn) and H_hat = lam*I + Gram(sample)/(d * dim),
    where side "A" uses M M^T with column samples A (n x d) and side "B"
    uses M^T M with transposed row samples B (m x d)."""
    A = as_matrix(M)
    S = as_matrix(sample, "sample")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    n, m = A.shape
    d = S.shape[1]
    if side == "A":
        if S.shape[0] != n:
            raise ValueError(f"side A sample must have {n} rows, got {S.shape[0]}")
        H = lam * np.eye(n) + A @ A.T / (m * n)
        H_hat = lam * np.eye(n) + S @ S.T / (d * n)
    elif side == "B":
        if S.shape[0] != m:
            raise ValueError(f"side B sample must have {m} rows, got {S.shape[0]}")
        H = lam * np.eye(m) + A.T @ A / (m * n)
        H_hat = lam * np.eye(m) + S @ S.T / (d * m)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    rep = numerical_rank(A, lam)
    return HPair(H=H, H_hat=H_hat, side=side, lam=lam, d=d, n=n, m=m,
                 mu_lambda=rep.mu_lambda, rank_value=rep.value)


def check_h_sandwich(pair: HPair, delta_target: float,
                     t: float = 3.0) -> BoundReport:
    """All eigenvalues of H^{-1/2} H_hat H^{-1/2} must sit in
    [1 - delta, 1 + delta]; reported as max |eig - 1| <= delta.

    Gate: d >= (4/delta^2)(mu(lam) r(M, lam) + 1)(t + ln n).
    """
    if not 0.0 < delta_target < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta_target}")
    w, Q = eigh_descending(pair.H)
    if w[-1] <= 0:
        raise ValueError("H is singular; lambda must be positive")
    H_inv_sqrt = (Q * (w**-0.5)) @ Q.T
    ratio = H_inv_sqrt @ pair.H_hat @ H_inv_sqrt
    eigs = np.linalg.eigvalsh((ratio + ratio.T) / 2.0)
    lhs = float(np.max(np.abs(eigs - 1.0)))
    d_gate = math.ceil(4.0 / delta_target**2
                       * (pair.mu_lambda * pair.rank_value + 1.0)
                       * (t + math.log(pair.n)))
    params = {"side": pair.side, "d": pair.d, "d_gate": d_gate, "t": t,
              "lam": pair.lam, "mu_lambda": pair.mu_lambda,
              "numerical_rank": pair.rank_value,
              "eig_min": float(eigs.min()), "eig_max": float(eigs.max())}
    return make_report("gram_sandwich", lhs, delta_target,
                       pair.d >= d_gate, params)


def check_mu_hat_bound(M, bases: Bases, r: int, lam: float, d: int,
                       t: float = 3.0) -> BoundReport:
    """Estimated-basis coherence against 2 r(M,lam)/r * mu(lam) + 18 n
    delta^2 / r with delta^2 = (4/d)(mu(lam) r(M,lam) + 1)(t + ln n).

    Gates: spectral gap sigma_r >= sqrt(2) sigma_{r+1} and
    d >= 16 (mu(lam) r(M,lam) + 1)(t + ln n), at lam = sigma_r^2/mn.
    """
    A = as_matrix(M)
    n, m = A.shape
    sig = svd(A).sigma
    s_r = float(sig[r - 1])
    s_next = float(sig[r]) if r < sig.size else 0.0
    rep = numerical_rank(A, lam)
    core = rep.mu_lambda * rep.value
    delta_sq = 4.0 / d * (core + 1.0) * (t + math.log(n))
    lhs = mu_hat(bases.U_hat, bases.V_hat).mu
    rhs = 2.0 * rep.value / r * rep.mu_lambda + 18.0 * n * delta_sq / r
    d_gate = math.ceil(16.0 * (core + 1.0) * (t + math.log(n)))
    lam_target = s_r**2 / (m * n)
    premises = (s_r >= math.sqrt(2.0) * s_next and d >= d_gate
                and abs(lam - lam_target) <= 1e-9 * max(lam_target, 1e-300))
    params = {"n": n, "m": m, "r": r, "d": d, "t": t, "lam": lam,
              "lam_target": lam_target, "mu_lambda": rep.mu_lambda,
              "numerical_rank": rep.value, "delta_sq": delta_sq,
              "d_gate": d_gate, "sigma_r": s_r, "sigma_r_plus_1": s_next}
    return make_report("basis_coherence", lhs, rhs, premises, params)


def check_sin_theta_perturbation(H, H_tilde, r: int) -> BoundReport:
    """Perturbation bound on the top-r eigenspace rotation between two
    symmetric matrices, in terms of the relative eigen-gap
    D_lam = min(sqrt(2)(1 - lam_{r+1}/lam_r), 1/sqrt(2)) and the relative
    perturbation D_H = eta/sqrt(1 - eta) with eta = ||H^{-1}|| ||H - Ht||.

    Gate: eta < 1 and D_lam >= D_H/2. The params record the specialized
    3*sqrt(2)*delta form computed from the symmetric ratio matrix.
    """
    A = as_matrix(H, "H")
    B = as_matrix(H_tilde, "H_tilde")
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError("H and H_tilde must be square with equal shape")
    if not 1 <= r < A.shape[0]:
        raise ValueError(f"r must be in [1, {A.shape[0] - 1}], got {r}")
    w, Q = eigh_descending(A)
    wt, Qt = eigh_descending(B)
    lhs = sin_theta(Q[:, :r], Qt[:, :r])
    abs_w = np.abs(w)
    if abs_w.min() == 0.0 or w[r - 1] <= 0.0:
        return make_report("subspace_perturbation", lhs, float("inf"), False,
                           {"reason": "H singular or top eigenvalue nonpositive"})
    d_lam = min(math.sqrt(2.0) * (1.0 - w[r] / w[r - 1]), 1.0 / math.sqrt(2.0))
    eta = float(1.0 / abs_w.min()) * spectral_norm(A - B)
    params = {"r": r, "eta": eta, "d_lambda": d_lam,
              "lam_r": float(w[r - 1]), "lam_r_plus_1": float(w[r])}
    if eta >= 1.0:
        return make_report("subspace_perturbation", lhs, float("inf"),
                           False, params)
    d_h = eta / math.sqrt(1.0 - eta)
    params["d_h"] = d_h
    premises = d_lam >= d_h / 2.0
    denom = d_lam - d_h / 2.0
    if denom <= 0.0:
        rhs = float("inf")
    else:
        rhs = d_h / denom * (1.0 + d_h * d_lam / 16.0)
    if w[-1] > 0:
        inv_sqrt = (Q * (w**-0.5)) @ Q.T
        ratio = inv_sqrt @ B @ inv_sqrt
        delta_ratio = spectral_norm(ratio - np.eye(A.shape[0]))
        params["ratio_delta"] = delta_ratio
        params["specialized_rhs"] = 3.0 * math.sqrt(2.0) * delta_ratio
        params["specialized_applicable"] = bool(
            delta_ratio <= 0.5 and w[r] / w[r - 1] <= 0.5
        )
    return make_report("subspace_perturbation", lhs, rhs, premises, params)


def check_full_rank_recovery(M, result, r: int, d: int,
                             run_params: dict) -> BoundReport:
    """End-to-end spectral recovery error against
    24 sigma_{r+1}^2 (1 + (m+n)/d).

    run_params must carry omega_size and may carry t (default 3). Premises:
    the spectral-gap and d gates, plus the entry budget capped at the grid
    size (the uncapped formula value is recorded in params).
    """
    A = as_matrix(M)
    n, m = A.shape
    omega_size = int(run_params["omega_size"])
    t = float(run_params.get("t", 3.0))
    sig = svd(A).sigma
    s_r = float(sig[r - 1])
    s_next = float(sig[r]) if r < sig.size else 0.0
    lam = s_r**2 / (m * n)
    rep = numerical_rank(A, lam)
    d_gate, omega_formula = sample_size_full_rank(rep.mu_lambda, rep.value,
                                                  t, n, d, r)
    omega_gate = min(omega_formula, n * m)
    lhs = spectral_norm(A - result.reconstruct()) ** 2
    rhs = 24.0 * s_next**2 * (1.0 + (m + n) / d)
    premises = (s_r >= math.sqrt(2.0) * s_next and d >= min(d_gate, m)
                and omega_size >= omega_gate)
    params = {"n": n, "m": m, "r": r, "d": d, "t": t, "lam": lam,
              "omega_size": omega_size, "mu_lambda": rep.mu_lambda,
              "numerical_rank": rep.value, "d_gate": d_gate,
              "omega_formula": omega_formula, "omega_gate": omega_gate,
              "sigma_r": s_r, "sigma_r_plus_1": s_next}
    return make_report("recovery_error", lhs, rhs, premises, params)

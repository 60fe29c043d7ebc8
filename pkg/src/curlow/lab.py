"""Seeded Monte-Carlo harness behind the CLI: generates instances,
resolves "auto" sample budgets from measured coherence, runs the
configured inequality checks over independent trials, and aggregates
holds-rates. Trials run in parallel keyed by trial index, so results are
independent of thread count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds
from .bounds import BoundReport
from .config import ExperimentConfig
from .coherence import mu_r, numerical_rank
from .linalg import frobenius_norm, spectral_norm, svd
from .recovery import (
    RecoveryInputs,
    assemble_design,
    build_bases,
    recover,
)
from .sampling import sample_columns, sample_entries, sample_rows
from .synth import generate


def thread_count() -> int:
    env = os.environ.get("CURLOW_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"CURLOW_THREADS must be an integer, got {env!r}")
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class Budget:
    """Resolved sample sizes for one instance, with the raw formula values
    kept for reporting (budgets are capped at the instance dimensions)."""

    d: int
    omega: int
    details: dict


def resolve_budgets(cfg: ExperimentConfig, M: np.ndarray,
                    sigma: np.ndarray) -> Budget:
    n, m = M.shape
    r = cfg.r
    details: dict = {}
    if cfg.kind == "exact-low-rank":
        mu = mu_r(M, r).mu
        d_formula, omega_formula = bounds.sample_size_low_rank(mu, r, cfg.t)
        details.update({"mu_r": mu, "regime": "low-rank"})
    else:
        lam = float(sigma[r - 1]) ** 2 / (m * n)
        rep = numerical_rank(M, lam)
        d_formula = math.ceil(16.0 * (rep.mu_lambda * rep.value + 1.0)
                              * (cfg.t + math.log(n)))
        details.update({"lam": lam, "mu_lambda": rep.mu_lambda,
                        "numerical_rank": rep.value, "regime": "full-rank"})
    d = cfg.d if isinstance(cfg.d, int) else min(d_formula, m)
    d = max(d, r)
    if cfg.kind != "exact-low-rank":
        _, omega_formula = bounds.sample_size_full_rank(
            details["mu_lambda"], details["numerical_rank"], cfg.t, n, d, r)
    omega = cfg.omega_count if isinstance(cfg.omega_count, int) \
        else min(omega_formula, n * m)
    details.update({"d_formula": d_formula, "omega_formula": omega_formula,
                    "d": d, "omega": omega})
    return Budget(d=d, omega=min(omega, n * m), details=details)


class TrialContext:
    """One generated instance plus lazily drawn samples, shared by every
    check that runs in the same trial."""

    def __init__(self, cfg: ExperimentConfig, trial: int):
        self.cfg = cfg
        self.trial = trial
        self.stream = cfg.base_stream().derive(trial)
        self.M, self.factors = generate(cfg.synth_spec(self.stream.derive(0)))
        self.budget = resolve_budgets(cfg, self.M, self.factors.sigma)
        self._cache: dict = {}

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def m(self) -> int:
        return self.M.shape[1]

    @property
    def lam(self) -> float:
        sig = self.factors.sigma
        return float(sig[self.cfg.r - 1]) ** 2 / (self.n * self.m)

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def col_sample(self):
        return self._get("cols", lambda: sample_columns(
            self.M, self.budget.d, self.stream.derive(1)))

    def row_sample(self):
        return self._get("rows", lambda: sample_rows(
            self.M, self.budget.d, self.stream.derive(2)))

    def entry_sample(self):
        return self._get("omega", lambda: sample_entries(
            self.M, self.budget.omega, self.stream.derive(3)))

    def bases(self):
        def build():
            _, A = self.col_sample()
            _, B = self.row_sample()
            return build_bases(A, B, self.cfg.r)
        return self._get("bases", build)

    def design(self):
        return self._get("design", lambda: assemble_design(
            self.bases(), self.entry_sample()))

    def recovery(self):
        def build():
            _, A = self.col_sample()
            _, B = self.row_sample()
            inputs = RecoveryInputs(A=A, B=B, omega=self.entry_sample(),
                                    r=self.cfg.r)
            return recover(inputs, ridge=self.cfg.ridge)
        return self._get("recovery", build)

    def h_pair(self):
        def build():
            _, A = self.col_sample()
            return bounds.build_h_pair(self.M, A, "A", self.lam)
        return self._get("h_pair", build)


def _run_projection(ctx: TrialContext) -> list[BoundReport]:
    b = ctx.bases()
    rep_v, rep_u = bounds.check_projection(ctx.M, b.V_hat, b.U_hat,
                                           ctx.cfg.r, ctx.budget.d, ctx.cfg.t)
    return [rep_v, rep_u]


def _run_delta(ctx: TrialContext) -> list[BoundReport]:
    full = ctx.cfg.kind != "exact-low-rank"
    return [bounds.check_delta(ctx.M, ctx.bases(), ctx.cfg.r, ctx.budget.d,
                               ctx.cfg.t, full_rank=full)]


def _run_delta_triangle(ctx: TrialContext) -> list[BoundReport]:
    return [bounds.check_delta_triangle(ctx.M, ctx.bases())]


def _run_combine(ctx: TrialContext) -> list[BoundReport]:
    result, M_hat = ctx.recovery()
    full = ctx.cfg.kind != "exact-low-rank"
    delta_rep = bounds.check_delta(ctx.M, result.bases, ctx.cfg.r,
                                   ctx.budget.d, ctx.cfg.t, full_rank=full)
    gamma = result.lambda_min_KtK * ctx.n * ctx.m / ctx.entry_sample().size
    return [bounds.check_combine(ctx.M, M_hat, delta_rep.lhs, gamma)]


def _run_halko(ctx: TrialContext) -> list[BoundReport]:
    idx, _ = ctx.col_sample()
    return [bounds.check_halko(ctx.M, idx, ctx.cfg.r)]


def _run_omega1(ctx: TrialContext) -> list[BoundReport]:
    idx, _ = ctx.col_sample()
    return [bounds.check_omega1_spectrum(ctx.M, idx, ctx.cfg.r, ctx.budget.d)]


def _run_strong_convexity(ctx: TrialContext) -> list[BoundReport]:
    return [bounds.check_strong_convexity(ctx.design(), ctx.n, ctx.m,
                                          bases=ctx.bases(), t=ctx.cfg.t)]


def _run_h_sandwich(ctx: TrialContext) -> list[BoundReport]:
    return [bounds.check_h_sandwich(ctx.h_pair(), ctx.cfg.sandwich_delta,
                                    ctx.cfg.t)]


def _run_mu_hat(ctx: TrialContext) -> list[BoundReport]:
    return [bounds.check_mu_hat_bound(ctx.M, ctx.bases(), ctx.cfg.r, ctx.lam,
                                      ctx.budget.d, ctx.cfg.t)]


def _run_sin_theta(ctx: TrialContext) -> list[BoundReport]:
    pair = ctx.h_pair()
    return [bounds.check_sin_theta_perturbation(pair.H, pair.H_hat, ctx.cfg.r)]


def _run_full_rank_recovery(ctx: TrialContext) -> list[BoundReport]:
    result, _ = ctx.recovery()
    params = {"omega_size": ctx.entry_sample().size, "t": ctx.cfg.t}
    return [bounds.check_full_rank_recovery(ctx.M, result, ctx.cfg.r,
                                            ctx.budget.d, params)]


_RUNNERS = {
    "projection": _run_projection,
    "delta": _run_delta,
    "delta_triangle": _run_delta_triangle,
    "combine": _run_combine,
    "halko": _run_halko,
    "omega1_spectrum": _run_omega1,
    "strong_convexity": _run_strong_convexity,
    "h_sandwich": _run_h_sandwich,
    "mu_hat": _run_mu_hat,
    "sin_theta": _run_sin_theta,
    "full_rank_recovery": _run_full_rank_recovery,
}


def run_trial(cfg: ExperimentConfig, trial: int) -> dict:
    ctx = TrialContext(cfg, trial)
    reports: list[BoundReport] = []
    for name in cfg.checks:
        reports.extend(_RUNNERS[name](ctx))
    return {"trial": trial, "d": ctx.budget.d, "omega": ctx.budget.omega,
            "reports": [r.to_dict() for r in reports]}


def aggregate_reports(trial_records: list[dict]) -> dict:
    agg: dict = {}
    for record in trial_records:
        for rep in record["reports"]:
            slot = agg.setdefault(rep["name"], {
                "count": 0, "premises_met": 0,
                "holds": 0, "holds_given_premises": 0,
            })
            slot["count"] += 1
            slot["holds"] += int(rep["holds"])
            if rep["premises_met"]:
                slot["premises_met"] += 1
                slot["holds_given_premises"] += int(rep["holds"])
    for slot in agg.values():
        met = slot["premises_met"]
        slot["holds_rate"] = slot["holds_given_premises"] / met if met else None
    return agg


def run_verify(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    workers = threads if threads is not None else thread_count()
    if cfg.checks:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda k: run_trial(cfg, k),
                                    range(cfg.trials)))
    else:
        records = []
    return {"config": cfg.to_flat(),
            "aggregate": aggregate_reports(records),
            "trials": records}


# ---------------------------------------------------------------------------
# single recovery runs and budget sweeps


def run_recovery(cfg: ExperimentConfig, M: np.ndarray | None = None,
                 sigma: np.ndarray | None = None) -> dict:
    """One full sample-and-recover pass; returns the report dict and the
    recovered matrix under key "_M_hat" (stripped before serialization)."""
    stream = cfg.base_stream()
    if M is None:
        M, factors = generate(cfg.synth_spec(stream.derive(0)))
        sigma = factors.sigma
    elif sigma is None:
        sigma = svd(M).sigma
    budget = resolve_budgets(cfg, M, sigma)
    col_idx, A = sample_columns(M, budget.d, stream.derive(1))
    row_idx, B = sample_rows(M, budget.d, stream.derive(2))
    omega = sample_entries(M, budget.omega, stream.derive(3))
    result, M_hat = recover(RecoveryInputs(A=A, B=B, omega=omega, r=cfg.r),
                            ridge=cfg.ridge)
    n, m = M.shape
    diff = M - M_hat
    denom = frobenius_norm(M)
    bound_rep = bounds.check_full_rank_recovery(
        M, result, cfg.r, budget.d, {"omega_size": omega.size, "t": cfg.t})
    return {
        "config": cfg.to_flat(),
        "budget": budget.details,
        "col_indices": [int(i) for i in col_idx.indices],
        "row_indices": [int(i) for i in row_idx.indices],
        "omega_size": omega.size,
        "lambda_min_gram": result.lambda_min_KtK,
        "gamma": result.lambda_min_KtK * n * m / omega.size,
        "residual": result.residual,
        "metrics": {
            "rel_frobenius": 0.0 if denom == 0 else
                             float(frobenius_norm(diff) / denom),
            "spectral_sq": float(spectral_norm(diff) ** 2),
            "recovery_bound": bound_rep.to_dict(),
        },
        "_M_hat": M_hat,
    }


def _union_count(n: int, m: int, d: int, omega, col_idx, row_idx) -> int:
    in_cols = np.isin(omega.cols, col_idx.indices)
    in_rows = np.isin(omega.rows, row_idx.indices)
    overlap = int(np.count_nonzero(in_cols | in_rows))
    return d * n + d * m - d * d + omega.size - overlap


def _sweep_point(cfg: ExperimentConfig, d: int, trial: int) -> dict:
    stream = cfg.base_stream().derive(trial)
    M, factors = generate(cfg.synth_spec(stream.derive(0)))
    n, m = M.shape
    point_stream = stream.derive(1 + d)
    budget = resolve_budgets(cfg, M, factors.sigma)
    omega_size = budget.omega
    col_idx, A = sample_columns(M, d, point_stream.derive(1))
    row_idx, B = sample_rows(M, d, point_stream.derive(2))
    omega = sample_entries(M, omega_size, point_stream.derive(3))
    result, M_hat = recover(RecoveryInputs(A=A, B=B, omega=omega, r=cfg.r),
                            ridge=cfg.ridge)
    rel = frobenius_norm(M - M_hat) / frobenius_norm(M)
    rep = bounds.check_full_rank_recovery(
        M, result, cfg.r, d, {"omega_size": omega.size, "t": cfg.t})
    return {"rel_error": float(rel), "omega": omega.size,
            "holds": bool(rep.holds),
            "union": _union_count(n, m, d, omega, col_idx, row_idx)}


def run_sweep(cfg: ExperimentConfig, d_grid: list[int],
              threads: int | None = None) -> list[dict]:
    """One table row per grid point: budgets, measured error, bound rate,
    and the analytic observation-count curve."""
    grid = sorted(set(d_grid))
    if not grid:
        raise ValueError("d grid is empty")
    workers = threads if threads is not None else thread_count()
    rows = []
    limit = min(cfg.m, cfg.n)
    for d in grid:
        if d < 1:
            raise ValueError(f"grid entries must be >= 1, got {d}")
        row = {"d": d, "analytic_total": bounds.total_observations(cfg.n, d)}
        if d < cfg.r or d > limit:
            row.update({"omega": None, "observed_total": None, "union": None,
                        "rel_error": None, "bound_rate": None,
                        "skipped": "d outside [r, min(n, m)]"})
            rows.append(row)
            continue
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(lambda k: _sweep_point(cfg, d, k),
                                 range(cfg.trials)))
        omega_mean = float(np.mean([o["omega"] for o in outs]))
        row.update({
            "omega": omega_mean,
            "observed_total": d * cfg.n + d * cfg.m + omega_mean,
            "union": float(np.mean([o["union"] for o in outs])),
            "rel_error": float(np.mean([o["rel_error"] for o in outs])),
            "bound_rate": float(np.mean([o["holds"] for o in outs])),
        })
        rows.append(row)
    return rows

"""Sparse regression pipeline: subspace pursuit over sparsity levels,
contribution-score trimming, reduction-in-residual model selection, and a
final least-squares refit on the selected support.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import IdentifyTrace, LinearSystem, SparseModel, build_linear_system


@dataclass(frozen=True)
class PipelineConfig:
    theta_max: int = 10
    trim_threshold: float = 0.05   # tau
    rr_lag: int = 1                # L
    rr_tolerance: float = 0.01     # rho
    sp_max_iters: int = 20

    def __post_init__(self):
        if self.theta_max < 1:
            raise ValueError("theta_max must be >= 1")
        if not 0.0 < self.trim_threshold < 1.0:
            raise ValueError("trim_threshold must lie in (0, 1)")
        if self.rr_lag < 1:
            raise ValueError("rr_lag must be >= 1")
        if self.rr_tolerance <= 0.0:
            raise ValueError("rr_tolerance must be positive")


def least_squares(system: LinearSystem, support) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares on the normalized partial columns.

    Returns coefficients on the normalized columns and the squared residual.
    """
    support = sorted(int(j) for j in support)
    if not support:
        raise ValueError("support must be nonempty")
    if support[0] < 0 or support[-1] >= system.n_terms:
        raise ValueError("support index out of range")
    sub = system.theta[:, support]
    coef, _, rank, _ = np.linalg.lstsq(sub, system.b, rcond=None)
    if rank < len(support):
        warnings.warn(
            f"rank-deficient subsystem (rank {rank} < {len(support)}); minimum-norm solution",
            stacklevel=2,
        )
    resid = system.b - sub @ coef
    return coef, float(resid @ resid)


def _model_from_normalized(system, support, coef_norm, residual_sq, trace=None) -> SparseModel:
    support = list(support)
    order = np.argsort(support)
    support_sorted = [support[i] for i in order]
    coef_sorted = np.asarray(coef_norm)[order]
    unscaled = coef_sorted / system.column_scales[support_sorted]
    return SparseModel(tuple(support_sorted), unscaled, residual_sq, trace)


def _normalized_coeffs(system, model: SparseModel) -> np.ndarray:
    return model.coefficients * system.column_scales[list(model.support)]


def subspace_pursuit(system: LinearSystem, sparsity: int, cfg: PipelineConfig | None = None) -> SparseModel:
    """Standard subspace pursuit at a fixed sparsity.

    Starts from the largest correlations |theta^T b|, then alternates:
    augment with the top residual correlations, least-squares on the union,
    keep the largest coefficients.  Stops when the residual fails to
    decrease; returns the best iterate.  Ties in correlation magnitude break
    toward the lower column index (numpy argsort is stable on the negated
    magnitudes).
    """
    cfg = cfg or PipelineConfig()
    p, m = system.n_terms, system.n_rows
    if not 1 <= sparsity <= min(p, m):
        raise ValueError(f"sparsity {sparsity} out of range for a {m}x{p} system")

    def top_k(scores, k):
        order = np.argsort(-np.abs(scores), kind="stable")
        return order[:k]

    support = set(top_k(system.theta.T @ system.b, sparsity).tolist())
    coef, resid = least_squares(system, support)
    best = (resid, sorted(support), coef)

    for _ in range(cfg.sp_max_iters):
        r = system.b - system.theta[:, sorted(support)] @ coef
        augment = top_k(system.theta.T @ r, sparsity)
        union = sorted(support | set(augment.tolist()))
        coef_u, _ = least_squares(system, union)
        keep = top_k(coef_u, sparsity)
        support = {union[i] for i in keep}
        coef, resid = least_squares(system, support)
        if resid < best[0] - 1e-15 * max(1.0, best[0]):
            best = (resid, sorted(support), coef)
        else:
            break

    resid, supp, _ = best
    coef, resid = least_squares(system, supp)
    return _model_from_normalized(system, supp, coef, resid)


def trim(system: LinearSystem, model: SparseModel, tau: float) -> SparseModel:
    """Drop features whose relative contribution falls below tau, refit.

    The contribution of feature v is ||theta_v c_v|| = |c_v| on unit-norm
    columns; scores are normalized by the largest contribution.  If every
    feature falls below tau the dominant one is kept.
    """
    if model.sparsity == 0:
        raise ValueError("cannot trim an empty model")
    coef_norm = _normalized_coeffs(system, model)
    alpha = np.abs(coef_norm) * np.linalg.norm(system.theta[:, list(model.support)], axis=0)
    chi = alpha / alpha.max() if alpha.max() > 0 else np.ones_like(alpha)
    keep = [j for j, score in zip(model.support, chi) if score >= tau]
    if not keep:
        keep = [model.support[int(np.argmax(chi))]]
    if len(keep) == model.sparsity:
        return model
    coef, resid = least_squares(system, keep)
    return _model_from_normalized(system, keep, coef, resid)


@dataclass(frozen=True)
class SelectionResult:
    theta_star: int
    ratios: tuple[float, ...]  # s_theta indexed from theta=1 (nan where undefined)
    diagnostic: str | None = None


def select_sparsity(candidates, cfg: PipelineConfig | None = None) -> SelectionResult:
    """Reduction-in-residual choice: smallest theta whose improvement ratio
    s_theta = (R_theta - R_(theta+L)) / (L R_1) drops below rr_tolerance.

    candidates[i] holds the (trimmed, refitted) model for sparsity i+1.
    Falls back to the largest sparsity with a diagnostic when nothing
    qualifies.
    """
    cfg = cfg or PipelineConfig()
    if not candidates:
        raise ValueError("no candidate models")
    residuals = [m.residual_sq for m in candidates]
    theta_max = len(candidates)
    r1 = residuals[0]
    if r1 <= 1e-14 * max(1.0, abs(r1)):
        # a single term already fits to machine precision
        return SelectionResult(1, (float("nan"),) * theta_max, None)
    lag = cfg.rr_lag
    ratios = [float("nan")] * theta_max
    chosen = None
    for theta in range(1, theta_max - lag + 1):
        s = (residuals[theta - 1] - residuals[theta - 1 + lag]) / (lag * r1)
        ratios[theta - 1] = s
        if chosen is None and s < cfg.rr_tolerance:
            chosen = theta
    if chosen is None:
        return SelectionResult(theta_max, tuple(ratios), "no sparsity met the reduction tolerance")
    return SelectionResult(chosen, tuple(ratios), None)


def identify(system: LinearSystem, cfg: PipelineConfig | None = None) -> SparseModel:
    """Full pipeline: pursuit at each sparsity, trim, select, final refit.

    Deterministic given the system and configuration.  Coefficients are
    reported in unscaled units; the residual is on the normalized system.
    """
    cfg = cfg or PipelineConfig()
    theta_max = min(cfg.theta_max, system.n_terms, system.n_rows)
    candidates = []
    trimmed_away = []
    for theta in range(1, theta_max + 1):
        raw = subspace_pursuit(system, theta, cfg)
        cut = trim(system, raw, cfg.trim_threshold)
        trimmed_away.append(tuple(sorted(set(raw.support) - set(cut.support))))
        candidates.append(cut)
    sel = select_sparsity(candidates, cfg)
    chosen = candidates[sel.theta_star - 1]
    coef, resid = least_squares(system, chosen.support)
    trace = IdentifyTrace(
        theta_star=sel.theta_star,
        residuals=tuple(m.residual_sq for m in candidates),
        reduction_ratios=sel.ratios,
        supports=tuple(m.support for m in candidates),
        trimmed=tuple(trimmed_away),
        diagnostics=(sel.diagnostic,) if sel.diagnostic else (),
    )
    return _model_from_normalized(system, chosen.support, coef, resid, trace)


def identify_blocks(system: LinearSystem, blocks, cfg: PipelineConfig | None = None) -> SparseModel:
    """Independent identification on disjoint (rows, columns) blocks.

    Used for separate per-equation identification with unconstrained
    libraries: each state equation gets its own pursuit and sparsity choice,
    and the block models merge into one model over the full dictionary.
    """
    cfg = cfg or PipelineConfig()
    support: list[int] = []
    coeffs: list[float] = []
    resid_total = 0.0
    diags = []
    for row_idx, col_idx in blocks:
        row_idx, col_idx = list(row_idx), list(col_idx)
        # raw block values, renormalized: restricting rows changes column norms
        raw = system.theta[np.ix_(row_idx, col_idx)] * system.column_scales[col_idx]
        block_sys = build_linear_system(
            raw, system.b[row_idx], system.row_component[row_idx], system.row_sample[row_idx]
        )
        model = identify(block_sys, cfg)
        for local_j, c in zip(model.support, model.coefficients):
            support.append(col_idx[local_j])
            coeffs.append(float(c))
        resid_total += model.residual_sq
        if model.trace and model.trace.diagnostics:
            diags.extend(model.trace.diagnostics)
    order = np.argsort(support)
    trace = IdentifyTrace(
        theta_star=len(support),
        residuals=(resid_total,),
        reduction_ratios=(float("nan"),),
        supports=(tuple(sorted(support)),),
        trimmed=((),),
        diagnostics=tuple(diags),
    )
    return SparseModel(
        tuple(np.array(support)[order]),
        np.array(coeffs)[order],
        resid_total,
        trace,
    )

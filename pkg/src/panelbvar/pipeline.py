"""End-to-end estimation: prior, posterior, per-draw identification, summaries.

The per-draw loop is embarrassingly parallel: draw i is a pure function of
(seed, i), so splitting the index range across processes and concatenating
in index order reproduces the serial stream exactly.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import analysis
from .config import AnalysisSettings, IdentificationSettings, PriorSettings, SamplerSettings
from .identification import identify_news_shock, identify_orthogonal_pair, ma_coefficients
from .paneldata import PanelDataset, RegressionData, build_regression_matrices
from .posterior import PosteriorMoments, PosteriorSampler, augment, compute_posterior_moments
from .prior import Ar1Stats, DummyObservations, ar1_stats_from_panel


@dataclass
class _DrawTask:
    """Everything a worker needs to reproduce a slice of the draw stream."""

    moments: PosteriorMoments
    seed: int
    n_lags: int
    n_vars: int
    target: int
    secondary: int | None
    horizon: int
    h_irf: int
    h_fevd: int
    y: np.ndarray
    x: np.ndarray


@dataclass
class _ChunkResult:
    irf: np.ndarray
    fevd: np.ndarray
    shocks: np.ndarray
    shares: np.ndarray
    max_target_impact: float
    irf_secondary: np.ndarray | None
    fevd_secondary: np.ndarray | None


def _run_chunk(task: _DrawTask, lo: int, hi: int) -> _ChunkResult:
    sampler = PosteriorSampler(task.moments, task.seed)
    count = hi - lo
    n = task.n_vars
    pair = task.secondary is not None
    max_h = max(task.horizon, task.h_irf + 1, task.h_fevd)
    irf = np.empty((count, task.h_irf + 1, n))
    fevd = np.empty((count, task.h_fevd, n))
    shocks = np.empty((count, task.y.shape[0]))
    shares = np.empty(count)
    irf2 = np.empty_like(irf) if pair else None
    fevd2 = np.empty_like(fevd) if pair else None
    worst = 0.0
    for j, i in enumerate(range(lo, hi)):
        draw = sampler.draw(i)
        ma = ma_coefficients(draw.coefs, task.n_lags, max_h)
        if pair:
            first, shock = identify_orthogonal_pair(
                ma, draw.sigma, task.secondary, task.target, task.horizon
            )
            irf2[j] = analysis.impulse_responses(ma, first, task.h_irf)
            fevd2[j] = analysis.fevd_curve(ma, first, task.h_fevd)
        else:
            shock = identify_news_shock(ma, draw.sigma, task.target, task.horizon)
        irf[j] = analysis.impulse_responses(ma, shock, task.h_irf)
        fevd[j] = analysis.fevd_curve(ma, shock, task.h_fevd)
        shares[j] = shock.fev_share
        resid = task.y - task.x @ draw.coefs
        w = solve_triangular(shock.chol_factor, resid.T, lower=True)
        shocks[j] = shock.rotation @ w
        worst = max(worst, abs(float((shock.chol_factor @ shock.rotation)[task.target])))
    return _ChunkResult(irf, fevd, shocks, shares, worst, irf2, fevd2)


@dataclass
class EstimationResult:
    variables: list[str]
    row_index: list[tuple[str, int]]
    moments: PosteriorMoments
    ar1: Ar1Stats
    irf: analysis.IrfResult
    fevd: analysis.FevdResult
    shock_draws: np.ndarray           # (retained, rows) identified news series
    achieved_shares: np.ndarray       # (retained,)
    max_target_impact: float          # max |impact[target]| before zero enforcement
    n_retained: int
    irf_secondary: analysis.IrfResult | None = None
    fevd_secondary: analysis.FevdResult | None = None
    regression: RegressionData | None = None


def estimate_panel(
    panel: PanelDataset,
    lags: int,
    prior: PriorSettings,
    identification: IdentificationSettings,
    sampler: SamplerSettings,
    settings: AnalysisSettings | None = None,
) -> EstimationResult:
    """Full pipeline on an already-transformed panel of model variables."""
    settings = settings or AnalysisSettings()
    reg = build_regression_matrices(panel, lags)
    stats = ar1_stats_from_panel(panel, prior.s_floor)
    dummies = DummyObservations.build(
        stats, kappa=prior.kappa, c=prior.c, n_lags=lags, n_exog=reg.n_exog,
        tau=prior.tau_resolved,
    )
    y_star, x_star = augment(reg, dummies)
    moments = compute_posterior_moments(y_star, x_star)

    target = panel.variables.index(identification.target)
    secondary = None
    if identification.mode == "orthogonal-pair":
        secondary = panel.variables.index(identification.secondary_target)
    task = _DrawTask(
        moments=moments,
        seed=sampler.seed,
        n_lags=lags,
        n_vars=panel.n_vars,
        target=target,
        secondary=secondary,
        horizon=identification.horizon,
        h_irf=settings.h_irf,
        h_fevd=settings.h_fevd,
        y=reg.y,
        x=reg.x,
    )
    chunks = _split(sampler.n_burn, sampler.n_draws, sampler.workers)
    if sampler.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=sampler.workers) as pool:
            results = list(pool.map(_run_chunk, *zip(*[(task, lo, hi) for lo, hi in chunks])))
    else:
        results = [_run_chunk(task, lo, hi) for lo, hi in chunks]

    irf_draws = np.concatenate([r.irf for r in results])
    fevd_draws = np.concatenate([r.fevd for r in results])
    shock_draws = np.concatenate([r.shocks for r in results])
    shares = np.concatenate([r.shares for r in results])
    probs = settings.probs
    result = EstimationResult(
        variables=list(panel.variables),
        row_index=reg.row_index,
        moments=moments,
        ar1=stats,
        irf=analysis.irf_result(irf_draws, panel.variables, probs, settings.keep_draws),
        fevd=analysis.fevd_result(fevd_draws, panel.variables, probs),
        shock_draws=shock_draws,
        achieved_shares=shares,
        max_target_impact=max(r.max_target_impact for r in results),
        n_retained=irf_draws.shape[0],
        regression=reg,
    )
    if secondary is not None:
        result.irf_secondary = analysis.irf_result(
            np.concatenate([r.irf_secondary for r in results]), panel.variables, probs
        )
        result.fevd_secondary = analysis.fevd_result(
            np.concatenate([r.fevd_secondary for r in results]), panel.variables, probs
        )
    return result


def _split(lo: int, hi: int, workers: int) -> list[tuple[int, int]]:
    total = hi - lo
    parts = min(max(workers, 1), total)
    bounds = np.linspace(lo, hi, parts + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

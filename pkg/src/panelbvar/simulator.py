"""Synthetic panels from a structural DGP with a known anticipated shock.

Ground truth for end-to-end recovery tests: the news shock loads on a
signal variable on impact and reaches the target variable only through the
lag dynamics, so its contemporaneous effect on the target is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .identification import ma_coefficients
from .paneldata import PanelDataset

_BURN_IN = 100


@dataclass
class NewsDgp:
    """Structural data-generating process for one panel.

    ``impact`` maps unit-variance structural shocks to innovations; its
    (target, news) entry must be zero. ``delay`` records the first horizon
    at which the news column moves the target. ``spans`` lists one
    (start_year, n_years) per country.
    """

    impact: np.ndarray                # (N, N)
    lag_matrices: np.ndarray          # (L, N, N)
    target: int
    news: int
    delay: int
    spans: list[tuple[int, int]]
    seed: int
    fixed_effect_scale: float = 1.0
    variables: list[str] = field(default_factory=list)

    def __post_init__(self):
        n = self.impact.shape[0]
        if not self.variables:
            self.variables = [f"v{i + 1}" for i in range(n)]
        if self.impact[self.target, self.news] != 0.0:
            raise ValueError("impact of the news shock on the target must be zero")
        if self.delay < 1:
            raise ValueError("news delay must be >= 1")

    @property
    def n_vars(self) -> int:
        return self.impact.shape[0]

    @property
    def n_lags(self) -> int:
        return self.lag_matrices.shape[0]

    @property
    def n_countries(self) -> int:
        return len(self.spans)

    def companion(self) -> np.ndarray:
        n, l = self.n_vars, self.n_lags
        comp = np.zeros((n * l, n * l))
        comp[:n] = np.hstack(list(self.lag_matrices))
        if l > 1:
            comp[n:, : n * (l - 1)] = np.eye(n * (l - 1))
        return comp

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.companion())).max())

    def true_irf(self, h: int) -> np.ndarray:
        """(h+1, N) responses to a unit news shock, zero at (0, target)."""
        stacked = np.vstack([m.T for m in self.lag_matrices])
        ma = ma_coefficients(stacked, self.n_lags, h + 1)
        return ma.matrices @ self.impact[:, self.news]


def default_news_dgp(
    n_vars: int = 4,
    n_lags: int = 2,
    delay: int = 1,
    n_countries: int = 20,
    n_years: int = 60,
    seed: int = 0,
    start_year: int = 1960,
    target: int = 0,
    news: int = 1,
    target_shock_sd: float = 0.35,
    news_loading: float = 1.5,
    target_response: float = 0.6,
    own_lag_coefs: tuple[float, ...] | None = None,
    fixed_effect_scale: float = 0.3,
) -> NewsDgp:
    """Standard recovery-test DGP.

    The news shock loads only on the last variable (the signal), the target
    follows the signal after ``delay`` lags, and every other variable is an
    independent noise autoregression with its own shock. The coupling graph
    is acyclic, so stability is governed by the own-lag coefficients alone.
    Defaults were tuned by pilot simulation (see scripts/pilot_recovery.py)
    so that posterior bands at desk scale are honest about the truth.
    """
    if n_vars < 3:
        raise ValueError("need at least 3 variables for the signal structure")
    if not 1 <= delay <= n_lags:
        raise ValueError("delay must lie in 1..n_lags")
    if news in (target, n_vars - 1):
        raise ValueError("news shock column must differ from target and signal")
    signal = n_vars - 1
    impact = np.zeros((n_vars, n_vars))
    impact[target, target] = target_shock_sd
    impact[signal, news] = news_loading
    noise_vars = [j for j in range(n_vars) if j not in (target, signal)]
    noise_cols = [j for j in range(n_vars) if j not in (target, news)]
    for row, col in zip(noise_vars, noise_cols):
        impact[row, col] = 0.7

    if own_lag_coefs is None:
        own = [0.2] if n_lags == 1 else [0.15, 0.03] + [0.0] * (n_lags - 2)
    else:
        if len(own_lag_coefs) != n_lags:
            raise ValueError("own_lag_coefs must have one entry per lag")
        own = list(own_lag_coefs)
    lags = np.zeros((n_lags, n_vars, n_vars))
    for l, coef in enumerate(own):
        lags[l] += np.eye(n_vars) * coef
    lags[delay - 1, target, signal] = target_response
    spans = [(start_year, n_years)] * n_countries
    return NewsDgp(
        impact=impact,
        lag_matrices=lags,
        target=target,
        news=news,
        delay=delay,
        spans=spans,
        seed=seed,
        fixed_effect_scale=fixed_effect_scale,
    )


@dataclass
class PanelTruth:
    """Simulated panel plus everything the estimator is supposed to recover."""

    panel: PanelDataset
    news_shocks: np.ndarray     # (M, T_union), NaN outside a country's span
    irf: np.ndarray             # (h+1, N) true news-shock responses
    fixed_effects: np.ndarray   # (M, N)
    dgp: NewsDgp

    def news_at(self, country: str, year: int) -> float:
        i = self.panel.countries.index(country)
        t = self.panel.years.index(year)
        return float(self.news_shocks[i, t])


def simulate_panel(dgp: NewsDgp, irf_horizon: int = 20) -> PanelTruth:
    """Simulate each country on its own deterministic substream.

    100 burn-in periods are discarded per country; fixed effects are drawn
    once per country and added to every period.
    """
    radius = dgp.spectral_radius()
    if radius >= 1.0:
        raise ValueError(f"unstable dynamics: companion spectral radius {radius:.3f}")
    n, l = dgp.n_vars, dgp.n_lags
    countries = [f"C{i + 1:03d}" for i in range(dgp.n_countries)]
    years = sorted({y for s, m in dgp.spans for y in range(s, s + m)})
    year_pos = {y: t for t, y in enumerate(years)}

    values = np.full((dgp.n_countries, len(years), n), np.nan)
    observed = np.zeros((dgp.n_countries, len(years)), dtype=bool)
    news = np.full((dgp.n_countries, len(years)), np.nan)
    alphas = np.empty((dgp.n_countries, n))
    for i, (start, m) in enumerate(dgp.spans):
        rng = np.random.default_rng(np.random.SeedSequence(dgp.seed, spawn_key=(i,)))
        alphas[i] = rng.normal(0.0, dgp.fixed_effect_scale, n)
        shocks = rng.standard_normal((_BURN_IN + m, n))
        z = np.zeros((_BURN_IN + m + l, n))
        for t in range(_BURN_IN + m):
            cur = alphas[i] + dgp.impact @ shocks[t]
            for j in range(l):
                cur = cur + dgp.lag_matrices[j] @ z[l + t - 1 - j]
            z[l + t] = cur
        keep = z[l + _BURN_IN :]
        for s, year in enumerate(range(start, start + m)):
            t = year_pos[year]
            values[i, t] = keep[s]
            observed[i, t] = True
            news[i, t] = shocks[_BURN_IN + s, dgp.news]

    panel = PanelDataset(countries, years, list(dgp.variables), values, observed)
    return PanelTruth(
        panel=panel,
        news_shocks=news,
        irf=dgp.true_irf(irf_horizon),
        fixed_effects=alphas,
        dgp=dgp,
    )


@dataclass
class RecoveryReport:
    shock_correlation: float
    max_irf_deviation: float
    band_coverage: float


def recovery_metrics(
    irf_result,
    shock_draws: np.ndarray,
    row_index: list[tuple[str, int]],
    truth: PanelTruth,
    band: tuple[float, float] = (0.05, 0.95),
) -> RecoveryReport:
    """Compare an estimated news shock to the simulator's ground truth.

    Reports the correlation of the posterior-median shock series with the
    true news series, the max absolute deviation of the median IRF from the
    true IRF, and the fraction of (variable, horizon) cells whose band
    covers the truth.
    """
    shock_draws = np.atleast_2d(np.asarray(shock_draws, dtype=float))
    if shock_draws.shape[1] != len(row_index):
        raise ValueError(
            f"{shock_draws.shape[1]} shock values for {len(row_index)} rows"
        )
    median_series = np.median(shock_draws, axis=0)
    true_series = np.array([truth.news_at(c, y) for c, y in row_index])
    if np.isnan(true_series).any():
        raise ValueError("estimation rows extend outside the simulated spans")
    corr = float(np.corrcoef(median_series, true_series)[0, 1])

    quantiles = irf_result.quantiles
    probs = list(irf_result.probs)
    if 0.5 not in probs or band[0] not in probs or band[1] not in probs:
        raise ValueError("IRF result must include the median and band probabilities")
    h = quantiles.shape[1]
    if truth.irf.shape[0] < h:
        raise ValueError(
            f"true IRF covers {truth.irf.shape[0]} horizons, estimated has {h}"
        )
    true_irf = truth.irf[:h]
    median = quantiles[probs.index(0.5)]
    lo = quantiles[probs.index(band[0])]
    hi = quantiles[probs.index(band[1])]
    deviation = float(np.abs(median - true_irf).max())
    coverage = float(np.mean((lo <= true_irf) & (true_irf <= hi)))
    return RecoveryReport(
        shock_correlation=corr,
        max_irf_deviation=deviation,
        band_coverage=coverage,
    )

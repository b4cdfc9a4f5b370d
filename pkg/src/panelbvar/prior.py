"""Dummy-observation shrinkage priors.

Per-variable AR(1) regressions supply the hyperparameter inputs; the
coefficient prior and the sum-of-coefficients prior are both expressed as
pseudo-data blocks appended to the VAR system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .paneldata import PanelDataset


@dataclass
class Ar1Stats:
    """Per-variable AR(1) slope, floored residual sd, and sample mean."""

    slope: np.ndarray
    sigma: np.ndarray
    mean: np.ndarray
    floored: np.ndarray  # True where sigma was raised to the floor

    @property
    def n_vars(self) -> int:
        return self.slope.size


def fit_ar1(
    segments: list[np.ndarray], s_floor: float = 1e-8
) -> tuple[float, float, float, bool]:
    """Pooled AR(1) regression with intercept over per-segment lag pairs.

    Each segment is lagged independently (no pair straddles a segment
    boundary), then all pairs are pooled into one least-squares fit of
    z_t on (1, z_{t-1}). Returns (slope, residual sd, mean of all
    observations, floored flag). The residual sd is floored at
    ``s_floor * max(1, max|z|)``; an exactly constant regressor yields
    slope 1 with the floor, flagged via a warning.
    """
    segments = [np.asarray(s, dtype=float) for s in segments]
    all_obs = np.concatenate([s for s in segments if s.size]) if segments else np.array([])
    if all_obs.size == 0:
        raise ValueError("no observations")
    lhs = np.concatenate([s[1:] for s in segments if s.size >= 2] or [np.empty(0)])
    rhs = np.concatenate([s[:-1] for s in segments if s.size >= 2] or [np.empty(0)])
    if lhs.size < 3:
        raise ValueError(f"need at least 3 lag pairs, got {lhs.size}")
    mean = float(all_obs.mean())
    floor = s_floor * max(1.0, float(np.abs(all_obs).max()))

    if np.ptp(rhs) == 0.0:
        warnings.warn("constant AR(1) regressor; using slope 1 with floored sd", stacklevel=2)
        return 1.0, floor, mean, True

    design = np.column_stack([np.ones_like(rhs), rhs])
    coef, *_ = np.linalg.lstsq(design, lhs, rcond=None)
    resid = lhs - design @ coef
    raw = float(np.sqrt(resid @ resid / (lhs.size - 2))) if lhs.size > 2 else 0.0
    if raw < floor:
        return float(coef[1]), floor, mean, True
    return float(coef[1]), raw, mean, False


def ar1_stats_from_panel(data: PanelDataset, s_floor: float = 1e-8) -> Ar1Stats:
    """AR(1) hyperparameters for every panel variable.

    Within-country runs of consecutive observed values form the segments;
    missing cells split a run.
    """
    n = data.n_vars
    slope = np.empty(n)
    sigma = np.empty(n)
    mean = np.empty(n)
    floored = np.zeros(n, dtype=bool)
    for v in range(n):
        segments: list[np.ndarray] = []
        for i in range(data.n_countries):
            series = data.values[i, :, v]
            ok = data.observed[i] & ~np.isnan(series)
            start = None
            for t in range(len(data.years) + 1):
                inside = t < len(data.years) and ok[t] and (
                    start is None or data.years[t] == data.years[t - 1] + 1
                )
                if inside and start is None:
                    start = t
                elif not inside and start is not None:
                    segments.append(series[start:t])
                    start = t if t < len(data.years) and ok[t] else None
        try:
            slope[v], sigma[v], mean[v], floored[v] = fit_ar1(segments, s_floor)
        except ValueError as exc:
            raise ValueError(f"variable {data.variables[v]!r}: {exc}") from None
    return Ar1Stats(slope=slope, sigma=sigma, mean=mean, floored=floored)


def build_minnesota_dummies(
    stats: Ar1Stats, kappa: float, c: float, n_lags: int, n_exog: int
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient-prior pseudo-data.

    Row layout: N first-lag rows centering own-lag coefficients on the AR(1)
    slopes, N*(n_lags-1) zero-centered higher-lag rows with tightness
    decaying linearly in the lag, N covariance-scale rows, and n_exog rows
    shrinking the dummy-coefficient block with tightness ``c``.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if c <= 0:
        raise ValueError("c must be positive")
    n = stats.n_vars
    sd = stats.sigma
    y_d = np.vstack(
        [
            np.diag(stats.slope * sd) / kappa,
            np.zeros((n * (n_lags - 1), n)),
            np.diag(sd),
            np.zeros((n_exog, n)),
        ]
    )
    x_d = np.zeros((n * n_lags + n + n_exog, n * n_lags + n_exog))
    x_d[: n * n_lags, : n * n_lags] = (
        np.kron(np.diag(np.arange(1, n_lags + 1, dtype=float)), np.diag(sd)) / kappa
    )
    x_d[n * n_lags + n :, n * n_lags :] = np.eye(n_exog) / c
    return y_d, x_d


def build_soc_dummies(
    stats: Ar1Stats, tau: float, n_lags: int, n_exog: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sum-of-coefficients pseudo-data: one row per variable pulling the
    lag-coefficient sum toward its AR(1)-weighted mean with tightness tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = stats.n_vars
    block = np.diag(stats.slope * stats.mean) / tau
    y_soc = block
    x_soc = np.hstack([np.tile(block, (1, n_lags)), np.zeros((n, n_exog))])
    return y_soc, x_soc


@dataclass
class DummyObservations:
    """Both prior blocks plus the hyperparameters that produced them."""

    y_minn: np.ndarray
    x_minn: np.ndarray
    y_soc: np.ndarray
    x_soc: np.ndarray
    kappa: float
    c: float
    tau: float

    @classmethod
    def build(
        cls,
        stats: Ar1Stats,
        kappa: float,
        c: float,
        n_lags: int,
        n_exog: int,
        tau: float | None = None,
    ) -> "DummyObservations":
        """Default tau is 10 * kappa."""
        tau = 10.0 * kappa if tau is None else tau
        y_minn, x_minn = build_minnesota_dummies(stats, kappa, c, n_lags, n_exog)
        y_soc, x_soc = build_soc_dummies(stats, tau, n_lags, n_exog)
        return cls(y_minn, x_minn, y_soc, x_soc, kappa=kappa, c=c, tau=tau)

    @property
    def n_rows(self) -> int:
        return self.y_minn.shape[0] + self.y_soc.shape[0]

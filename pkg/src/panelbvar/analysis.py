"""Impulse responses, variance decompositions, and posterior summaries."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .identification import MaCoefficients, StructuralShock

DEFAULT_PROBS = (0.05, 0.16, 0.50, 0.84, 0.95)


def impulse_responses(
    ma: MaCoefficients, shock: StructuralShock, h_irf: int
) -> np.ndarray:
    """(h_irf+1, N) responses to a one-standard-deviation shock.

    Row j is Psi_j @ impact; row 0 is the impact column itself.
    """
    if ma.horizon < h_irf + 1:
        raise ValueError(
            f"MA coefficients cover {ma.horizon} steps, need {h_irf + 1}"
        )
    return ma.matrices[: h_irf + 1] @ shock.impact


def fevd_curve(
    ma: MaCoefficients, shock: StructuralShock, max_horizon: int
) -> np.ndarray:
    """(max_horizon, N) share of each variable's forecast error variance
    attributed to the shock, at horizons 1..max_horizon."""
    if max_horizon < 1:
        raise ValueError("horizon must be >= 1")
    if ma.horizon < max_horizon:
        raise ValueError(
            f"MA coefficients cover {ma.horizon} steps, need {max_horizon}"
        )
    resp = ma.matrices[:max_horizon] @ shock.chol_factor  # (H, N, N)
    num = np.cumsum((resp @ shock.rotation) ** 2, axis=0)
    denom = np.cumsum(np.sum(resp**2, axis=2), axis=0)
    if np.any(denom <= 0.0):
        v = int(np.argwhere(denom <= 0.0)[0, 1])
        raise ValueError(f"variable {v} has zero forecast error variance")
    return num / denom


def fevd_share(
    ma: MaCoefficients, shock: StructuralShock, variable: int, horizon: int
) -> float:
    """Single (variable, horizon) entry of the decomposition."""
    return float(fevd_curve(ma, shock, horizon)[horizon - 1, variable])


def summarize(draws: np.ndarray, probs) -> np.ndarray:
    """Pointwise empirical quantiles along the draw axis.

    Uses the linear-interpolation inverse-CDF estimator; ``probs`` must be
    sorted ascending and there must be at least two draws.
    """
    draws = np.asarray(draws)
    if draws.shape[0] < 2:
        raise ValueError("need at least 2 draws to summarize")
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0 or np.any(np.diff(probs) < 0):
        raise ValueError("probs must be non-empty and sorted ascending")
    return np.quantile(draws, probs, axis=0, method="linear")


@dataclass
class IrfResult:
    """Quantile curves of the per-draw impulse responses.

    ``quantiles`` has shape (len(probs), h_irf+1, N), in the variables'
    model units for a one-standard-deviation shock.
    """

    variables: list[str]
    probs: tuple[float, ...]
    quantiles: np.ndarray
    n_draws: int
    shock_scale: str = "one standard deviation"
    draws: np.ndarray | None = field(default=None, repr=False)

    @property
    def horizons(self) -> range:
        return range(self.quantiles.shape[1])

    def curve(self, prob: float, variable: str) -> np.ndarray:
        p = list(self.probs).index(prob)
        v = self.variables.index(variable)
        return self.quantiles[p, :, v]


@dataclass
class FevdResult:
    """Quantile curves of the per-draw FEV shares at horizons 1..H."""

    variables: list[str]
    probs: tuple[float, ...]
    quantiles: np.ndarray  # (len(probs), H, N)
    n_draws: int

    @property
    def horizons(self) -> range:
        return range(1, self.quantiles.shape[1] + 1)


def irf_result(
    irf_draws: np.ndarray,
    variables: list[str],
    probs=DEFAULT_PROBS,
    keep_draws: bool = False,
) -> IrfResult:
    return IrfResult(
        variables=list(variables),
        probs=tuple(probs),
        quantiles=summarize(irf_draws, probs),
        n_draws=irf_draws.shape[0],
        draws=irf_draws if keep_draws else None,
    )


def fevd_result(
    fevd_draws: np.ndarray, variables: list[str], probs=DEFAULT_PROBS
) -> FevdResult:
    return FevdResult(
        variables=list(variables),
        probs=tuple(probs),
        quantiles=summarize(fevd_draws, probs),
        n_draws=fevd_draws.shape[0],
    )


def write_irf_csv(result: IrfResult, path, scale: np.ndarray | None = None) -> None:
    """Rows (variable, horizon, prob, value); ``scale`` optionally rescales
    each variable's responses (e.g. 100 for log variables read as percent)."""
    scale = np.ones(len(result.variables)) if scale is None else np.asarray(scale)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "horizon", "prob", "value"])
        for v, name in enumerate(result.variables):
            for h in result.horizons:
                for p, prob in enumerate(result.probs):
                    writer.writerow(
                        [name, h, prob, repr(float(result.quantiles[p, h, v] * scale[v]))]
                    )


def write_fevd_csv(result: FevdResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "horizon", "prob", "share"])
        for v, name in enumerate(result.variables):
            for i, h in enumerate(result.horizons):
                for p, prob in enumerate(result.probs):
                    writer.writerow(
                        [name, h, prob, repr(float(result.quantiles[p, i, v]))]
                    )

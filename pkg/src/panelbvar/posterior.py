"""Natural-conjugate posterior for the dummy-augmented VAR.

The augmented least-squares system defines a normal-inverse-Wishart
posterior; sampling is exact i.i.d. Monte Carlo from that closed form, so
burn-in merely discards draws and introduces no Markov dependence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy import linalg as sla
from scipy import stats as sst

from .paneldata import RegressionData
from .prior import DummyObservations


class RankDeficientError(ValueError):
    """Augmented regressor matrix is rank deficient."""

    def __init__(self, columns: list[int]):
        self.columns = columns
        super().__init__(
            "rank-deficient system; dependent column(s): "
            + ", ".join(str(c) for c in columns)
        )


class NumericalError(RuntimeError):
    """Numerical failure outside the caller's control (non-finite data, non-PD scale)."""


@dataclass
class PosteriorMoments:
    """Closed-form posterior: coefficient mean, scale matrix, Gram matrix,
    inverse-Wishart degrees of freedom, and augmented row count."""

    coef_mean: np.ndarray  # (K, N)
    scale: np.ndarray      # (N, N), symmetric PSD
    gram: np.ndarray       # (K, K), symmetric PD
    dof: int
    n_rows_aug: int

    @property
    def k(self) -> int:
        return self.coef_mean.shape[0]

    @property
    def n_vars(self) -> int:
        return self.coef_mean.shape[1]


@dataclass
class PosteriorDraw:
    coefs: np.ndarray  # (K, N)
    sigma: np.ndarray  # (N, N), symmetric PD


def augment(
    data: RegressionData | tuple[np.ndarray, np.ndarray],
    dummies: DummyObservations | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Stack observed data, coefficient-prior dummies, then
    sum-of-coefficients dummies."""
    if isinstance(data, RegressionData):
        y, x = data.y, data.x
    else:
        y, x = data
    if dummies is None:
        return y, x
    n, k = y.shape[1], x.shape[1]
    for label, block, width in (
        ("coefficient-prior y block", dummies.y_minn, n),
        ("sum-of-coefficients y block", dummies.y_soc, n),
        ("coefficient-prior x block", dummies.x_minn, k),
        ("sum-of-coefficients x block", dummies.x_soc, k),
    ):
        if block.shape[1] != width:
            raise ValueError(
                f"{label} has {block.shape[1]} columns, expected {width}"
            )
    y_star = np.vstack([y, dummies.y_minn, dummies.y_soc])
    x_star = np.vstack([x, dummies.x_minn, dummies.x_soc])
    return y_star, x_star


def compute_posterior_moments(y_star: np.ndarray, x_star: np.ndarray) -> PosteriorMoments:
    """Least-squares solve of the augmented system via pivoted QR.

    The coefficient mean never touches an explicit normal-equations inverse;
    rank deficiency is reported with the dependent column indices.
    """
    y_star = np.asarray(y_star, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if y_star.shape[0] != x_star.shape[0]:
        raise ValueError("row mismatch between dependent and regressor blocks")
    if not (np.isfinite(y_star).all() and np.isfinite(x_star).all()):
        raise NumericalError("augmented system contains non-finite values")
    rows, k = x_star.shape
    n = y_star.shape[1]
    if rows < k:
        raise RankDeficientError(list(range(k)))

    q, r, piv = sla.qr(x_star, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(rows, k) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    if rank < k:
        raise RankDeficientError(sorted(int(j) for j in piv[rank:]))
    z = sla.solve_triangular(r, q.T @ y_star, lower=False)
    coef_mean = np.empty_like(z)
    coef_mean[piv] = z

    resid = y_star - x_star @ coef_mean
    scale = resid.T @ resid
    scale = (scale + scale.T) / 2.0
    gram = x_star.T @ x_star
    gram = (gram + gram.T) / 2.0
    dof = rows - k + 2
    if dof <= n - 1:
        raise ValueError(f"degrees of freedom {dof} too small for {n} variables")
    return PosteriorMoments(coef_mean=coef_mean, scale=scale, gram=gram, dof=dof, n_rows_aug=rows)


def _prepare_scale(moments: PosteriorMoments) -> np.ndarray:
    """PD scale for the inverse-Wishart, with one diagonal jitter retry."""
    scale = moments.scale
    try:
        np.linalg.cholesky(scale)
        return scale
    except np.linalg.LinAlgError:
        pass
    n = moments.n_vars
    jittered = scale + np.eye(n) * (1e-10 * np.trace(scale) / n)
    try:
        np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError:
        raise NumericalError("posterior scale matrix is not positive definite") from None
    return jittered


class PosteriorSampler:
    """Index-addressable i.i.d. sampler.

    Draw ``i`` is a pure function of (seed, i): each index owns a spawned
    child of the root seed sequence, so disjoint index ranges can be drawn
    on different workers and concatenated without changing the stream.
    """

    def __init__(self, moments: PosteriorMoments, seed: int):
        self.moments = moments
        self.seed = seed
        self._scale = _prepare_scale(moments)
        self._gram_chol = np.linalg.cholesky(moments.gram)

    def draw(self, index: int) -> PosteriorDraw:
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(index,)))
        m = self.moments
        sigma = sst.invwishart.rvs(df=m.dof, scale=self._scale, random_state=rng)
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        sigma = (sigma + sigma.T) / 2.0
        g = rng.standard_normal((m.k, m.n_vars))
        u = sla.solve_triangular(self._gram_chol, g, lower=True, trans="T")
        coefs = m.coef_mean + u @ np.linalg.cholesky(sigma).T
        return PosteriorDraw(coefs=coefs, sigma=sigma)


def sample_posterior(
    moments: PosteriorMoments, n_draws: int, n_burn: int, seed: int
) -> Iterator[PosteriorDraw]:
    """Yield draws n_burn..n_draws-1. Identical seed gives an identical stream."""
    if not n_draws > n_burn >= 0:
        raise ValueError("need n_draws > n_burn >= 0")
    sampler = PosteriorSampler(moments, seed)
    for i in range(n_burn, n_draws):
        yield sampler.draw(i)


def save_draws(draws: list[PosteriorDraw], path) -> None:
    """Binary dump: per draw, coefficients then covariance, row-major
    float64, with a JSON sidecar describing the shapes."""
    path = Path(path)
    if not draws:
        raise ValueError("no draws to save")
    k, n = draws[0].coefs.shape
    with open(path, "wb") as fh:
        for d in draws:
            fh.write(np.ascontiguousarray(d.coefs, dtype=np.float64).tobytes())
            fh.write(np.ascontiguousarray(d.sigma, dtype=np.float64).tobytes())
    sidecar = {
        "n_draws": len(draws),
        "k": k,
        "n_vars": n,
        "dtype": "float64",
        "order": "C",
        "layout": ["coefs", "sigma"],
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_draws(path) -> list[PosteriorDraw]:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    k, n, count = sidecar["k"], sidecar["n_vars"], sidecar["n_draws"]
    per = k * n + n * n
    flat = np.fromfile(path, dtype=np.float64)
    if flat.size != per * count:
        raise ValueError("draw file size does not match its sidecar")
    draws = []
    for i in range(count):
        chunk = flat[i * per : (i + 1) * per]
        draws.append(
            PosteriorDraw(
                coefs=chunk[: k * n].reshape(k, n).copy(),
                sigma=chunk[k * n :].reshape(n, n).copy(),
            )
        )
    return draws

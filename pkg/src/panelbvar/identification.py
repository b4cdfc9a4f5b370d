"""Max-share identification of anticipated shocks.

Given reduced-form MA coefficients and an innovation covariance, finds the
unit rotation of the Cholesky factor that maximizes one variable's
forecast-error-variance share over a horizon while its impact response is
restricted to zero, plus a two-shock variant where the second rotation is
additionally orthogonal to the first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

_TIE_RTOL = 1e-12


@dataclass
class MaCoefficients:
    """Reduced-form MA matrices Psi_0..Psi_{H-1}, Psi_0 = identity."""

    matrices: np.ndarray  # (H, N, N)

    @property
    def horizon(self) -> int:
        return self.matrices.shape[0]

    @property
    def n_vars(self) -> int:
        return self.matrices.shape[1]


@dataclass
class StructuralShock:
    """One identified shock: unit rotation of the innovation Cholesky factor.

    ``impact`` is chol_factor @ rotation with the target entry set to an
    exact zero (the restriction holds by construction up to rounding).
    ``fev_share`` is the maximized share of the target's forecast error
    variance over ``horizon`` steps. ``tie_broken`` flags a degenerate
    top eigenvalue resolved by the deterministic tie rule.
    """

    rotation: np.ndarray
    impact: np.ndarray
    target: int
    horizon: int
    fev_share: float
    chol_factor: np.ndarray
    tie_broken: bool = False


def ma_coefficients(coefs: np.ndarray, n_lags: int, horizon: int) -> MaCoefficients:
    """MA matrices from powers of the companion matrix.

    ``coefs`` is the (K, N) stacked coefficient matrix whose first
    N*n_lags rows are the lag blocks; any further (exogenous) rows are
    ignored. Only the leading N columns of each power are propagated.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    coefs = np.asarray(coefs, dtype=float)
    n = coefs.shape[1]
    if coefs.shape[0] < n * n_lags:
        raise ValueError(
            f"coefficient matrix has {coefs.shape[0]} rows, need at least {n * n_lags}"
        )
    lag_mats = [coefs[l * n : (l + 1) * n, :].T for l in range(n_lags)]
    dim = n * n_lags
    companion = np.zeros((dim, dim))
    companion[:n] = np.hstack(lag_mats)
    if n_lags > 1:
        companion[n:, : dim - n] = np.eye(dim - n)

    mats = np.empty((horizon, n, n))
    mats[0] = np.eye(n)
    cols = np.zeros((dim, n))
    cols[:n] = np.eye(n)
    for j in range(1, horizon):
        cols = companion @ cols
        mats[j] = cols[:n]
    return MaCoefficients(mats)


def _target_responses(
    ma: MaCoefficients, chol: np.ndarray, target: int, horizon: int
) -> np.ndarray:
    """Rows e_target' Psi_j chol for j = 0..horizon-1, stacked (horizon, N)."""
    if ma.horizon < horizon:
        raise ValueError(f"MA coefficients cover {ma.horizon} steps, need {horizon}")
    return ma.matrices[:horizon, target, :] @ chol


def _pick_tied(vectors: np.ndarray) -> np.ndarray:
    """Among tied eigenvectors, take the one whose absolute coordinates are
    lexicographically largest."""
    best = 0
    for j in range(1, vectors.shape[1]):
        a, b = np.abs(vectors[:, j]), np.abs(vectors[:, best])
        diff = a - b
        nz = np.nonzero(np.abs(diff) > 1e-14)[0]
        if nz.size and diff[nz[0]] > 0:
            best = j
    return vectors[:, best]


def _max_share_rotation(
    resp: np.ndarray, basis: np.ndarray
) -> tuple[np.ndarray, float, bool]:
    """Principal direction of the projected FEV quadratic form.

    ``resp`` stacks the target rows of Psi_j @ chol; the share of a unit
    rotation q is ||resp q||^2 / ||resp||_F^2, maximized over the column
    span of ``basis``.
    """
    denom = float(np.sum(resp**2))
    if denom <= 0.0:
        raise ValueError("target variable has no innovation variance")
    quad = resp.T @ resp
    proj = basis.T @ quad @ basis
    proj = (proj + proj.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(proj)
    top = eigvals[-1]
    tied = eigvals >= top - _TIE_RTOL * max(1.0, abs(top))
    tie_broken = int(tied.sum()) > 1
    w = _pick_tied(eigvecs[:, tied]) if tie_broken else eigvecs[:, -1]
    q = basis @ w
    q = q / np.linalg.norm(q)
    share = min(max(float(top / denom), 0.0), 1.0)
    return q, share, tie_broken


def _orient(q: np.ndarray, resp: np.ndarray) -> np.ndarray:
    """Flip q so the target's first nonzero response (horizon >= 1) is positive."""
    path = resp @ q
    scale = max(1.0, float(np.abs(path).max()))
    for j in range(1, path.size):
        if abs(path[j]) > 1e-12 * scale:
            return -q if path[j] < 0 else q
    return q


def _finish(
    q: np.ndarray,
    chol: np.ndarray,
    resp: np.ndarray,
    target: int,
    horizon: int,
    share: float,
    tie_broken: bool,
    zero_impact: bool,
) -> StructuralShock:
    q = _orient(q, resp)
    impact = chol @ q
    if zero_impact:
        impact[target] = 0.0
    return StructuralShock(
        rotation=q,
        impact=impact,
        target=target,
        horizon=horizon,
        fev_share=share,
        chol_factor=chol,
        tie_broken=tie_broken,
    )


def _chol(omega: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(np.asarray(omega, dtype=float))
    except np.linalg.LinAlgError:
        raise ValueError("innovation covariance must be positive definite") from None


def identify_news_shock(
    ma: MaCoefficients,
    omega: np.ndarray,
    target: int,
    horizon: int,
    zero_impact: bool = True,
) -> StructuralShock:
    """Anticipated-shock rotation for one target variable (0-based index).

    Maximizes the target's FEV share over ``horizon`` steps subject to a
    zero contemporaneous impact on the target, solved as the principal
    eigenvector of the FEV quadratic form projected on the constraint null
    space. Set ``zero_impact=False`` for the unrestricted max-share problem
    (then horizon >= 1 suffices).
    """
    chol = _chol(omega)
    n = chol.shape[0]
    if not 0 <= target < n:
        raise ValueError(f"target index {target} out of range for {n} variables")
    if horizon < (2 if zero_impact else 1):
        raise ValueError("horizon too short: the impact restriction forces a zero share")
    resp = _target_responses(ma, chol, target, horizon)
    if zero_impact:
        basis = null_space(chol[target][np.newaxis, :])
    else:
        basis = np.eye(n)
    q, share, tie = _max_share_rotation(resp, basis)
    return _finish(q, chol, resp, target, horizon, share, tie, zero_impact)


def identify_orthogonal_pair(
    ma: MaCoefficients,
    omega: np.ndarray,
    target_first: int,
    target_second: int,
    horizon: int,
) -> tuple[StructuralShock, StructuralShock]:
    """Two mutually orthogonal anticipated shocks.

    The first solves the single-shock problem for ``target_first``; the
    second maximizes the ``target_second`` share over rotations orthogonal
    to both the first rotation and its own zero-impact constraint row.
    """
    chol = _chol(omega)
    n = chol.shape[0]
    if n < 3:
        raise ValueError("orthogonal pair requires at least 3 variables")
    if target_first == target_second:
        raise ValueError("targets must differ")
    first = identify_news_shock(ma, omega, target_first, horizon)
    constraints = np.vstack([chol[target_second], first.rotation])
    basis = null_space(constraints)
    if basis.shape[1] == 0:
        raise ValueError("no rotation satisfies both constraints")
    resp = _target_responses(ma, chol, target_second, horizon)
    q, share, tie = _max_share_rotation(resp, basis)
    second = _finish(q, chol, resp, target_second, horizon, share, tie, True)
    return first, second

import numpy as np
import pytest

from panelbvar.posterior import (
    NumericalError,
    PosteriorMoments,
    PosteriorSampler,
    RankDeficientError,
    augment,
    compute_posterior_moments,
    load_draws,
    sample_posterior,
    save_draws,
)
from panelbvar.prior import Ar1Stats, DummyObservations
from tests.oracles import LONGDOUBLE_OK, solve_normal_equations_highprec


def toy_dummies(n=1, p=1, ex=1):
    stats = Ar1Stats(
        slope=np.array([0.5] * n),
        sigma=np.array([2.0] * n),
        mean=np.array([1.0] * n),
        floored=np.zeros(n, dtype=bool),
    )
    return DummyObservations.build(stats, kappa=0.2, c=1000.0, n_lags=p, n_exog=ex)


class TestAugment:
    def test_no_dummies_is_identity(self):
        y = np.arange(6.0).reshape(3, 2)
        x = np.arange(9.0).reshape(3, 3)
        y_star, x_star = augment((y, x), None)
        assert y_star is y and x_star is x

    def test_row_arithmetic(self):
        y = np.zeros((6, 1))
        x = np.zeros((6, 2))
        x[:, 0] = 1.0
        x[:, 1] = np.arange(6.0)
        y_star, x_star = augment((y, x), toy_dummies())
        assert y_star.shape == (6 + 3 + 1, 1)
        assert x_star.shape == (10, 2)
        # stacking order: data, coefficient-prior block, sum-of-coefficients
        assert np.allclose(y_star[6:9, 0], [5.0, 2.0, 0.0])
        assert y_star[9, 0] == pytest.approx(0.25)

    def test_column_mismatch_named(self):
        y = np.zeros((4, 2))
        x = np.zeros((4, 2))
        with pytest.raises(ValueError, match="coefficient-prior y block"):
            augment((y, x), toy_dummies(n=1))


class TestMoments:
    def test_exact_fit_recovers_coefficients(self):
        b0 = np.array([[1.0, -2.0], [0.5, 0.25], [3.0, 0.0], [0.0, 1.0]])
        x_star = np.eye(4)
        y_star = x_star @ b0
        m = compute_posterior_moments(y_star, x_star)
        assert np.allclose(m.coef_mean, b0, atol=1e-14)
        assert np.abs(m.scale).max() < 1e-14
        assert np.allclose(m.gram, np.eye(4))
        assert m.dof == 4 - 4 + 2

    @pytest.mark.skipif(not LONGDOUBLE_OK, reason="extended precision unavailable")
    def test_matches_high_precision_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(40, 12))
        y = rng.normal(size=(40, 3))
        m = compute_posterior_moments(y, x)
        ref = solve_normal_equations_highprec(x, y)
        rel = np.abs(m.coef_mean - ref).max() / np.abs(ref).max()
        assert rel < 1e-10

    def test_duplicate_column_reports_dependents(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 4))
        x[:, 3] = x[:, 1]
        with pytest.raises(RankDeficientError) as err:
            compute_posterior_moments(rng.normal(size=(20, 2)), x)
        assert set(err.value.columns) & {1, 3}

    def test_more_columns_than_rows_rejected(self):
        rng = np.random.default_rng(1)
        with pytest.raises(RankDeficientError):
            compute_posterior_moments(np.zeros((3, 1)), rng.normal(size=(3, 5)))

    def test_non_finite_rejected(self):
        x = np.ones((5, 1))
        y = np.ones((5, 1))
        y[2] = np.inf
        with pytest.raises(NumericalError, match="non-finite"):
            compute_posterior_moments(y, x)

    def test_diffuse_equals_pooled_ols(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(60, 5))
        y = x @ rng.normal(size=(5, 2)) + rng.normal(size=(60, 2))
        y_star, x_star = augment((y, x), None)
        m = compute_posterior_moments(y_star, x_star)
        ols, *_ = np.linalg.lstsq(x, y, rcond=None)
        assert np.allclose(m.coef_mean, ols, rtol=1e-12, atol=1e-14)

    def test_ridge_equivalence_on_augmented_system(self):
        # posterior mean == least squares on the dummy-augmented system
        rng = np.random.default_rng(11)
        x = rng.normal(size=(30, 3))
        y = rng.normal(size=(30, 2))
        dum = toy_dummies(n=2, p=1, ex=1)
        y_star, x_star = augment((y, x), dum)
        m = compute_posterior_moments(y_star, x_star)
        ref, *_ = np.linalg.lstsq(x_star, y_star, rcond=None)
        assert np.allclose(m.coef_mean, ref, rtol=1e-10, atol=1e-12)


def small_moments(seed=5, rows=60, k=4, n=2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(rows, k))
    y = x @ rng.normal(size=(k, n)) + rng.normal(size=(rows, n))
    return compute_posterior_moments(y, x)


class TestSampler:
    def test_mean_of_coefficients_within_mc_error(self):
        m = small_moments()
        draws = list(sample_posterior(m, n_draws=5000, n_burn=0, seed=2))
        coefs = np.stack([d.coefs for d in draws])
        mc_se = coefs.std(axis=0, ddof=1) / np.sqrt(len(draws))
        assert np.all(np.abs(coefs.mean(axis=0) - m.coef_mean) < 4 * mc_se)

    def test_mean_of_covariance_matches_inverse_wishart(self):
        m = small_moments()
        draws = list(sample_posterior(m, n_draws=5000, n_burn=0, seed=4))
        sigmas = np.stack([d.sigma for d in draws])
        expected = m.scale / (m.dof - m.n_vars - 1)
        mc_se = sigmas.std(axis=0, ddof=1) / np.sqrt(len(draws))
        assert np.all(np.abs(sigmas.mean(axis=0) - expected) < 4 * mc_se)

    def test_identical_seed_identical_stream(self):
        m = small_moments()
        a = list(sample_posterior(m, n_draws=8, n_burn=2, seed=7))
        b = list(sample_posterior(m, n_draws=8, n_burn=2, seed=7))
        for da, db in zip(a, b):
            assert np.array_equal(da.coefs, db.coefs)
            assert np.array_equal(da.sigma, db.sigma)

    def test_draw_is_index_addressable(self):
        m = small_moments()
        stream = list(sample_posterior(m, n_draws=6, n_burn=0, seed=9))
        sampler = PosteriorSampler(m, seed=9)
        again = sampler.draw(4)
        assert np.array_equal(stream[4].coefs, again.coefs)
        assert np.array_equal(stream[4].sigma, again.sigma)

    def test_burn_in_skips_prefix(self):
        m = small_moments()
        full = list(sample_posterior(m, n_draws=6, n_burn=0, seed=3))
        tail = list(sample_posterior(m, n_draws=6, n_burn=4, seed=3))
        assert len(tail) == 2
        assert np.array_equal(tail[0].coefs, full[4].coefs)

    def test_all_sigma_draws_positive_definite(self):
        m = small_moments()
        for d in sample_posterior(m, n_draws=200, n_burn=0, seed=1):
            np.linalg.cholesky(d.sigma)  # raises if not PD
            assert np.array_equal(d.sigma, d.sigma.T)

    def test_invalid_draw_counts(self):
        m = small_moments()
        with pytest.raises(ValueError):
            next(sample_posterior(m, n_draws=5, n_burn=5, seed=0))
        with pytest.raises(ValueError):
            next(sample_posterior(m, n_draws=5, n_burn=-1, seed=0))

    def test_zero_scale_rejected(self):
        x_star = np.eye(3)
        y_star = x_star @ np.array([[1.0], [2.0], [3.0]])
        m = compute_posterior_moments(y_star, x_star)
        with pytest.raises(NumericalError):
            next(sample_posterior(m, n_draws=2, n_burn=0, seed=0))

    def test_jitter_rescues_near_singular_scale(self):
        base = small_moments(n=2)
        scale = np.array([[1.0, 1.0], [1.0, 1.0]])  # PSD, singular
        m = PosteriorMoments(
            coef_mean=base.coef_mean, scale=scale, gram=base.gram,
            dof=base.dof, n_rows_aug=base.n_rows_aug,
        )
        draw = next(sample_posterior(m, n_draws=2, n_burn=0, seed=0))
        np.linalg.cholesky(draw.sigma)


def test_draw_dump_round_trip(tmp_path):
    m = small_moments()
    draws = list(sample_posterior(m, n_draws=5, n_burn=0, seed=12))
    path = tmp_path / "draws.bin"
    save_draws(draws, path)
    assert (tmp_path / "draws.bin.json").exists()
    back = load_draws(path)
    assert len(back) == 5
    for a, b in zip(draws, back):
        assert np.array_equal(a.coefs, b.coefs)
        assert np.array_equal(a.sigma, b.sigma)


def test_posterior_intervals_cover_prior_draws():
    """Truth drawn from the prior => credible intervals attain nominal
    frequentist coverage, averaged over replications."""
    rng = np.random.default_rng(2026)
    n, p, ex = 2, 1, 1
    k = n * p + ex
    stats = Ar1Stats(
        slope=np.array([0.5, 0.7]),
        sigma=np.array([1.0, 0.8]),
        mean=np.zeros(n),
        floored=np.zeros(n, dtype=bool),
    )
    dummies = DummyObservations.build(stats, 0.4, 10.0, p, ex)
    y_d, x_d = dummies.y_minn, dummies.x_minn
    prior = compute_posterior_moments(y_d, x_d)
    x = np.column_stack([rng.normal(size=(30, n * p)), np.ones((30, 1))])
    hits = 0
    cells = 0
    for rep in range(200):
        truth = PosteriorSampler(prior, seed=rep).draw(0)
        noise = rng.standard_normal((30, n)) @ np.linalg.cholesky(truth.sigma).T
        y = x @ truth.coefs + noise
        m = compute_posterior_moments(
            np.vstack([y, y_d]), np.vstack([x, x_d])
        )
        coefs = np.stack(
            [d.coefs for d in sample_posterior(m, n_draws=300, n_burn=0, seed=10_000 + rep)]
        )
        lo, hi = np.quantile(coefs, [0.05, 0.95], axis=0)
        hits += int(((lo <= truth.coefs) & (truth.coefs <= hi)).sum())
        cells += k * n
    coverage = hits / cells
    assert 0.85 <= coverage <= 0.95

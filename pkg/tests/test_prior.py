import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panelbvar.prior import (
    Ar1Stats,
    DummyObservations,
    ar1_stats_from_panel,
    build_minnesota_dummies,
    build_soc_dummies,
    fit_ar1,
)
from tests.oracles import ar1_closed_form
from tests.test_paneldata import panel_from_dict


class TestFitAr1:
    def test_geometric_series_exact(self):
        slope, sd, mean, floored = fit_ar1([np.array([1.0, 0.5, 0.25, 0.125])])
        assert slope == pytest.approx(0.5, abs=1e-12)
        assert floored
        assert sd == 1e-8  # floor: max|z| = 1
        assert mean == pytest.approx(0.46875, abs=1e-15)

    def test_alternating_series(self):
        slope, sd, mean, floored = fit_ar1([np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])])
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert floored
        assert mean == 0.5

    def test_too_few_pairs(self):
        with pytest.raises(ValueError, match="3 lag pairs"):
            fit_ar1([np.array([1.0, 2.0, 3.0])])

    def test_constant_regressor_flagged(self):
        with pytest.warns(UserWarning, match="constant"):
            slope, sd, mean, floored = fit_ar1([np.array([2.0, 2.0, 2.0, 2.0])])
        assert slope == 1.0
        assert floored
        assert sd == 2e-8  # floor scales with |series|

    def test_matches_closed_form_oracle(self):
        rng = np.random.default_rng(42)
        z = np.empty(200)
        z[0] = rng.normal()
        for t in range(1, 200):
            z[t] = 0.7 * z[t - 1] + rng.normal()
        slope, sd, mean, floored = fit_ar1([z])
        slope_ref, sd_ref = ar1_closed_form(z)
        assert not floored
        assert slope == pytest.approx(slope_ref, rel=1e-12)
        assert sd == pytest.approx(sd_ref, rel=1e-12)
        assert mean == pytest.approx(z.mean(), rel=1e-15)

    def test_segments_do_not_straddle(self):
        # two segments vs their concatenation give different pair sets
        a = np.array([1.0, 2.0, 3.0])
        b = np.array([10.0, 11.0, 12.0])
        slope_seg, *_ = fit_ar1([a, b])
        slope_cat, *_ = fit_ar1([np.concatenate([a, b])])
        assert slope_seg != pytest.approx(slope_cat, abs=1e-6)
        pairs_y = np.array([2.0, 3.0, 11.0, 12.0])
        pairs_x = np.array([1.0, 2.0, 10.0, 11.0])
        design = np.column_stack([np.ones(4), pairs_x])
        ref = np.linalg.lstsq(design, pairs_y, rcond=None)[0][1]
        assert slope_seg == pytest.approx(ref, rel=1e-12)


def test_panel_stats_pool_within_country_lags():
    rows = {("A", 2000 + t): (float(v),) for t, v in enumerate([1, 2, 3])}
    rows.update({("B", 2005 + t): (float(v),) for t, v in enumerate([10, 11, 12])})
    panel = panel_from_dict(["z"], rows)
    stats = ar1_stats_from_panel(panel)
    slope_ref, *_ = fit_ar1([np.array([1.0, 2, 3]), np.array([10.0, 11, 12])])
    assert stats.slope[0] == pytest.approx(slope_ref, rel=1e-12)
    assert stats.mean[0] == pytest.approx(np.mean([1, 2, 3, 10, 11, 12]))


def test_panel_stats_split_segments_at_missing():
    series = [1.0, 2.0, np.nan, 5.0, 6.0, 7.0]
    rows = {("A", 2000 + t): (series[t],) for t in range(6)}
    panel = panel_from_dict(["z"], rows)
    stats = ar1_stats_from_panel(panel)
    ref, *_ = fit_ar1([np.array([1.0, 2.0]), np.array([5.0, 6.0, 7.0])])
    assert stats.slope[0] == pytest.approx(ref, rel=1e-12)


class TestMinnesotaDummies:
    def test_hand_example(self):
        stats = Ar1Stats(
            slope=np.array([0.5]), sigma=np.array([2.0]), mean=np.array([0.0]),
            floored=np.array([False]),
        )
        y_d, x_d = build_minnesota_dummies(stats, kappa=0.2, c=1000.0, n_lags=1, n_exog=1)
        assert np.allclose(y_d, [[5.0], [2.0], [0.0]])
        assert np.allclose(x_d, [[10.0, 0.0], [0.0, 0.0], [0.0, 0.001]])

    def test_two_var_two_lag_layout(self):
        stats = Ar1Stats(
            slope=np.array([0.5, 0.8]),
            sigma=np.array([2.0, 3.0]),
            mean=np.zeros(2),
            floored=np.zeros(2, dtype=bool),
        )
        y_d, x_d = build_minnesota_dummies(stats, kappa=0.5, c=10.0, n_lags=2, n_exog=3)
        assert y_d.shape == (2 * 2 + 2 + 3, 2)
        assert x_d.shape == (9, 2 * 2 + 3)
        # second-lag rows of y are zero while x scales the lag-2 block by 2
        assert np.all(y_d[2:4] == 0)
        assert np.allclose(x_d[2:4, 2:4], 2.0 * np.diag([2.0, 3.0]) / 0.5)
        assert np.allclose(y_d[4:6], np.diag([2.0, 3.0]))
        assert np.allclose(x_d[6:, 4:], np.eye(3) / 10.0)

    def test_large_kappa_uninformative_limit(self):
        stats = Ar1Stats(
            slope=np.array([0.9]), sigma=np.array([1.5]), mean=np.array([0.0]),
            floored=np.array([False]),
        )
        y_d, x_d = build_minnesota_dummies(stats, kappa=1e12, c=1000.0, n_lags=2, n_exog=1)
        assert np.abs(y_d[:2]).max() < 1e-10
        assert np.abs(x_d[:2, :2]).max() < 1e-10
        assert x_d[-1, -1] == 0.001

    @pytest.mark.parametrize("kappa,c", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_invalid_tightness(self, kappa, c):
        stats = Ar1Stats(
            slope=np.ones(1), sigma=np.ones(1), mean=np.ones(1),
            floored=np.zeros(1, dtype=bool),
        )
        with pytest.raises(ValueError):
            build_minnesota_dummies(stats, kappa=kappa, c=c, n_lags=1, n_exog=1)


class TestSocDummies:
    def test_hand_example(self):
        stats = Ar1Stats(
            slope=np.array([0.5]), sigma=np.ones(1), mean=np.array([3.0]),
            floored=np.zeros(1, dtype=bool),
        )
        y_soc, x_soc = build_soc_dummies(stats, tau=2.0, n_lags=1, n_exog=1)
        assert np.allclose(y_soc, [[0.75]])
        assert np.allclose(x_soc, [[0.75, 0.0]])
        y_soc, x_soc = build_soc_dummies(stats, tau=2.0, n_lags=2, n_exog=1)
        assert np.allclose(x_soc, [[0.75, 0.75, 0.0]])

    def test_zero_mean_contributes_nothing(self):
        stats = Ar1Stats(
            slope=np.array([0.5, 0.9]), sigma=np.ones(2), mean=np.zeros(2),
            floored=np.zeros(2, dtype=bool),
        )
        y_soc, x_soc = build_soc_dummies(stats, tau=1.0, n_lags=2, n_exog=2)
        assert np.all(y_soc == 0) and np.all(x_soc == 0)

    def test_invalid_tau(self):
        stats = Ar1Stats(
            slope=np.ones(1), sigma=np.ones(1), mean=np.ones(1),
            floored=np.zeros(1, dtype=bool),
        )
        with pytest.raises(ValueError):
            build_soc_dummies(stats, tau=0.0, n_lags=1, n_exog=0)


@given(
    n=st.integers(1, 5), p=st.integers(1, 4), ex=st.integers(0, 6),
    seed=st.integers(0, 2**31),
)
@settings(max_examples=60, deadline=None)
def test_block_dimensions(n, p, ex, seed):
    rng = np.random.default_rng(seed)
    stats = Ar1Stats(
        slope=rng.normal(size=n),
        sigma=np.abs(rng.normal(size=n)) + 0.1,
        mean=rng.normal(size=n),
        floored=np.zeros(n, dtype=bool),
    )
    dum = DummyObservations.build(stats, kappa=0.3, c=100.0, n_lags=p, n_exog=ex)
    assert dum.y_minn.shape == (n * p + n + ex, n)
    assert dum.x_minn.shape == (n * p + n + ex, n * p + ex)
    assert dum.y_soc.shape == (n, n)
    assert dum.x_soc.shape == (n, n * p + ex)
    # exogenous part of the coefficient-prior block is identity / c
    assert np.allclose(dum.x_minn[n * p + n :, n * p :], np.eye(ex) / 100.0)


@pytest.mark.parametrize("lam", [1.0, 3.5])
def test_dummy_system_alone_recovers_ar1_slopes(lam):
    rng = np.random.default_rng(1)
    n, p, ex = 3, 2, 2
    stats = Ar1Stats(
        slope=rng.uniform(-0.9, 0.9, n),
        sigma=lam * (np.abs(rng.normal(size=n)) + 0.2),
        mean=rng.normal(size=n),
        floored=np.zeros(n, dtype=bool),
    )
    y_d, x_d = build_minnesota_dummies(stats, kappa=0.37, c=50.0, n_lags=p, n_exog=ex)
    coef, *_ = np.linalg.lstsq(x_d, y_d, rcond=None)
    for i in range(n):
        assert coef[i, i] == pytest.approx(stats.slope[i], rel=1e-10)
    off_diag = coef[:p * n].copy()
    for i in range(n):
        off_diag[i, i] = 0.0
    assert np.abs(off_diag).max() < 1e-10


def test_default_tau_is_ten_kappa():
    stats = Ar1Stats(
        slope=np.ones(1), sigma=np.ones(1), mean=np.ones(1),
        floored=np.zeros(1, dtype=bool),
    )
    dum = DummyObservations.build(stats, kappa=0.2, c=1000.0, n_lags=1, n_exog=0)
    assert dum.tau == pytest.approx(2.0)
    assert dum.n_rows == (1 + 1 + 0) + 1

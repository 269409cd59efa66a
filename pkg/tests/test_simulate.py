import math

import numpy as np
import pytest
from scipy import stats

from galqr import simulate as Sim
from galqr.kernels import GpdParams, gpd_log_ppf


def test_offsets_analytic():
    assert Sim.solve_quantile_offset("normal", 0.05) == pytest.approx(-3 * stats.norm.ppf(0.05), rel=1e-14)
    assert Sim.solve_quantile_offset("normal", 0.05) == pytest.approx(4.9346, abs=5e-5)
    assert Sim.solve_quantile_offset("gpd_log", 0.5) == pytest.approx(3 / 7, rel=1e-14)
    assert Sim.solve_quantile_offset("laplace", 0.5) == 0.0
    with pytest.raises(ValueError):
        Sim.solve_quantile_offset("cauchy", 0.5)
    with pytest.raises(ValueError):
        Sim.solve_quantile_offset("normal", 1.0)


@pytest.mark.parametrize("law", Sim.ERROR_LAWS)
@pytest.mark.parametrize("p0", [0.05, 0.25, 0.5])
def test_quantile_pinned_at_zero(law, p0):
    spec = Sim.ErrorLawSpec(law, p0)
    assert abs(spec.cdf(0.0) - p0) < 1e-10
    assert abs(spec.quantile(p0)) < 1e-9


@pytest.mark.parametrize("law", Sim.ERROR_LAWS)
def test_empirical_fraction_below_zero(law):
    p0 = 0.25
    x = Sim.ErrorLawSpec(law, p0).sample(np.random.default_rng(0), 10**6)
    assert abs(np.mean(x <= 0) - p0) < 3 * math.sqrt(p0 * (1 - p0) / x.size)


def test_error_law_parameters():
    r = np.random.default_rng(1)
    x = Sim.ErrorLawSpec("normal", 0.5).sample(r, 200_000)
    assert x.var() == pytest.approx(9.0, rel=0.02)
    x = Sim.ErrorLawSpec("laplace", 0.5).sample(r, 200_000)
    assert x.var() == pytest.approx(2 * 9.0, rel=0.03)
    spec = Sim.ErrorLawSpec("normal_mixture", 0.5)
    x = spec.sample(r, 200_000)
    assert x.mean() == pytest.approx(spec.offset + 0.9, abs=0.02)
    assert stats.kstest(x, spec.cdf).pvalue > 0.01
    spec = Sim.ErrorLawSpec("gpd_log", 0.05)
    assert spec.quantile(0.05) == pytest.approx(gpd_log_ppf(0.05, GpdParams(spec.offset, 3.0)), abs=1e-12)


def test_design_covariance_and_moments():
    cov = Sim.design_covariance()
    assert cov.shape == (8, 8)
    assert cov[0, 3] == 0.125 and np.all(np.diag(cov) == 1.0)
    x = Sim.make_design(100_000, np.random.default_rng(2))
    np.testing.assert_allclose(np.cov(x.T), cov, atol=0.01)
    se = 1 / math.sqrt(x.shape[0])
    assert np.all(np.abs(x.mean(axis=0)) < 3.5 * se)
    with pytest.raises(ValueError):
        Sim.make_design(0, np.random.default_rng())


def test_scenario_validation_and_full_scale():
    sc = Sim.SimScenario()
    assert (sc.replicates, sc.burn_in, sc.thin, sc.keep) == (20, 10_000, 5, 2_000)
    full = sc.full_scale()
    assert (full.replicates, full.burn_in, full.thin, full.keep) == (100, 50_000, 20, 5_000)
    np.testing.assert_array_equal(sc.beta, [3, 1.5, 0, 0, 2, 0, 0, 0])
    assert Sim.SimScenario(beta_setting="dense").beta.tolist() == [0.85] * 8
    assert Sim.SimScenario(beta_setting="very_sparse").beta.tolist() == [5.0] + [0.0] * 7
    for bad in (dict(error_law="t"), dict(beta_setting="x"), dict(n_train=0), dict(models=("ols",))):
        with pytest.raises(ValueError):
            Sim.SimScenario(**bad)
    assert sc.model_config("al").gamma_fixed_at_zero and not sc.model_config("gal").gamma_fixed_at_zero
    assert sc.model_config("gal").lasso is not None


def test_generate_data_shapes_and_truth():
    sc = Sim.SimScenario(n_train=30, n_test=20)
    train, test = Sim.generate_data(sc, np.random.default_rng(3))
    assert train.x.shape == (30, 9) and test.x.shape == (20, 9)
    np.testing.assert_array_equal(train.x[:, 0], 1.0)


def tiny_scenario(**kw):
    base = dict(n_train=40, n_test=30, replicates=3, burn_in=200, thin=1, keep=100, seed=5)
    base.update(kw)
    return Sim.SimScenario(**base)


def test_run_scenario_deterministic_and_worker_independent():
    sc = tiny_scenario()
    a = Sim.run_scenario(sc, workers=1)
    b = Sim.run_scenario(sc, workers=1)
    c = Sim.run_scenario(sc, workers=2)
    assert a.rows == b.rows == c.rows
    assert len(a.rows) == 6 and all(r["status"] == "ok" for r in a.rows)
    d = Sim.run_scenario(tiny_scenario(seed=6), workers=1)
    assert d.rows != a.rows


def test_replicate_models_share_data():
    sc = tiny_scenario(replicates=1)
    seq = np.random.SeedSequence(0)
    rows = Sim.run_replicate(sc, 0, seq)
    assert [r["model"] for r in rows] == ["al", "gal"]
    assert rows[0]["gamma_mean"] == 0.0
    # the AL-only run sees the same data, so its AL row is identical
    only_al = Sim.run_replicate(tiny_scenario(replicates=1, models=("al",)), 0, np.random.SeedSequence(0))
    assert only_al[0] == rows[0]


def test_summary_table_and_failures():
    res = Sim.run_scenario(tiny_scenario(replicates=2), workers=1)
    res.rows.append(dict(replicate=2, model="gal", status="failed", error="FloatingPointError: x"))
    assert res.failures == {"al": 0, "gal": 1}
    summ = {(r["model"], r["criterion"]): r for r in res.summary()}
    assert summ["gal", "cie"]["n_ok"] == 2 and summ["gal", "cie"]["n_failed"] == 1
    assert summ["al", "mcl"]["median"] == pytest.approx(np.median(res.values("al", "mcl")))
    table = res.table()
    assert [r["criterion"] for r in table] == list(Sim.CRITERIA)
    assert set(table[0]) == {"criterion", "AL", "GAL"}
    assert "(" in table[0]["AL"]
    for r in res.rows:
        if r["status"] == "ok":
            assert 0 <= r["cie"] <= 1 and r["mcl"] >= 0 and r["ppl_check_P"] >= 0


def test_threads_env(monkeypatch):
    monkeypatch.setenv(Sim.THREADS_ENV, "3")
    assert Sim.default_workers() == 3
    monkeypatch.setenv(Sim.THREADS_ENV, "x")
    with pytest.raises(ValueError):
        Sim.default_workers()
    monkeypatch.delenv(Sim.THREADS_ENV)
    assert Sim.default_workers() == 1

import csv
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from galqr import io
from galqr.cli import main
from galqr.config import FIT_SCHEMA, apply_transform, fit_settings, load_toml, resolve_prior, sim_scenario, validate

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "fixture.csv"
FIXTURE_TOML = DATA / "fixture.toml"


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def fit_args(out, *extra, config=FIXTURE_TOML, data=FIXTURE):
    return ["fit", "--config", str(config), "--data", str(data), "--out", str(out), *extra]


# ---------------------------------------------------------------------------
# config and transforms
# ---------------------------------------------------------------------------

def test_unknown_keys_and_types_are_errors():
    with pytest.raises(ValueError, match="unknown key"):
        validate({"prior": {"a_sigmaa": 1.0}}, FIT_SCHEMA)
    with pytest.raises(ValueError, match="unknown section"):
        validate({"priors": {}}, FIT_SCHEMA)
    with pytest.raises(ValueError, match="wrong type"):
        validate({"chain": {"burn_in": "10"}}, FIT_SCHEMA)
    with pytest.raises(ValueError, match="wrong type"):
        validate({"model": {"p0": True}}, FIT_SCHEMA)


def test_fit_settings_overrides_and_prior():
    raw = {"model": {"p0": 0.3, "type": "al"}, "prior": {"beta_var": 4.0}, "chain": {"seed": 1}}
    s = fit_settings(raw, dict(p0=0.7, seed=9, model="gal"))
    assert s.config.p0 == 0.7 and s.config.seed == 9 and not s.config.gamma_fixed_at_zero
    cfg = resolve_prior(s, 3)
    np.testing.assert_array_equal(cfg.Sigma0, 4.0 * np.eye(3))
    assert fit_settings(raw).config.gamma_fixed_at_zero
    with pytest.raises(ValueError):
        fit_settings({"prior": {"beta_var": 1.0, "Sigma0": [[1.0]]}})
    with pytest.raises(ValueError):
        fit_settings({"model": {"type": "ols"}})
    with pytest.raises(ValueError):
        fit_settings({"model": {"tobit": True}})
    assert fit_settings({}, dict(lasso=True)).config.lasso is not None


def test_sim_scenario_from_config():
    sc = sim_scenario({"scenario": {"p0": 0.25, "models": ["gal"], "replicates": 2}}, dict(seed=4))
    assert sc.p0 == 0.25 and sc.models == ("gal",) and sc.seed == 4
    with pytest.raises(ValueError):
        sim_scenario({"scenario": {"reps": 2}})


def test_transform_directives():
    t = {"x": np.array([1.0, 2.0, 4.0]), "z": np.array([2.0, 0.5, 1.0])}
    np.testing.assert_array_equal(apply_transform(t, "x^2"), [1, 4, 16])
    np.testing.assert_array_equal(apply_transform(t, " x * z "), [2, 1, 4])
    np.testing.assert_allclose(apply_transform(t, "log(x)"), np.log(t["x"]))
    np.testing.assert_allclose(apply_transform(t, "sqrt(z)"), np.sqrt(t["z"]))
    for bad in ("q", "x^", "x+z", "log(q)"):
        with pytest.raises(ValueError):
            apply_transform(t, bad)
    with pytest.raises(ValueError):
        apply_transform({"x": np.array([-1.0])}, "log(x)")


def test_bad_toml_is_value_error(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[model\np0 = ")
    with pytest.raises(ValueError):
        load_toml(p)


# ---------------------------------------------------------------------------
# io
# ---------------------------------------------------------------------------

def test_read_table_errors_name_row_and_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("y,x\n1,2\n3,abc\n")
    with pytest.raises(ValueError, match=r"row 3, column 'x'"):
        io.read_table(p)
    p.write_text("y,x\n1,2\n3,nan\n")
    with pytest.raises(ValueError, match=r"row 3, column 'x'"):
        io.read_table(p)
    p.write_text("y,x\n1,2,3\n")
    with pytest.raises(ValueError, match="row 2"):
        io.read_table(p)
    p.write_text("y,y\n1,2\n")
    with pytest.raises(ValueError):
        io.read_table(p)
    p.write_text("")
    with pytest.raises(ValueError):
        io.read_table(p)


def test_samples_roundtrip(tmp_path):
    assert main(fit_args(tmp_path / "a")) == 0
    s = io.read_samples(tmp_path / "a" / "samples.csv")
    assert s.beta.shape == (300, 3) and s.p0 == 0.5 and s.seed == 3
    assert s.names == ["intercept", "x1", "x2"]
    io.write_samples(s, tmp_path / "copy.csv", dict(model="gal", coefficient_names=s.names))
    assert (tmp_path / "copy.csv").read_bytes() == (tmp_path / "a" / "samples.csv").read_bytes()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def test_fit_end_to_end_fast_and_complete(tmp_path):
    out = tmp_path / "fit"
    t0 = time.perf_counter()
    assert main(fit_args(out)) == 0
    assert time.perf_counter() - t0 < 10
    for name in ("samples.csv", "samples.meta.json", "summary.csv", "diagnostics.json", "density.csv",
                 "manifest.json", "config.toml"):
        assert (out / name).exists(), name
    assert not (out / "error.json").exists()
    summary = read_csv(out / "summary.csv")
    assert [r["parameter"] for r in summary] == ["beta_0", "beta_1", "beta_2", "sigma", "gamma"]
    assert set(summary[0]) == {"parameter", "name", "mean", "sd", "q2_5", "q50", "q97_5"}
    diag = json.loads((out / "diagnostics.json").read_text())
    assert 0 < diag["acceptance_rate"] < 1
    dens = read_csv(out / "density.csv")
    assert len(dens) == 512
    g = np.array([float(r["error"]) for r in dens])
    d = np.array([float(r["density"]) for r in dens])
    assert g[0] == pytest.approx(-g[-1]) and np.all(d >= 0)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["command"] == "fit" and manifest["wall_clock_seconds"] >= 0
    assert set(manifest["outputs"]) >= {"samples.csv", "summary.csv"}


def test_same_seed_byte_identical_and_rerun(tmp_path):
    assert main(fit_args(tmp_path / "a")) == 0
    assert main(fit_args(tmp_path / "b")) == 0
    a = (tmp_path / "a" / "samples.csv").read_bytes()
    assert a == (tmp_path / "b" / "samples.csv").read_bytes()
    assert main(fit_args(tmp_path / "c", "--seed", "4")) == 0
    assert a != (tmp_path / "c" / "samples.csv").read_bytes()
    assert main(["rerun", "--manifest", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "r")]) == 0
    for name in ("samples.csv", "summary.csv", "density.csv", "diagnostics.json"):
        assert (tmp_path / "r" / name).read_bytes() == (tmp_path / "a" / name).read_bytes(), name


def test_rerun_bad_manifest(tmp_path):
    (tmp_path / "m.json").write_text("{}")
    assert main(["rerun", "--manifest", str(tmp_path / "m.json"), "--out", str(tmp_path / "o")]) == 2


def test_quadratic_directive_and_al_model(tmp_path):
    cfg = tmp_path / "q.toml"
    cfg.write_text(FIXTURE_TOML.read_text().replace('["x1", "x2"]', '["x1", "x1^2"]'))
    out = tmp_path / "q"
    assert main(fit_args(out, "--model", "al", config=cfg)) == 0
    summary = read_csv(out / "summary.csv")
    assert [r["name"] for r in summary[:3]] == ["intercept", "x1", "x1^2"]
    assert float(next(r for r in summary if r["parameter"] == "gamma")["sd"]) == 0.0


def test_lasso_and_tobit_fits(tmp_path):
    assert main(fit_args(tmp_path / "l", "--lasso")) == 0
    assert "omega_1" in read_csv(tmp_path / "l" / "samples.csv")[0]
    out = tmp_path / "t"
    assert main(fit_args(out, "--tobit", config=DATA / "fixture_censored.toml",
                         data=DATA / "fixture_censored.csv")) == 0
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["n_censored"] == 9 and diag["model"] == "gal-tobit"


def test_error_record_on_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,x1,x2\n1,2,3\n4,oops,6\n")
    out = tmp_path / "e"
    assert main(fit_args(out, data=bad)) == 2
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "ValueError" and "row 3" in err["message"] and "x1" in err["message"]
    assert not (out / "manifest.json").exists()

    cfg = tmp_path / "c.toml"
    cfg.write_text(FIXTURE_TOML.read_text() + "\n[prior]\nbogus = 1\n")
    assert main(fit_args(tmp_path / "e2", config=cfg)) == 2
    assert "bogus" in json.loads((tmp_path / "e2" / "error.json").read_text())["message"]

    cfg.write_text(FIXTURE_TOML.read_text().replace('"x2"', '"x9"'))
    assert main(fit_args(tmp_path / "e3", config=cfg)) == 2


def test_success_clears_stale_error(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    (out / "error.json").write_text("{}")
    assert main(fit_args(out)) == 0
    assert not (out / "error.json").exists()


def test_assess_bic_arithmetic(tmp_path):
    out = tmp_path / "a"
    assert main(["assess", "--loglik", "-666", "--k", "4", "--n", "298", "--out", str(out)]) == 0
    rows = read_csv(out / "report.csv")
    assert rows[0]["criterion"] == "bic" and round(float(rows[0]["value"])) == 1355
    assert main(["assess", "--loglik", "-1874", "--k", "10", "--n", "428", "--censored-bic",
                 "--out", str(tmp_path / "b")]) == 0
    rows = read_csv(tmp_path / "b" / "report.csv")
    assert rows[0]["criterion"] == "bic_censored" and round(float(rows[0]["value"])) == 3809
    assert main(["assess", "--loglik", "-1", "--out", str(tmp_path / "c")]) == 2


def test_assess_from_fit(tmp_path):
    assert main(fit_args(tmp_path / "f")) == 0
    out = tmp_path / "a"
    assert main(["assess", "--config", str(FIXTURE_TOML), "--samples", str(tmp_path / "f" / "samples.csv"),
                 "--data", str(FIXTURE), "--out", str(out)]) == 0
    rows = {r["criterion"]: float(r["value"]) for r in read_csv(out / "report.csv")}
    assert set(rows) == {"loglik", "bic", "ppl_quadratic_D", "ppl_quadratic_P", "ppl_quadratic_G",
                         "ppl_check_D", "ppl_check_P", "ppl_check_G"}
    assert rows["ppl_check_P"] >= 0
    assert rows["bic"] == pytest.approx(-2 * rows["loglik"] + 5 * math.log(20))
    assert all(r["model"] == "gal" for r in read_csv(out / "report.csv"))


def test_simulate_command(tmp_path):
    cfg = tmp_path / "s.toml"
    cfg.write_text('[scenario]\nreplicates = 2\nburn_in = 100\nthin = 1\nkeep = 50\nn_train = 30\nn_test = 20\n')
    out = tmp_path / "s"
    assert main(["simulate", "--config", str(cfg), "--seed", "1", "--out", str(out)]) == 0
    assert len(read_csv(out / "replicates.csv")) == 4
    table = read_csv(out / "table.csv")
    assert [r["criterion"] for r in table] == ["cie", "mcl", "ppl_quadratic", "ppl_check"]
    assert list(table[0]) == ["criterion", "AL", "GAL"]
    assert json.loads((out / "scenario.json").read_text())["seed"] == 1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out

import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from penprox import reduced_prox
from penprox.cli import main
from penprox.objective import half_cauchy_rho, penalty_value_grad

SCHEMA_PATH = Path(__file__).parent.parent / "schemas" / "fit_report.schema.json"


@pytest.fixture
def runner():
    return CliRunner()


def _simulate(runner, out, n=300, p=12, n_active=3, extra=()):
    args = ["simulate", "--n", str(n), "--p", str(p), "--n-active", str(n_active),
            "--seed", "2", "--out", str(out), *extra]
    res = runner.invoke(main, args, catch_exceptions=False)
    assert res.exit_code == 0, res.output
    return out


def test_simulate_then_fit_round_trip(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim")
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(sim / "data.csv"), "--response", "y",
        "--tau", "7.5", "--seed", "0", "--max-iters", "1500",
        "--out", str(outdir),
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    report = json.loads((outdir / "fit.json").read_text())
    assert report["schema"] == "penprox-fit-report/1"
    assert report["nonzero_count"] == len(report["nonzero"])
    zeros = [n for n, b in report["coefficients"].items() if b == 0.0]
    assert len(zeros) == report["n_model_columns"] - report["nonzero_count"]
    assert (outdir / "fit_trace.png").exists()


def test_fit_report_validates_against_schema(runner, tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    sim = _simulate(runner, tmp_path / "sim")
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(sim / "data.csv"), "--response", "y",
        "--tau", "7.5", "--max-iters", "800", "--out", str(outdir), "--no-plots",
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    schema = json.loads(SCHEMA_PATH.read_text())
    report = json.loads((outdir / "fit.json").read_text())
    jsonschema.validate(report, schema)


def test_fit_huge_tau_all_zero_report(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim")
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(sim / "data.csv"), "--response", "y",
        "--tau", str(1e6 * 300), "--max-iters", "800", "--out", str(outdir), "--no-plots",
    ], catch_exceptions=False)
    assert res.exit_code == 0
    report = json.loads((outdir / "fit.json").read_text())
    coefs = np.array(list(report["coefficients"].values()))
    assert np.all(coefs[:-1] == 0.0)  # all but the unpenalized intercept
    assert set(report["nonzero"]) <= {"(intercept)"}


def test_fit_malformed_csv_exit_2(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,y\n1,2\nzork,3\n")
    res = runner.invoke(main, ["fit", "--data", str(bad), "--response", "y",
                               "--tau", "1.0", "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_fit_missing_tau_exit_1(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim")
    res = runner.invoke(main, ["fit", "--data", str(sim / "data.csv"), "--response", "y",
                               "--out", str(tmp_path / "o")])
    assert res.exit_code == 1


def test_config_file_merging_and_unknown_key(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"penalty": {"tau": 7.5}, "optimizer": {"max_iters": 400}}))
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(sim / "data.csv"), "--response", "y",
        "--config", str(cfg), "--out", str(outdir), "--no-plots",
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    report = json.loads((outdir / "fit.json").read_text())
    assert report["tau"] == 7.5
    assert report["iterations"] <= 400

    cfg.write_text(json.dumps({"penalty": {"tau": 7.5, "mystery": 1}}))
    res = runner.invoke(main, ["fit", "--data", str(sim / "data.csv"), "--response", "y",
                               "--config", str(cfg), "--out", str(outdir)])
    assert res.exit_code == 1
    assert "mystery" in res.output or "mystery" in (res.stderr if hasattr(res, "stderr") else "")


def test_flag_overrides_config(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"penalty": {"tau": 1.0}}))
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(sim / "data.csv"), "--response", "y",
        "--config", str(cfg), "--tau", "33.0", "--max-iters", "300",
        "--out", str(outdir), "--no-plots",
    ], catch_exceptions=False)
    assert res.exit_code == 0
    assert json.loads((outdir / "fit.json").read_text())["tau"] == 33.0


def test_path_command_outputs(runner, tmp_path):
    sim = _simulate(runner, tmp_path / "sim", n=240, p=10)
    outdir = tmp_path / "path"
    res = runner.invoke(main, [
        "path", "--data", str(sim / "data.csv"), "--response", "y",
        "--tau-grid", "log:240000:2.4:6", "--max-iters", "400",
        "--median-window", "3", "--out", str(outdir),
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    lines = (outdir / "path.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:3] == ["tau", "nonzero_count", "heldout_nll"]
    assert len(lines) == 7
    first = np.array(lines[1].split(","), dtype=float)
    assert first[1] == 0.0  # strongest penalty kills everything
    report = json.loads((outdir / "path.json").read_text())
    assert report["selected_tau"] in report["taus"]
    assert (outdir / "path.png").exists()
    assert (outdir / "path_smoothed.csv").exists()


def test_simulate_group_structure_files(runner, tmp_path):
    out = tmp_path / "sim"
    res = runner.invoke(main, [
        "simulate", "--structure", "group", "--n", "100", "--p", "20",
        "--n-active", "2", "--group-size", "5", "--seed", "1", "--out", str(out),
    ], catch_exceptions=False)
    assert res.exit_code == 0
    assert (out / "groups.csv").exists()
    truth = json.loads((out / "truth.json").read_text())
    assert len(truth["true_beta"]) == 20
    assert truth["active_indices"]


def test_fit_with_group_prior_from_files(runner, tmp_path):
    out = tmp_path / "sim"
    runner.invoke(main, [
        "simulate", "--structure", "group", "--n", "300", "--p", "20",
        "--n-active", "2", "--group-size", "5", "--seed", "1", "--out", str(out),
    ], catch_exceptions=False)
    outdir = tmp_path / "fit"
    res = runner.invoke(main, [
        "fit", "--data", str(out / "data.csv"), "--response", "y",
        "--prior", "sparse_group", "--groups", str(out / "groups.csv"),
        "--tau", "4.5", "--max-iters", "600", "--out", str(outdir), "--no-plots",
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    report = json.loads((outdir / "fit.json").read_text())
    assert report["prior"] == "sparse_group"
    assert report["gamma"] is not None and len(report["gamma"]) == 4


def test_prox_table_matches_reduced_prox(runner, tmp_path):
    outdir = tmp_path / "pt"
    res = runner.invoke(main, [
        "prox-table", "--b", "0.35", "--step", "0.5", "--lam0-max", "2",
        "--aa-max", "2", "--out", str(outdir),
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    lines = (outdir / "prox_table.csv").read_text().splitlines()[1:]
    assert len(lines) == 25
    for line in lines:
        lam0, aa, lam_star, _ = map(float, line.split(","))
        assert lam_star == pytest.approx(reduced_prox(lam0, aa, 0.35), abs=1e-12)
    assert (outdir / "prox_surface.png").exists()


def test_prox_table_regime_validation(runner, tmp_path):
    res = runner.invoke(main, ["prox-table", "--b", "1.5", "--out", str(tmp_path / "x")])
    assert res.exit_code == 1


def test_penalty_profile_matches_library(runner, tmp_path):
    outdir = tmp_path / "pp"
    res = runner.invoke(main, [
        "penalty-profile", "--tau", "1.0", "--beta-max", "2", "--step", "0.5",
        "--out", str(outdir),
    ], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    pp = half_cauchy_rho(1.0)
    lines = (outdir / "penalty_profile.csv").read_text().splitlines()[1:]
    assert len(lines) == 5
    for line in lines:
        ab, g, gp = map(float, line.split(","))
        g_ref, gp_ref, _ = penalty_value_grad(pp, ab)
        assert g == pytest.approx(g_ref, rel=1e-10)
        assert gp == pytest.approx(gp_ref, rel=1e-10)
    assert (outdir / "penalty_profile.png").exists()


def test_gradcheck_reports_all_targets(runner, tmp_path):
    out = tmp_path / "g.csv"
    res = runner.invoke(main, ["gradcheck", "--out", str(out)], catch_exceptions=False)
    assert res.exit_code == 0, res.output
    assert "likelihood:gaussian" in res.output
    assert "prior:overlapping_group" in res.output
    lines = out.read_text().splitlines()
    assert len(lines) == 9  # header + 5 likelihoods + 3 priors
    for line in lines[1:]:
        assert float(line.split(",")[1]) < 1e-5

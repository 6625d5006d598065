"""Command-line interface tests (in-process invocations)."""

import json

import numpy as np
import pytest

from mbrom.cli import main


def read_csv(path):
    return np.loadtxt(path, delimiter=",")


class TestGen:
    def test_burgers_dataset(self, tmp_path):
        out = tmp_path / "ds"
        rc = main([
            "gen", "burgers", "--re", "100", "--t1", "0.3", "--tm", "0.5",
            "--m", "20", "--nx", "201", "--out", str(out),
        ])
        assert rc == 0
        fields = read_csv(out / "fields.csv")
        assert fields.shape == (20, 201)
        meta = json.loads((out / "manifest.json").read_text())
        assert meta["fields"] == "fields.csv"

    def test_bubble_dataset_boundary_header(self, tmp_path):
        out = tmp_path / "ds"
        rc = main(["gen", "bubble", "--out", str(out)])
        assert rc == 0
        header = (out / "boundary.csv").read_text().splitlines()[0]
        assert header == "R"
        assert (out / "masks.csv").exists()

    def test_invalid_reynolds(self, tmp_path, capsys):
        rc = main(["gen", "burgers", "--re", "-1", "--out", str(tmp_path / "x")])
        assert rc == 1
        assert "error" in capsys.readouterr().err


@pytest.fixture(scope="module")
def built_model(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    ds = base / "ds"
    model = base / "model"
    assert main([
        "gen", "burgers", "--re", "100", "--nx", "201", "--out", str(ds),
    ]) == 0
    assert main(["build", str(ds), "--out", str(model)]) == 0
    return ds, model


class TestBuild:
    def test_report_contents(self, built_model):
        _, model = built_model
        report = json.loads((model / "report.json").read_text())
        assert report["R"] == 2
        stars = [report["t_star_pod"], report["t_star_gpr_a"]]
        assert report["t_star"] == min(stars)
        assert len(report["mode_hyperparameters"]) == 2
        assert len(report["ric"]) == 20

    def test_rebuild_byte_identical(self, built_model, tmp_path):
        ds, model = built_model
        again = tmp_path / "model2"
        assert main(["build", str(ds), "--out", str(again)]) == 0
        assert (model / "report.json").read_bytes() == \
            (again / "report.json").read_bytes()

    def test_config_file_flag_precedence(self, built_model, tmp_path):
        ds, _ = built_model
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"alpha_pod": 0.2}))
        out = tmp_path / "loose"
        assert main([
            "build", str(ds), "--out", str(out), "--config", str(cfgfile),
        ]) == 0
        loose = json.loads((out / "report.json").read_text())
        assert loose["R"] == 1  # config file applied
        out2 = tmp_path / "strict"
        assert main([
            "build", str(ds), "--out", str(out2), "--config", str(cfgfile),
            "--alpha-pod", "0.01",
        ]) == 0
        strict = json.loads((out2 / "report.json").read_text())
        assert strict["R"] == 2  # flag overrides the config file


class TestForecast:
    def test_with_truth(self, built_model, tmp_path):
        ds, model = built_model
        truth = tmp_path / "truth"
        assert main([
            "gen", "burgers", "--re", "100", "--nx", "201",
            "--t1", "0.6", "--tm", "0.7", "--m", "2", "--out", str(truth),
        ]) == 0
        out = tmp_path / "fc"
        rc = main([
            "forecast", str(model), "--t", "0.6", "--truth", str(truth),
            "--out", str(out),
        ])
        assert rc == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["relative_error"] <= 0.05
        field = read_csv(out / "field.csv")
        assert field.shape == (201, 2)

    def test_at_data_end_error_within_tail(self, built_model, tmp_path):
        ds, model = built_model
        truth = tmp_path / "truth_end"
        assert main([
            "gen", "burgers", "--re", "100", "--nx", "201",
            "--t1", "0.49", "--tm", "0.5", "--m", "2", "--out", str(truth),
        ]) == 0
        out = tmp_path / "fc_end"
        assert main([
            "forecast", str(model), "--t", "0.5", "--truth", str(truth),
            "--out", str(out),
        ]) == 0
        summary = json.loads((out / "summary.json").read_text())
        report = json.loads((model / "report.json").read_text())
        assert summary["relative_error"] <= report["rrms_tail"] + 1e-3

    def test_beyond_horizon_exit_code(self, built_model, tmp_path, capsys):
        _, model = built_model
        report = json.loads((model / "report.json").read_text())
        t_bad = report["t_star"] + 1.0
        rc = main([
            "forecast", str(model), "--t", str(t_bad),
            "--out", str(tmp_path / "nope"),
        ])
        assert rc == 2
        err = capsys.readouterr().err
        assert "t*" in err

    def test_force_allows_it(self, built_model, tmp_path):
        _, model = built_model
        report = json.loads((model / "report.json").read_text())
        out = tmp_path / "forced"
        rc = main([
            "forecast", str(model), "--t", str(report["t_star"] + 0.1),
            "--force", "--out", str(out),
        ])
        assert rc == 0
        assert json.loads((out / "summary.json").read_text())["forced"]


class TestHorizon:
    def test_prints_minimum(self, built_model, capsys):
        _, model = built_model
        assert main(["horizon", str(model)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["t_star"] == min(
            payload["t_star_pod"], payload["t_star_gpr_a"]
        )


class TestBubbleFileFlow:
    def test_gen_build_forecast(self, tmp_path):
        ds = tmp_path / "ds"
        model = tmp_path / "model"
        out = tmp_path / "fc"
        assert main(["gen", "bubble", "--out", str(ds)]) == 0
        assert main(["build", str(ds), "--out", str(model)]) == 0
        report = json.loads((model / "report.json").read_text())
        assert report["t_star_gpr_gamma"] is not None
        rc = main([
            "forecast", str(model), "--t", "64.0", "--force", "--out", str(out),
        ])
        assert rc == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["corrected_node_count"] > 0
        assert "R" in summary["boundary_values"]
        assert (out / "correction_report.csv").exists()

    def test_horizon_includes_boundary(self, tmp_path, capsys):
        ds = tmp_path / "ds"
        model = tmp_path / "model"
        assert main(["gen", "bubble", "--nr", "120", "--out", str(ds)]) == 0
        assert main(["build", str(ds), "--out", str(model)]) == 0
        capsys.readouterr()
        assert main(["horizon", str(model)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["t_star_gpr_gamma"] is not None
        assert payload["t_star"] == min(
            payload["t_star_pod"],
            payload["t_star_gpr_a"],
            payload["t_star_gpr_gamma"],
        )


class TestSeedEnv:
    def test_env_var_override(self, tmp_path, monkeypatch):
        ds = tmp_path / "ds"
        assert main([
            "gen", "burgers", "--re", "100", "--nx", "201", "--out", str(ds),
        ]) == 0
        monkeypatch.setenv("MBROM_SEED", "7")
        out = tmp_path / "m1"
        assert main(["build", str(ds), "--out", str(out)]) == 0
        assert json.loads((out / "report.json").read_text())["seed"] == 7
        out2 = tmp_path / "m2"
        assert main(["build", str(ds), "--out", str(out2), "--seed", "3"]) == 0
        assert json.loads((out2 / "report.json").read_text())["seed"] == 3


class TestBench:
    def test_error_growth_monotone(self, tmp_path):
        out = tmp_path / "growth"
        assert main(["bench", "error-growth", "--out", str(out)]) == 0
        rows = np.loadtxt(out / "error_growth.csv", delimiter=",", skiprows=1)
        assert rows.shape == (10, 3)
        assert np.all(np.diff(rows[:, 1]) >= -1e-12)
        assert np.all(np.diff(rows[:, 2]) >= -1e-12)

    def test_burgers_sweep_decreases_then_plateaus(self, tmp_path):
        out = tmp_path / "sweep"
        assert main(["bench", "burgers-sweep", "--out", str(out)]) == 0
        rows = np.loadtxt(out / "burgers_sweep.csv", delimiter=",", skiprows=1)
        re100 = rows[rows[:, 0] == 100.0]
        errs = re100[np.argsort(re100[:, 1]), 2]
        assert errs[0] > errs[1] > errs[2]          # decreasing at low R
        plateau = errs[4:]
        assert plateau.max() / plateau.min() < 1.2  # flat once GP error wins

    def test_galerkin_compare_columns(self, tmp_path):
        out = tmp_path / "cmp"
        assert main(["bench", "galerkin-compare", "--out", str(out)]) == 0
        rows = np.loadtxt(out / "galerkin_compare.csv", delimiter=",", skiprows=1)
        assert rows.shape == (4, 4)
        assert np.all(rows[:, 2] <= 0.25) and np.all(rows[:, 3] <= 0.25)

    def test_bubble_suite(self, tmp_path):
        out = tmp_path / "bubble"
        assert main(["bench", "bubble", "--out", str(out)]) == 0
        summary = json.loads((out / "bubble_summary.json").read_text())
        assert summary["corrected_node_count"] > 0
        assert summary["max_err_exposed_after"] < summary["max_err_exposed_before"]
        assert summary["rel_error_corrected"] <= 0.1
        fields = np.loadtxt(out / "bubble_fields.csv", delimiter=",", skiprows=1)
        assert fields.shape[1] == 4


class TestAdaptive:
    def test_handoff_log(self, tmp_path):
        out = tmp_path / "adaptive"
        rc = main([
            "adaptive", "--re", "100", "--t-start", "0.3", "--t-target", "0.9",
            "--beta-gpr-a", "0.01", "--out", str(out),
        ])
        assert rc == 0
        lines = (out / "handoffs.csv").read_text().splitlines()
        assert lines[0].startswith("round,")
        rows = [line.split(",") for line in lines[1:]]
        stars = [float(r[3]) for r in rows]
        assert all(a < b for a, b in zip(stars, stars[1:])) or len(stars) == 1
        errs = [float(r[6]) for r in rows]
        assert all(e <= 0.1 for e in errs)

import json

import numpy as np
import pytest

from okidera import serialize
from okidera.analysis import compare_frequency_responses
from okidera.cli import main
from okidera.state_space import StateSpaceModel, TimeSeriesDataset


def run(*argv):
    return main([str(a) for a in argv])


class TestIdentifyCommand:
    def test_smallest_legal_run(self, tmp_path, capsys):
        data = TimeSeriesDataset(u=[1.0, 1.0, 1.0], y=[0.0, 1.0, 2.0], sample_rate=10.0)
        serialize.save_dataset(data, tmp_path / "d.csv")
        rc = run("identify", "--input", tmp_path / "d.csv", "--p", 2, "--order", 1,
                 "--output-dir", tmp_path / "out")
        assert rc == 0
        model = serialize.load_model(tmp_path / "out" / "model.json")
        assert model.order == 1
        assert (tmp_path / "out" / "singular_values.csv").exists()

    def test_corrupted_csv_reports_location(self, tmp_path, capsys):
        (tmp_path / "bad.csv").write_text("k,u_0,y_0\n0,1.0,2.0\n1,x,2.0\n")
        rc = run("identify", "--input", tmp_path / "bad.csv", "--p", 1, "--order", 1,
                 "--sample-rate", 1.0, "--output-dir", tmp_path)
        assert rc != 0
        err = capsys.readouterr().err
        assert "bad.csv" in err and "line 3" in err and "column 2" in err

    def test_horizon_checked_before_outputs(self, tmp_path, capsys):
        data = TimeSeriesDataset(u=np.ones(5), y=np.ones(5), sample_rate=1.0)
        serialize.save_dataset(data, tmp_path / "d.csv")
        rc = run("identify", "--input", tmp_path / "d.csv", "--p", 5, "--order", 1,
                 "--output-dir", tmp_path / "out")
        assert rc != 0
        assert "build_regressors" in capsys.readouterr().err
        assert not (tmp_path / "out" / "model.json").exists()

    def test_order_threshold_exclusive(self, tmp_path, capsys):
        data = TimeSeriesDataset(u=np.ones(5), y=np.ones(5), sample_rate=1.0)
        serialize.save_dataset(data, tmp_path / "d.csv")
        rc = run("identify", "--input", tmp_path / "d.csv", "--p", 2,
                 "--order", 1, "--threshold", 1e-3, "--output-dir", tmp_path)
        assert rc != 0

    def test_truth_comparison_written(self, tmp_path):
        run("benchmark", "--output-dir", tmp_path / "bm", "--seed", 3, "--length", 2000)
        rc = run("identify", "--input", tmp_path / "bm" / "dataset.csv",
                 "--p", 100, "--order", 4, "--output-dir", tmp_path / "id",
                 "--truth", tmp_path / "bm" / "truth_model.json")
        assert rc == 0
        assert (tmp_path / "id" / "comparison.csv").exists()


class TestPaperIvPreset:
    def test_benchmark_and_identify(self, tmp_path, capsys):
        rc = run("benchmark", "--output-dir", tmp_path / "bm", "--seed", 8, "--paper-iv")
        assert rc == 0
        manifest = json.loads((tmp_path / "bm" / "dataset.manifest.json").read_text())
        assert manifest["length"] == 1600
        assert manifest["sample_rate"] == 38520.0

        rc = run("identify", "--input", tmp_path / "bm" / "dataset.csv", "--paper-iv",
                 "--output-dir", tmp_path / "id")
        assert rc == 0
        out = capsys.readouterr().out
        assert "order 10" in out
        model = serialize.load_model(tmp_path / "id" / "model.json")
        assert model.order == 10
        assert model.observer_spectral_radius < 1.0


class TestBenchmarkCommand:
    def test_smoke_outputs(self, tmp_path):
        rc = run("benchmark", "--output-dir", tmp_path, "--seed", 1, "--length", 500)
        assert rc == 0
        data = serialize.load_dataset(tmp_path / "dataset.csv")
        assert data.length == 500
        truth = serialize.load_model(tmp_path / "truth_model.json")
        assert isinstance(truth, StateSpaceModel)
        assert truth.n == 4

    def test_zero_noise_flag(self, tmp_path):
        run("benchmark", "--output-dir", tmp_path / "a", "--seed", 1, "--length", 400, "--zero-noise")
        run("benchmark", "--output-dir", tmp_path / "b", "--seed", 2, "--length", 400, "--zero-noise")
        ya = serialize.load_dataset(tmp_path / "a" / "dataset.csv").y
        yb = serialize.load_dataset(tmp_path / "b" / "dataset.csv").y
        np.testing.assert_array_equal(ya, yb)  # no noise, seed irrelevant


class TestBodeCommand:
    def test_feedthrough_only_model_flat(self, tmp_path):
        model = StateSpaceModel(A=np.zeros((1, 1)), B=np.zeros((1, 1)), C=np.zeros((1, 1)), D=[[2.0]])
        serialize.save_model(model, tmp_path / "m.json")
        rc = run("bode", "--model", tmp_path / "m.json", "--sample-rate", 1000.0,
                 "--output", tmp_path / "r.csv", "--points", 12)
        assert rc == 0
        resp = serialize.load_frequency_response(tmp_path / "r.csv", sample_rate=1000.0)
        np.testing.assert_allclose(np.abs(resp.response), 2.0, atol=1e-14)
        mag_col = [line.split(",")[3] for line in (tmp_path / "r.csv").read_text().splitlines()[1:]]
        assert len(set(mag_col)) == 1  # all rows identical magnitude

    def test_scalar_dc_gain_row(self, tmp_path):
        model = StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
        serialize.save_model(model, tmp_path / "m.json")
        rc = run("bode", "--model", tmp_path / "m.json", "--sample-rate", 100.0,
                 "--output", tmp_path / "r.csv", "--fmin", 0.0, "--fmax", 40.0, "--points", 5)
        assert rc == 0
        first = (tmp_path / "r.csv").read_text().splitlines()[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[3]) == pytest.approx(6.0206, abs=1e-3)

    def test_frequency_above_nyquist_rejected(self, tmp_path, capsys):
        model = StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
        serialize.save_model(model, tmp_path / "m.json")
        rc = run("bode", "--model", tmp_path / "m.json", "--sample-rate", 100.0,
                 "--output", tmp_path / "r.csv", "--fmax", 60.0)
        assert rc != 0
        assert "60" in capsys.readouterr().err


class TestCompareCommand:
    def test_csv_round_trip_matches_in_process(self, tmp_path, capsys):
        run("benchmark", "--output-dir", tmp_path / "bm", "--seed", 5, "--length", 2000)
        run("identify", "--input", tmp_path / "bm" / "dataset.csv", "--p", 100,
            "--order", 4, "--output-dir", tmp_path / "id")
        for name, mdl in (("est", tmp_path / "id" / "model.json"),
                          ("true", tmp_path / "bm" / "truth_model.json")):
            run("bode", "--model", mdl, "--sample-rate", 38520.0,
                "--output", tmp_path / f"{name}.csv")
        rc = run("compare", "--a", tmp_path / "est.csv", "--b", tmp_path / "true.csv",
                 "--output", tmp_path / "cmp.csv")
        assert rc == 0
        printed = capsys.readouterr().out

        resp_a = serialize.load_frequency_response(tmp_path / "est.csv")
        resp_b = serialize.load_frequency_response(tmp_path / "true.csv")
        report = compare_frequency_responses(resp_a, resp_b)
        assert format(report.max_mag_err_db, ".17g") in printed


class TestValidateCommand:
    def test_report_written(self, tmp_path, capsys):
        run("benchmark", "--output-dir", tmp_path / "bm", "--seed", 6, "--length", 2000)
        run("identify", "--input", tmp_path / "bm" / "dataset.csv", "--p", 100,
            "--order", 4, "--output-dir", tmp_path / "id")
        rc = run("validate", "--model", tmp_path / "id" / "model.json",
                 "--input", tmp_path / "bm" / "dataset.csv", "--burn-in", 100,
                 "--output", tmp_path / "report.json")
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["observer_spectral_radius"] < 1.0
        assert len(report["residual_autocorr"]) == 20
        assert not report["divergent"]

    def test_plain_plant_rejected(self, tmp_path, capsys):
        model = StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
        serialize.save_model(model, tmp_path / "m.json")
        data = TimeSeriesDataset(u=np.ones(10), y=np.ones(10), sample_rate=1.0)
        serialize.save_dataset(data, tmp_path / "d.csv")
        rc = run("validate", "--model", tmp_path / "m.json", "--input", tmp_path / "d.csv")
        assert rc != 0
        assert "Kalman gain" in capsys.readouterr().err

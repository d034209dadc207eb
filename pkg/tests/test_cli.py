import csv
import io
import json
from contextlib import redirect_stdout

import pytest

import proprisk as pr
from proprisk.cli import main
from proprisk.reporting import report_from_json, write_dataset_csv


@pytest.fixture()
def data_csv(tmp_path):
    sc = pr.make_scenario(pr.Model.PPR_EU, 0.5, 0.3, 120, seed=31)
    path = tmp_path / "trial.csv"
    write_dataset_csv(pr.simulate_dataset(sc, 0), path)
    return str(path)


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


class TestFit:
    def test_structured_output(self, data_csv):
        code, out = run_cli("fit", "--data", data_csv, "--bootstrap", "30", "--seed", "1",
                            "--format", "structured")
        assert code == 0
        report = report_from_json(out)
        assert report.ci_beta is not None
        assert report.ci_beta.level == 0.95

    def test_table_default(self, data_csv):
        code, out = run_cli("fit", "--data", data_csv, "--bootstrap", "0")
        assert code == 0
        assert "relative risk" in out

    def test_no_bootstrap_skips_ci(self, data_csv):
        code, out = run_cli("fit", "--data", data_csv, "--bootstrap", "0",
                            "--format", "structured")
        assert json.loads(out)["ci_beta"] is None

    def test_deterministic_given_seed(self, data_csv):
        _, a = run_cli("fit", "--data", data_csv, "--bootstrap", "20", "--seed", "5",
                       "--format", "structured")
        _, b = run_cli("fit", "--data", data_csv, "--bootstrap", "20", "--seed", "5",
                       "--format", "structured")
        assert a == b

    def test_level_flag(self, data_csv):
        _, out = run_cli("fit", "--data", data_csv, "--bootstrap", "20", "--level", "0.9",
                         "--format", "structured")
        assert json.loads(out)["ci_beta"]["level"] == 0.9

    def test_validation_exit_code(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,status,group\n-1.0,1,1\n")
        code, _ = run_cli("fit", "--data", str(path))
        assert code == 2

    def test_estimation_failure_exit_code(self, tmp_path):
        path = tmp_path / "nofit.csv"
        path.write_text("time,status,group\n1.0,1,1\n2.0,0,0\n")
        code, _ = run_cli("fit", "--data", str(path), "--bootstrap", "0")
        assert code == 3


class TestParametricCommands:
    def test_ppr_fit(self, data_csv):
        code, out = run_cli("ppr-fit", "--data", data_csv)
        payload = json.loads(out)
        assert code == 0
        assert payload["converged"]
        assert payload["rr"] == pytest.approx(
            (payload["theta1"] / payload["theta0"]) ** payload["alpha"], rel=1e-9
        )

    def test_cox(self, data_csv):
        code, out = run_cli("cox", "--data", data_csv)
        payload = json.loads(out)
        assert code == 0
        assert payload["converged"]
        assert payload["ci_hr"]["lower"] < payload["hr"] < payload["ci_hr"]["upper"]

    def test_cox_nonconvergence_exit_code(self, tmp_path):
        path = tmp_path / "mono.csv"
        path.write_text(
            "time,status,group\n1.0,1,1\n1.5,1,1\n5.0,1,0\n6.0,1,0\n"
        )
        code, out = run_cli("cox", "--data", str(path))
        assert code == 4
        assert not json.loads(out)["converged"]


class TestSimulateCommand:
    def test_writes_replicates(self, tmp_path):
        grid = pr.default_grid()
        sc = [s for s in grid if s.n_participants == 50][0]
        path = tmp_path / "scenario.json"
        from proprisk.simulate import scenario_to_dict

        path.write_text(json.dumps([scenario_to_dict(sc)]))
        out_dir = tmp_path / "out"
        code, _ = run_cli("simulate", "--scenario", str(path), "--reps", "3",
                          "--seed", "9", "--out", str(out_dir))
        assert code == 0
        files = sorted(out_dir.glob("replicate_*.csv"))
        assert len(files) == 3
        data = pr.read_dataset_csv(files[0])
        assert len(data) == 50

    def test_rejects_multi_scenario_file(self, tmp_path):
        from proprisk.simulate import scenario_to_dict

        grid = pr.default_grid()[:2]
        path = tmp_path / "two.json"
        path.write_text(json.dumps([scenario_to_dict(s) for s in grid]))
        code, _ = run_cli("simulate", "--scenario", str(path), "--reps", "1",
                          "--seed", "1", "--out", str(tmp_path / "o"))
        assert code == 2


class TestStudyCommand:
    def test_small_grid(self, tmp_path):
        from proprisk.simulate import scenario_to_dict

        grid = [pr.make_scenario(pr.Model.PPR_EU, 0.0, 0.5, 40, seed=0),
                pr.make_scenario(pr.Model.WEIBULL_PH, 0.5, 0.3, 40, seed=0)]
        path = tmp_path / "grid.json"
        path.write_text(json.dumps([scenario_to_dict(s) for s in grid]))
        code, out = run_cli("study", "--grid", str(path), "--reps", "5", "--seed", "2")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][0] == "model"
        assert len(rows) == 3
        assert rows[1][0] == "ppr_eu"
        assert rows[2][0] == "weibull_ph"

    def test_deterministic(self, tmp_path):
        from proprisk.simulate import scenario_to_dict

        grid = [pr.make_scenario(pr.Model.PPR_EU, 0.25, 0.3, 30, seed=0)]
        path = tmp_path / "grid.json"
        path.write_text(json.dumps([scenario_to_dict(s) for s in grid]))
        _, a = run_cli("study", "--grid", str(path), "--reps", "4", "--seed", "3")
        _, b = run_cli("study", "--grid", str(path), "--reps", "4", "--seed", "3")
        assert a == b


class TestPlotData:
    @pytest.mark.parametrize("series,header", [
        ("cdf", ["time", "cdf_treatment", "cdf_control"]),
        ("beta_t", ["time", "beta_t"]),
        ("weights", ["time", "weight"]),
        ("nnt", ["time", "rd", "nnt"]),
    ])
    def test_series(self, data_csv, series, header):
        code, out = run_cli("plotdata", "--data", data_csv, "--series", series)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == header
        assert len(rows) > 2
        float(rows[1][0])  # parses as numbers

    def test_cdf_values_match_api(self, data_csv):
        data = pr.read_dataset_csv(data_csv)
        res = pr.nppr_fit(data)
        _, out = run_cli("plotdata", "--data", data_csv, "--series", "cdf")
        rows = list(csv.reader(io.StringIO(out)))[1:]
        t, c1, c0 = (float(v) for v in rows[0])
        assert c1 == pytest.approx(pr.cdf_at(res.curve1, t))
        assert c0 == pytest.approx(pr.cdf_at(res.curve0, t))

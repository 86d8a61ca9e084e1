import csv
import json

import numpy as np
import pytest

from mkinterp.cli import main

DATA_2ROW = "x1,y\n0,8\n1,9\n"


def write(path, text):
    path.write_text(text)
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def fitted_paths(tmp_path):
    data = write(tmp_path / "data.csv", DATA_2ROW)
    out = tmp_path / "interp.json"
    code = main(["fit", data, "--out", str(out), "--kernel", "power",
                 "--order", "4", "--truncation", "2", "--decay", "1.0",
                 "--domain=-1:1"])
    assert code == 0
    return data, out, tmp_path


class TestFit:
    def test_documented_example(self, fitted_paths):
        _, out, _ = fitted_paths
        doc = json.loads(out.read_text())
        np.testing.assert_allclose(doc["coefficients"], [1.0, 1.0], atol=1e-8)
        report = json.loads((out.parent / "interp.json.report.json").read_text())
        assert report["converged"] is True
        assert report["norm"] == pytest.approx(17 ** 0.75, rel=1e-8)

    def test_empty_value_field_exits_2(self, tmp_path, capsys):
        data = write(tmp_path / "bad.csv", "x1,y\n0,8\n1,\n")
        code = main(["fit", data, "--out", str(tmp_path / "o.json")])
        assert code == 2
        assert ":3:" in capsys.readouterr().err

    def test_duplicate_points_exit_2(self, tmp_path, capsys):
        data = write(tmp_path / "dup.csv", "x1,y\n0,8\n0,9\n")
        code = main(["fit", data, "--out", str(tmp_path / "o.json")])
        assert code == 2
        err = capsys.readouterr().err
        assert "rows 2 and 3" in err

    def test_missing_header_exit_2(self, tmp_path):
        data = write(tmp_path / "bad.csv", "a,b\n0,8\n")
        assert main(["fit", data, "--out", str(tmp_path / "o.json")]) == 2

    def test_truncation_below_n_exits_4(self, tmp_path):
        data = write(tmp_path / "d.csv", "x1,y\n0,1\n0.5,2\n1,3\n")
        code = main(["fit", data, "--out", str(tmp_path / "o.json"),
                     "--truncation", "2", "--order", "4"])
        assert code == 4

    def test_not_converged_exits_3_but_writes_report(self, tmp_path):
        # non-integer data keeps the residual above an unreachable tolerance
        data = write(tmp_path / "d.csv", "x1,y\n0,8.1\n1,9.7\n")
        out = tmp_path / "o.json"
        code = main(["fit", data, "--out", str(out), "--truncation", "2",
                     "--decay", "1.0", "--order", "4", "--tol", "1e-300"])
        assert code == 3
        report = json.loads((tmp_path / "o.json.report.json").read_text())
        assert report["converged"] is False
        assert out.exists()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = write(tmp_path / "run.cfg",
                    "kernel = power\norder = 2\ntruncation = 2\n"
                    "decay = 1.0\ndomain = -1:1\n")
        data = write(tmp_path / "d.csv", DATA_2ROW)
        out = tmp_path / "o.json"
        code = main(["fit", data, "--out", str(out), "--config", cfg,
                     "--order", "4"])
        assert code == 0
        assert json.loads(out.read_text())["order"] == 4


class TestEval:
    def test_round_trip_values(self, fitted_paths):
        _, out, tmp = fitted_paths
        pts = write(tmp / "pts.csv", "x1\n0\n0.5\n1\n")
        result = tmp / "vals.csv"
        assert main(["eval", str(out), "--points", pts, "--out", str(result)]) == 0
        rows = read_rows(result)
        assert rows[0] == ["x1", "s", "flag"]
        values = [float(r[1]) for r in rows[1:]]
        np.testing.assert_allclose(values, [8.0, 8.5, 9.0], atol=1e-7)

    def test_empty_point_list(self, fitted_paths):
        _, out, tmp = fitted_paths
        pts = write(tmp / "empty.csv", "x1\n")
        result = tmp / "vals.csv"
        assert main(["eval", str(out), "--points", pts, "--out", str(result)]) == 0
        assert read_rows(result) == [["x1", "s", "flag"]]

    def test_outside_domain_flagged_exit_5(self, fitted_paths):
        _, out, tmp = fitted_paths
        pts = write(tmp / "pts.csv", "x1\n0\n2.0\n")
        result = tmp / "vals.csv"
        assert main(["eval", str(out), "--points", pts, "--out", str(result)]) == 5
        rows = read_rows(result)
        assert rows[2][2] == "outside_domain"
        assert rows[1][2] == ""

    def test_schema_mismatch_exit_2(self, tmp_path):
        bad = write(tmp_path / "bad.json", "{}")
        assert main(["eval", bad, "--out", str(tmp_path / "v.csv")]) == 2

    def test_grid_evaluation(self, fitted_paths):
        _, out, tmp = fitted_paths
        result = tmp / "grid.csv"
        assert main(["eval", str(out), "--grid", "5", "--out", str(result)]) == 0
        rows = read_rows(result)
        assert len(rows) == 6
        assert float(rows[1][0]) == -1.0 and float(rows[5][0]) == 1.0


class TestPower:
    def test_report_contains_sqrt2(self, tmp_path):
        nodes = write(tmp_path / "nodes.csv", "x1,y\n0,0\n1,0\n")
        result = tmp_path / "power.csv"
        code = main(["power", nodes, "--out", str(result), "--kernel", "power",
                     "--truncation", "3", "--decay", "1.0", "--order", "2",
                     "--grid", "3", "--domain=-1:1"])
        assert code == 0
        rows = read_rows(result)
        assert rows[0] == ["x1", "p_m", "p_2", "bound"]
        at_minus1 = [r for r in rows[1:] if float(r[0]) == -1.0][0]
        assert float(at_minus1[1]) == pytest.approx(np.sqrt(2), rel=1e-8)
        assert float(at_minus1[3]) == pytest.approx(2 * np.sqrt(2), rel=1e-8)

    def test_pm_bounded_by_p2_and_zero_at_nodes(self, tmp_path):
        nodes = write(tmp_path / "nodes.csv", "x1,y\n0,0\n1,0\n")
        result = tmp_path / "power.csv"
        code = main(["power", nodes, "--out", str(result), "--truncation", "4",
                     "--order", "4", "--grid", "9"])
        assert code == 0
        for row in read_rows(result)[1:]:
            assert float(row[1]) <= float(row[2]) + 1e-8
            if float(row[0]) in (0.0, 1.0):
                assert float(row[1]) <= 1e-6


class TestStudy:
    def run_study(self, tmp_path, counts="4,8,16", seed="7"):
        result = tmp_path / "study.csv"
        code = main(["study", "--node-counts", counts, "--out", str(result),
                     "--kernel", "trig", "--truncation", "21", "--decay", "0.7",
                     "--order", "4", "--grid", "41", "--seed", seed,
                     "--domain=-1:1"])
        return code, result

    def test_monotone_error_and_exit_0(self, tmp_path):
        code, result = self.run_study(tmp_path)
        assert code == 0
        rows = read_rows(result)
        assert rows[0] == ["n", "h", "max_error", "max_bound", "slope"]
        errors = [float(r[2]) for r in rows[1:]]
        assert errors[0] > errors[1] > errors[2]
        for r in rows[1:]:
            assert float(r[2]) <= float(r[3]) + 1e-5
            assert r[4] != ""

    def test_single_count_has_no_slope(self, tmp_path):
        code, result = self.run_study(tmp_path, counts="6")
        assert code == 0
        rows = read_rows(result)
        assert len(rows) == 2 and rows[1][4] == ""

    def test_non_increasing_counts_exit_2(self, tmp_path):
        code, _ = self.run_study(tmp_path, counts="8,4")
        assert code == 2

    def test_byte_identical_reruns(self, tmp_path):
        _, first = self.run_study(tmp_path)
        text1 = first.read_bytes()
        _, second = self.run_study(tmp_path)
        assert second.read_bytes() == text1


class TestDeterminism:
    def test_fit_rerun_byte_identical(self, tmp_path):
        data = write(tmp_path / "d.csv", DATA_2ROW)
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            assert main(["fit", data, "--out", str(out), "--order", "4",
                         "--truncation", "2", "--decay", "1.0",
                         "--seed", "3"]) == 0
        a = out1.read_bytes()
        b = out2.read_bytes()
        assert a == b

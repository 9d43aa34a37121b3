import io
import json

import pytest

from conerisk.cli import main, parse_config, to_csv, to_json
from conerisk.errors import InvalidInputError, NonConvergence


def run(argv, capsys, monkeypatch, stdin=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_project_example(capsys, monkeypatch):
    code, out, err = run(["project", "--cone", "isotonic"], capsys, monkeypatch, "3,1,2")
    assert code == 0 and out == "[2,2,2]\n" and "residualGap" in err


def test_project_convex_csv(capsys, monkeypatch):
    code, out, _ = run(["project", "--cone", "convex", "--csv"], capsys, monkeypatch, "0 1 0")
    assert code == 0
    assert out.splitlines()[0] == "index,fitted"
    assert [float(r.split(",")[1]) for r in out.splitlines()[1:]] == pytest.approx([1 / 3] * 3)


def test_usage_errors(capsys, monkeypatch):
    assert run(["project", "--frobnicate"], capsys, monkeypatch)[0] == 1
    code, _, err = run(["bounds", "--sigma", "0"], capsys, monkeypatch, "1,2")
    assert code == 1 and "sigma" in err and "> 0" in err
    assert run([], capsys, monkeypatch)[0] == 1
    assert run(["project"], capsys, monkeypatch, "1,x")[0] == 1
    assert run(["bounds", "--sigma", "1", "--formula", "nope"], capsys, monkeypatch, "1,2")[0] == 1


def test_hypothesis_exit_code(capsys, monkeypatch):
    code, _, err = run(["bounds", "--sigma", "1", "--formula", "LOWER_FANI"], capsys, monkeypatch,
                       "0,0,0.001,0.001")
    assert code == 3 and "error" in err


def test_bounds_json(capsys, monkeypatch):
    code, out, _ = run(["bounds", "--sigma", "1", "--formula", "R,RZ"], capsys, monkeypatch,
                       "[0,0,0,0,0,0,0,0,0,0]")
    reports = json.loads(out)
    assert code == 0 and [r["formula"] for r in reports] == ["R", "R_Z"]
    code, out, _ = run(["bounds", "--sigma", "1"], capsys, monkeypatch, "3,2,1")
    assert code == 0 and [r["formula"] for r in json.loads(out)] == ["R_S", "MISS"]


def test_variation_and_curve(capsys, monkeypatch):
    code, out, _ = run(["variation", "--partition", "2,2"], capsys, monkeypatch, "0.25,0.5,0.75,1")
    assert code == 0 and json.loads(out)["d_pi"] == 0.125
    code, out, _ = run(["partition-curve", "--functional", "d2"], capsys, monkeypatch,
                       "0.25,0.5,0.75,1")
    rows = out.splitlines()
    assert rows[0] == "m,value,witness" and float(rows[2].split(",")[1]) == 1 / 64


def test_statdim(capsys, monkeypatch):
    code, out, _ = run(["statdim", "--n", "10", "--method", "exact"], capsys, monkeypatch)
    assert code == 0 and json.loads(out)["mean"] == pytest.approx(7381 / 2520)


def test_byte_identical_reruns(capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    argv = ["simulate", "risk", "--family", "linear", "--n", "30", "--reps", "20", "--seed", "4"]
    first = run(argv, capsys, monkeypatch)
    second = run(argv, capsys, monkeypatch)
    assert first[0] == 0 and first[1] == second[1]
    argv = ["simulate", "verify", "--family", "two_level", "--n", "30", "--reps", "20", "--csv"]
    assert run(argv, capsys, monkeypatch)[1] == run(argv, capsys, monkeypatch)[1]


def test_simulate_assouad(capsys, monkeypatch):
    code, out, _ = run(["simulate", "assouad", "--family", "separated_levels", "--n", "1024",
                        "--param", "k=4", "--pairs", "50"], capsys, monkeypatch)
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["family"]["l_rounding"] == "ceil"


def test_report_empty_config(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("")
    code, _, _ = run(["report", "--config", str(cfg), "--out", str(tmp_path / "o")], capsys,
                     monkeypatch)
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert code == 0 and summary["experiments"] == {} and summary["violations"] == []


def test_report_n_equal_one(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "tiny.ini"
    cfg.write_text("[experiment.tiny]\nfamily = constant\nn = 1, 2\nsigma = 1\nreps = 20\n"
                   "formulas = R, R_D, HH, ZEN, AMON\n")
    out_dir = tmp_path / "o"
    code, _, _ = run(["report", "--config", str(cfg), "--out", str(out_dir)], capsys, monkeypatch)
    summary = json.loads((out_dir / "summary.json").read_text())
    assert code == 0 and summary["errors"] == [] and summary["experiments"] == {"tiny": 10}
    assert (out_dir / "tiny.csv").read_text().startswith("family,n,sigma")


def test_parse_config_errors():
    with pytest.raises(InvalidInputError):
        parse_config("[other]\nx = 1\n")
    with pytest.raises(InvalidInputError):
        parse_config("[experiment.a]\nfamily = linear\nn = 5\nformulas = R_Z\n")
    with pytest.raises(InvalidInputError):
        parse_config("[experiment.a]\nfamily = linear\n")
    exps = parse_config("[experiment.a]\nfamily = piecewise_constant\nn = 5, 10\n"
                        "params = k=3 gap=0.5\n")
    assert exps[0].params == {"k": 3, "gap": 0.5} and exps[0].ns == [5, 10]


def test_serialization():
    assert to_json([1.0, -0.0, 0.1]) == "[1,0,0.10000000000000001]"
    assert json.loads(to_json([0.1]))[0] == 0.1
    with pytest.raises(NonConvergence):
        to_json([float("nan")])
    assert to_csv(["a", "b"], [[1.5, True]]) == "a,b\n1.5,true\n"

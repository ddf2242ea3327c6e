import csv
import json
from fractions import Fraction

import pytest

from hlmax.cli import run


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ratio(row):
    if row["exact"] == "true":
        return Fraction(int(row["ratio_num"]), int(row["ratio_denom_or_float"]))
    return float(row["ratio_denom_or_float"])


def test_reproduce_prop3(tmp_path):
    out = tmp_path / "p3"
    assert run(["reproduce", "prop3", "--n-max", "20", "--trials", "30", "--branches", "6",
                "--out-dir", str(out)]) == 0
    scan = rows(out / "prop3_scan0.csv")
    assert [int(r["n_or_trial"]) for r in scan] == list(range(1, 21))
    for r in scan:
        assert ratio(r) >= Fraction(int(r["n_or_trial"]), 2)
        assert r["passed"] == "true"
    man = json.loads((out / "manifest.json").read_text())
    assert man["passed"] and man["seed"] == 0 and "gmpy2" in man["versions"]
    assert json.loads((out / "prop3_scan0.json").read_text())[0]["n_or_trial"] == "1"


@pytest.mark.parametrize("prop", ["prop2", "prop4", "prop5", "prop6", "prop7"])
def test_every_reproduction_exists(tmp_path, prop):
    assert run(["reproduce", prop, "--n-max", "6", "--trials", "5", "--branches", "4",
                "--out-dir", str(tmp_path)]) == 0
    assert list(tmp_path.glob(f"{prop}_scan*.csv"))


def test_verify_bounds(tmp_path):
    assert run(["verify", "bounds", "--family", "xtilde1", "--p", "1", "--kind", "weak",
                "--trials", "200", "--seed", "42", "--branches", "8", "--out-dir", str(tmp_path)]) == 0
    (table,) = tmp_path.glob("*.csv")
    body = rows(table)
    assert len(body) > 200
    assert all(r["passed"] == "true" and ratio(r) <= 2 for r in body)


def test_csv_bodies_deterministic(tmp_path):
    argv = ["verify", "bounds", "--family", "ytilde", "--p0", "2", "--p", "2", "--kind", "weak",
            "--trials", "20", "--seed", "5", "--branches", "4"]
    assert run(argv + ["--out-dir", str(tmp_path / "a")]) == 0
    assert run(argv + ["--out-dir", str(tmp_path / "b")]) == 0
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    rs = rows(next((tmp_path / "a").glob("*.csv")))
    assert any(r["exact"] == "false" and r["ratio_num"] == "" for r in rs)


def test_plan_theorem1(tmp_path, capsys):
    assert run(["plan", "theorem1", "--psc", "[1,inf]", "--pwc", "[1,inf]", "--ps", "(1,inf]",
                "--pw", "[1,inf]", "--out-dir", str(tmp_path)]) == 0
    assert "ytilde1" in capsys.readouterr().out
    doc = json.loads((tmp_path / "plan.json").read_text())
    assert "ytilde1" in json.dumps(doc)


def test_plan_check_and_invalid(tmp_path):
    assert run(["plan", "theorem1", "--psc", "(1,inf]", "--ps", "(1,inf]", "--pwc", "[1,inf]",
                "--pw", "[1,inf]", "--check", "--branches", "6", "--out-dir", str(tmp_path / "ok")]) == 0
    assert run(["plan", "theorem1", "--psc", "(2,inf]", "--ps", "[1,inf]", "--pwc", "[1,inf]",
                "--pw", "[1,inf]", "--out-dir", str(tmp_path / "bad")]) == 1


def test_space_and_maximal(tmp_path):
    assert run(["space", "build", "--family", "xtilde1", "--branches", "2", "--out-dir", str(tmp_path)]) == 0
    assert run(["maximal", "eval", "--family", "xtilde1", "--branches", "2", "--operator", "centered",
                "--f", "delta:x1", "--out-dir", str(tmp_path)]) == 0
    found = [p for p in tmp_path.glob("*.csv") if "maximal" in p.name]
    assert found
    text = found[0].read_text()
    assert "1/3" in text and "2/9" in text
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"x1": "1", "x2": "1/2"}))
    assert run(["maximal", "eval", "--family", "xtilde1", "--branches", "2", "--f-file", str(f),
                "--out-dir", str(tmp_path / "ff")]) == 0


def test_scan_and_ascend(tmp_path):
    assert run(["scan", "witness", "--family", "xhat", "--p0", "2", "--p", "1", "--operator", "centered",
                "--kind", "weak", "--n-max", "12", "--out-dir", str(tmp_path)]) == 0
    assert run(["norm", "ascend", "--family", "xtilde1", "--branches", "4", "--p", "1",
                "--restarts", "2", "--out-dir", str(tmp_path / "asc")]) == 0


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "xhat", "p0": "2", "p": "1", "operator": "centered",
                               "kind": "weak", "n_max": 5}))
    out = tmp_path / "c"
    assert run(["scan", "witness", "--config", str(cfg), "--n-max", "7", "--out-dir", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["parameters"]["n_max"] == 7 and man["parameters"]["p0"] == "2"
    (table,) = out.glob("*.csv")
    assert len(rows(table)) == 7
    cfg.write_text(json.dumps({"family": "xtilde1", "p": "1", "kind": "weak", "trials": 3,
                               "seed": 9, "branches": 3}))
    assert run(["verify", "bounds", "--config", str(cfg), "--out-dir", str(out / "v")]) == 0
    assert json.loads((out / "v" / "manifest.json").read_text())["seed"] == 9
    cfg.write_text("[1, 2]")
    with pytest.raises(SystemExit):
        run(["verify", "bounds", "--config", str(cfg), "--out-dir", str(out / "w")])


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        run(["space", "build", "--family", "nope", "--out-dir", str(tmp_path)])
    assert e.value.code == 2
    assert run(["space", "build", "--family", "xtilde", "--p0", "1", "--branches", "2",
                "--out-dir", str(tmp_path)]) == 2
    assert run(["scan", "witness", "--family", "xhat", "--p0", "2", "--p", "1", "--operator", "centered",
                "--kind", "strong", "--n-max", "3", "--out-dir", str(tmp_path)]) == 2


def test_precision_flag(tmp_path):
    out = tmp_path / "pr"
    assert run(["scan", "witness", "--family", "xtilde", "--p0", "2", "--p", "2", "--operator", "centered",
                "--kind", "strong", "--n-max", "4", "--precision", "256", "--out-dir", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["precision_bits"] == 256
    with pytest.raises(SystemExit):
        run(["scan", "witness", "--precision", "64", "--family", "xhat", "--p0", "2", "--p", "1",
             "--out-dir", str(out)])

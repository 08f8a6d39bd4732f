import csv
import json
import math

import numpy as np
import pytest

from twoweight.cli import SWEEP_COLUMNS, main
from twoweight.factory import parse_weight_spec
from twoweight.verify import CSV_COLUMNS

W13 = '{"type":"leaves","depth":1,"leaves":[1,3]}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_characteristics_fixture(capsys):
    code, out, _ = run(capsys, "characteristics", "--w", W13, "--p", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["rhp"]["2"] == pytest.approx(math.sqrt(5) / 2, abs=1e-12)
    assert rep["ap"]["2"] == pytest.approx(4 / 3, abs=1e-12)


def test_characteristics_constant(capsys):
    code, out, _ = run(capsys, "characteristics", "--w", "const1", "--depth", "3")
    rep = json.loads(out)
    assert code == 0
    assert rep["ap"]["2"] == pytest.approx(1.0) and rep["rhp"]["2"] == pytest.approx(1.0)
    assert rep["aInf"] == pytest.approx(1.0) and rep["rh1"] == pytest.approx(0.0, abs=1e-15)
    # the doubling constant of the unit weight is 2, not 1
    assert rep["doubling"] == pytest.approx(2.0)


def test_characteristics_three_weights(capsys):
    code, out, _ = run(capsys, "characteristics", "--w", W13, "--u", "const1", "--v", "const1")
    assert code == 0 and json.loads(out)["thm1C1"] == pytest.approx(5 / 4, abs=1e-12)


def test_characteristics_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["characteristics"])
    assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "characteristics", "--w", "{bad json")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "characteristics", "--w", '{"type":"leaves","depth":1,"leaves":[1,-3]}')
    assert code == 3
    code, _, _ = run(capsys, "characteristics", "--w", '{"type":"leaves","depth":2,"leaves":[1,3,2]}')
    assert code == 2


def test_norm_examples(capsys):
    code, out, _ = run(capsys, "norm", "--op", "squarefn", "--u", "const1", "--v", "const1", "--w", "const1",
                       "--depth", "1")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(1.0, abs=1e-12) and rec["depth"] == 1
    code, out, _ = run(capsys, "norm", "--op", "haarmult", "--t", "0", "--sigma", "all+", "--u", "const1",
                       "--v", "const1")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, abs=1e-12)
    code, _, _ = run(capsys, "norm", "--op", "squarefn", "--depth", "13", "--u", "const1", "--v", "const1",
                     "--w", "const1")
    assert code == 2


def test_norm_power_method_and_sigma_sup(capsys):
    code, out, _ = run(capsys, "norm", "--op", "squarefn", "--w", W13, "--method", "power")
    assert code == 0 and json.loads(out)["method"] == "power"
    code, out, _ = run(capsys, "norm", "--op", "haarmult", "--sigma-sup", "--w", W13)
    rec = json.loads(out)
    assert code == 0 and rec["method"] == "sigma-sup-exhaustive"
    code, out, _ = run(capsys, "norm", "--op", "positive", "--w", W13)
    assert code == 0 and json.loads(out)["value"] >= 0


def test_depth_cap_env_lowers_only(capsys, monkeypatch):
    monkeypatch.setenv("DYADIC_MAX_DEPTH", "3")
    code, _, _ = run(capsys, "norm", "--op", "squarefn", "--depth", "4")
    assert code == 2
    monkeypatch.setenv("DYADIC_MAX_DEPTH", "20")
    code, _, _ = run(capsys, "norm", "--op", "squarefn", "--depth", "13")
    assert code == 2


def write_config(tmp_path, **fields):
    cfg = {"depth": 3, "suite": ["thm4.1-upper", "bessel", "doubling"], "seeds": "1..3",
           "outputDir": str(tmp_path / "out")}
    cfg.update(fields)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    with path.open() as fh:
        return list(csv.reader(fh))


def test_verify_writes_reports(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", str(write_config(tmp_path)))
    assert code == 0
    assert json.loads(out) == {"verdicts": 9, "failures": 0, "outputDir": str(tmp_path / "out")}
    rows = read_csv(tmp_path / "out" / "verdicts.csv")
    assert rows[0] == list(CSV_COLUMNS) and len(rows) == 1 + 3 * 3
    assert len(json.loads((tmp_path / "out" / "verdicts.json").read_text())) == 9
    hist = read_csv(tmp_path / "out" / "slack_histogram.csv")
    assert hist[0] == ["claimId", "binLow", "binHigh", "count"]
    assert sum(int(r[3]) for r in hist[1:]) == 6
    series = read_csv(tmp_path / "out" / "ratio_series.csv")
    assert len(series) == 1 + 9 * 3


def test_verify_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path)
    run(capsys, "verify", str(cfg), "--output-dir", str(tmp_path / "a"))
    run(capsys, "verify", str(cfg), "--output-dir", str(tmp_path / "b"))
    assert (tmp_path / "a" / "verdicts.csv").read_bytes() == (tmp_path / "b" / "verdicts.csv").read_bytes()


def test_verify_empty_suite(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", str(write_config(tmp_path, suite=[])))
    assert code == 0
    assert (tmp_path / "out" / "verdicts.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_verify_config_errors(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", str(write_config(tmp_path, outputDir=str(tmp_path / "no" / "such"))))
    assert code == 2
    code, _, _ = run(capsys, "verify", str(write_config(tmp_path, suite=["thm9.9"])))
    assert code == 2
    code, _, _ = run(capsys, "verify", str(write_config(tmp_path, depth=13)))
    assert code == 2
    code, _, _ = run(capsys, "verify", str(tmp_path / "missing.json"))
    assert code == 2


def test_verify_failure_exit_code(tmp_path, capsys):
    # a negative absolute tolerance makes even an exact identity fail
    cfg = write_config(tmp_path, suite=["bessel"], tolerancesOverride={"bessel": {"abs": -1e6}})
    code, _, _ = run(capsys, "verify", str(cfg))
    assert code == 1
    rows = read_csv(tmp_path / "out" / "verdicts.csv")
    assert {r[6] for r in rows[1:]} == {"false"}


def test_verify_weight_specs(tmp_path, capsys):
    cfg = write_config(tmp_path, seeds=[5], weightSpecs={"u": "const1", "v": {"type": "power", "alpha": 0.5}})
    code, _, _ = run(capsys, "verify", str(cfg))
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["--type", "power", "--alpha", "-0.5", "--depth", "4"],
    ["--type", "random", "--seed", "3", "--depth", "5"],
    ["--type", "fkp", "--b", '{"0,0": 0.5, "1,1": -0.25}', "--depth", "3"],
    ["--type", "algebra", "--expr", "u^-1*w^2", "--u", '{"type":"leaves","depth":1,"leaves":[1,2]}',
     "--w", W13, "--depth", "1"],
])
def test_generate_roundtrip_bitwise(capsys, argv):
    code, out, _ = run(capsys, "generate", *argv)
    assert code == 0
    spec = json.loads(out)
    w = parse_weight_spec(spec)
    code, out2, _ = run(capsys, "generate", *argv)
    assert out2 == out
    # the printed spec feeds back into another command unchanged
    code, rep, _ = run(capsys, "characteristics", "--w", json.dumps(spec))
    assert code == 0
    assert parse_weight_spec(json.loads(json.dumps(spec))).values.tobytes() == w.values.tobytes()


def test_generate_algebra_values(capsys):
    _, out, _ = run(capsys, "generate", "--type", "algebra", "--expr", "u^-1*w^2", "--u",
                    '{"type":"leaves","depth":1,"leaves":[1,2]}', "--w", W13, "--depth", "1")
    assert parse_weight_spec(json.loads(out)).values == pytest.approx([1.0, 4.5])


def test_generate_slack_violation(capsys):
    code, _, _ = run(capsys, "generate", "--type", "fkp", "--b", '{"0,0": 1.0}', "--depth", "2")
    assert code == 3


@pytest.mark.parametrize("family,values", [("power", "-0.5,0,0.5"), ("epsilon", "0.3,0.9"), ("depth", "2,3")])
def test_sweep(tmp_path, capsys, family, values):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--family", family, f"--values={values}", "--depth", "4", "--output", str(out))
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == SWEEP_COLUMNS and len(rows) == 1 + len(values.split(","))
    assert all(np.isfinite(float(x)) for r in rows[1:] for x in r)


def test_sweep_power_zero_is_unit(capsys):
    _, out, _ = run(capsys, "sweep", "--family", "power", "--values", "0", "--depth", "3")
    row = dict(zip(*list(csv.reader(out.splitlines()))))
    assert float(row["ap2"]) == pytest.approx(1.0) and float(row["squareNorm"]) == pytest.approx(1.0)


def test_printed_spec_matches_direct_construction(capsys):
    from twoweight import DyadicTree
    from twoweight.factory import power_weight, random_doubling_weight

    _, out, _ = run(capsys, "generate", "--type", "random", "--seed", "3", "--depth", "5", "--stream", "2")
    direct = random_doubling_weight(3, 0.5, DyadicTree(5), 2)
    assert parse_weight_spec(json.loads(out)).values.tobytes() == direct.values.tobytes()
    _, out, _ = run(capsys, "generate", "--type", "power", "--alpha", "0.5", "--depth", "4")
    assert parse_weight_spec(json.loads(out)).values.tobytes() == power_weight(0.5, DyadicTree(4)).values.tobytes()

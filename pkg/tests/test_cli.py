import csv
import io
import json
import subprocess
import sys

import pytest

from cvwitness.cli import main, parse_param, parse_value
from cvwitness.runner import ConfigError, frange, preset, run_sweep


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_parse_helpers():
    assert parse_value("3") == 3 and parse_value("0.5") == 0.5 and parse_value("1+2j") == 1 + 2j
    assert parse_param("lam=0.1,0.2") == ("lam", [0.1, 0.2])
    assert parse_param("tau=0:1:0.25") == ("tau", [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ConfigError):
        parse_param("lam")
    assert frange(0, 0.9, 0.05)[-1] == 0.9


def test_witness_single_point(capsys):
    code, out, _ = run(capsys, "witness", "--witness", "d124", "--state", "tmsv", "--param", "lam=0.5")
    assert code == 0
    table = rows(out)
    assert table[0] == ["param_lam", "value", "oracle", "abs_err", "leakage"]
    assert float(table[1][1]) == pytest.approx(-1 / 3, abs=1e-10)
    assert float(table[1][3]) < 1e-9


def test_sweep_header_order_and_stability(capsys, tmp_path):
    args = ["sweep", "--witness", "d24", "--state", "tmsv", "--param", "lam=0.2,0.4", "--param", "tau=0.5,1"]
    code, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code == code2 == 0
    assert out1 == out2
    table = rows(out1)
    assert table[0][:2] == ["param_lam", "param_tau"]
    assert len(table) == 5
    for r in table[1:]:
        lam, tau = float(r[0]), float(r[1])
        assert float(r[2]) == pytest.approx(-(tau**2) * lam**2 / (1 - lam**2), abs=1e-9)
    path = tmp_path / "o.csv"
    assert main(args + ["--out", str(path)]) == 0
    assert path.read_text() == out1


def test_json_config_with_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"witness": "d1913", "state": "noon", "params": {"n": [1], "alpha": [0.6]}}))
    code, out, _ = run(capsys, "witness", "--config", str(cfg))
    assert code == 0
    assert float(rows(out)[1][-4]) == pytest.approx(-2 * 0.36 * 0.64, abs=1e-12)
    code, out, _ = run(capsys, "witness", "--config", str(cfg), "--param", "n=2")
    assert float(rows(out)[1][-4]) == pytest.approx(-4 * 0.36 * 0.64, abs=1e-12)


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "witness", "--state", "tmsv", "--param", "lam=0.5")[0] == 2
    assert run(capsys, "witness", "--witness", "d124", "--state", "nope", "--param", "lam=0.5")[0] == 2
    assert run(capsys, "witness", "--witness", "d124", "--state", "tmsv", "--param", "lam=0.2,0.3")[0] == 2
    assert run(capsys, "witness", "--witness", "d124", "--state", "tmsv", "--param", "lam=1.5")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"witness": "d124", "state": "tmsv", "params": {"lam": [0.1]}, "colour": 1}))
    assert run(capsys, "witness", "--config", str(bad))[0] == 2
    assert run(capsys, "sample", "--witness", "duan", "--state", "tmsv", "--param", "lam=0.5")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_pipeline_flag(capsys):
    code, out, _ = run(capsys, "witness", "--witness", "d1913_agarwal", "--state", "noon",
                       "--param", "n=2", "--param", "alpha=0.7071067811865476", "--pipeline")
    assert code == 0
    assert float(rows(out)[1][-4]) == pytest.approx(-4, abs=1e-9)


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    assert code == 0
    table = rows(out)
    assert table[0][-1] == "status"
    assert all(r[-1] == "PASS" for r in table[1:])
    covered = {r[1] for r in table[1:]}
    from cvwitness.oracles import ORACLES

    assert set(ORACLES) <= covered


def test_sample_command(capsys):
    args = ["sample", "--witness", "d1913_agarwal", "--state", "noon", "--param", "n=1",
            "--param", "alpha=0.6", "--shots", "500", "--seed", "5"]
    code, out, err = run(capsys, *args)
    assert code == 0
    table = rows(out)
    assert table[0][0] == "setting" and table[0][-1] == "count"
    by_setting = {}
    for r in table[1:]:
        by_setting[r[0]] = by_setting.get(r[0], 0) + int(r[-1])
    assert set(by_setting.values()) == {500}
    assert "estimate" in err
    assert run(capsys, *args)[1] == out


def test_presets_fig2b_values():
    reports = run_sweep(preset("fig2b", grid={"lam": [0.3, 0.85], "tau": [0.4, 1.0]}))
    for r in reports:
        assert r.abs_err < 1e-9
        lam, tau = r.params["lam"], r.params["tau"]
        assert r.value == pytest.approx(-(tau**2) * lam**2 / (1 - lam**2), abs=1e-9)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cvwitness", "witness", "--witness", "d124", "--state", "tmsv",
                          "--param", "lam=0"], capture_output=True, text=True)
    assert res.returncode == 0
    assert rows(res.stdout)[1][1] == "0"

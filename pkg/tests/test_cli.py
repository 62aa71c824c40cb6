import json
import math

import pytest

from parabolic import cli


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path / "out")])


def test_validate_pass_and_fail(tmp_path, capsys):
    assert run(tmp_path, "validate", "--potential", "devaney") == 0
    assert "PASS" in capsys.readouterr().out
    assert json.loads((tmp_path / "out" / "validate.json").read_text())["class_S"]["passed"]
    assert run(tmp_path, "validate", "--potential", "isotropic") == 3
    assert "FAIL" in capsys.readouterr().out


def test_missing_file(tmp_path, capsys):
    assert run(tmp_path, "validate", "--potential", str(tmp_path / "nope.json")) == 2
    assert "neither" in capsys.readouterr().err
    assert run(tmp_path, "validate", "--config", str(tmp_path / "nope.json")) == 2


def test_bolza_arc(tmp_path, capsys):
    code = run(tmp_path, "bolza", "--potential", "isotropic", "--alpha", "1", "--eps", "1",
               "--x1", "1,0", "--x2", "-1,0", "--grid-size", "200")
    assert code == 0
    doc = json.loads((tmp_path / "out" / "solution.json").read_text())
    assert doc["action"] == pytest.approx(math.pi * math.sqrt(2), rel=1e-3)
    assert (tmp_path / "out" / "path.csv").read_text().startswith("t,x1,x2\n")
    assert "action" in capsys.readouterr().out


def test_bolza_infeasible(tmp_path):
    assert run(tmp_path, "bolza", "--potential", "isotropic", "--alpha", "1", "--eps", "1",
               "--x1", "0.5,0", "--x2", "-1,0") == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"potential": "devaney", "alpha": 0.5, "grid_size": 50}))
    assert run(tmp_path, "portrait", "--config", str(cfg), "--alpha", "1.0") == 0
    echo = json.loads((tmp_path / "out" / "config.json").read_text())
    assert echo["alpha"] == 1.0 and echo["grid_size"] == 50
    assert (tmp_path / "out" / "portrait.svg").exists()
    assert (tmp_path / "out" / "orbit_19.csv").read_text().startswith("tau,theta,phi,v\n")


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"potential": "devaney", "colour": "red"}))
    assert run(tmp_path, "portrait", "--config", str(cfg)) == 2


def test_connect(tmp_path):
    assert run(tmp_path, "connect", "--potential", "devaney") == 0
    doc = json.loads((tmp_path / "out" / "connect.json").read_text())
    lo, hi = doc["bracket"]
    assert 0.5 < lo < hi < 1.0 and hi - lo <= 1e-4
    assert run(tmp_path, "connect", "--potential", "devaney", "--bracket", "0.1,0.2") == 2


def test_float_format():
    assert cli.dumps({"x": 1 / 3}) == '{\n  "x": 0.333333333\n}\n'
    assert cli.fmt(2.0) == "2"

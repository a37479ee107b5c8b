from __future__ import annotations

import json

import pytest

from xzero.cli import main, parse_vector


def run_json(capsys, *argv):
    code = main(["--json", *argv])
    return code, json.loads(capsys.readouterr().out)


def test_parse_vector_forms(tmp_path):
    a = parse_vector("1:1,3:1/2")
    b = parse_vector('{"1": "1", "3": "1/2"}')
    f = tmp_path / "x.json"
    f.write_text('{"1": 1, "3": "1/2"}')
    assert a == b == parse_vector(f"@{f}")


def test_params_paper_mode(capsys):
    code, rep = run_json(capsys, "params", "--mode", "paper", "--j", "2")
    assert code == 0
    assert rep["results"]["values"][0] == {"j": 2, "m": "2^40", "n": "2^1280", "s": 160}


def test_norm_of_basis_vector(capsys):
    code, rep = run_json(capsys, "norm", "--x", "1:1")
    cert = rep["results"]["certificate"]
    assert code == 0 and cert["lo"] == cert["hi"] == "1"
    assert "wall_time" not in rep


def test_rerun_is_byte_identical(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert main(["--seed", "5", "--out", str(path), "exact-pair", "--j", "1"]) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_timing_is_opt_in(capsys):
    _, rep = run_json(capsys, "--timing", "params")
    assert rep["wall_time"] >= 0


@pytest.mark.parametrize("argv", [
    ["norm", "--x", "bad"],
    ["norm", "--x", "1:1", "--family", "nope"],
    ["--params", "/nonexistent/params.json", "params"],
    ["--tol", "0", "norm", "--x", "1:1"],
])
def test_bad_input_exits_two(capsys, argv):
    code, rep = run_json(capsys, *argv)
    assert code == 2 and "error" in rep


def test_unknown_command_exits_two(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_verify_suite(capsys):
    code, rep = run_json(capsys, "verify", "--suite", "coding")
    assert code == 0 and rep["ok"]


def test_c0_witness_reports_failure(capsys):
    code, rep = run_json(capsys, "c0-witness")
    assert code == 1 and rep["ok"] is False


def test_summary_line(capsys):
    assert main(["params"]) == 0
    assert capsys.readouterr().out.startswith("params: PASS")

import json
import subprocess
import sys

import pytest

from nmorbits.cli import main

SPEC = json.dumps({"p": 2, "alpha": "w+2"})


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "expr, result",
    [("w+1 natsum w", "w*2+1"), ("3 + w", "w"), ("w + 3", "w+3"), ("w cmp w^2", "-1"), ("w lsub w*2+1", "w+1")],
)
def test_ordinal_calc(capsys, expr, result):
    code, out, _ = run(capsys, "ordinal", "calc", expr)
    assert code == 0 and out.strip() == result


def test_rank_of_parameter_is_zero(capsys, tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(SPEC)
    A = tmp_path / "a.json"
    A.write_text(json.dumps({"generators": [{"support": {"0": 1, "1": 1}}]}))
    element = tmp_path / "e.json"
    element.write_text(json.dumps({"support": {"0": 1, "1": 1}}))
    code, out, _ = run(capsys, "rank", "--spec", str(spec), "--A", str(A), "--element", str(element))
    assert code == 0 and out.strip() == "0"


def test_rank_with_certificate(capsys):
    code, out, _ = run(capsys, "rank", "--spec", SPEC, "--element", '{"support": {"1": 1}}', "--certify", "--json")
    data = json.loads(out)
    assert code == 0 and data["rank"] == "2" and data["problems"] == []
    assert [s["level"] for s in data["certificate"]["steps"]] == ["1", "0"]


def test_injected_fault_is_reported(capsys):
    code, out, _ = run(capsys, "oracle", "compare", "--spec", SPEC, "--J", "0,1,2,3", "--inject-fault", "--json")
    data = json.loads(out)
    assert code == 1
    assert data["violations"] and {"eta", "tau", "brute_force_same"} <= set(data["violations"][0])


def test_oracle_compare_clean(capsys):
    code, out, _ = run(capsys, "oracle", "compare", "--spec", SPEC, "--J", "0,1,2,3", "--json")
    assert code == 0 and json.loads(out)["violations"] == []


@pytest.mark.parametrize(
    "argv, field",
    [
        (["rank", "--spec", '{"p": 4, "alpha": "2"}', "--element", "{}"], "'p'"),
        (["rank", "--spec", '{"p": 2, "alpha": "w+"}', "--element", "{}"], "'alpha'"),
        (["rank", "--spec", SPEC, "--element", "{bad"], "--element"),
        (["rank", "--spec", "/nonexistent.json"], "--spec"),
        (["ordinal", "calc", "w pow 2"], "expression"),
        (["criterion", "eq", "--instance", '{"factors": [4], "stages": [[0]], "eta": [[1]]}'], "'tau'"),
        (["depend", "--spec", SPEC, "--A", '{"generators": [{"support": {"0": 1}}]}', "--element", '{"support": {}}'], "--B"),
        (["centralizer", "chain", "--group", "Z99"], "--group"),
        (["nosuchverb"], None),
    ],
)
def test_input_errors_exit_2(capsys, argv, field):
    code, _, err = run(capsys, *argv)
    assert code == 2
    if field:
        assert field in err


def test_json_output_is_deterministic():
    argv = [sys.executable, "-m", "nmorbits", "lascar", "check", "--spec", SPEC, "--json", "--seed", "3"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and json.loads(first)["ok"]


def test_orbit_verbs(capsys):
    A = '{"generators": [{"support": {"1": 1}}]}'
    code, out, _ = run(capsys, "orbit", "eq", "--spec", SPEC, "--A", A, "--eta", '{"support": {"0": 1}}',
                       "--tau", '{"support": {"2": 1}}', "--json")
    assert code == 0 and set(json.loads(out)) == {"same_orbit", "n_eta", "n_tau"}
    code, out, _ = run(capsys, "orbit", "list", "--spec", SPEC, "--A", A, "--level", "3", "--json")
    data = json.loads(out)
    assert code == 0 and data["total"] == len(data["orbits"]) > 0


def test_criterion_and_chain(capsys):
    inst = json.dumps({"factors": [4], "stages": [[0]], "eta": [[2]], "tau": [[1]]})
    code, out, _ = run(capsys, "criterion", "eq", "--instance", inst, "--json")
    assert code == 0 and json.loads(out)["witness"]["k"] == 2
    code, out, _ = run(capsys, "chain", "witness", "--spec", SPEC, "--element", '{"support": {"2": 1, "7": 1}}',
                       "--levels", "w,2,0")
    assert code == 0 and "requested" in out


def test_centralizer_and_spec(capsys):
    code, out, _ = run(capsys, "centralizer", "chain", "--group", "D8", "--json")
    data = json.loads(out)
    assert code == 0 and data["nilpotency_class"] == 2 and data["first_term_is_fixed_points"]
    code, out, _ = run(capsys, "spec", "validate", "--spec", SPEC)
    assert code == 0 and "alpha = w+2" in out

import json
import subprocess
import sys

import pytest

from kappa_count import cli
from kappa_count.model import CountReport


def write(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def delta_file(tmp_path):
    return write(tmp_path, {"kind": "delta", "points": [0, 1], "strengths": [-3, -3]})


@pytest.fixture
def prime_file(tmp_path):
    return write(tmp_path, {"kind": "delta_prime", "points": [0, 1, 2], "strengths": [-1, 0.5, -2]}, "prime.json")


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_count_jacobi(delta_file, capsys):
    code, out, _ = run(["count", delta_file, "--method", "jacobi"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["kappa_minus"] == 2 and doc["schema"] == 1 and doc["method"] == "jacobi"


@pytest.mark.parametrize("method", ["recurrence", "phi", "oracle"])
def test_count_delta_methods(delta_file, capsys, method):
    code, out, _ = run(["count", delta_file, "--method", method], capsys)
    assert code == 0 and json.loads(out)["total"] == 2


def test_count_strengths(prime_file, capsys):
    code, out, _ = run(["count", prime_file, "--method", "strengths"], capsys)
    assert code == 0 and json.loads(out)["total"] == 2


def test_count_wrong_kind(prime_file, capsys):
    code, _, err = run(["count", prime_file, "--method", "jacobi"], capsys)
    assert code == 2 and "delta" in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["count", str(tmp_path / "nope.json"), "--method", "jacobi"], capsys)
    assert code == 2 and "cannot read" in err


def test_invalid_config(tmp_path, capsys):
    path = write(tmp_path, {"kind": "delta", "points": [1, 0], "strengths": [1, 1]})
    code, _, err = run(["verify", path], capsys)
    assert code == 2 and "points" in err


def test_bad_arguments(capsys):
    assert cli.main(["count"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_verify_delta_example(tmp_path, capsys):
    path = write(tmp_path, {"kind": "delta", "points": [0, 1, 2], "strengths": [-1, 5, -1]})
    code, out, _ = run(["verify", path, "--oracle"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["agreement"] is True and doc["first_disagreement"] is None
    assert [r["method"] for r in doc["reports"]] == ["recurrence", "jacobi", "phi_signature", "oracle"]
    assert {r["total"] for r in doc["reports"]} == {1}
    assert "timings" not in doc


def test_verify_delta_prime(prime_file, capsys):
    code, out, _ = run(["verify", prime_file, "--oracle", "--timings"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert [r["method"] for r in doc["reports"]] == ["strength_count", "window_T", "oracle"]
    assert {r["total"] for r in doc["reports"]} == {2}
    assert set(doc["timings"]) == {"strengths", "window_T", "oracle"}


def test_verify_reports_near_zero_pivots(tmp_path, capsys):
    path = write(tmp_path, {"kind": "delta", "points": [0, 1, 2, 3], "strengths": [-1 + 1e-14, 3, 1, -0.5]})
    code, out, _ = run(["verify", path], capsys)
    doc = json.loads(out)
    assert code == 0
    notes = [d for r in doc["reports"] for d in r["diagnostics"]]
    assert any("ZeroInSequence" in d for d in notes)


def test_verify_disagreement_exit(delta_file, capsys, monkeypatch):
    monkeypatch.setattr(cli, "_jacobi_report", lambda c: CountReport(5, 0, "jacobi"))
    code, out, _ = run(["verify", delta_file], capsys)
    doc = json.loads(out)
    assert code == 4
    assert doc["agreement"] is False
    assert doc["first_disagreement"] == ["recurrence", "jacobi"]


def test_oracle_nonconvergence_exit(delta_file, capsys):
    code, _, err = run(["oracle", delta_file, "--max-refinements", "1"], capsys)
    assert code == 3 and "stabilise" in err


def test_oracle_command(delta_file, capsys):
    code, out, _ = run(["oracle", delta_file, "--kappa-max", "3", "--grid", "32"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["total"] == 2 and len(doc["roots"]) == 2


def test_oracle_bad_grid(delta_file, capsys):
    code, _, _ = run(["oracle", delta_file, "--grid", "4"], capsys)
    assert code == 2


def test_output_is_byte_identical(tmp_path, delta_file, capsys):
    outs = []
    for i in range(2):
        target = tmp_path / f"out{i}.json"
        assert cli.main(["verify", delta_file, "--oracle", "--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    assert capsys.readouterr().out == ""


def test_json_float_formatting():
    text = cli.dumps({"b": 0.1, "a": [1, 2.5, None, True], "c": float("inf")})
    assert text == '{"a": [1, 2.5, null, true], "b": 0.10000000000000001, "c": "inf"}'
    assert json.loads(text)["b"] == 0.1


def test_epsilon_env_override(delta_file, capsys, monkeypatch):
    monkeypatch.setenv("KAPPA_COUNT_EPSILON", "1e-6")
    code, out, _ = run(["count", delta_file, "--method", "recurrence"], capsys)
    assert code == 0 and json.loads(out)["config"]["epsilon"] == 1e-6
    monkeypatch.setenv("KAPPA_COUNT_EPSILON", "tiny")
    code, _, _ = run(["count", delta_file, "--method", "recurrence"], capsys)
    assert code == 2


def test_epsilon_env_moves_zero_decision(tmp_path, capsys, monkeypatch):
    path = write(tmp_path, {"kind": "delta", "points": [0, 1], "strengths": [-1 + 1e-9, 1]})
    _, out, _ = run(["count", path, "--method", "recurrence"], capsys)
    assert json.loads(out)["n_infinity"] == 0
    monkeypatch.setenv("KAPPA_COUNT_EPSILON", "1e-6")
    _, out, _ = run(["count", path, "--method", "recurrence"], capsys)
    assert json.loads(out)["n_infinity"] == 1


def test_sweep_delta(tmp_path, capsys):
    path = write(tmp_path, {"kind": "delta", "points": [0, 1, 2], "strengths": [1, 0, 1]})
    out = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", path, "--param", "strengths[1]", "--from", "-6", "--to", "0", "--steps", "13", "--out", str(out)], capsys)
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "param_value,kappa_recurrence,kappa_jacobi,gerschgorin_lower_bound"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 13
    values = [float(r[0]) for r in rows]
    assert values == sorted(values) and values[0] == -6 and values[-1] == 0
    assert all(r[1] == r[2] for r in rows)
    kappa = [int(r[1]) for r in rows]
    assert kappa == sorted(kappa, reverse=True) and kappa[0] == 1 and kappa[-1] == 0
    # the Gerschgorin threshold of the middle site is -2 (1 + 1) = -4
    for v, r in zip(values, rows):
        assert int(r[3]) == (1 if v < -4 else 0)


def test_sweep_two_steps(delta_file, capsys):
    code, out, _ = run(["sweep", delta_file, "--param", "strengths[0]", "--from", "-1", "--to", "1", "--steps", "2"], capsys)
    assert code == 0 and len(out.splitlines()) == 3


def test_sweep_delta_prime_flips_at_zero(prime_file, capsys):
    code, out, _ = run(["sweep", prime_file, "--param", "strengths[1]", "--from", "-1", "--to", "1", "--steps", "5"], capsys)
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert code == 0
    assert [(r[0], int(r[1]), int(r[2])) for r in rows] == [
        ("-1", 3, 3), ("-0.5", 3, 3), ("0", 2, 2), ("0.5", 2, 2), ("1", 2, 2)
    ]


def test_sweep_rational(tmp_path, capsys):
    path = write(tmp_path, {"kind": "delta", "points": ["0", "1"], "strengths": ["-1", "1"], "scalar": "rational"})
    code, out, _ = run(["sweep", path, "--param", "strengths[0]", "--from", "-2", "--to", "0", "--steps", "3"], capsys)
    assert code == 0
    # alpha_1 = -1 = -1/d_1 is the exact zero branch: gamma = (0, inf), count 1
    assert out.splitlines()[2] == "-1,1,1,0"


@pytest.mark.parametrize("param", ["alpha[0]", "strengths[2]", "strengths[-1]"])
def test_sweep_bad_param(delta_file, capsys, param):
    code, _, err = run(["sweep", delta_file, "--param", param, "--from", "0", "--to", "1", "--steps", "3"], capsys)
    assert code == 2 and "param" in err


def test_sweep_bad_steps(delta_file, capsys):
    code, _, _ = run(["sweep", delta_file, "--param", "strengths[0]", "--from", "0", "--to", "1", "--steps", "1"], capsys)
    assert code == 2


def test_module_entry_point(delta_file):
    proc = subprocess.run([sys.executable, "-m", "kappa_count", "count", delta_file, "--method", "jacobi"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["total"] == 2

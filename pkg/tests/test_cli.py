import json
import subprocess
import sys

import pytest

from quadvar import cli, eigenforms


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_kloosterman_single(capsys):
    assert run(capsys, "kloosterman", "1", "1", "3")[:2] == (0, "-1.000000\n")
    code, out, _ = run(capsys, "kloosterman", "1", "1", "3", "--format", "json")
    assert code == 0 and json.loads(out)["rows"][0]["value"] == -1.0


@pytest.mark.parametrize("argv", [
    ["kloosterman", "1", "1", "0"],
    ["kloosterman", "1", "1"],
    ["kloosterman", "1", "1", "3", "--grid"],
    ["twisted", "1", "0", "1", "0", "0"],
    ["twisted", "1/3", "0", "1", "0", "0", "5"],
    ["twisted", "--verify", "nope"],
    ["petersson", "--weight", "24"],
    ["variance"],
    ["nosuch"],
    ["kloosterman", "1", "1", "3", "--threads", "0"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_USAGE and err


def test_kloosterman_grid_is_csv(capsys):
    code, out, _ = run(capsys, "kloosterman", "--grid", "--c-max", "30", "--mn-max", "6")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "c,max_weil_ratio,imag_over_c,ok" and len(lines) == 31


def test_twisted_single(capsys):
    assert run(capsys, "twisted", "1", "0", "1", "0", "0", "2")[:2] == (0, "0.000000 + 0.000000i\n")
    code, out, _ = run(capsys, "twisted", "1/2", "0", "1", "0", "0", "8", "--halve-even")
    assert code == 0 and out.endswith("i\n")


def test_twisted_verify_vanish(capsys):
    code, out, _ = run(capsys, "twisted", "--verify", "vanish", "--c-max", "25")
    assert code == 0 and "passed: true" in out


def test_bounds_baseline_gate(capsys, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"sup_ratio": 10.0}))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sup_ratio": 0.01}))
    assert run(capsys, "twisted", "--verify", "bounds", "--c-max", "20", "--baseline", str(good))[0] == 0
    assert run(capsys, "twisted", "--verify", "bounds", "--c-max", "20", "--baseline", str(bad))[0] == cli.EXIT_GATE


def test_oscillatory_gate_failure_is_exit_2(capsys):
    # at y = 1 the leading-order error grows from x = 1e3 to x = 1e4
    code, out, err = run(capsys, "oscillatory", "--identity", "stationary", "--x", "1000", "10000")
    assert code == cli.EXIT_GATE and "strictly_decreasing: false" in out and "stationary" in err


def test_oscillatory_bessel_sum(capsys):
    code, out, _ = run(capsys, "oscillatory", "--identity", "bessel-sum", "--x", "5",
                       "--window", "0.5", "20", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["summary"]["passed"] is True and data["rows"][0]["residual"] < 1e-6


def test_petersson_grid_and_imports(capsys, tmp_path):
    code, out, _ = run(capsys, "petersson", "--weight", "12", "--m-max", "4")
    assert code == 0 and "passed: true" in out
    text = eigenforms.dump_eigenvalues(eigenforms.eigenform(16, 100))
    good = tmp_path / "good.csv"
    good.write_text(text)
    assert run(capsys, "petersson", "--import", str(good), "--m-max", "4")[0] == 0
    bad = tmp_path / "bad.csv"
    bad.write_text(text.replace("\n2,216\n", "\n2,217\n"))
    code, _, err = run(capsys, "petersson", "--import", str(bad))
    assert code == cli.EXIT_DATA and "rejected" in err
    assert run(capsys, "petersson", "--import", str(good), "--weight", "12")[0] == cli.EXIT_DATA
    assert run(capsys, "petersson", "--import", str(tmp_path / "missing.csv"))[0] == cli.EXIT_USAGE


def write_cfg(tmp_path, body):
    path = tmp_path / f"run{abs(hash(body))}.cfg"
    path.write_text(body)
    return str(path)


def test_variance_exit_codes(capsys, tmp_path, monkeypatch):
    monkeypatch.delenv("QUADVAR_THETA", raising=False)
    ok = write_cfg(tmp_path, "K = 14\ntheta = 0.45\nX = 4\n")
    code, out, _ = run(capsys, "variance", "--config", ok, "--manifest", str(tmp_path / "m.json"))
    report = json.loads(out)
    assert code == 0 and report["passed"] is True
    assert {"direct", "diagonal", "off_diagonal", "residual", "per_weight", "config"} <= set(report)
    manifest = json.loads((tmp_path / "m.json").read_text())
    assert manifest["checks"] == {"two_route": True} and manifest["config"]["theta"] == 0.45

    assert run(capsys, "variance", "--config", write_cfg(tmp_path, "K = 16\ntheta = 0.2\nX = 10\n"))[0] == 4
    assert run(capsys, "variance", "--config", write_cfg(tmp_path, "K = 40\ntheta = 0.6\nX = 10\n"))[0] == 1
    assert run(capsys, "variance", "--config", write_cfg(tmp_path, "K = 16\ntheta = 0.6\n"))[0] == 1
    monkeypatch.setenv("QUADVAR_THETA", "0.2")
    assert run(capsys, "variance", "--config", ok)[0] == 4


def test_out_file_and_manifest(capsys, tmp_path):
    out = tmp_path / "rows.csv"
    man = tmp_path / "m.json"
    code, stdout, _ = run(capsys, "twisted", "--verify", "symmetry", "--seed", "4", "--format", "csv",
                          "--out", str(out), "--manifest", str(man))
    assert code == 0 and stdout == "" and out.read_text().startswith("c,gamma")
    m = json.loads(man.read_text())
    assert m["seed"] == 4 and m["subcommand"] == "twisted" and m["artifacts"] == [str(out)]
    assert m["argv"][:3] == ["twisted", "--verify", "symmetry"]


def test_console_script_entry_point():
    done = subprocess.run([sys.executable, "-m", "quadvar.cli", "kloosterman", "1", "1", "3"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout == "-1.000000\n"

import json

import pytest

from qbirthdeath.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_body(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return [l.split(",") for l in lines[1:]]


def embedded_config(text, path):
    lines = [l[2:] for l in text.splitlines() if l.startswith("# ")]
    start = lines.index("[run]")
    path.write_text("\n".join(lines[start:]) + "\n")
    return str(path)


# ---------------------------------------------------------------- eval


def test_eval_examples_in_query_order(capsys):
    code, out, _ = run(capsys, "eval", "--c-constant", "--pi", "0", "--delta", "1", "1", "--j-exp", "0")
    assert code == 0
    lines = out.split()
    assert lines[:3] == ["2.0", "1", "8"]
    assert lines[3].startswith("0.58665286961127967697267173926937091299")


def test_eval_json_output(capsys, tmp_path):
    target = tmp_path / "eval.json"
    assert run(capsys, "eval", "--q", "0.5", "--nu", "1", "--c-constant", "--pi", "2", "--out", str(target))[0] == 0
    data = json.loads(target.read_text())
    assert data["config"] == {"q": "1/2", "nu": "1", "precision_bits": 192}
    assert [v["quantity"] for v in data["values"]] == ["c", "pi"]
    assert data["values"][0]["value"].startswith("2.66666666666666666666")
    # q^{(2 nu + 2) n} = 2^-8 is printed exactly
    assert data["values"][1]["value"] == "0.00390625"


@pytest.mark.parametrize("argv", [["eval", "--q", "1.5", "--c-constant"], ["eval", "--nu", "-2", "--pi", "0"]])
def test_eval_rejects_bad_parameters(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "out of range" in err


# ---------------------------------------------------------------- kernel


def test_kernel_at_time_zero_is_exact(capsys):
    code, out, _ = run(capsys, "kernel", "--t", "0", "--r", "1", "--window=-3:3")
    assert code == 0
    rows = csv_body(out)
    assert [r[0] for r in rows] == [str(n) for n in range(-3, 4)]
    assert [r[2] for r in rows] == ["0.0"] * 4 + ["1.0"] + ["0.0"] * 2
    assert rows[0][1] == "8"


def test_kernel_row_sums_to_one(capsys):
    code, out, err = run(capsys, "kernel", "--t", "1", "--s", "0.5")
    assert code == 0
    rows = csv_body(out)
    assert abs(float(rows[-1][3]) - 1) < 1e-15
    assert "defect" in err


def test_kernel_rejects_start_outside_window(capsys):
    assert run(capsys, "kernel", "--r", "99")[0] == 2


def test_flags_override_config_file(capsys, tmp_path):
    conf = tmp_path / "run.ini"
    conf.write_text("[run]\nq = 0.4\nnu = -0.5\nt = 0\n")
    _, out, _ = run(capsys, "kernel", "--config", str(conf), "--nu", "0", "--window=-2:2")
    assert "# q = 2/5" in out and "# nu = 0" in out and "# t = 0" in out


def test_config_file_errors(capsys, tmp_path):
    conf = tmp_path / "bad.ini"
    conf.write_text("[run]\nbogus = 1\n")
    assert run(capsys, "kernel", "--config", str(conf))[0] == 2
    assert run(capsys, "kernel", "--config", str(tmp_path / "missing.ini"))[0] == 2


def test_embedded_config_reproduces_the_artifact(capsys, tmp_path):
    _, first, _ = run(capsys, "kernel", "--q", "0.4", "--nu", "-0.5", "--t", "0.25", "--r", "2")
    conf = embedded_config(first, tmp_path / "again.ini")
    _, second, _ = run(capsys, "kernel", "--config", conf)
    assert first == second


# ---------------------------------------------------------------- verify


def test_verify_subset_passes(capsys):
    code, out, err = run(capsys, "verify", "--checks", "orthogonality,mass,chapman_kolmogorov")
    assert code == 0
    report = json.loads(out)
    assert report["pass"] is True
    assert [c["name"] for c in report["checks"]] == ["orthogonality", "mass", "chapman_kolmogorov"]
    assert err.count("PASS") == 3


def test_verify_fails_on_shrunken_window(capsys):
    code, out, err = run(capsys, "verify", "--window=-3:12", "--checks", "orthogonality,inversion")
    assert code == 1
    assert json.loads(out)["pass"] is False and "FAIL" in err


def test_verify_positivity_probe_at_q04(capsys):
    code, out, _ = run(capsys, "verify", "--q", "0.4", "--nu", "-0.5", "--checks", "positivity_probe")
    assert code == 0 and json.loads(out)["checks"][0]["pass"] is True


def test_verify_rejects_unknown_check(capsys):
    assert run(capsys, "verify", "--checks", "nonsense")[0] == 2


# ---------------------------------------------------------------- simulate


def test_simulate_is_reproducible(capsys, tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"sim{k}.csv"
        code, _, _ = run(capsys, "simulate", "--seed", "7", "--n-paths", "2000", "--out", str(target))
        assert code in (0, 1)
        outs.append((target.read_bytes(), target.with_suffix(".json").read_bytes()))
    assert outs[0] == outs[1]
    report = json.loads(outs[0][1])
    assert report["seed"] == 7 and report["n_valid"] + report["n_guard"] + report["n_maxed"] == 2000


def test_simulate_rejects_empty_ensemble(capsys):
    assert run(capsys, "simulate", "--n-paths", "0")[0] == 2

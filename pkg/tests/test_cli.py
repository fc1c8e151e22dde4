import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nlkit.cli import main
from nlkit.scenario import DistributionTuple, chsh_scenario, make_theta_family, pr_box, uniform_tuple


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, P in {
        "theta": make_theta_family(math.pi / 4),
        "theta3": make_theta_family(0.5, extended=True),
        "theta3p": make_theta_family(0.5, extended=True, primed=True),
        "pr": pr_box(),
        "uniform": uniform_tuple(chsh_scenario()),
    }.items():
        path = tmp_path / f"{name}.json"
        P.save(path)
        out[name] = str(path)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_validate(capsys, files):
    code, out, _ = run(capsys, "validate", files["theta"])
    assert code == 0 and json.loads(out)["ok"] is True


def test_validate_reports_bad_tuple(capsys, tmp_path):
    p = uniform_tuple(chsh_scenario()).p.copy()
    p[0, 1] = [[0.7, 0.1], [0.1, 0.1]]
    path = tmp_path / "bad.json"
    DistributionTuple(chsh_scenario(), p).save(path)
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0
    d = json.loads(out)
    assert d["ok"] is False and d["no_signaling"] is False


def test_chsh(capsys, files):
    _, out, _ = run(capsys, "chsh", files["theta"])
    d = json.loads(out)
    assert d["S"] == pytest.approx(2 * math.sqrt(2), abs=1e-11)
    assert d["N_tilde"] == pytest.approx(2 * math.sqrt(2) - 2, abs=1e-11)
    _, out, _ = run(capsys, "chsh", files["theta3"])
    assert json.loads(out)["alice_inputs"] == [0, 1]


def test_local(capsys, files):
    _, out, _ = run(capsys, "local", files["uniform"], "--fraction")
    d = json.loads(out)
    assert d["kind"] == "local" and d["local_fraction"] == pytest.approx(1.0)
    _, out, _ = run(capsys, "local", files["pr"])
    d = json.loads(out)
    assert d["kind"] == "nonlocal" and d["value"] > d["local_max"]


def test_order(capsys, files):
    _, out, _ = run(capsys, "order", files["theta3"], files["theta3p"])
    d = json.loads(out)
    assert d["kind"] == "feasible" and d["residual"] < 1e-8
    _, out, _ = run(capsys, "order", files["uniform"], files["pr"])
    assert json.loads(out)["kind"] == "infeasible"


def test_order_scenario_mismatch_exit_2(capsys, files):
    code, _, err = run(capsys, "order", files["theta"], files["theta3"])
    assert code == 2 and "error" in err


def test_rates_and_threshold(capsys, files):
    _, out, _ = run(capsys, "rates", files["theta"])
    d = json.loads(out)
    assert d["threshold_flag"] is True and d["eve_bound"] < 1e-9
    _, out, _ = run(capsys, "threshold")
    assert json.loads(out)["n_star"] == pytest.approx(0.651841134838, abs=1e-12)


def test_theta_sweep_csv(capsys):
    _, out, _ = run(capsys, "theta-sweep", "--from", "0", "--to", "0.785398163397", "--steps", "5", "--csv")
    lines = out.strip().splitlines()
    assert lines[0] == "theta,S,N_tilde,I,eve_bound,dw_lower,g_of_N"
    assert len(lines) == 6
    S = [float(r.split(",")[1]) for r in lines[1:]]
    assert S[0] == pytest.approx(2.0) and S[-1] == pytest.approx(2 * math.sqrt(2), abs=1e-9)


def test_theta_sweep_json(capsys):
    _, out, _ = run(capsys, "theta-sweep", "--steps", "3")
    rows = json.loads(out)
    assert len(rows) == 3 and rows[-1]["theta"] == pytest.approx(math.pi / 4)


def test_simulate_and_trace(capsys, files, tmp_path):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "--threads", "2", "simulate", files["theta"], "--rounds", "1000", "--seed", "3", "--trace", str(trace))
    assert code == 0
    d = json.loads(out)
    assert sum(map(sum, d["counts"])) == 1000
    assert len(trace.read_text().splitlines()) == 1001
    _, out, _ = run(capsys, "simulate", files["theta"], "--protocol", "measure_and_mask", "--xi", "1", "--zeta", "0", "--rounds", "500")
    assert json.loads(out)["protocol"] == "measure_and_mask"
    _, out, _ = run(capsys, "simulate", files["theta3"], "--protocol", "wiring_lemma", "--target", files["theta3p"], "--x-out", "2", "--rounds", "500")
    assert json.loads(out)["rounds"] == 500


def test_simulate_output_is_byte_identical(capsys, files, tmp_path):
    outs = []
    for threads in ("1", "3"):
        path = tmp_path / f"o{threads}.json"
        code, _, _ = run(capsys, "--threads", threads, "--out", str(path), "simulate", files["theta"], "--rounds", "200000", "--seed", "9")
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_error_exit_codes(capsys, files, tmp_path):
    code, _, _ = run(capsys, "validate", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, _ = run(capsys, "bogus")
    assert code == 2
    code, _, _ = run(capsys, "simulate", files["theta"], "--protocol", "wiring_lemma")
    assert code == 2
    code, _, _ = run(capsys, "theta-sweep", "--steps", "0")
    assert code == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "nlkit", "chsh", files["pr"]], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["S"] == pytest.approx(4.0)


def test_negative_entry_verdict_is_data(capsys, tmp_path):
    p = uniform_tuple(chsh_scenario()).p.copy()
    p[0, 0, 0, 0] = -0.05
    p[0, 0, 1, 1] += 0.05
    path = tmp_path / "bad.json"
    DistributionTuple(chsh_scenario(), p).save(path)
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 0 and json.loads(out)["nonnegative"] is False


def test_unknown_flag_prints_usage(capsys, files):
    code, out, err = run(capsys, "chsh", files["pr"], "--nope")
    assert code == 2 and out == "" and "usage" in err


def test_enumeration_cap_is_numerical_failure(capsys, tmp_path):
    from nlkit.scenario import BellScenario

    path = tmp_path / "big.json"
    uniform_tuple(BellScenario(4, 4)).save(path)
    code, out, err = run(capsys, "order", str(path), str(path))
    assert code == 3 and out == "" and "numerical" in err


def test_repeat_invocations_identical(capsys, files):
    outs = [run(capsys, "order", files["theta3"], files["theta3p"])[1] for _ in range(2)]
    assert outs[0] == outs[1]

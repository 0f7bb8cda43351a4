import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from hptml import __version__
from hptml.cli import main
from hptml.experiments import (
    FIG1_PARAMS,
    curve_from_csv,
    load_histogram,
    output_schema,
    poisson_tv,
    read_csv,
)
from hptml.intensity import intensity_analytic


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ml_eval(capsys):
    code, out, _ = run(capsys, "ml-eval", "--a", "1", "--b", "1", "--z", "1")
    assert code == 0
    assert float(out) == pytest.approx(math.e, rel=1e-14)


def test_kernel_table(capsys):
    code, out, _ = run(capsys, "kernel", "--beta", "0.9", "--nu", "1", "--gamma", "0.1", "--tmax", "5")
    assert code == 0
    meta, cols, rows = read_csv(out)
    assert cols == ["t", "density", "cdf"]
    assert meta["kernel"] == {"kind": "tml", "beta": 0.9, "nu": 1.0, "gamma": 0.1}
    cdf = [r[2] for r in rows]
    assert cdf[-1] < 1 and all(b >= a for a, b in zip(cdf, cdf[1:]))
    assert rows[-1][0] == 5.0


def test_intensity_csv(capsys, tmp_path):
    out_file = tmp_path / "lam.csv"
    code, out, _ = run(capsys, "intensity", "--tmax", "1", "--step", "0.25", "--out", str(out_file))
    assert code == 0 and out == ""
    meta, cols, rows = read_csv(out_file.read_text())
    assert cols == ["t", "lambda_analytic", "lambda_numeric", "abs_diff"]
    assert [r[0] for r in rows] == [0.25, 0.5, 0.75, 1.0]
    assert meta["version"] == __version__
    assert max(r[3] for r in rows) == meta["max_abs_diff"] <= 1e-6


def test_simulate_path(capsys):
    args = ("simulate", "--T", "5", "--seed", "3", "--kernel", "exponential")
    code, out, _ = run(capsys, *args)
    assert code == 0
    meta, cols, rows = read_csv(out)
    times = [r[0] for r in rows]
    assert cols == ["time"] and meta["seed"] == 3 and meta["kernel"]["kind"] == "exponential"
    assert all(0 < a < b <= 5 for a, b in zip(times, times[1:]))
    assert run(capsys, *args)[1] == out


def test_simulate_thinning_rejects_tml(capsys):
    code, _, err = run(capsys, "simulate", "--method", "thinning", "--kernel", "tml")
    assert code == 2 and "bounded kernel" in err


def test_distribution_poisson_limit(capsys, tmp_path):
    path = tmp_path / "h.csv"
    code, _, _ = run(capsys, "distribution", "--alpha", "0", "--lambda0", "1", "--t", "1",
                     "--runs", "20000", "--out", str(path))
    assert code == 0
    text = path.read_text()
    h = load_histogram(text)
    assert h.n_runs == 20000
    assert poisson_tv(h, 1.0) <= 0.02
    meta, cols, rows = read_csv(text)
    assert cols == ["n", "frequency", "probability"]
    assert sum(r[2] for r in rows) == pytest.approx(1.0, abs=1e-5)


def test_distribution_json_validates(capsys):
    code, out, _ = run(capsys, "distribution", "--t", "2", "--runs", "300", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, output_schema())
    assert {"params", "seed", "n_runs", "version"} <= set(doc["meta"])
    assert sum(doc["data"]["frequency"]) == 300


def test_compare(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.csv"
    run(capsys, "distribution", "--t", "2", "--runs", "500", "--seed", "1", "--format", "json",
        "--out", str(a))
    run(capsys, "distribution", "--t", "2", "--runs", "500", "--seed", "1", "--out", str(b))
    code, out, _ = run(capsys, "compare", str(a), str(b))
    assert code == 0 and float(out) == 0.0
    c = tmp_path / "c.csv"
    run(capsys, "distribution", "--t", "3", "--runs", "500", "--out", str(c))
    assert run(capsys, "compare", str(a), str(c))[0] == 2
    assert run(capsys, "compare", str(a), str(tmp_path / "missing.csv"))[0] == 2


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.2, "tmax": 0.5, "step": 0.25}))
    _, out, _ = run(capsys, "--config", str(cfg), "intensity")
    meta, _, rows = read_csv(out)
    assert meta["params"]["alpha"] == 0.2 and len(rows) == 2
    _, out, _ = run(capsys, "--config", str(cfg), "intensity", "--alpha", "0.3")
    assert read_csv(out)[0]["params"]["alpha"] == 0.3


def test_preset_overrides_recorded(capsys):
    code, out, _ = run(capsys, "preset", "fig3", "--alpha", "0.3", "--t", "1", "--runs", "200",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, output_schema())
    assert doc["meta"]["overrides"] == ["alpha", "t_values"]
    assert doc["meta"]["variant_values"] == [0.3]
    assert len(doc["data"]["cells"]) == 1


def test_preset_csv_layout(capsys):
    code, out, _ = run(capsys, "preset", "fig2", "--t", "1", "--runs", "200", "--format", "csv")
    assert code == 0
    lines = [x for x in out.splitlines() if not x.startswith("#")]
    assert lines[0] == "t,beta,process,n,frequency,probability"
    procs = {x.split(",")[2] for x in lines[1:]}
    assert procs == {"hptml", "comparison"}


@pytest.mark.parametrize("argv", [
    ["ml-eval", "--a", "2", "--b", "1", "--z", "1"],
    ["ml-eval", "--a", "0.5", "--b", "1", "--z", "1", "--tol", "1e-3"],
    ["intensity", "--alpha", "-0.5"],
    ["kernel", "--tmax", "-1"],
    ["distribution", "--runs", "10"],
    ["preset", "fig1", "--runs", "100"],
    ["nonsense"],
    ["--config", "/nonexistent/cfg.json", "intensity"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_numeric_failure_exit_code(capsys):
    # M_{0.5,1}(1e4) ~ exp(1e8) is not representable
    code, _, err = run(capsys, "ml-eval", "--a", "0.5", "--b", "1", "--z", "1e4")
    assert code == 1 and "numerical failure" in err


def test_fig1_round_trip(tmp_path):
    path = tmp_path / "fig1.csv"
    proc = subprocess.run([sys.executable, "-m", "hptml.cli", "preset", "fig1", "--out", str(path)],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    text = path.read_text()
    meta, cols, rows = read_csv(text)
    assert len(rows) == 1500 and rows[0][0] == 0.01 and rows[-1][0] == 15.0
    assert rows[0][1] == pytest.approx(1.0, abs=0.02) and rows[0][2] == pytest.approx(1.0, abs=0.02)
    assert meta["max_abs_diff"] <= 2e-2
    assert meta["params"] == FIG1_PARAMS.as_dict()
    curve = curve_from_csv(text)
    assert curve.params == FIG1_PARAMS
    assert curve.t == tuple(r[0] for r in rows)
    assert curve.value == tuple(r[1] for r in rows)
    assert curve.value[99] == intensity_analytic(FIG1_PARAMS, 1.0)
    assert np.all(np.diff(curve.t) > 0)

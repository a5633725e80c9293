import io
import json
import subprocess
import sys

import pytest

from vwapopt.cli import main

BASE = {
    "market": {"s0": 100, "mu": -0.5, "sigma": 0.0, "T": 1, "x": 1},
    "impact": {"family": "power", "c": 0.5, "p": 2},
    "volume": {"kind": "constant", "v": 1, "grid_n": 1000},
    "run": {"seed": 0, "n_paths": 200},
}


def write(tmp_path, cfg, name="cfg.json"):
    f = tmp_path / name
    f.write_text(json.dumps(cfg))
    return str(f)


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def with_(**blocks):
    cfg = json.loads(json.dumps(BASE))
    for key, val in blocks.items():
        cfg[key] = {**cfg.get(key, {}), **val} if isinstance(val, dict) else val
    return cfg


def test_solve_quadratic(tmp_path):
    code, out, _ = run(["solve", "--config", write(tmp_path, BASE)])
    assert code == 0
    rep = json.loads(out)
    assert rep["nu"] == pytest.approx(1.0, abs=1e-9)
    assert rep["J_closed_form"] == 63.212056
    assert rep["feasible"] is True
    assert rep["residual"] <= 1e-10


def test_solve_hat_log_reports_nu_hat(tmp_path):
    cfg = with_(impact={"family": "hat_log", "c": 1})
    cfg["impact"] = {"family": "hat_log", "c": 1}
    code, out, _ = run(["solve", "--config", write(tmp_path, cfg)])
    assert code == 0
    rep = json.loads(out)
    assert rep["nu_hat"] == pytest.approx(0.5758536312248612, abs=1e-10)
    assert rep["nu"] == pytest.approx(rep["nu_hat"] / (1 - rep["nu_hat"]), rel=1e-12)
    assert rep["mode"] == "endogenous"


def test_flat_h_is_shape_error(tmp_path):
    cfg = dict(BASE, impact={"family": "piecewise_h", "knots": [[0, 1], [1, 1]]})
    for cmd in ("solve", "validate-impact"):
        code, out, err = run([cmd, "--config", write(tmp_path, cfg)])
        assert code == 2, cmd
        assert "error" in json.loads(out) or json.loads(out)["passed"] is False


def test_validate_impact_ok(tmp_path):
    code, out, _ = run(["validate-impact", "--config", write(tmp_path, BASE)])
    assert code == 0
    assert json.loads(out)["passed"] is True


@pytest.mark.parametrize("patch, field", [
    ({"market": {"mu": 0.1}}, "market.mu"),
    ({"market": {"x": -1}}, "market.x"),
    ({"market": {"s0": "a"}}, "market.s0"),
    ({"volume": {"kind": "weird"}}, "volume.kind"),
    ({"run": {"n_paths": 0}}, "run.n_paths"),
    ({"run": {"mode": "endogenous"}}, "run.mode"),
    ({"run": {"strategy": "vwap"}}, "run.strategy"),
])
def test_config_errors_name_the_field(tmp_path, patch, field):
    code, out, err = run(["solve", "--config", write(tmp_path, with_(**patch))])
    assert code == 1
    assert field in err
    assert json.loads(out)["error"] == "ConfigError"


def test_missing_config_and_bad_json(tmp_path):
    assert run(["solve", "--config", str(tmp_path / "nope.json")])[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["solve", "--config", str(bad)])[0] == 1


def test_oracle_guard(tmp_path):
    cfg = with_(run={"n_intervals": 7})
    cfg["volume"]["grid_n"] = 700
    code, out, _ = run(["oracle", "--config", write(tmp_path, cfg)])
    assert code == 4
    assert json.loads(out)["error"] == "EnumerationTooLarge"


def test_oracle_output(tmp_path):
    cfg = with_(market={"x": 0.6})
    outdir = tmp_path / "o"
    code, out, _ = run(["oracle", "--config", write(tmp_path, cfg), "--out", str(outdir)])
    assert code == 0
    rep = json.loads(out)
    assert rep["best_rates"] == [1.0, 1.0, 1.0, 0.0, 0.0]
    assert (outdir / "top.csv").read_text().startswith("rank,value,rate_0")
    assert json.loads((outdir / "report.json").read_text()) == rep


def test_domain_error_exit_3(tmp_path):
    # a huge TWAP rate pushes zeta / (v + zeta) to 1.0 in floating point
    cfg = dict(BASE, impact={"family": "hat_log", "c": 1},
               market={**BASE["market"], "x": 1e17},
               run={"strategy": "twap", "n_paths": 1})
    code, out, err = run(["simulate", "--config", write(tmp_path, cfg)])
    assert code == 3
    assert json.loads(out)["error"] == "ImpactDomainError"


def test_compare_needs_two_strategies(tmp_path):
    cfg = with_(run={"strategies": ["twap"]})
    code, _, err = run(["compare", "--config", write(tmp_path, cfg)])
    assert code == 1
    assert "run.strategies" in err


def test_simulate_is_byte_identical(tmp_path):
    cfg = dict(BASE, market={**BASE["market"], "sigma": 0.3},
               volume={"kind": "lognormal", "v0": 1, "kappa": 5, "theta": 1, "eta": 0.3,
                       "grid_n": 200})
    path = write(tmp_path, cfg)
    a = run(["simulate", "--config", path, "--seed", "7"])
    b = run(["simulate", "--config", path, "--seed", "7"])
    c = run(["simulate", "--config", path, "--seed", "8"])
    assert a[0] == 0 and a[1] == b[1]
    assert a[1] != c[1]


def test_simulate_sigma_zero_has_zero_stderr(tmp_path):
    code, out, _ = run(["simulate", "--config", write(tmp_path, BASE)])
    est = json.loads(out)["estimate"]
    assert est["stderr"] == 0.0
    assert est["z_vs_closed_form"] is None
    assert abs(est["error_vs_closed_form"]) < 0.05


def test_compare_duplicate_rows_identical(tmp_path):
    cfg = dict(BASE, market={**BASE["market"], "sigma": 0.3},
               run={"n_paths": 400, "strategies": ["twap", "twap", "optimal_vwap"]})
    code, out, _ = run(["compare", "--config", write(tmp_path, cfg)])
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[0] == rows[1]
    # constant volume: TWAP and VWAP at x = nu T are the same schedule
    assert rows[0]["mean"] == pytest.approx(rows[2]["mean"], abs=4 * rows[2]["stderr"])


def test_compare_ushape_prefers_optimal(tmp_path):
    cfg = dict(BASE, market={**BASE["market"], "x": 0.8},
               volume={"kind": "ushape", "a": 2, "b": -4, "c": 4, "grid_n": 1000},
               run={"strategies": ["optimal_vwap", "twap", {"kind": "pov", "nu_multiple": 2}],
                    "n_paths": 1})
    outdir = tmp_path / "cmp"
    code, out, _ = run(["compare", "--config", write(tmp_path, cfg), "--out", str(outdir)])
    assert code == 0
    rows = json.loads(out)["rows"]
    means = {r["strategy"].split("(")[0]: r["mean"] for r in rows}
    assert means["optimal_vwap"] == max(means.values())
    lines = (outdir / "compare.csv").read_text().splitlines()
    assert lines[0] == "strategy,mean,stderr,is_cost,z_vs_closed_form,mean_sold"
    assert len(lines) == 4
    assert (outdir / "schedule.csv").exists() is False


def test_simulate_writes_schedule_and_paths(tmp_path):
    cfg = dict(BASE, run={"n_paths": 3, "paths_csv": True})
    outdir = tmp_path / "sim"
    code, _, _ = run(["simulate", "--config", write(tmp_path, cfg), "--out", str(outdir)])
    assert code == 0
    sched = (outdir / "schedule.csv").read_text().splitlines()
    assert sched[0] == "t,v,V,zeta,sold"
    assert len(sched) == 1002
    assert len((outdir / "paths.csv").read_text().splitlines()) == 4


def test_csv_format(tmp_path):
    code, out, _ = run(["solve", "--config", write(tmp_path, BASE), "--format", "csv"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "field,value"
    assert any(line.startswith("nu,") for line in lines)


def test_literal_indicator_flag(tmp_path):
    cfg = dict(BASE, market={**BASE["market"], "x": 0.5})
    code, out, _ = run(["simulate", "--config", write(tmp_path, cfg), "--literal-indicator"])
    rep = json.loads(out)
    assert rep["literal_indicator"] is True
    assert "literal_indicator" in rep["estimate"]["flags"]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vwapopt", "solve", "--config",
                           write(tmp_path, BASE)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["nu"] == pytest.approx(1.0)

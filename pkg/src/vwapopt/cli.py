"""Command-line front end: ``vwapopt {solve,simulate,oracle,compare,validate-impact}``.

Exit codes: 0 success, 1 configuration, 2 impact shape / solver,
3 impact domain during simulation, 4 oracle enumeration guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import engine, market, oracle, strategy
from .config import RunConfig, build_strategy, load_config
from .errors import ConfigError, ImpactShapeError, VwapOptError
from .impact import solve_nu, validate

DEFAULT_N_PATHS = 10_000
DEFAULT_SEED = 0
ADVISORY_CHECKS = ("h_diverges",)


def _money(v):
    """Currency values are rounded for presentation only."""
    return None if v is None else round(float(v), 6)


class CommandFailed(Exception):
    def __init__(self, exit_code, report):
        super().__init__(report.get("error", ""))
        self.exit_code = exit_code
        self.report = report


# ---------------------------------------------------------------------------
# shared steps
# ---------------------------------------------------------------------------


def _impact_and_rate(cfg: RunConfig):
    try:
        imp = cfg.build_impact()
    except ImpactShapeError as exc:
        raise CommandFailed(2, {"error": type(exc).__name__, "message": str(exc)}) from None
    report = validate(imp)
    # the divergence probe is heuristic; a truly bounded h surfaces as BracketFailure
    hard = [name for name in report.failures() if name not in ADVISORY_CHECKS]
    if hard:
        raise CommandFailed(2, {"error": "ImpactValidationFailed",
                                "message": "impact fails: " + ", ".join(hard),
                                "validation": report.to_dict()})
    solved = solve_nu(imp, cfg.market.mu, cfg.run.get("tol", 1e-10))
    return imp, solved, report


def _seed(cfg, args):
    return args.seed if args.seed is not None else cfg.run.get("seed", DEFAULT_SEED)


def _n_paths(cfg, args):
    return args.n_paths if args.n_paths is not None else cfg.run.get("n_paths", DEFAULT_N_PATHS)


def _feasibility(cfg, nu, seed, n_paths):
    T = cfg.market.T
    if cfg.volume.deterministic:
        paths = [market.build_deterministic_path(cfg.volume, T)]
    else:
        paths = [market.sample_volume_path(cfg.volume, T, seed, k)
                 for k in range(min(n_paths, 1000))]
    return market.check_feasibility(cfg.market.x, nu, paths)


def _estimate_row(est, closed_form, label=None):
    row = {
        "mean": _money(est.mean),
        "stderr": _money(est.stderr),
        "ci95": [_money(est.ci95_low), _money(est.ci95_high)],
        "is_cost": _money(est.is_cost),
        "n_paths": est.n_paths,
        "mean_sold": est.mean_sold,
        "violation_fraction": est.violation_fraction,
        "flags": list(est.flags),
    }
    if label is not None:
        row = {"strategy": label, **row}
    row["z_vs_closed_form"] = (
        (est.mean - closed_form) / est.stderr if est.stderr > 0 else None
    )
    row["error_vs_closed_form"] = _money(est.mean - closed_form)
    return row


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, args):
    imp, solved, report = _impact_and_rate(cfg)
    seed, n_paths = _seed(cfg, args), _n_paths(cfg, args)
    feas = _feasibility(cfg, solved.nu, seed, n_paths)
    out = solved.to_dict()
    out.update({
        "feasible": feas.feasible,
        "feasibility": feas.to_dict(),
        "J_closed_form": _money(engine.closed_form_value(cfg.market.s0, solved.h_nu, cfg.market.x)),
        "validation": report.to_dict(),
    })
    return out, {}


def _run_simulation(cfg, args, strat, imp):
    return engine.simulate(strat, cfg.volume, cfg.market, imp, mode=cfg.mode,
                           n_paths=_n_paths(cfg, args), seed=_seed(cfg, args),
                           literal_indicator=args.literal_indicator, keep_paths=True)


def cmd_simulate(cfg: RunConfig, args):
    imp, solved, _ = _impact_and_rate(cfg)
    entry = cfg.run.get("strategy", {"kind": strategy.OPTIMAL_VWAP})
    strat = build_strategy(entry, solved.nu, cfg)
    est = _run_simulation(cfg, args, strat, imp)
    J = engine.closed_form_value(cfg.market.s0, solved.h_nu, cfg.market.x)
    out = {
        "strategy": strat.label,
        "mode": cfg.mode,
        "seed": _seed(cfg, args),
        "nu": solved.nu,
        "h_nu": solved.h_nu,
        "J_closed_form": _money(J),
        "literal_indicator": bool(args.literal_indicator),
        "estimate": _estimate_row(est, J),
    }
    if strat.kind != strategy.OPTIMAL_VWAP:
        out["estimate"]["z_vs_closed_form"] = None
    files = {}
    if cfg.run.get("paths_csv"):
        files["paths.csv"] = _table_csv(
            ["path_id", "revenue", "sold"],
            [[k, repr(float(r)), repr(float(s))]
             for k, (r, s) in enumerate(zip(est.revenues, est.sold))])
    if cfg.volume.deterministic:
        path = market.build_deterministic_path(cfg.volume, cfg.market.T)
        sched = strategy.realize(strat, path, literal_indicator=args.literal_indicator)
        buf = io.StringIO()
        _write_schedule(buf, sched, path)
        files["schedule.csv"] = buf.getvalue()
    return out, files


def cmd_compare(cfg: RunConfig, args):
    entries = cfg.run.get("strategies", [])
    if len(entries) < 2:
        raise ConfigError("run.strategies: compare needs at least two strategies")
    imp, solved, _ = _impact_and_rate(cfg)
    J = engine.closed_form_value(cfg.market.s0, solved.h_nu, cfg.market.x)
    rows = []
    for entry in entries:
        strat = build_strategy(entry, solved.nu, cfg)
        est = _run_simulation(cfg, args, strat, imp)
        rows.append(_estimate_row(est, J, label=strat.label))
    out = {
        "common_random_numbers": True,
        "seed": _seed(cfg, args),
        "mode": cfg.mode,
        "nu": solved.nu,
        "J_closed_form": _money(J),
        "rows": rows,
    }
    cols = ["strategy", "mean", "stderr", "is_cost", "z_vs_closed_form", "mean_sold"]
    files = {"compare.csv": _table_csv(cols, [[r[c] for c in cols] for r in rows])}
    return out, files


def cmd_oracle(cfg: RunConfig, args):
    if not cfg.volume.deterministic:
        raise ConfigError("volume.kind: the brute-force oracle needs a deterministic volume model")
    imp, _, _ = _impact_and_rate(cfg)
    path = market.build_deterministic_path(cfg.volume, cfg.market.T)
    res = oracle.brute_force(cfg.market, imp, path,
                             n_intervals=cfg.run.get("n_intervals", 5),
                             rate_grid=cfg.run.get("rate_grid"),
                             mode=cfg.mode, top_k=cfg.run.get("top_k", 10))
    out = res.to_dict()
    for k in ("best_value", "closed_form", "gap"):
        out[k] = _money(out[k])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "value"] + [f"rate_{j}" for j in range(len(res.best_rates))])
    for rank, (value, rates) in enumerate(res.top, 1):
        w.writerow([rank, _money(value)] + rates)
    return out, {"top.csv": buf.getvalue()}


def cmd_validate_impact(cfg: RunConfig, args):
    try:
        imp = cfg.build_impact()
    except ImpactShapeError as exc:
        raise CommandFailed(2, {"error": type(exc).__name__, "message": str(exc)}) from None
    report = validate(imp)
    out = report.to_dict()
    if not report.passed:
        raise CommandFailed(2, out)
    return out, {}


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "validate-impact": cmd_validate_impact,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def dumps(report):
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def _table_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write_schedule(fh, sched, path):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "v", "V", "zeta", "sold"])
    for row in zip(path.times, path.rates, path.cumv, sched.rates, sched.sold):
        w.writerow([repr(float(c)) for c in row])


def _flatten(report, prefix=""):
    items = []
    for k, v in report.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            items.extend(_flatten(v, key + "."))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            for i, sub in enumerate(v):
                items.extend(_flatten(sub, f"{key}[{i}]."))
        else:
            items.append((key, json.dumps(_jsonable(v))))
    return items


def _emit(report, files, args, stdout):
    text = dumps(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        for name, content in files.items():
            (out / name).write_text(content)
    if args.format == "csv":
        if args.command == "compare":
            stdout.write(files["compare.csv"])
        else:
            stdout.write(_table_csv(["field", "value"], _flatten(report)))
    else:
        stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vwapopt",
        description="Optimal participation rates and VWAP execution under general market impact.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run configuration (JSON)")
    parser.add_argument("--seed", type=int, help="override run.seed")
    parser.add_argument("--n-paths", type=int, dest="n_paths", help="override run.n_paths")
    parser.add_argument("--out", help="directory for report.json and CSV outputs")
    parser.add_argument("--literal-indicator", action="store_true",
                        help="debug: switch VWAP on v_t <= x/nu instead of the volume clock")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed: must be >= 0")
        if args.n_paths is not None and args.n_paths < 1:
            raise ConfigError("--n-paths: must be >= 1")
        cfg = load_config(args.config)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report, files = COMMANDS[args.command](cfg, args)
    except CommandFailed as exc:
        stdout.write(dumps(exc.report))
        stderr.write(f"vwapopt: {exc.report.get('message', exc.report.get('error', 'failed'))}\n")
        return exc.exit_code
    except VwapOptError as exc:
        stderr.write(f"vwapopt: {type(exc).__name__}: {exc}\n")
        stdout.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
        return exc.exit_code
    _emit(report, files, args, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Run-configuration file (JSON) parsing with field-path error messages.

Schema::

    {
      "market": {"s0": 100, "mu": -0.5, "sigma": 0.3, "T": 1, "x": 1},
      "impact": {"family": "power", "c": 0.5, "p": 2}
              | {"family": "kneed", "h_flat": 1}
              | {"family": "hat_log", "c": 1}
              | {"family": "piecewise_h", "knots": [[0, 1], [1, 1], [2, 2]],
                 "mode": "exogenous"},
      "volume": {"kind": "constant", "v": 1, "grid_n": 1000}
              | {"kind": "ushape", "a": 2, "b": -4, "c": 4, "grid_n": 1000}
              | {"kind": "lognormal", "v0": 1, "kappa": 5, "theta": 1,
                 "eta": 0.3, "grid_n": 1000}
              | {"kind": "csv", "path": "volume.csv"},
      "run": {"seed": 0, "n_paths": 10000, "tol": 1e-10,
              "strategy": "optimal_vwap",
              "strategies": ["optimal_vwap", "twap", {"kind": "pov", "nu_multiple": 2}],
              "mode": "exogenous", "n_intervals": 5, "rate_grid": [0, 0.1, ...],
              "paths_csv": false, "top_k": 10}
    }

Strategy entries are either a bare name (``optimal_vwap``, ``twap``) or an
object: ``{"kind": "pov", "beta": 2.0}``, ``{"kind": "pov", "nu_multiple": 2}``
or ``{"kind": "schedule", "file": "sched.csv"}`` (columns ``t, zeta``).
Relative file paths resolve against the config file's directory.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass
from pathlib import Path

from . import impact as impact_mod
from . import strategy as strategy_mod
from .errors import ConfigError, ImpactShapeError
from .market import MarketParams, VolumeModel


@dataclass(frozen=True)
class RunConfig:
    market: MarketParams
    impact_spec: dict
    volume: VolumeModel
    mode: str
    run: dict
    base_dir: Path

    def build_impact(self):
        """Construct the impact function; shape violations raise ``ImpactShapeError``."""
        return build_impact(self.impact_spec)


def _number(block, key, where, default=None, integer=False):
    if key not in block:
        if default is not None:
            return default
        raise ConfigError(f"{where}.{key}: required field missing")
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, numbers.Real) or not math.isfinite(val):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
        return int(val)
    return float(val)


def _block(cfg, key):
    if key not in cfg:
        raise ConfigError(f"{key}: required block missing")
    if not isinstance(cfg[key], dict):
        raise ConfigError(f"{key}: expected an object")
    return cfg[key]


def _market(block):
    fields = {k: _number(block, k, "market") for k in ("s0", "mu", "sigma", "T", "x")}
    checks = {"s0": fields["s0"] > 0, "mu": fields["mu"] < 0, "sigma": fields["sigma"] >= 0,
              "T": fields["T"] > 0, "x": fields["x"] >= 0}
    bounds = {"s0": "> 0", "mu": "< 0", "sigma": ">= 0", "T": "> 0", "x": ">= 0"}
    for k, ok in checks.items():
        if not ok:
            raise ConfigError(f"market.{k}: must be {bounds[k]} (got {fields[k]})")
    return MarketParams(**fields)


def build_impact(spec):
    fam = spec.get("family")
    if fam == "power":
        return impact_mod.make_power_impact(spec["c"], spec["p"])
    if fam == "kneed":
        return impact_mod.make_kneed_impact(spec.get("h_flat", 1.0))
    if fam == "hat_log":
        return impact_mod.make_hat_log_impact(spec.get("c", 1.0))
    if fam == "piecewise_h":
        return impact_mod.make_piecewise_h_impact(spec["knots"], spec.get("mode", "exogenous"))
    raise ConfigError(f"impact.family: unknown family {fam!r}")


def _impact_spec(block):
    fam = block.get("family")
    if fam == "power":
        _number(block, "c", "impact")
        _number(block, "p", "impact")
        mode = impact_mod.EXOGENOUS
    elif fam == "kneed":
        _number(block, "h_flat", "impact", default=1.0)
        mode = impact_mod.EXOGENOUS
    elif fam == "hat_log":
        _number(block, "c", "impact", default=1.0)
        mode = impact_mod.ENDOGENOUS
    elif fam == "piecewise_h":
        knots = block.get("knots")
        if not isinstance(knots, list) or len(knots) < 2:
            raise ConfigError("impact.knots: expected a list of at least two [z, h] pairs")
        for i, kn in enumerate(knots):
            if not isinstance(kn, list) or len(kn) != 2:
                raise ConfigError(f"impact.knots[{i}]: expected a [z, h] pair")
            for j, key in enumerate(("z", "h")):
                _number({key: kn[j]}, key, f"impact.knots[{i}]")
        mode = block.get("mode", impact_mod.EXOGENOUS)
        if mode not in impact_mod.MODES:
            raise ConfigError(f"impact.mode: expected one of {impact_mod.MODES}, got {mode!r}")
    else:
        raise ConfigError(f"impact.family: unknown family {fam!r}")
    return dict(block), mode


def _volume(block, base_dir):
    kind = block.get("kind")
    grid_n = _number(block, "grid_n", "volume", default=1000, integer=True)
    if grid_n < 1:
        raise ConfigError(f"volume.grid_n: must be >= 1 (got {grid_n})")
    try:
        if kind == "constant":
            v = _number(block, "v", "volume", default=1.0)
            if not v > 0:
                raise ConfigError(f"volume.v: must be > 0 (got {v})")
            return VolumeModel.constant(v, grid_n)
        if kind == "ushape":
            return VolumeModel.ushape(*(_number(block, k, "volume") for k in "abc"), grid_n)
        if kind == "lognormal":
            vals = {k: _number(block, k, "volume") for k in ("v0", "kappa", "theta", "eta")}
            return VolumeModel.lognormal(**vals, grid_n=grid_n)
        if kind == "csv":
            if not isinstance(block.get("path"), str):
                raise ConfigError("volume.path: expected a file path")
            return VolumeModel.from_csv(base_dir / block["path"])
    except ConfigError as exc:
        if str(exc).startswith("volume."):
            raise
        raise ConfigError(f"volume: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"volume.path: {exc}") from None
    raise ConfigError(f"volume.kind: unknown kind {kind!r}")


def _strategy_entry(entry, where):
    if isinstance(entry, str):
        if entry not in (strategy_mod.OPTIMAL_VWAP, strategy_mod.TWAP):
            raise ConfigError(f"{where}: unknown strategy {entry!r}")
        return {"kind": entry}
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"{where}: expected a strategy name or object with 'kind'")
    kind = entry["kind"]
    if kind in (strategy_mod.OPTIMAL_VWAP, strategy_mod.TWAP):
        return {"kind": kind}
    if kind == strategy_mod.POV:
        if "beta" in entry:
            if not _number(entry, "beta", where) > 0:
                raise ConfigError(f"{where}.beta: must be > 0")
        elif not _number(entry, "nu_multiple", where) > 0:
            raise ConfigError(f"{where}.nu_multiple: must be > 0")
        return dict(entry)
    if kind == strategy_mod.SCHEDULE:
        if not isinstance(entry.get("file"), str):
            raise ConfigError(f"{where}.file: expected a CSV path")
        return dict(entry)
    raise ConfigError(f"{where}.kind: unknown strategy kind {kind!r}")


def _run(block, mode):
    run = dict(block)
    if "seed" in run:
        seed = _number(run, "seed", "run", integer=True)
        if seed < 0:
            raise ConfigError("run.seed: must be >= 0")
        run["seed"] = seed
    if "n_paths" in run:
        n = _number(run, "n_paths", "run", integer=True)
        if n < 1:
            raise ConfigError("run.n_paths: must be >= 1")
        run["n_paths"] = n
    if "tol" in run and not _number(run, "tol", "run") > 0:
        raise ConfigError("run.tol: must be > 0")
    if "n_intervals" in run:
        n = _number(run, "n_intervals", "run", integer=True)
        if n < 1:
            raise ConfigError("run.n_intervals: must be >= 1")
        run["n_intervals"] = n
    if "rate_grid" in run:
        grid = run["rate_grid"]
        if not isinstance(grid, list) or not grid:
            raise ConfigError("run.rate_grid: expected a non-empty list")
        for i, r in enumerate(grid):
            if _number({"r": r}, "r", f"run.rate_grid[{i}]") < 0:
                raise ConfigError(f"run.rate_grid[{i}]: must be >= 0")
    if "strategy" in run:
        run["strategy"] = _strategy_entry(run["strategy"], "run.strategy")
    if "strategies" in run:
        if not isinstance(run["strategies"], list):
            raise ConfigError("run.strategies: expected a list")
        run["strategies"] = [_strategy_entry(s, f"run.strategies[{i}]")
                             for i, s in enumerate(run["strategies"])]
    if "mode" in run and run["mode"] != mode:
        raise ConfigError(f"run.mode: {run['mode']!r} does not match the impact mode {mode!r}")
    return run


def parse_config(cfg, base_dir=".") -> RunConfig:
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object at top level")
    market = _market(_block(cfg, "market"))
    spec, mode = _impact_spec(_block(cfg, "impact"))
    volume = _volume(_block(cfg, "volume"), Path(base_dir))
    run = _run(cfg.get("run", {}), mode)
    return RunConfig(market, spec, volume, mode, run, Path(base_dir))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return parse_config(cfg, path.parent)


def build_strategy(entry, nu, cfg: RunConfig):
    """Concrete strategy for a parsed strategy entry and the solved rate ``nu``."""
    x, T = cfg.market.x, cfg.market.T
    kind = entry["kind"]
    if kind == strategy_mod.OPTIMAL_VWAP:
        return strategy_mod.optimal_vwap(nu, x)
    if kind == strategy_mod.TWAP:
        return strategy_mod.twap(x, T)
    if kind == strategy_mod.POV:
        beta = entry["beta"] if "beta" in entry else entry["nu_multiple"] * nu
        return strategy_mod.pov(beta, x)
    try:
        return strategy_mod.load_schedule_csv(cfg.base_dir / entry["file"], x)
    except OSError as exc:
        raise ConfigError(f"schedule file: {exc}") from None


__all__ = ["RunConfig", "parse_config", "load_config", "build_impact", "build_strategy",
           "ImpactShapeError"]

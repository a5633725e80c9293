"""Market parameters, volume-rate models and the cumulative volume clock."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ConfigError, NonPositiveRate

CONSTANT = "constant"
USHAPE = "ushape"
LOGNORMAL = "lognormal"
REPLAY = "replay"
DETERMINISTIC_KINDS = (CONSTANT, USHAPE, REPLAY)


@dataclass(frozen=True)
class MarketParams:
    """Initial price ``s0``, drift ``mu`` and volatility ``sigma`` per unit of
    volume-time, horizon ``T`` and inventory ``x``."""

    s0: float
    mu: float
    sigma: float
    T: float
    x: float

    def __post_init__(self):
        problems = []
        if not self.s0 > 0:
            problems.append(f"s0 must be > 0 (got {self.s0})")
        if not self.mu < 0:
            problems.append(f"mu must be < 0 (got {self.mu})")
        if not self.sigma >= 0:
            problems.append(f"sigma must be >= 0 (got {self.sigma})")
        if not self.T > 0:
            problems.append(f"T must be > 0 (got {self.T})")
        if not self.x >= 0:
            problems.append(f"x must be >= 0 (got {self.x})")
        if problems:
            raise ConfigError("; ".join(problems))

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in ("s0", "mu", "sigma", "T", "x")}
        values.update(changes)
        return MarketParams(**values)


@dataclass(frozen=True)
class VolumeModel:
    """A volume-rate model on a uniform grid of ``grid_n`` steps.

    Use the classmethod constructors rather than filling ``params`` by hand.
    """

    kind: str
    params: dict
    grid_n: int = 1000
    replay: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.grid_n) != self.grid_n or self.grid_n < 1:
            raise ConfigError(f"grid_n must be a positive integer (got {self.grid_n})")

    @classmethod
    def constant(cls, v=1.0, grid_n=1000):
        if not v > 0:
            raise NonPositiveRate(f"constant volume rate must be > 0 (got {v})")
        return cls(CONSTANT, {"v": float(v)}, grid_n)

    @classmethod
    def ushape(cls, a, b, c, grid_n=1000):
        """Quadratic intraday profile ``v(t) = a + b t + c t**2``."""
        return cls(USHAPE, {"a": float(a), "b": float(b), "c": float(c)}, grid_n)

    @classmethod
    def lognormal(cls, v0=1.0, kappa=1.0, theta=1.0, eta=0.2, grid_n=1000):
        """Mean-reverting log-rate: ``log v`` pulled toward ``log theta`` at speed ``kappa``."""
        if not (v0 > 0 and theta > 0):
            raise NonPositiveRate("lognormal volume needs v0 > 0 and theta > 0")
        if not (kappa >= 0 and eta >= 0):
            raise ConfigError("lognormal volume needs kappa >= 0 and eta >= 0")
        return cls(LOGNORMAL, {"v0": float(v0), "kappa": float(kappa),
                               "theta": float(theta), "eta": float(eta)}, grid_n)

    @classmethod
    def from_csv(cls, path):
        """Replay a recorded rate profile (columns ``t, v``) on its own grid."""
        times, rates = _read_tv_csv(path)
        return cls(REPLAY, {"source": str(path)}, len(times) - 1, replay=(times, rates))

    @property
    def deterministic(self):
        return self.kind in DETERMINISTIC_KINDS


@dataclass(frozen=True)
class VolumePath:
    """Rates ``v_i`` and cumulative volume ``V_i`` on ``t_0 = 0 < ... < t_n = T``."""

    times: np.ndarray
    rates: np.ndarray
    cumv: np.ndarray

    def __post_init__(self):
        for arr in (self.times, self.rates, self.cumv):
            arr.setflags(write=False)

    @property
    def n(self):
        return len(self.times) - 1

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def dt(self):
        return self.T / self.n

    @property
    def increments(self):
        return np.diff(self.cumv)

    @property
    def total_volume(self):
        return float(self.cumv[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "v", "V"])
            for row in zip(self.times, self.rates, self.cumv):
                w.writerow([repr(float(c)) for c in row])


def uniform_grid(T, n):
    times = np.arange(n + 1) * (T / n)
    times[-1] = T
    return times


def trapezoid_clock(rates, times):
    """Cumulative volume along the last axis, starting from 0.

    Rows with a constant rate get ``v * t`` directly, which is what the
    trapezoid rule gives in exact arithmetic.
    """
    rates = np.asarray(rates, dtype=float)
    dt = (times[-1] - times[0]) / (len(times) - 1)
    steps = 0.5 * (rates[..., :-1] + rates[..., 1:]) * dt
    zero = np.zeros(rates.shape[:-1] + (1,))
    cumv = np.concatenate((zero, np.cumsum(steps, axis=-1)), axis=-1)
    flat = np.all(rates == rates[..., :1], axis=-1)
    if np.any(flat):
        cumv[flat] = rates[flat][..., :1] * times
    return cumv


def _make_path(times, rates):
    rates = np.asarray(rates, dtype=float)
    if np.any(~(rates > 0)):
        i = int(np.argmin(rates))
        raise NonPositiveRate(f"volume rate {rates[i]:.6g} <= 0 at t = {times[i]:.6g}")
    return VolumePath(times, rates, trapezoid_clock(rates, times))


def build_deterministic_path(model: VolumeModel, T: float) -> VolumePath:
    if not T > 0:
        raise ConfigError(f"horizon T must be > 0 (got {T})")
    if model.kind == REPLAY:
        times, rates = model.replay
        if not math.isclose(times[-1], T, rel_tol=1e-9):
            raise ConfigError(f"replayed volume ends at t = {times[-1]}, horizon is {T}")
        return _make_path(np.array(times, dtype=float), rates)
    times = uniform_grid(T, model.grid_n)
    if model.kind == CONSTANT:
        rates = np.full_like(times, model.params["v"])
    elif model.kind == USHAPE:
        p = model.params
        rates = p["a"] + p["b"] * times + p["c"] * times**2
    else:
        raise ConfigError(f"{model.kind} volume is stochastic; use sample_volume_path")
    return _make_path(times, rates)


def lognormal_rates(params, n, dt, z):
    """Rate rows for a block of normals ``z`` of shape ``(..., n)``."""
    kappa, eta = params["kappa"], params["eta"]
    log_theta = math.log(params["theta"])
    logv = np.empty(z.shape[:-1] + (n + 1,))
    logv[..., 0] = math.log(params["v0"])
    shock = eta * math.sqrt(dt) * z
    for i in range(n):
        prev = logv[..., i]
        logv[..., i + 1] = prev + kappa * (log_theta - prev) * dt + shock[..., i]
    return np.exp(logv)


def sample_volume_path(model: VolumeModel, T: float, seed: int, path_index: int = 0) -> VolumePath:
    """One lognormal volume path; the shocks come from stream ``(seed, "vol", path_index)``."""
    if model.kind != LOGNORMAL:
        raise ConfigError("sample_volume_path needs a lognormal volume model")
    n = model.grid_n
    times = uniform_grid(T, n)
    z = rng.normals(seed, "vol", path_index, n)
    return _make_path(times, lognormal_rates(model.params, n, T / n, z))


def volume_path(model: VolumeModel, T: float, seed: int = 0, path_index: int = 0) -> VolumePath:
    if model.deterministic:
        return build_deterministic_path(model, T)
    return sample_volume_path(model, T, seed, path_index)


def volume_rate_block(model, T, seed, paths):
    """Rate matrix (one row per path index) for vectorised simulation."""
    n = model.grid_n
    if model.deterministic:
        row = build_deterministic_path(model, T).rates
        return np.broadcast_to(row, (len(paths), len(row)))
    z = rng.normal_block(seed, "vol", paths, n)
    return lognormal_rates(model.params, n, T / n, z)


@dataclass
class FeasibilityReport:
    feasible: bool
    n_paths: int
    violation_fraction: float
    min_total_volume: float
    capacity: float

    def to_dict(self):
        return dict(self.__dict__)


def check_feasibility(x: float, nu: float, paths) -> FeasibilityReport:
    """Check ``x <= nu * V_T`` on each path.

    For an ensemble, ``min_total_volume`` is the empirical stand-in for the
    essential infimum of ``V_T``.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    if isinstance(paths, VolumePath):
        paths = [paths]
    totals = np.array([p.total_volume for p in paths])
    violated = x > nu * totals
    return FeasibilityReport(
        feasible=not bool(violated.any()),
        n_paths=len(totals),
        violation_fraction=float(violated.mean()),
        min_total_volume=float(totals.min()),
        capacity=float(nu * totals.min()),
    )


def _read_tv_csv(path, value_col="v"):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "t" not in rows[0] or value_col not in rows[0]:
        raise ConfigError(f"{path}: expected CSV columns t, {value_col}")
    times = np.array([float(r["t"]) for r in rows])
    vals = np.array([float(r[value_col]) for r in rows])
    if len(times) < 2 or times[0] != 0.0:
        raise ConfigError(f"{path}: time column must start at 0 with at least two rows")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ConfigError(f"{path}: time grid must be uniform")
    return times, vals


def load_volume_csv(path) -> VolumePath:
    times, rates = _read_tv_csv(path)
    return _make_path(times, rates)

"""Selling strategies and their discretised rate schedules.

Schedules are realised left-point: the rate at node ``t_i`` may use only
``(t_i, v_i, V_i, sold_i)``, and ``sold_{i+1} = sold_i + zeta_i * dt``. The
rate at the terminal node is zero because nothing is traded after ``T``.

Volume-proportional strategies (optimal VWAP, POV) sell ``rate * v_t`` until
the inventory is gone. Along such a strategy ``sold_t = rate * V_t``, so
stopping once the budget is spent is the same as stopping once the volume
clock passes ``x / rate``; checking the budget directly keeps the discrete
schedule exhausting ``x`` exactly when ``x <= rate * V_T``. The final
partial step is clipped rather than rescaling the whole schedule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GridMismatch

OPTIMAL_VWAP = "optimal_vwap"
TWAP = "twap"
POV = "pov"
SCHEDULE = "schedule"

BUDGET_RTOL = 1e-12
FIT_RTOL = 1e-13


@dataclass(frozen=True)
class Strategy:
    kind: str
    x: float
    nu: float | None = None
    beta: float | None = None
    T: float | None = None
    # step function of time: rate knots[k] applies on [knot_times[k], knot_times[k+1])
    knot_times: tuple | None = None
    knot_rates: tuple | None = None

    def __post_init__(self):
        if not self.x >= 0:
            raise ConfigError(f"budget x must be >= 0 (got {self.x})")

    @property
    def participation(self):
        """Multiplier of ``v_t`` for volume-proportional strategies, else ``None``."""
        if self.kind == OPTIMAL_VWAP:
            return self.nu
        if self.kind == POV:
            return self.beta
        return None

    @property
    def label(self):
        if self.kind == OPTIMAL_VWAP:
            return f"optimal_vwap(nu={self.nu:.6g})"
        if self.kind == POV:
            return f"pov(beta={self.beta:.6g})"
        return self.kind

    def raw_rate(self, t, v, literal_indicator=False):
        """Rate before budget clipping. Vectorised over ``t`` and ``v``."""
        t = np.asarray(t, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind in (OPTIMAL_VWAP, POV):
            rate = self.participation * v
            if literal_indicator:
                rate = np.where(v <= self.x / self.participation, rate, 0.0)
            return rate
        if self.kind == TWAP:
            return np.broadcast_to(self.x / self.T, np.broadcast(t, v).shape).astype(float)
        if self.kind == SCHEDULE:
            kt = np.asarray(self.knot_times)
            kr = np.asarray(self.knot_rates)
            idx = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, len(kr) - 1)
            return np.broadcast_to(kr[idx], np.broadcast(t, v).shape).astype(float)
        raise ConfigError(f"unknown strategy kind {self.kind!r}")

    def rate_at(self, t, v, V, sold, dt, literal_indicator=False):
        """Node rule: the rate chosen at one node from that node's state only."""
        rate = float(self.raw_rate(t, v, literal_indicator))
        if literal_indicator:
            return rate
        remaining = max(self.x - sold, 0.0)
        return min(rate, remaining / dt)


def optimal_vwap(nu: float, x: float) -> Strategy:
    """Sell ``nu * v_t`` until ``x`` shares are gone."""
    if not nu > 0:
        raise ConfigError(f"participation nu must be > 0 (got {nu})")
    return Strategy(OPTIMAL_VWAP, float(x), nu=float(nu))


def twap(x: float, T: float) -> Strategy:
    if not T > 0:
        raise ConfigError(f"horizon T must be > 0 (got {T})")
    return Strategy(TWAP, float(x), T=float(T))


def pov(beta: float, x: float) -> Strategy:
    if not beta > 0:
        raise ConfigError(f"participation beta must be > 0 (got {beta})")
    return Strategy(POV, float(x), beta=float(beta))


def schedule(times, rates, x: float) -> Strategy:
    """Piecewise-constant custom schedule; ``rates[k]`` holds from ``times[k]`` on."""
    times = tuple(float(t) for t in times)
    rates = tuple(float(r) for r in rates)
    if len(times) != len(rates) or not times:
        raise ConfigError("schedule needs equally many times and rates")
    if any(r < 0 for r in rates):
        raise ConfigError("schedule rates must be non-negative")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("schedule times must be strictly increasing")
    return Strategy(SCHEDULE, float(x), knot_times=times, knot_rates=rates)


def load_schedule_csv(path, x: float) -> Strategy:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "t" not in rows[0] or "zeta" not in rows[0]:
        raise ConfigError(f"{path}: expected CSV columns t, zeta")
    return schedule([r["t"] for r in rows], [r["zeta"] for r in rows], x)


@dataclass(frozen=True)
class RateSchedule:
    times: np.ndarray
    rates: np.ndarray
    sold: np.ndarray
    x: float
    literal_indicator: bool = False

    def __post_init__(self):
        for arr in (self.times, self.rates, self.sold):
            arr.setflags(write=False)

    @property
    def total_sold(self):
        return float(self.sold[-1])

    @property
    def budget_violated(self):
        return self.total_sold > self.x + BUDGET_RTOL * max(1.0, self.x)

    def to_csv(self, path, volume=None):
        cols = {"t": self.times}
        if volume is not None:
            cols["v"] = volume.rates
            cols["V"] = volume.cumv
        cols["zeta"] = self.rates
        cols["sold"] = self.sold
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(cols))
            for row in zip(*cols.values()):
                w.writerow([repr(float(c)) for c in row])


def _left_sold(rates, dt):
    steps = np.cumsum(rates[..., :-1] * dt, axis=-1)
    return np.concatenate((np.zeros(rates.shape[:-1] + (1,)), steps), axis=-1)


def clip_to_budget(raw, dt, x):
    """Left-point budget clipping along the last axis.

    Steps that fit in the budget keep their raw rate; the step that crosses
    ``x`` sells only the remainder and later steps sell nothing. This is
    ``zeta_i = min(raw_i, (x - sold_i) / dt)`` evaluated for all nodes at once.
    The terminal node carries no rate.
    """
    raw = np.array(raw, dtype=float)
    raw[..., -1] = 0.0
    cum = _left_sold(raw, dt)
    # running-sum rounding must not turn an exact fit into a clipped step
    fits = cum[..., 1:] <= x + FIT_RTOL * max(1.0, x)
    remainder = np.maximum(x - cum[..., :-1], 0.0) / dt
    rates = np.zeros_like(raw)
    rates[..., :-1] = np.where(fits, raw[..., :-1], np.minimum(raw[..., :-1], remainder))
    return rates, _left_sold(rates, dt)


def realize_block(strategy: Strategy, times, rates_v, dt, literal_indicator=False):
    """Rates and cumulative sold for a block of volume rows (vectorised ``realize``)."""
    raw = strategy.raw_rate(times, rates_v, literal_indicator)
    if literal_indicator:
        raw = np.array(raw, dtype=float)
        raw[..., -1] = 0.0
        return raw, _left_sold(raw, dt)
    return clip_to_budget(raw, dt, strategy.x)


def realize(strategy: Strategy, path, literal_indicator: bool = False) -> RateSchedule:
    """Discretise ``strategy`` against one volume path.

    With ``literal_indicator`` the VWAP/POV rule switches on ``v_t <= x/nu``
    (the instantaneous rate rather than the clock) and no budget clipping is
    applied; this exists only to compare the two readings.
    """
    if strategy.kind == TWAP and not np.isclose(strategy.T, path.T, rtol=1e-12):
        raise GridMismatch(f"TWAP horizon {strategy.T} != path horizon {path.T}")
    rates, sold = realize_block(strategy, path.times, path.rates, path.dt, literal_indicator)
    return RateSchedule(path.times, rates, sold, strategy.x, literal_indicator)

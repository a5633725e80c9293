"""Optimal value, deterministic revenue evaluation and Monte Carlo simulation.

The price is driven by the volume clock::

    d log S = (mu - g(r) - sigma**2 / 2) dV + sigma dW(V)

with participation ``r = zeta / v`` (exogenous) or ``r = zeta / (v + zeta)``
and clock ``V`` enlarged by the trader's own flow (endogenous). Given a rate
path, ``log S`` is stepped exactly; only the revenue integral and the clock
carry discretisation error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import market, rng
from .errors import ImpactDomainError, InvalidPaths
from .impact import ENDOGENOUS, EXOGENOUS, ImpactFunction
from .market import MarketParams, VolumeModel, VolumePath
from .strategy import RateSchedule, Strategy, realize_block

Z95 = 1.96
DEFAULT_BATCH = 4096


def closed_form_value(s0: float, h_nu: float, x: float) -> float:
    """Optimal expected revenue ``s0 (1 - exp(-h x)) / h``."""
    if not s0 > 0 or not h_nu > 0 or not x >= 0:
        raise ValueError("need s0 > 0, h_nu > 0, x >= 0")
    return -s0 * math.expm1(-h_nu * x) / h_nu


def is_cost(revenue: float, params: MarketParams) -> float:
    """Implementation shortfall: pre-trade value of the inventory minus revenue."""
    return params.x * params.s0 - revenue


def _resolve_mode(impact, mode):
    mode = impact.mode if mode is None else mode
    if mode not in (EXOGENOUS, ENDOGENOUS):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def _participation(zeta, v, dV, dt, mode, impact):
    """Impact argument and clock increments for one block of steps."""
    if mode == EXOGENOUS:
        ratio = zeta / v
        clock = dV
    else:
        ratio = zeta / (v + zeta)
        clock = dV + zeta * dt
    if np.any(ratio >= impact.domain_end):
        worst = float(np.max(ratio))
        raise ImpactDomainError(
            f"participation {worst:.6g} outside the {impact.family} domain [0, {impact.domain_end})"
        )
    return ratio, clock


def _revenue_block(zeta, v, dV, dt, params, impact, mode, z=None):
    """Per-row revenue ``sum_i zeta_i S_i dt`` (left-point) and the log-price rows.

    ``zeta`` and ``v`` have ``n + 1`` columns, ``dV`` and ``z`` have ``n``.
    """
    step_zeta = zeta[..., :-1]
    ratio, clock = _participation(step_zeta, v[..., :-1], dV, dt, mode, impact)
    drift = params.mu - impact.g(ratio)
    if z is None or params.sigma == 0:
        incr = drift * clock
    else:
        s = params.sigma
        incr = (drift - 0.5 * s * s) * clock + s * np.sqrt(clock) * z
    log_rel = np.concatenate((np.zeros(incr.shape[:-1] + (1,)),
                              np.cumsum(incr, axis=-1)), axis=-1)
    revenue = params.s0 * np.sum(step_zeta * np.exp(log_rel[..., :-1]), axis=-1) * dt
    return revenue, log_rel


def conditional_expected_revenue(schedule: RateSchedule, path: VolumePath, params: MarketParams,
                                 impact: ImpactFunction, mode: str | None = None) -> float:
    """Expected revenue of ``schedule`` given the volume path.

    The Brownian term is a martingale and integrates out, leaving
    ``s0 * int zeta_t exp(int_0^t (mu - g) dV) dt``, evaluated left-point.
    """
    mode = _resolve_mode(impact, mode)
    if len(schedule.rates) != len(path.rates):
        raise ValueError("schedule and path are on different grids")
    revenue, _ = _revenue_block(np.asarray(schedule.rates), np.asarray(path.rates),
                                path.increments, path.dt, params, impact, mode)
    return float(revenue)


@dataclass
class RevenueEstimate:
    mean: float
    stderr: float
    n_paths: int
    ci95_low: float
    ci95_high: float
    is_cost: float
    mean_sold: float
    violation_fraction: float = 0.0
    flags: list = field(default_factory=list)
    revenues: np.ndarray | None = field(default=None, repr=False)
    sold: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_paths": self.n_paths,
            "ci95": [self.ci95_low, self.ci95_high],
            "is_cost": self.is_cost,
            "mean_sold": self.mean_sold,
            "violation_fraction": self.violation_fraction,
            "flags": list(self.flags),
        }


def summarize(revenues, sold, params, flags=(), violation_fraction=0.0, keep_paths=False):
    """Reduce per-path revenues (already in ascending path order) to an estimate."""
    revenues = np.asarray(revenues, dtype=float)
    n = len(revenues)
    if np.all(revenues == revenues[0]):
        mean, stderr = float(revenues[0]), 0.0
    else:
        if n < 2:
            raise InvalidPaths("a standard error needs at least two paths")
        mean = math.fsum(revenues) / n
        var = math.fsum((revenues - mean) ** 2) / (n - 1)
        stderr = math.sqrt(var / n)
    return RevenueEstimate(
        mean=mean,
        stderr=stderr,
        n_paths=n,
        ci95_low=mean - Z95 * stderr,
        ci95_high=mean + Z95 * stderr,
        is_cost=is_cost(mean, params),
        mean_sold=math.fsum(sold) / n,
        violation_fraction=violation_fraction,
        flags=list(flags),
        revenues=revenues if keep_paths else None,
        sold=np.asarray(sold) if keep_paths else None,
    )


def simulate_block(strategy, model, params, impact, mode, seed, paths, literal_indicator=False):
    """Revenue, amount sold and terminal volume for the given path indices."""
    T, n = params.T, model.grid_n
    if model.deterministic:
        path = market.build_deterministic_path(model, T)
        times = path.times
        v = np.broadcast_to(path.rates, (len(paths), n + 1))
        dV = np.broadcast_to(path.increments, (len(paths), n))
        total = np.full(len(paths), path.total_volume)
    else:
        times = market.uniform_grid(T, n)
        v = market.volume_rate_block(model, T, seed, paths)
        cumv = market.trapezoid_clock(v, times)
        dV = np.diff(cumv, axis=-1)
        total = cumv[:, -1]
    dt = T / n
    zeta, sold = realize_block(strategy, times, v, dt, literal_indicator)
    z = None
    if params.sigma > 0:
        z = rng.normal_block(seed, "price", paths, n)
    revenue, _ = _revenue_block(zeta, v, dV, dt, params, impact, mode, z)
    return revenue, sold[:, -1], total


def simulate(strategy: Strategy, model: VolumeModel, params: MarketParams, impact: ImpactFunction,
             mode: str | None = None, n_paths: int = 10_000, seed: int = 0,
             literal_indicator: bool = False, batch_size: int = DEFAULT_BATCH,
             keep_paths: bool = False) -> RevenueEstimate:
    """Monte Carlo estimate of expected revenue ``E[int zeta_t S_t dt]``.

    Path ``k`` draws its volume shocks from stream ``(seed, "vol", k)`` and its
    price shocks from ``(seed, "price", k)``, so estimates are bit-identical
    for any ``batch_size``.
    """
    mode = _resolve_mode(impact, mode)
    deterministic = model.deterministic and params.sigma == 0
    if n_paths < 1 or (n_paths < 2 and not deterministic):
        raise InvalidPaths(f"n_paths must be >= 2 for a standard error (got {n_paths})")

    revenues = np.empty(n_paths)
    sold = np.empty(n_paths)
    totals = np.empty(n_paths)
    for start in range(0, n_paths, batch_size):
        idx = np.arange(start, min(start + batch_size, n_paths))
        r, s, tv = simulate_block(strategy, model, params, impact, mode, seed, idx,
                                  literal_indicator)
        revenues[idx], sold[idx], totals[idx] = r, s, tv

    flags = []
    violation = 0.0
    rate = strategy.participation
    if rate is not None:
        violation = float(np.mean(strategy.x > rate * totals))
        if violation > 0:
            flags.append("outside_theorem_hypothesis")
            warnings.warn(
                f"x > rate * V_T on {violation:.2%} of paths; those paths sell less than x",
                stacklevel=2,
            )
    if literal_indicator:
        flags.append("literal_indicator")
    if np.any(sold > strategy.x + 1e-12 * max(1.0, strategy.x)):
        flags.append("budget_violated")
    return summarize(revenues, sold, params, flags, violation, keep_paths)

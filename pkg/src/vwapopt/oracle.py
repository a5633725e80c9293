"""Brute-force check of the optimal value over piecewise-constant schedules.

Every tuple of per-interval rates drawn from a finite grid is scored with the
same left-point evaluator as :func:`vwapopt.engine.conditional_expected_revenue`.
The evaluation is factored interval by interval: on interval ``j`` a constant
rate ``r`` contributes ``exp(L_j) * A_j(r)`` to revenue and shifts the log
price by ``B_j(r)``, so the full enumeration is a sequence of outer sums over
precomputed ``(A, B)`` tables.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .engine import closed_form_value
from .errors import EnumerationTooLarge, GridMismatch
from .impact import EXOGENOUS, ImpactFunction, solve_nu
from .market import MarketParams, VolumePath

MAX_INTERVALS = 6
MAX_GRID = 25
TIE_ATOL = 1e-9
BUDGET_RTOL = 1e-9


def default_rate_grid(top=2.0, size=21):
    return np.linspace(0.0, top, size)


@dataclass
class OracleResult:
    best_rates: list
    best_value: float
    closed_form: float
    gap: float
    n_evaluated: int
    ties: list
    nu: float
    top: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "best_rates": list(self.best_rates),
            "best_value": self.best_value,
            "closed_form": self.closed_form,
            "gap": self.gap,
            "relative_gap": self.gap / self.closed_form if self.closed_form else 0.0,
            "n_evaluated": self.n_evaluated,
            "ties": [list(t) for t in self.ties],
            "nu": self.nu,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def top_to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rank", "value"] + [f"rate_{j}" for j in range(len(self.best_rates))])
            for rank, (value, rates) in enumerate(self.top, 1):
                w.writerow([rank, repr(value)] + [repr(r) for r in rates])


def interval_tables(params, impact, path, n_intervals, rate_grid, mode=EXOGENOUS):
    """``A[j, k]`` revenue factor and ``B[j, k]`` log-price shift for rate ``k`` on interval ``j``."""
    n = path.n
    if n % n_intervals:
        raise GridMismatch(f"path grid of {n} steps does not split into {n_intervals} intervals")
    m = n // n_intervals
    dt = path.dt
    v = np.asarray(path.rates[:-1]).reshape(n_intervals, m)
    dV = path.increments.reshape(n_intervals, m)
    A = np.empty((n_intervals, len(rate_grid)))
    B = np.empty_like(A)
    for k, r in enumerate(rate_grid):
        if mode == EXOGENOUS:
            ratio, clock = r / v, dV
        else:
            ratio, clock = r / (v + r), dV + r * dt
        incr = (params.mu - impact.g(ratio)) * clock
        inner = np.concatenate((np.zeros((n_intervals, 1)), np.cumsum(incr, axis=1)), axis=1)
        A[:, k] = params.s0 * r * np.sum(np.exp(inner[:, :-1]), axis=1) * dt
        B[:, k] = inner[:, -1]
    return A, B


def brute_force(params: MarketParams, impact: ImpactFunction, path: VolumePath,
                n_intervals: int = 5, rate_grid=None, mode: str | None = None,
                top_k: int = 10) -> OracleResult:
    """Exhaustively maximise revenue over rate tuples with ``sum(r) * dT <= x``.

    Ties within ``1e-9`` are all reported; the lexicographically largest
    (most front-loaded) tuple is returned as best.
    """
    rate_grid = default_rate_grid() if rate_grid is None else np.asarray(rate_grid, dtype=float)
    mode = impact.mode if mode is None else mode
    if n_intervals > MAX_INTERVALS or len(rate_grid) > MAX_GRID:
        raise EnumerationTooLarge(
            f"{len(rate_grid)}^{n_intervals} schedules exceeds the guard "
            f"({MAX_GRID}^{MAX_INTERVALS})"
        )
    if n_intervals < 1 or np.any(rate_grid < 0):
        raise ValueError("need n_intervals >= 1 and non-negative rates")
    rate_grid = np.unique(rate_grid)
    G = len(rate_grid)

    A, B = interval_tables(params, impact, path, n_intervals, rate_grid, mode)
    dT = path.T / n_intervals
    budget = params.x / dT * (1 + BUDGET_RTOL) + 1e-15

    # chunk over the first interval's rate; the rest is enumerated as one array
    rest = n_intervals - 1
    best_val = -np.inf
    candidates = []
    n_eval = 0
    for k0 in range(G):
        value = A[0, k0] * np.ones(1)
        logp = B[0, k0] * np.ones(1)
        ratesum = rate_grid[k0] * np.ones(1)
        for j in range(1, n_intervals):
            value = (value[:, None] + np.exp(logp)[:, None] * A[j][None, :]).ravel()
            logp = (logp[:, None] + B[j][None, :]).ravel()
            ratesum = (ratesum[:, None] + rate_grid[None, :]).ravel()
        ok = ratesum <= budget
        n_eval += int(ok.sum())
        if not ok.any():
            continue
        value = np.where(ok, value, -np.inf)
        chunk_best = value.max()
        keep = np.nonzero(value >= max(chunk_best, best_val) - TIE_ATOL)[0]
        if top_k:
            if len(value) > top_k:
                order = np.argpartition(-value, top_k)[:top_k]
            else:
                order = np.arange(len(value))
            keep = np.union1d(keep, order[np.isfinite(value[order])])
        for flat in keep:
            idx = (k0,) + np.unravel_index(flat, (G,) * rest) if rest else (k0,)
            candidates.append((float(value[flat]), tuple(int(i) for i in idx)))
        best_val = max(best_val, chunk_best)

    ties = sorted((c for c in candidates if c[0] >= best_val - TIE_ATOL),
                  key=lambda c: c[1], reverse=True)
    best = ties[0]
    top = sorted(candidates, key=lambda c: (-c[0], tuple(-i for i in c[1])))[:top_k]

    solved = solve_nu(impact, params.mu)
    cf = closed_form_value(params.s0, solved.h_nu, params.x)
    as_rates = lambda idx: [float(rate_grid[i]) for i in idx]  # noqa: E731
    return OracleResult(
        best_rates=as_rates(best[1]),
        best_value=best[0],
        closed_form=cf,
        gap=cf - best[0],
        n_evaluated=n_eval,
        ties=[as_rates(t[1]) for t in ties],
        nu=solved.nu,
        top=[(v, as_rates(i)) for v, i in top],
    )

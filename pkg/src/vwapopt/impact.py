"""Market impact functions and the optimal participation rate.

An impact function ``g`` maps a participation ratio (shares sold per unit of
market volume) to a proportional price depression per unit of volume-time.
Its derivative is ``h``. Two modes exist:

* ``exogenous``: ``g`` lives on ``[0, inf)`` and is applied to ``zeta / v``.
* ``endogenous``: ``g`` lives on ``[0, 1)`` and is applied to
  ``zeta / (v + zeta)``, the trader's share of total volume.

The optimal rate solves ``f(nu) = nu h(nu) - g(nu) = -mu`` on ``[zeta0, end)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    BracketFailure,
    ImpactDomainError,
    InvalidFamily,
    NegativeH,
    NonMonotoneTail,
    NoRootAboveKnee,
)

EXOGENOUS = "exogenous"
ENDOGENOUS = "endogenous"
MODES = (EXOGENOUS, ENDOGENOUS)

# probe point used for the divergence proxy in endogenous mode
ENDOGENOUS_PROBE_GAP = 1e-6
ENDOGENOUS_BRACKET_GAP = 1e-12
MAX_DOUBLINGS = 1000


@dataclass(frozen=True)
class ImpactFunction:
    """Evaluation handle for ``g`` and ``h = g'``.

    The factory functions below are the normal way to build one. Calling the
    constructor directly skips every shape check, which is occasionally useful
    for testing the validator against deliberately broken functions.
    """

    family: str
    params: dict
    mode: str
    zeta0: float
    g_func: Callable = field(repr=False, compare=False)
    h_func: Callable = field(repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def domain_end(self) -> float:
        return math.inf if self.mode == EXOGENOUS else 1.0

    def _check_domain(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < 0) or np.any(z >= self.domain_end) or np.any(np.isnan(z)):
            raise ImpactDomainError(
                f"{self.family} impact evaluated outside [0, {self.domain_end})"
            )
        return z

    def g(self, z):
        z = self._check_domain(z)
        out = self.g_func(z)
        return float(out) if out.ndim == 0 else out

    def h(self, z):
        z = self._check_domain(z)
        out = self.h_func(z)
        return float(out) if out.ndim == 0 else out

    def rate_function(self, z):
        """``f(z) = z h(z) - g(z)``; its root at ``-mu`` is the optimal rate."""
        return z * self.h(z) - self.g(z)


def _as_array(func):
    def wrapped(z):
        return np.asarray(func(np.asarray(z, dtype=float)), dtype=float)

    return wrapped


def make_power_impact(c: float, p: float) -> ImpactFunction:
    """``g(z) = c z**p`` with ``p > 1`` (strictly convex, knee at 0)."""
    if not c > 0:
        raise InvalidFamily(f"power impact needs c > 0, got {c}")
    if not p > 1:
        raise InvalidFamily(f"power impact needs p > 1 for h to diverge, got {p}")
    c, p = float(c), float(p)
    return ImpactFunction(
        family="power",
        params={"c": c, "p": p},
        mode=EXOGENOUS,
        zeta0=0.0,
        g_func=_as_array(lambda z: c * z**p),
        h_func=_as_array(lambda z: c * p * z ** (p - 1.0)),
    )


def make_kneed_impact(h_flat: float = 1.0) -> ImpactFunction:
    """``h(z) = max(h_flat, z)``: flat up to the knee ``z = h_flat``, then linear.

    ``g`` is the exact integral, ``h_flat z`` below the knee and
    ``(z**2 + h_flat**2) / 2`` above it.
    """
    if not h_flat > 0:
        raise InvalidFamily(f"kneed impact needs h_flat > 0, got {h_flat}")
    a = float(h_flat)

    def g(z):
        return np.where(z <= a, a * z, 0.5 * (z * z + a * a))

    return ImpactFunction(
        family="kneed",
        params={"h_flat": a},
        mode=EXOGENOUS,
        zeta0=a,
        g_func=_as_array(g),
        h_func=_as_array(lambda z: np.maximum(a, z)),
    )


def make_hat_log_impact(c: float = 1.0) -> ImpactFunction:
    """Endogenous impact ``g(u) = -c (log(1 - u) + u)`` on ``[0, 1)``.

    ``h(u) = c u / (1 - u)`` blows up as ``u -> 1``.
    """
    if not c > 0:
        raise InvalidFamily(f"hat-log impact needs c > 0, got {c}")
    c = float(c)
    return ImpactFunction(
        family="hat_log",
        params={"c": c},
        mode=ENDOGENOUS,
        zeta0=0.0,
        # log1p(-u) + u loses digits near 0 but stays non-negative
        g_func=_as_array(lambda u: -c * (np.log1p(-u) + u)),
        h_func=_as_array(lambda u: c * u / (1.0 - u)),
    )


def make_piecewise_h_impact(knots, mode: str = EXOGENOUS) -> ImpactFunction:
    """Impact specified through a piecewise-linear ``h``.

    ``knots`` is a sorted sequence of ``(z, h)`` pairs starting at ``z = 0``.
    Beyond the last knot ``h`` continues with the last segment's slope. ``g``
    is integrated exactly segment by segment, so ``g(0) = 0`` and ``g' = h``
    hold by construction.

    The knee is the end of the last segment along which ``h`` does not
    increase; every later segment must have positive slope.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    pts = np.asarray(knots, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvalidFamily("piecewise impact needs at least two (z, h) knots")
    zs, hs = pts[:, 0], pts[:, 1]
    if zs[0] != 0.0:
        raise InvalidFamily("first knot must sit at z = 0")
    if np.any(np.diff(zs) <= 0):
        raise InvalidFamily("knot abscissae must be strictly increasing")
    if mode == ENDOGENOUS and zs[-1] >= 1.0:
        raise InvalidFamily("endogenous knots must lie in [0, 1)")
    if np.any(hs < 0):
        raise NegativeH("h must be non-negative at every knot")

    slopes = np.diff(hs) / np.diff(zs)
    flat_or_down = np.nonzero(slopes <= 0)[0]
    knee_idx = int(flat_or_down[-1]) + 1 if len(flat_or_down) else 0
    if knee_idx == len(zs) - 1:
        raise NonMonotoneTail("h is not strictly increasing after its knee")
    zeta0 = float(zs[knee_idx])

    # g at each knot by exact trapezoid (h linear on each segment)
    g_knots = np.concatenate(([0.0], np.cumsum(0.5 * (hs[:-1] + hs[1:]) * np.diff(zs))))
    seg_slopes = np.append(slopes, slopes[-1])

    def _segment(z):
        return np.clip(np.searchsorted(zs, z, side="right") - 1, 0, len(zs) - 1)

    def h(z):
        k = _segment(z)
        return hs[k] + seg_slopes[k] * (z - zs[k])

    def g(z):
        k = _segment(z)
        d = z - zs[k]
        return g_knots[k] + hs[k] * d + 0.5 * seg_slopes[k] * d * d

    return ImpactFunction(
        family="piecewise_h",
        params={"knots": [[float(a), float(b)] for a, b in pts]},
        mode=mode,
        zeta0=zeta0,
        g_func=_as_array(g),
        h_func=_as_array(h),
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    family: str
    mode: str
    zeta0: float
    checks: dict
    details: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self):
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self):
        return {
            "family": self.family,
            "mode": self.mode,
            "zeta0": self.zeta0,
            "passed": self.passed,
            "checks": dict(self.checks),
            "details": dict(self.details),
        }


def _sample_points(impact, n_samples):
    """Interior sample points covering both sides of the knee."""
    if impact.mode == EXOGENOUS:
        hi = 10.0 * max(1.0, impact.zeta0)
    else:
        hi = 0.99
    lo = 1e-3 * min(1.0, hi)
    pts = np.linspace(lo, hi, n_samples)
    if 0 < impact.zeta0 < hi:
        pts = np.union1d(pts, [impact.zeta0])
    return pts


def validate(impact: ImpactFunction, n_samples: int = 200, h_threshold: float = 1e5,
             fd_rtol: float = 1e-6) -> ValidationReport:
    """Numerically probe the shape conditions on ``g``.

    Failures are recorded in the report, never raised. The divergence check
    is a heuristic: ``h`` at a far probe point must exceed ``h_threshold``.
    """
    if n_samples < 3:
        raise ValueError("n_samples must be at least 3")
    checks, details = {}, {}

    try:
        g0 = impact.g(0.0)
    except ImpactDomainError:
        g0 = math.nan
    checks["g_zero"] = bool(abs(g0) <= 1e-12)
    details["g_zero"] = g0

    pts = _sample_points(impact, n_samples)
    hv = np.asarray(impact.h(pts))
    checks["h_nonnegative"] = bool(np.all(hv >= 0) and impact.h(0.0) >= 0)
    details["h_min"] = float(hv.min())

    dh = np.diff(hv)
    left = pts[1:] <= impact.zeta0
    scale = 1e-12 * (1.0 + np.abs(hv[1:]))
    checks["nonincreasing_below_knee"] = bool(np.all(dh[left] <= scale[left]))
    checks["increasing_above_knee"] = bool(np.all(dh[~left] > 0))

    if impact.mode == EXOGENOUS:
        probe = 1e6 * max(1.0, impact.zeta0)
    else:
        probe = 1.0 - ENDOGENOUS_PROBE_GAP
    h_probe = impact.h(probe)
    checks["h_diverges"] = bool(h_probe > h_threshold)
    details["h_probe_point"] = probe
    details["h_probe_value"] = h_probe

    eps = 1e-6 * np.maximum(1.0, pts)
    fd = (np.asarray(impact.g(pts + eps)) - np.asarray(impact.g(pts - eps))) / (2 * eps)
    fd_err = np.abs(fd - hv) / (1.0 + np.abs(hv))
    checks["derivative_consistent"] = bool(np.all(fd_err <= fd_rtol))
    details["derivative_max_rel_err"] = float(fd_err.max())

    return ValidationReport(impact.family, impact.mode, impact.zeta0, checks, details)


# ---------------------------------------------------------------------------
# rate equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolvedRate:
    nu: float
    h_nu: float
    residual: float
    zeta0: float
    mode: str
    nu_hat: float | None = None

    def to_dict(self):
        out = {"nu": self.nu, "h_nu": self.h_nu, "residual": self.residual,
               "zeta0": self.zeta0, "mode": self.mode}
        if self.nu_hat is not None:
            out["nu_hat"] = self.nu_hat
        return out


def _bisect(f, target, lo, hi, max_iter=400):
    """Bisect the non-decreasing ``f`` for ``f(z) = target`` down to float resolution.

    Returns the endpoint with the smaller residual.
    """
    f_lo, f_hi = f(lo) - target, f(hi) - target
    for _ in range(max_iter):
        if f_lo == 0.0:
            return lo, 0.0
        if f_hi == 0.0:
            return hi, 0.0
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid) - target
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return (lo, abs(f_lo)) if abs(f_lo) <= abs(f_hi) else (hi, abs(f_hi))


def solve_nu(impact: ImpactFunction, mu: float, tol: float = 1e-10) -> SolvedRate:
    """Optimal participation rate for drift ``mu < 0``.

    Only roots at or above the knee are considered. Exogenous mode expands a
    bracket ``[zeta0, max(1, 2 zeta0)]`` by doubling and bisects; endogenous
    mode bisects on ``[zeta0, 1 - 1e-12]`` for the participation share
    ``nu_hat`` and converts it with ``nu = nu_hat / (1 - nu_hat)``.
    """
    if not mu < 0:
        raise ValueError(f"drift mu must be negative, got {mu}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    target = -float(mu)
    f = impact.rate_function
    z0 = impact.zeta0

    f0 = f(z0)
    if f0 > target:
        raise NoRootAboveKnee(
            f"f(zeta0) = {f0:.6g} exceeds -mu = {target:.6g}; no rate at or above the knee"
        )

    if impact.mode == EXOGENOUS:
        lo, hi = z0, max(1.0, 2.0 * z0)
        doublings = 0
        while f(hi) < target:
            lo, hi = hi, 2.0 * hi
            doublings += 1
            if doublings > MAX_DOUBLINGS or not math.isfinite(hi):
                raise BracketFailure("bracket expansion did not reach -mu")
    else:
        lo, hi = z0, 1.0 - ENDOGENOUS_BRACKET_GAP
        if f(hi) < target:
            raise BracketFailure(f"f stays below -mu = {target} on [zeta0, 1)")

    root, residual = _bisect(f, target, lo, hi)
    if residual > tol:
        raise BracketFailure(f"bisection stalled with residual {residual:.3g} > tol {tol:.3g}")

    if impact.mode == EXOGENOUS:
        return SolvedRate(nu=root, h_nu=impact.h(root), residual=residual,
                          zeta0=z0, mode=EXOGENOUS)
    return SolvedRate(nu=root / (1.0 - root), h_nu=impact.h(root), residual=residual,
                      zeta0=z0, mode=ENDOGENOUS, nu_hat=root)

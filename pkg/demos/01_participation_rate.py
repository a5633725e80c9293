"""
Solving for the optimal participation rate
===========================================

The optimal strategy sells a constant multiple ``nu`` of market volume. The
multiple is the root of ``nu * h(nu) - g(nu) = -mu`` above the knee of the
impact derivative. This walk-through solves it for the built-in families and
checks the hand-derived answers.
"""

# %%
# A quadratic impact ``g(z) = z^2 / 2`` with ``mu = -0.5`` gives
# ``nu h(nu) - g(nu) = nu^2 / 2``, so the root is exactly 1.
import math

import numpy as np

from vwapopt import (closed_form_value, make_hat_log_impact, make_kneed_impact,
                     make_power_impact, solve_nu, validate)

mu = -0.5
quad = make_power_impact(0.5, 2.0)
solved = solve_nu(quad, mu)
print(f"quadratic: nu = {solved.nu!r}, residual = {solved.residual:.1e}")

# %%
# The kneed family has a flat derivative up to ``z = 1`` and is linear after,
# so the root moves to sqrt(2).
kneed = make_kneed_impact(1.0)
print(f"kneed:     nu = {solve_nu(kneed, mu).nu!r}  (sqrt 2 = {math.sqrt(2)!r})")

# %%
# The rate depends on the drift. A more negative drift means waiting costs
# more, so the optimal participation rises.
for m in (-0.1, -0.5, -2.0):
    print(f"  mu = {m:5.1f} -> nu = {solve_nu(quad, m).nu:.6f}")

# %%
# The optimal value in closed form is ``J(x) = S0 (1 - exp(-h(nu) x)) / h(nu)``.
# It is concave in the inventory ``x``: each extra share is worth less.
xs = np.array([0.25, 0.5, 1.0, 2.0])
J = [closed_form_value(100.0, solved.h_nu, x) for x in xs]
for x, j in zip(xs, J):
    print(f"  x = {x:4.2f}: J = {j:8.4f}, per share {j / x:7.4f}")

# %%
# With endogenous volume the impact argument is the trader's share of total
# volume ``u = zeta / (v + zeta)``. The solver works in ``u`` and converts
# back with ``nu = nu_hat / (1 - nu_hat)``.
hat = make_hat_log_impact(1.0)
endo = solve_nu(hat, mu)
print(f"hat-log:   nu_hat = {endo.nu_hat:.12f}, nu = {endo.nu:.12f}")

# %%
# ``validate`` checks the shape conditions the existence result needs.
for name, imp in (("quadratic", quad), ("kneed", kneed), ("hat-log", hat)):
    report = validate(imp)
    print(f"  {name:9s} passed={report.passed} failures={report.failures()}")

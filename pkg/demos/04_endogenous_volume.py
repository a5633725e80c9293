"""
When your own trades count as volume
=====================================

If the trader's flow is part of observed volume, impact depends on the share
``u = zeta / (v + zeta)``, which can never reach 1. The hat-log impact
``-(log(1 - u) + u)`` blows up as the trader approaches all of the volume.
"""

# %%
import numpy as np

from vwapopt import (MarketParams, VolumeModel, closed_form_value, make_hat_log_impact,
                     optimal_vwap, simulate, solve_nu)

impact = make_hat_log_impact(1.0)
solved = solve_nu(impact, -0.5)
print(f"nu_hat = {solved.nu_hat:.10f}: the trader is {solved.nu_hat:.1%} of total volume")
print(f"nu     = {solved.nu:.10f}: shares sold per unit of outside volume")

# %%
# The impact derivative grows without bound near ``u = 1``.
u = np.array([0.5, 0.9, 0.99, 0.999])
print(np.column_stack((u, impact.h(u))))

# %%
# Simulate the strategy ``zeta = nu v``. The price clock now runs on total
# volume, which includes the trader's own flow.
params = MarketParams(s0=100.0, mu=-0.5, sigma=0.3, T=1.0, x=1.0)
J = closed_form_value(params.s0, solved.h_nu, params.x)
est = simulate(optimal_vwap(solved.nu, params.x), VolumeModel.constant(1.0, 1000), params, impact,
               n_paths=20_000, seed=3)
print(f"mean {est.mean:.4f} +/- {est.stderr:.4f} vs J {J:.4f}")

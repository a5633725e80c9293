"""
Brute force over piecewise-constant schedules
==============================================

Split the day into a few intervals, pick a rate for each from a grid, and
score every combination. Nothing here knows about the optimal rule, yet the
winner sells at ``nu`` and then stops.
"""

# %%
import numpy as np

from vwapopt import (MarketParams, VolumeModel, brute_force, build_deterministic_path,
                     make_power_impact)

impact = make_power_impact(0.5, 2.0)
path = build_deterministic_path(VolumeModel.constant(1.0, 1000), 1.0)
grid = np.linspace(0.0, 2.0, 21)

res = brute_force(MarketParams(100.0, -0.5, 0.0, 1.0, 0.6), impact, path, 5, grid)
print(f"x = 0.6: best {res.best_rates}, value {res.best_value:.4f}, J {res.closed_form:.4f}")
print(f"         {res.n_evaluated} admissible schedules scored")

# %%
# The runners-up are near misses that shuffle a little selling between
# intervals.
for value, rates in res.top[:5]:
    print(f"  {value:.4f}  {rates}")

# %%
# With ``x = nu T`` there is exactly enough time, and the best schedule sells
# at constant speed.
full = brute_force(MarketParams(100.0, -0.5, 0.0, 1.0, 1.0), impact, path, 5, grid)
print(f"x = 1.0: best {full.best_rates}")

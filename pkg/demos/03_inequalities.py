"""Inequalities between capacities, volumes and widths.

Run with ``python3 demos/03_inequalities.py``.
"""
# %%
import numpy as np

from cochord.bounds_inequalities import (brunn_minkowski_check, dk_derivative, j_norm_upper_bound,
                                         k_monotonicity_check, reports_to_csv, viterbo_ratio)
from cochord.chord_flow import capacity_family, neduv_return_time
from cochord.convex_bodies import Ball, Box, Ellipsoid, Polydisc
from cochord.dual_solver import SolveConfig
from cochord.symplectic_core import Frame

cfg = SolveConfig(N=256, restarts=4, max_iters=200, keep=1)
square, disc = Box(-np.ones(2), np.ones(2)), Ball(np.zeros(2), 1.0)

# %% [markdown]
# Every check returns reports oriented as lhs <= rhs, with a slack and a verdict.

# %%
reports = k_monotonicity_check(Polydisc([1.0, 0.6, 1.4]), 3)
reports.append(j_norm_upper_bound(Ellipsoid([1.0, 2.0]), Frame(2, 1)))
reports += [brunn_minkowski_check(square, disc, p, Frame(1, 0), cfg=cfg) for p in (1, 2)]
reports.append(viterbo_ratio(Ellipsoid([1.0, 2.0 ** 0.5]), Frame(2, 1)))
print(reports_to_csv(reports))

# %% [markdown]
# The derivative of eps -> c(D + eps K) at 0 is bracketed by the minimal action
# and the carrier integral of the support function of K.

# %%
d = dk_derivative(square, disc, Frame(1, 0), cfg=cfg)
print(f"estimate {d.estimate:.4f} in [{d.lower:.4f}, {d.upper:.4f}], quotients monotone: {d.monotone}")

# %% [markdown]
# For quadratic energy families the capacity of each level set is linear in the
# energy, and the slope is the return time.

# %%
f, r = Frame(2, 1), [1.0, 1.3]
for e in (0.5, 1.0, 2.0):
    h = 1e-4
    slope = (capacity_family(f, r, e + h) - capacity_family(f, r, e - h)) / (2 * h)
    print(f"e={e}: slope {slope:.8f}  return time {neduv_return_time(f, r, e):.8f}")

"""Closed forms, the dual solver and explicit chords side by side.

Run with ``python3 demos/01_closed_forms_vs_solver.py``.
"""
# %%
from math import pi

import numpy as np

from cochord.capacity import capacity
from cochord.chord_flow import ball_chord, return_spectrum
from cochord.convex_bodies import Ball, Box, Ellipsoid
from cochord.dual_solver import SolveConfig
from cochord.symplectic_core import Frame

# a quick configuration; the default N = 512 is about five times slower
cfg = SolveConfig(N=256, restarts=4, max_iters=200, keep=1)

# %% [markdown]
# The unit ball gives pi/2 for every k < n and pi at k = n, where the capacity
# coincides with the Hofer-Zehnder capacity.

# %%
for n in (1, 2):
    for k in range(n + 1):
        f = Frame(n, k)
        exact = capacity(Ball(np.zeros(2 * n), 1.0), f, method="closed_form").value
        num = capacity(Ball(np.zeros(2 * n), 1.0), f, method="solver", cfg=cfg)
        print(f"ball n={n} k={k}: exact {exact:.6f}  solver {num.value:.6f}  bracket {num.bracket}")

# %% [markdown]
# Ellipsoids: the first k radii count twice, since the characteristic can use a
# half turn in the (q_i, p_i) plane and return to the subspace.

# %%
E = Ellipsoid([1.0, 2.0])
for k in range(3):
    f = Frame(2, k)
    spec = return_spectrum(f, [1.0, 2.0], 4 * pi)
    print(f"E(1,2) k={k}: exact {capacity(E, f).value:.6f}  solver "
          f"{capacity(E, f, method='solver', cfg=cfg).value:.6f}  flow {spec[0].action:.6f} ({spec[0].cls})")

# %% [markdown]
# Boxes are product bodies with a closed form in terms of side lengths.

# %%
box = Box.from_intervals([(0, 2, 1, 3), (-1, 1, 0.5, 0.25)])
for k in range(3):
    f = Frame(2, k)
    print(f"box k={k}: exact {capacity(box, f).value:.6f}  solver {capacity(box, f, method='solver', cfg=cfg).value:.6f}")

# %% [markdown]
# A ball moved along the last momentum axis: the chord is an explicit circular
# arc, so its action matches the closed form to rounding.

# %%
f = Frame(2, 1)
for a in (0.0, 0.5, 0.9):
    body = Ball(np.array([0.0, 0.0, 0.0, a]), 1.0)
    exact = capacity(body, f).value
    chord = ball_chord(f, a).action
    num = capacity(body, f, method="solver", cfg=cfg).value
    print(f"ball offset a={a}: exact {exact:.10f}  chord {chord:.10f}  solver {num:.6f}")

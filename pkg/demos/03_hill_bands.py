"""Band structure of the scalar Hill equation -y'' + 2 cos(2 pi x) y.

Run:  python demos/03_hill_bands.py
"""

import numpy as np

from sturmspec import band_union, load_example, sweep
from sturmspec.bands import default_t_grid
from sturmspec.oracles import fd_eigenvalues

# %% Sweep t
# The spectrum on the whole line is the union over t of the spectra of L_t.
# t = 0 and t = pi are excluded by the solver; curve values there are
# extrapolated from the grid.
spec = load_example("hill_cos")
family = sweep(spec, default_t_grid(64), k_range=range(-4, 5), K=30)
print(f"{len(family.curves)} curves on {family.t_grid.size} grid points, "
      f"{len(family.jumps)} jumps")

# %% Gaps
# Every gap carries the spread between linear and quadratic extrapolation
# of its edges.  Gaps narrower than that are not resolved by the grid.
union = band_union(family, (0.0, 120.0))
print("\n      lo          hi       uncertainty  resolved")
for (lo, hi), u in zip(union.gaps, union.gap_uncertainty):
    print(f"  {lo:10.4f}  {hi:10.4f}   {u:.2e}     {hi - lo > u}")

# %% Cross-check the first gap
# At t = pi the first gap edges are eigenvalues of the antiperiodic problem,
# which a finite-difference solve gets directly.
edges = np.sort(fd_eigenvalues(lambda x: 2 * np.cos(2 * np.pi * x), np.pi, 4096, 10.0, 2).real)
print(f"\nfinite differences at t = pi: {edges[0]:.4f}, {edges[1]:.4f}")

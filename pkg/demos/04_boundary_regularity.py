"""Regularity of the quasiperiodic boundary conditions for m = 1..4.

Run:  python demos/04_boundary_regularity.py
"""

import numpy as np

from sturmspec import det_M_closed, det_M_direct, is_regular
from sturmspec.regularity import root_multiplicity

# %% det M(s) as a Laurent polynomial
# The determinant of the boundary matrix equals its closed form; both sides
# are evaluated at random s.
rng = np.random.default_rng(0)
for m in (1, 2, 3, 4):
    s = rng.uniform(0.5, 3) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    t = rng.uniform(0, 2 * np.pi)
    print(f"m={m}: direct {det_M_direct(m, t, s):.6f}  closed {det_M_closed(m, t, s):.6f}")

# %% Extreme coefficients
# Regularity needs the lowest and highest Laurent coefficients to be
# nonzero.  They are powers of -2i e^{+-it}, so they never vanish.
print("\n  m    t     |theta_-|  |theta_+|  regular  roots")
for m in (1, 2):
    for t in np.linspace(0, 2 * np.pi, 5)[:-1]:
        r = is_regular(m, t)
        roots = "distinct" if r.roots_distinct else "coincide"
        print(f"  {m}  {t:5.3f}  {abs(r.theta_minus):9.3f}  {abs(r.theta_plus):9.3f}  "
              f"{str(r.regular):7s}  {roots}")

# %% Root multiplicity
# Away from t = 0 and t = pi, s = e^{it} is a root of multiplicity m.
for m in (1, 2, 3):
    print(f"m={m}: multiplicity of e^(it) at t = 1.0 -> {root_multiplicity(m, 1.0, np.exp(1j))}")

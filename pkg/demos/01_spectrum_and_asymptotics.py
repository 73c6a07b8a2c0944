"""Eigenvalues of a non-Hermitian 2x2 trigonometric potential and how fast
they approach the predictions built from the mean matrix C.

Run:  python demos/01_spectrum_and_asymptotics.py
"""

import numpy as np

from sturmspec import (analyze_matrix, adjoint_structure, assemble, decay_fit, eigen_solve,
                       evaluate_potential, load_example, pair_eigenvalues, pool_by_abs_k, predict)
from sturmspec.asymptotics import default_rho
from sturmspec.oracles import richardson_eigenvalue

# %% The potential
# Q(x) = C + Q1 e^{2 pi i x} + Q-1 e^{-2 pi i x} with C = [[i, 1], [0, -i]].
# C has two simple eigenvalues, so every level (2 pi k + t)^2 should split
# into two eigenvalues near (2 pi k + t)^2 + i and (2 pi k + t)^2 - i.
spec = load_example("nonhermitian_m2")
C = spec.block(0)
print("mean matrix C =\n", C)

structure = analyze_matrix(C)
for d in structure.distinct:
    print(f"  mu = {d.value:.3f}, algebraic multiplicity {d.multiplicity}")

# %% Galerkin solve
# The Fourier truncation keeps |n| <= K; modes near the cutoff are polluted,
# so predictions are only compared for |k| <= k_max, well inside K.
t, K, k_max = np.pi / 2, 160, 64
pairs = eigen_solve(assemble(spec, t, K))
preds = predict(structure, t, range(-k_max, k_max + 1), rho=default_rho(spec),
                adjoint=adjoint_structure(structure))
report = pair_eigenvalues(pairs, preds)
print(f"\n{len(report.assignments)} eigenvalues paired with {len(preds)} predictions, "
      f"{len(report.unmatched_predictions)} unmatched")

# %% Errors against |k|
errors = report.errors()
print("\n  |k|   max |lambda - mu_k,j|")
for k, e in pool_by_abs_k(errors):
    if k in (1, 2, 4, 8, 16, 32, 64):
        print(f"  {k:3d}   {e:.3e}")

# %% Decay rate
# The errors should fall off at least like ln k / k.  The least-squares
# exponents on |k| in [8, 64] show how fast; here they behave like 1 / k.
window = [(k, e) for k, e in pool_by_abs_k(errors) if 8 <= k <= 64]
for model in ("lnk_over_k", "k_pow"):
    fit = decay_fit(window, model=model, k_min=8)
    print(f"  {model:11s} exponent {fit.exponent:+.3f}  r^2 {fit.r2:.4f}")

# %% Independent check
# A finite-difference discretization with one Richardson step should agree
# with the Galerkin eigenvalue to several digits.
a = report.matched(3, 0)[0]
fd = richardson_eigenvalue(lambda x: evaluate_potential(spec, x), t, 2048, a.pair.eigenvalue)
print(f"\nGalerkin {a.pair.eigenvalue:.8f}\nFD       {fd:.8f}")


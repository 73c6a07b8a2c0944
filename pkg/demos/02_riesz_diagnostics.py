"""Root functions and their biorthogonal partners: Gram frame bounds and
Bari partial sums on a finite section.

Run:  python demos/02_riesz_diagnostics.py
"""

import numpy as np

from sturmspec import (adjoint_structure, analyze_matrix, assemble, bari_partial_sums,
                       build_biorthogonal, eigen_solve, load_example, pair_eigenvalues,
                       predict, riesz_condition_estimate)
from sturmspec.asymptotics import default_rho
from sturmspec.riesz import random_unit_functions, simplicity_certificate

# %% Build the family
# Eigenfunctions come from L_t(Q); their partners from the adjoint L_t(Q*).
# For |k| >= k_min each eigenvalue is simple and paired by index (k, j); the
# few low modes are handled through an invariant-subspace computation.
spec = load_example("nonhermitian_m2")
t, K, k_family = np.pi / 2, 120, 48
structure = analyze_matrix(spec.block(0))
adjoint = adjoint_structure(structure)
rho = default_rho(spec)
ks = range(-k_family, k_family + 1)

T = assemble(spec, t, K)
pairs = eigen_solve(T)
report = pair_eigenvalues(pairs, predict(structure, t, ks, rho=rho, adjoint=adjoint))
pairs_star = eigen_solve(assemble(spec.adjoint(), t, K))
report_star = pair_eigenvalues(pairs_star, predict(adjoint, t, ks, rho=rho, adjoint=structure))
family = build_biorthogonal(T, pairs, pairs_star, report, report_star, k_family=k_family)
print(f"{len(family.members)} members, biorthogonality defect "
      f"{family.biorthogonality_defect():.1e}")

# %% Frame bounds
# For a constant potential the Gram matrix is block diagonal with blocks
# built from the eigenvectors of C, so those bounds are the reference.
V = np.column_stack([d.chains[0].eigenvector for d in structure.distinct])
ref = np.linalg.eigvalsh(V.conj().T @ V)
psi = riesz_condition_estimate(family)
chi = riesz_condition_estimate(family, which="chi")
print(f"constant-C reference  [{ref[0]:.3f}, {ref[-1]:.3f}]")
print(f"psi family            [{psi.lower:.3f}, {psi.upper:.3f}]")
print(f"chi family            [{chi.lower:.3f}, {chi.upper:.3f}]")

# %% Bari sums
# S(K') = sum |(f, Psi)|^2 over |k| <= K' stays bounded by the upper frame
# bound and settles once K' passes the support of f.
print("\n  K'    " + "  ".join(f"f{i}" .rjust(7) for i in range(4)))
fs = random_unit_functions(4, K, 2, 24, seed=1)
tables = [bari_partial_sums(f, family, (8, 16, 24, 32, 48)) for f in fs]
for i, Kp in enumerate(tables[0].K_report):
    print(f"  {Kp:3d}  " + "  ".join(f"{tab.psi_sums[i]:7.4f}" for tab in tables))

# %% Simplicity
cert = simplicity_certificate(report, pairs)
print(f"\n{len(cert.certified)} disks certified simple, {len(cert.violations)} violations")

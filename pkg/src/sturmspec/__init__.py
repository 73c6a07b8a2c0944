"""Spectral numerics for the matrix Sturm-Liouville operator
-y'' + Q(x) y on [0, 1] with quasiperiodic boundary conditions
y(1) = e^{it} y(0), y'(1) = e^{it} y'(0), for trigonometric-polynomial
(possibly non-Hermitian) matrix potentials Q."""

__version__ = "0.1.0"

from .potential import (PotentialSpec, PotentialError, PotentialFormatError, load_potential,
                        parse_potential, save_potential, mean_matrix, sample_to_spec,
                        evaluate_potential, block_diag)
from .matrix_structure import EigenStructure, analyze_matrix, adjoint_structure, spectral_gap
from .galerkin import (TruncatedOperator, EigenPair, assemble, eigenvalues, eigen_solve,
                       residual, convergence_sweep, default_cutoff)
from .asymptotics import (Prediction, PairingReport, predict, pair_eigenvalues, decay_fit,
                          pool_by_abs_k, eigenfunction_error, projection_deficit,
                          perturbation_residual)
from .regularity import det_M_direct, det_M_closed, theta_coefficients, is_regular
from .riesz import build_biorthogonal, bari_partial_sums, riesz_condition_estimate
from .bands import sweep, band_union
from .data import load_example, example_names

__all__ = [name for name in dir() if not name.startswith("_")]

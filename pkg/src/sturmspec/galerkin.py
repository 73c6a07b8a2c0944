"""Fourier-Galerkin truncation of L_t(Q) = -y'' + Q(x) y with
y(1) = e^{it} y(0), y'(1) = e^{it} y'(0).

The basis is phi_{n,s}(x) = e_s exp(i(2 pi n + t)x), the eigenfunctions of
the unperturbed operator, and modes with |n| <= K are kept.  In this basis

    A[n][p] = (2 pi n + t)^2 delta_{np} I + Q_hat(n - p),

so the only approximation is the cutoff.  Coefficient arrays have shape
``(2K + 1, m)`` with row ``n + K`` holding the block for mode ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .potential import PotentialSpec

DEFAULT_ANGLE_TOL = 1e-6
DEFAULT_MAX_DIM = 4000


class DegenerateAngleError(ValueError):
    """t is within the guard angle of 0 or pi."""


class CutoffError(ValueError):
    """The harmonic cutoff is too small for the requested computation."""


class EigensolverError(RuntimeError):
    def __init__(self, msg, t=None, K=None, dim=None):
        super().__init__(msg)
        self.t, self.K, self.dim = t, K, dim


def check_angle(t, angle_tol=DEFAULT_ANGLE_TOL):
    """Reject t outside (0, 2 pi) or too close to 0 or pi."""
    if not 0 < t < 2 * np.pi:
        raise DegenerateAngleError(f"t = {t!r} is outside (0, 2 pi)")
    r = np.mod(t, np.pi)
    if min(r, np.pi - r) <= angle_tol:
        raise DegenerateAngleError(
            f"t = {t!r} is within {angle_tol:g} of a degenerate point (0 or pi)")


def default_cutoff(k_max, V):
    """Cutoff used to study indices |k| <= k_max."""
    return 2 * k_max + 4 * V + 8


def levels(t, K):
    """Unperturbed eigenvalues (2 pi n + t)^2 for n = -K..K."""
    n = np.arange(-K, K + 1)
    return (2 * np.pi * n + t) ** 2


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    spec: PotentialSpec
    t: float
    K: int
    matrix: np.ndarray

    @property
    def m(self):
        return self.spec.m

    @property
    def dim(self):
        return self.m * (2 * self.K + 1)


def _assemble_matrix(spec, t, K):
    m = spec.m
    N = 2 * K + 1
    A = np.kron(np.diag(levels(t, K)), np.eye(m)).astype(complex)
    for nu, b in spec.harmonics():
        if abs(nu) < N:
            A += np.kron(np.eye(N, k=-nu), b)
    return A


def assemble(spec: PotentialSpec, t: float, K: int, angle_tol=DEFAULT_ANGLE_TOL) -> TruncatedOperator:
    """Galerkin matrix of L_t(Q) on the modes |n| <= K."""
    check_angle(t, angle_tol)
    if K < 0 or int(K) != K:
        raise CutoffError(f"K must be a nonnegative integer, got {K!r}")
    A = _assemble_matrix(spec, t, K)
    A.setflags(write=False)
    return TruncatedOperator(spec, float(t), int(K), A)


def apply_operator(spec, t, coeffs, K_out):
    """Apply the untruncated operator to finitely supported coefficients.

    ``coeffs`` has shape ``(2K + 1, m)`` or ``(2K + 1, m, nvec)``; the result
    holds the blocks for modes ``|n| <= K_out``.
    """
    c = np.asarray(coeffs, dtype=complex)
    K = (c.shape[0] - 1) // 2
    pad = K_out - K
    if pad < 0:
        raise CutoffError("K_out must not be smaller than the input cutoff")
    width = [(pad, pad)] + [(0, 0)] * (c.ndim - 1)
    cp = np.pad(c, width)
    lev = levels(t, K_out).reshape((-1,) + (1,) * (c.ndim - 1))
    out = lev * cp
    for nu, b in spec.harmonics():
        # out[n] += b @ cp[n - nu]
        shifted = np.zeros_like(cp)
        if nu >= 0:
            shifted[nu:] = cp[:cp.shape[0] - nu]
        else:
            shifted[:nu] = cp[-nu:]
        out += np.einsum("sq,nq...->ns...", b, shifted)
    return out


@dataclass(frozen=True, eq=False)
class EigenPair:
    """A computed eigenvalue with its eigenfunction in Fourier form.

    ``coefficients[n + K]`` is the m-vector multiplying exp(i(2 pi n + t)x).
    """

    eigenvalue: complex
    coefficients: np.ndarray
    t: float
    residual: float

    @property
    def K(self):
        return (self.coefficients.shape[0] - 1) // 2

    @property
    def m(self):
        return self.coefficients.shape[1]

    def block(self, n):
        if abs(n) > self.K:
            return np.zeros(self.m, dtype=complex)
        return self.coefficients[n + self.K]

    @property
    def vector(self):
        return self.coefficients.reshape(-1)

    def norm(self):
        return float(np.linalg.norm(self.coefficients))


def _normalize_columns(V, m):
    """Unit norm; the largest block of each column gets its first nonzero
    component real positive."""
    V = V / np.linalg.norm(V, axis=0)
    blocks = V.reshape(-1, m, V.shape[1])
    norms = np.linalg.norm(blocks, axis=1)
    big = np.argmax(norms, axis=0)
    for col in range(V.shape[1]):
        b = blocks[big[col], :, col]
        idx = np.flatnonzero(np.abs(b) > 1e-8 * norms[big[col], col])[0]
        V[:, col] *= np.conj(b[idx]) / abs(b[idx])
    return V


def _order(w):
    return np.lexsort((w.imag, w.real))


def eigenvalues(T: TruncatedOperator) -> np.ndarray:
    """Eigenvalues only, sorted by real part then imaginary part."""
    A = T.matrix
    try:
        if np.array_equal(A, A.conj().T):
            w = scipy.linalg.eigvalsh(A).astype(complex)
        else:
            w = scipy.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}", T.t, T.K, T.dim) from exc
    return w[_order(w)]


def eigen_solve(T: TruncatedOperator, max_dim=DEFAULT_MAX_DIM) -> list[EigenPair]:
    """All eigenpairs of the truncated operator.

    Exactly Hermitian matrices go through the symmetric solver; everything
    else through the dense non-Hermitian QR algorithm.  Each pair records
    the residual ``||(A_{K+V} - lambda) Psi||`` of the zero-padded vector.
    """
    if T.dim > max_dim:
        raise CutoffError(f"dimension {T.dim} exceeds the configured maximum {max_dim}")
    A = T.matrix
    try:
        if np.array_equal(A, A.conj().T):
            w, V = scipy.linalg.eigh(A)
            w = w.astype(complex)
        else:
            w, V = scipy.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}", T.t, T.K, T.dim) from exc
    order = _order(w)
    w, V = w[order], _normalize_columns(V[:, order], T.m)

    coeffs = V.T.reshape(len(w), 2 * T.K + 1, T.m)
    K_big = T.K + T.spec.max_harmonic
    applied = apply_operator(T.spec, T.t, np.moveaxis(coeffs, 0, -1), K_big)
    pad = T.spec.max_harmonic
    lam_c = np.pad(np.moveaxis(coeffs, 0, -1), [(pad, pad), (0, 0), (0, 0)]) * w
    res = np.linalg.norm((applied - lam_c).reshape(-1, len(w)), axis=0)

    pairs = []
    for i in range(len(w)):
        c = coeffs[i].copy()
        c.setflags(write=False)
        pairs.append(EigenPair(complex(w[i]), c, T.t, float(res[i])))
    return pairs


def residual(spec: PotentialSpec, pair: EigenPair, K_prime: int) -> float:
    """``||(A_{K'} - lambda) Psi_pad||`` with Psi padded by zeros to K'."""
    if K_prime < pair.K + spec.max_harmonic:
        raise CutoffError(f"K' = {K_prime} must be at least K + V = {pair.K + spec.max_harmonic}")
    applied = apply_operator(spec, pair.t, pair.coefficients, K_prime)
    pad = K_prime - pair.K
    lam_c = pair.eigenvalue * np.pad(pair.coefficients, [(pad, pad), (0, 0)])
    return float(np.linalg.norm(applied - lam_c))


def evaluate_eigenfunction(pair: EigenPair, x) -> np.ndarray:
    """Psi(x) = sum_n c_n exp(i(2 pi n + t)x); shape ``x.shape + (m,)``."""
    x = np.asarray(x, dtype=float)
    n = np.arange(-pair.K, pair.K + 1)
    phases = np.exp(1j * np.multiply.outer(x, 2 * np.pi * n + pair.t))
    return phases @ pair.coefficients


@dataclass(frozen=True)
class SweepRow:
    k: int
    j: int
    K: int
    eigenvalue: complex | None
    difference: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[SweepRow, ...]
    non_cauchy: tuple[tuple[int, int], ...]
    failures: tuple[tuple[int, int, int], ...]

    def for_target(self, k, j):
        return [r for r in self.rows if (r.k, r.j) == (k, j)]


def convergence_sweep(spec: PotentialSpec, t: float, K_list, probe, rho=None,
                      max_dim=DEFAULT_MAX_DIM) -> ConvergenceTable:
    """Track the eigenvalue labelled (k, j) across increasing cutoffs.

    A target is flagged non-Cauchy when a successive difference grows by
    more than a factor 2 (plus a rounding allowance).
    """
    from .asymptotics import pair_eigenvalues, predict
    from .matrix_structure import analyze_matrix

    K_list = list(K_list)
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise ValueError("K_list must be strictly increasing")
    if spec.m * (2 * K_list[-1] + 1) > max_dim:
        raise CutoffError(f"K = {K_list[-1]} exceeds the dimension budget {max_dim}")
    structure = analyze_matrix(spec.block(0))
    ks = sorted({k for k, _ in probe})
    predictions = predict(structure, t, ks, rho=rho if rho is not None else _default_rho(spec))

    values = {target: [] for target in probe}
    failures = []
    for K in K_list:
        pairs = eigen_solve(assemble(spec, t, K), max_dim=max_dim)
        report = pair_eigenvalues(pairs, predictions)
        for target in probe:
            got = report.matched(*target)
            if got:
                values[target].append(got[0].pair.eigenvalue)
            else:
                values[target].append(None)
                failures.append((target[0], target[1], K))

    rows, non_cauchy = [], []
    for target in probe:
        prev, diffs = None, []
        for K, lam in zip(K_list, values[target]):
            diff = None
            if lam is not None and prev is not None:
                diff = abs(lam - prev)
                diffs.append(diff)
            rows.append(SweepRow(target[0], target[1], K, lam, diff))
            prev = lam
        floor = 1e-13 * max((abs(v) for v in values[target] if v is not None), default=1.0)
        if any(b > 2 * a + floor for a, b in zip(diffs, diffs[1:])):
            non_cauchy.append(target)
    return ConvergenceTable(tuple(rows), tuple(non_cauchy), tuple(failures))


def _default_rho(spec):
    return 10 * spec.perturbation_norm()

"""Finite-section diagnostics for the Riesz-basis property of the root
functions of L_t(Q).

The family consists of
  * high members: eigenfunctions Psi_{k,j} with k_min <= |k| <= k_family,
    each paired with the adjoint eigenfunction Psi*_{k,j} of L_t(Q*) and the
    biorthogonal partner chi_{k,j} = Psi* / conj((Psi, Psi*));
  * a low block: root functions (eigen- and associated vectors) of the
    truncated operator for the modes below k_min.  They come from a Jordan
    analysis of the operator restricted to their invariant subspace, and
    their partners are the dual basis inside the matching left invariant
    subspace.

Nothing here claims basisness.  The outputs are Bari partial sums and
Gram-matrix frame bounds over the computed section.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .asymptotics import DEFAULT_K_MIN, PairingReport
from .galerkin import TruncatedOperator
from .matrix_structure import VanishingPairingError, analyze_matrix


@dataclass(frozen=True, eq=False)
class FamilyMember:
    k: int
    j: int | None
    depth: int
    eigenvalue: complex
    psi: np.ndarray
    chi: np.ndarray
    psi_star: np.ndarray | None = None
    pairing: complex | None = None
    low: bool = False


@dataclass(frozen=True, eq=False)
class BiorthogonalFamily:
    members: tuple[FamilyMember, ...]
    K: int
    m: int
    k_min: int
    missing: tuple[tuple[int, int], ...] = ()

    @property
    def high(self):
        return [x for x in self.members if not x.low]

    @property
    def low_block(self):
        return [x for x in self.members if x.low]

    def psi_matrix(self, members=None):
        return np.column_stack([x.psi for x in (members or self.members)])

    def chi_matrix(self, members=None):
        return np.column_stack([x.chi for x in (members or self.members)])

    def biorthogonality_defect(self, members=None):
        """max |<Psi_a, chi_b> - delta_ab| over the chosen members."""
        members = members or self.members
        G = self.chi_matrix(members).conj().T @ self.psi_matrix(members)
        return float(np.max(np.abs(G - np.eye(len(members)))))


def _match_conjugates(primal, star):
    """Pair each primal eigenvalue with the adjoint one nearest its conjugate."""
    a = np.array([p.eigenvalue for p in primal])
    b = np.array([p.eigenvalue for p in star]).conj()
    rows, cols = linear_sum_assignment(np.abs(a[:, None] - b[None, :]))
    return list(zip(rows, cols))


def _low_indices(pairs, report, k_min):
    K = pairs[0].K
    lev = (2 * np.pi * np.arange(-K, K + 1) + pairs[0].t) ** 2
    assigned = {a.index: a.prediction.k for a in report.assignments}
    out = []
    for i, p in enumerate(pairs):
        k = assigned.get(i)
        if k is None:
            k = int(np.argmin(np.abs(lev - p.eigenvalue))) - K
        if abs(k) < k_min:
            out.append(i)
    return out


def _invariant_basis(A, selected, tol):
    def pick(x):
        return bool(np.min(np.abs(selected - x)) <= tol * (1 + abs(x)))

    T, Z, sdim = scipy.linalg.schur(A, output="complex", sort=pick)
    if sdim != len(selected):
        raise ValueError(f"isolated {sdim} eigenvalues for a low block of size {len(selected)}")
    return T[:sdim, :sdim], Z[:, :sdim]


def build_biorthogonal(T: TruncatedOperator, pairs, pairs_star, report: PairingReport,
                       report_star: PairingReport, k_min=DEFAULT_K_MIN, k_family=None,
                       pairing_tol=1e-10, select_tol=1e-9) -> BiorthogonalFamily:
    """Assemble {Psi} and its biorthogonal system {chi} on one finite section.

    ``pairs``/``report`` come from L_t(Q) and ``pairs_star``/``report_star``
    from L_t(Q*) at the same t and cutoff, the latter paired against the
    predictions built from C* (conjugate eigenvalues, same j indexing).
    """
    k_family = T.K if k_family is None else k_family
    members, missing = [], []

    star_by_key = defaultdict(list)
    for a in report_star.assignments:
        star_by_key[a.prediction.key].append(a.pair)
    prim_by_key = defaultdict(list)
    for a in report.assignments:
        prim_by_key[a.prediction.key].append(a.pair)

    keys = sorted({p.key for p in report.predictions if k_min <= abs(p.k) <= k_family})
    for key in keys:
        prim, star = prim_by_key.get(key, []), star_by_key.get(key, [])
        if not prim or len(prim) != len(star):
            missing.append(key)
            continue
        for r_, c_ in _match_conjugates(prim, star):
            psi, psi_star = prim[r_].vector, star[c_].vector
            pairing = np.vdot(psi_star, psi)
            if abs(pairing) < pairing_tol:
                raise VanishingPairingError(
                    f"(Psi, Psi*) = {abs(pairing):.3g} at (k, j) = {key}")
            members.append(FamilyMember(key[0], key[1], 0, prim[r_].eigenvalue, psi,
                                        psi_star / np.conj(pairing), psi_star, pairing))

    low = _low_indices(pairs, report, k_min)
    if low:
        w = np.array([pairs[i].eigenvalue for i in low])
        A = T.matrix
        T11, Z = _invariant_basis(A, w, select_tol)
        _, Y = _invariant_basis(A.conj().T, w.conj(), select_tol)
        structure = analyze_matrix(T11)
        cols, labels = [], []
        lev = (2 * np.pi * np.arange(-T.K, T.K + 1) + T.t) ** 2
        for d in structure.distinct:
            k = int(np.argmin(np.abs(lev - d.value))) - T.K
            for c in d.chains:
                for depth, v in enumerate(c.vectors):
                    cols.append(Z @ v)
                    labels.append((k, depth, d.value))
        W = np.column_stack(cols)
        dual = Y @ np.linalg.inv(Y.conj().T @ W).conj().T
        for i, (k, depth, val) in enumerate(labels):
            members.append(FamilyMember(k, None, depth, complex(val), W[:, i], dual[:, i],
                                        low=True))

    members.sort(key=lambda x: (abs(x.k), x.k, -1 if x.j is None else x.j, x.depth))
    return BiorthogonalFamily(tuple(members), T.K, T.m, k_min, tuple(missing))


def random_unit_functions(count, K, m, support, seed=0):
    """``count`` random unit vectors with Fourier support |n| <= support,
    as coefficient arrays of shape (2K + 1, m)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = np.zeros((2 * K + 1, m), dtype=complex)
        rows = slice(K - support, K + support + 1)
        c[rows] = rng.standard_normal((2 * support + 1, m)) + 1j * rng.standard_normal((2 * support + 1, m))
        out.append(c / np.linalg.norm(c))
    return out


@dataclass(frozen=True)
class BariTable:
    K_report: tuple[int, ...]
    psi_sums: tuple[float, ...]
    chi_sums: tuple[float, ...]


def bari_partial_sums(f, family: BiorthogonalFamily, K_report, norm_tol=1e-10) -> BariTable:
    """S(K') = sum over members with |k| <= K' of |(f, Psi)|^2, and the same
    with chi, evaluated at each K' in ``K_report``."""
    f = np.asarray(f, dtype=complex)
    if f.ndim == 2:
        Kf = (f.shape[0] - 1) // 2
        if Kf > family.K:
            if np.any(f[: Kf - family.K]) or np.any(f[Kf + family.K + 1:]):
                raise ValueError("f has Fourier support outside the family's section")
            f = f[Kf - family.K: Kf + family.K + 1]
        elif Kf < family.K:
            f = np.pad(f, [(family.K - Kf,) * 2, (0, 0)])
        f = f.reshape(-1)
    if abs(np.linalg.norm(f) - 1) > norm_tol:
        raise ValueError("f must have unit norm")
    ks = np.array([abs(x.k) for x in family.members])
    a = np.abs(family.psi_matrix().conj().T @ f) ** 2
    b = np.abs(family.chi_matrix().conj().T @ f) ** 2
    psi_sums = tuple(float(a[ks <= K].sum()) for K in K_report)
    chi_sums = tuple(float(b[ks <= K].sum()) for K in K_report)
    return BariTable(tuple(K_report), psi_sums, chi_sums)


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    n_members: int


def riesz_condition_estimate(family: BiorthogonalFamily, sample_size=None, which="psi") -> FrameBounds:
    """Extreme eigenvalues of the Gram matrix of the family.

    ``sample_size`` limits the section to the members with the smallest |k|
    (all members when None).  ``which`` selects the Psi or the chi family.
    """
    members = list(family.members)
    if sample_size is not None:
        members = members[:sample_size]
    V = family.psi_matrix(members) if which == "psi" else family.chi_matrix(members)
    G = V.conj().T @ V
    ev = scipy.linalg.eigvalsh(G)
    return FrameBounds(float(ev[0]), float(ev[-1]), len(members))


@dataclass(frozen=True)
class SimplicityReport:
    certified: tuple[tuple[int, int, float], ...]
    violations: tuple[tuple[int, int, str, float], ...]

    @property
    def ok(self):
        return not self.violations


def simplicity_certificate(report: PairingReport, pairs, k_min=DEFAULT_K_MIN) -> SimplicityReport:
    """Check that every disk with |k| >= k_min holds exactly one computed
    eigenvalue, separated from all others by more than twice its residual."""
    w = np.array([p.eigenvalue for p in pairs])
    certified, violations = [], []
    for pred in report.predictions:
        if abs(pred.k) < k_min:
            continue
        inside = np.flatnonzero(np.abs(w - pred.value) <= pred.disk_radius)
        if len(inside) != 1:
            violations.append((pred.k, pred.j, "count", float(len(inside))))
            continue
        i = inside[0]
        sep = float(np.min(np.abs(np.delete(w, i) - w[i])))
        if sep <= 2 * pairs[i].residual:
            violations.append((pred.k, pred.j, "separation", sep))
        else:
            certified.append((pred.k, pred.j, sep))
    return SimplicityReport(tuple(certified), tuple(violations))

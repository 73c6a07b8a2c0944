"""Eigen-structure of the mean matrix C: distinct eigenvalues, Jordan chains,
spectral gaps and the matching system for C*.

Numerical Jordan structure is ill-posed, so everything here is tolerance
driven.  Eigenvalues are read off a complex Schur form and clustered; each
cluster is moved to the top of the Schur form, and the chain lengths follow
from numerical ranks of powers of the nilpotent part on that invariant
subspace (the usual staircase construction).

Distinct eigenvalues are ordered by real part, then imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class ClusterAmbiguityError(ValueError):
    """Two eigenvalues are too close to call distinct and too far to merge."""


class VanishingPairingError(ValueError):
    """<v_j, v_j*> is numerically zero for a simple eigenvalue."""


@dataclass(frozen=True, eq=False)
class JordanChain:
    """``eigenvector`` followed by ``associated`` vectors u_1, ..., u_{r-1}
    with (C - mu) u_s = u_{s-1}, u_0 being the eigenvector."""

    eigenvalue_index: int
    eigenvector: np.ndarray
    associated: tuple[np.ndarray, ...] = ()

    @property
    def length(self):
        return 1 + len(self.associated)

    @property
    def vectors(self):
        return (self.eigenvector,) + tuple(self.associated)


@dataclass(frozen=True, eq=False)
class DistinctEigenvalue:
    value: complex
    multiplicity: int
    chains: tuple[JordanChain, ...]
    gap: float

    @property
    def r(self):
        """Longest chain length at this eigenvalue."""
        return max(c.length for c in self.chains)

    @property
    def is_simple(self):
        return self.multiplicity == 1


@dataclass(frozen=True, eq=False)
class FlatEntry:
    """One of the m eigenvalues counted with multiplicity."""

    j: int
    eigenvalue: complex
    eigenvector: np.ndarray
    chain: JordanChain
    depth: int


@dataclass(frozen=True, eq=False)
class EigenStructure:
    matrix: np.ndarray
    distinct: tuple[DistinctEigenvalue, ...]
    cluster_tol: float
    rank_tol: float
    flat: tuple[FlatEntry, ...] = field(default=())

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def values(self):
        return np.array([d.value for d in self.distinct])

    @property
    def gaps(self):
        return [d.gap for d in self.distinct]

    @property
    def all_simple(self):
        return all(d.is_simple for d in self.distinct)

    def basis_matrix(self):
        """All chain vectors as columns (eigenvectors and associated vectors)."""
        return np.column_stack([v for d in self.distinct for c in d.chains for v in c.vectors])


def _numerical_rank(A, tol):
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol))


def _null_space(A, tol):
    """Orthonormal basis of the numerical null space of ``A``."""
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _orth(A, tol):
    if A.shape[1] == 0:
        return A
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    return u[:, s > tol]


def _nilpotent_chains(N, tol):
    """Jordan chains of a numerically nilpotent d x d matrix.

    Returns a list of chains, each ``[N^{L-1}x, ..., N x, x]`` (eigenvector
    first).
    """
    d = N.shape[0]
    powers = [np.eye(d, dtype=complex)]
    for _ in range(d):
        powers.append(powers[-1] @ N)
    ranks = [_numerical_rank(P, tol) for P in powers]
    for i in range(1, len(ranks)):
        ranks[i] = min(ranks[i], ranks[i - 1])
    ranks[-1] = 0
    # at_least[L]: number of chains of length >= L
    at_least = {L: ranks[L - 1] - ranks[L] for L in range(1, d + 1)}
    at_least[d + 1] = 0

    chains = []
    for L in range(d, 0, -1):
        count = at_least[L] - at_least[L + 1]
        if count <= 0:
            continue
        kernel = _null_space(powers[L], tol)
        spanned = [_null_space(powers[L - 1], tol)] if L > 1 else []
        for ch in chains:
            # the vector of a longer chain that sits at height L
            spanned.append(ch[len(ch) - L][:, None])
        S = _orth(np.hstack(spanned), tol) if spanned else np.zeros((d, 0), complex)
        R = kernel - S @ (S.conj().T @ kernel)
        u, _, _ = np.linalg.svd(R, full_matrices=False)
        for x in u[:, :count].T:
            chain = [x]
            for _ in range(L - 1):
                chain.append(N @ chain[-1])
            chains.append(chain[::-1])
    return chains


def _normalize_chain(vectors, tol=1e-12):
    """Unit eigenvector with its first nonzero component real positive; the
    same factor is applied to the associated vectors."""
    v = vectors[0]
    nrm = np.linalg.norm(v)
    idx = np.flatnonzero(np.abs(v) > tol * nrm)[0]
    scale = np.conj(v[idx]) / abs(v[idx]) / nrm
    return [scale * w for w in vectors]


def _sort_key(value, quantum):
    return (round(value.real / quantum), value.imag)


def _components(n, linked):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for k in range(i + 1, n):
            if linked(i, k):
                parent[find(i)] = find(k)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _defective_cluster(C, members, rank_tol):
    """True when the invariant subspace of ``members`` carries a numerically
    nilpotent, non-semisimple C - mu (a perturbed Jordan structure)."""
    p = len(members)
    mu = members.mean()

    def pick(x):
        return bool(np.min(np.abs(members - x)) <= 1e-12 * (1 + abs(x)))

    T, _, sdim = scipy.linalg.schur(C, output="complex", sort=pick)
    if sdim != p:
        return False
    N = T[:p, :p] - mu * np.eye(p)
    return (_numerical_rank(np.linalg.matrix_power(N, p), rank_tol) == 0
            and _numerical_rank(N, rank_tol) < p)


def _cluster(C, values, tol, rank_tol):
    """Group eigenvalues of C that represent one multiple eigenvalue.

    Eigenvalues within ``tol`` always merge.  A Jordan block of size p is
    split by rounding into eigenvalues about ``||C|| (u)^(1/p)`` apart (u the
    backward error), far more than ``tol``; such groups merge as well when
    the merged block is numerically nilpotent and defective.
    """
    scale = np.linalg.norm(C, 2) or 1.0
    groups = _components(len(values), lambda i, k: abs(values[i] - values[k]) <= tol)
    for p in range(2, len(values) + 1):
        thr = max(tol, scale * (100 * np.finfo(float).eps) ** (1.0 / p))
        gvals = [values[g] for g in groups]

        def near(a, b, gvals=gvals, thr=thr):
            return np.min(np.abs(gvals[a][:, None] - gvals[b][None, :])) <= thr

        merged = []
        for comp in _components(len(groups), near):
            members = [i for c in comp for i in groups[c]]
            if len(comp) > 1 and len(members) <= p and _defective_cluster(C, values[members], rank_tol):
                merged.append(members)
            else:
                merged.extend(groups[c] for c in comp)
        groups = merged

    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            dist = np.min(np.abs(values[groups[a]][:, None] - values[groups[b]][None, :]))
            if tol < dist <= 10 * tol:
                raise ClusterAmbiguityError(
                    f"eigenvalues {values[groups[a]][0]:.10g} and {values[groups[b]][0]:.10g} are "
                    f"{dist:.3g} apart, inside the ambiguity band [{tol:.3g}, {10 * tol:.3g}]")
    return groups


def analyze_matrix(C, cluster_tol=None, rank_tol=None) -> EigenStructure:
    """Distinct eigenvalues, multiplicities and Jordan chains of ``C``.

    Parameters
    ----------
    C : (m, m) array_like
    cluster_tol : float, optional
        Eigenvalues closer than this are treated as one.  Defaults to
        ``1e-8 * ||C||``.  A pair of eigenvalues whose distance falls in
        ``(cluster_tol, 10 * cluster_tol]`` raises :class:`ClusterAmbiguityError`.
    rank_tol : float, optional
        Singular-value cutoff for the rank of powers of ``C - mu``;
        defaults to ``1e-8 * ||C||``.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    m = C.shape[0]
    if C.shape != (m, m) or m < 1:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    scale = np.linalg.norm(C, 2) or 1.0
    cluster_tol = 1e-8 * scale if cluster_tol is None else cluster_tol
    rank_tol = 1e-8 * scale if rank_tol is None else rank_tol
    if cluster_tol <= 0 or rank_tol <= 0:
        raise ValueError("tolerances must be positive")

    T, _ = scipy.linalg.schur(C, output="complex")
    eig = np.diag(T).copy()
    groups = _cluster(C, eig, cluster_tol, rank_tol)
    quantum = max(1e3 * cluster_tol, 1e-9)
    groups.sort(key=lambda g: _sort_key(eig[g].mean(), quantum))

    raw = []
    for j, g in enumerate(groups):
        mu = complex(eig[g].mean())
        members = eig[g]

        def in_cluster(x, members=members):
            return bool(np.min(np.abs(members - x)) <= cluster_tol)

        Tc, Zc, sdim = scipy.linalg.schur(C, output="complex", sort=in_cluster)
        if sdim != len(g):
            raise ClusterAmbiguityError(
                f"reordering isolated {sdim} eigenvalues near {mu:.6g}, expected {len(g)}")
        N = Tc[:sdim, :sdim] - mu * np.eye(sdim)
        chains = []
        for ch in _nilpotent_chains(N, rank_tol):
            vecs = _normalize_chain([Zc[:, :sdim] @ y for y in ch])
            chains.append(JordanChain(j, vecs[0], tuple(vecs[1:])))
        chains.sort(key=lambda c: -c.length)
        raw.append((mu, len(g), tuple(chains)))

    values = np.array([r[0] for r in raw])
    distinct = []
    for j, (mu, mult, chains) in enumerate(raw):
        others = np.delete(values, j)
        gap = float(np.min(np.abs(others - mu))) if others.size else float("inf")
        distinct.append(DistinctEigenvalue(mu, mult, chains, gap))
    return EigenStructure(C, tuple(distinct), cluster_tol, rank_tol, _flatten(distinct))


def _flatten(distinct):
    flat = []
    for j, d in enumerate(distinct):
        for c in d.chains:
            for depth in range(c.length):
                flat.append(FlatEntry(j, d.value, c.eigenvector, c, depth))
    return tuple(flat)


def adjoint_structure(structure: EigenStructure, C=None, pairing_tol=1e-10) -> EigenStructure:
    """Eigen-structure of C* aligned index-by-index with ``structure``.

    Entry ``j`` of the result belongs to ``conj(mu_j)``.  For simple
    eigenvalues the adjoint eigenvector is rescaled so that
    ``<v_j, v_j*> = v_j*^H v_j = 1``; multiple eigenvalues keep the raw
    (unit eigenvector) chains.
    """
    C = structure.matrix if C is None else np.asarray(C, dtype=complex)
    adj = analyze_matrix(C.conj().T, structure.cluster_tol, structure.rank_tol)
    if len(adj.distinct) != len(structure.distinct):
        raise ClusterAmbiguityError("C and C* resolve to different numbers of clusters")

    adj_values = adj.values
    distinct = []
    used = set()
    for j, d in enumerate(structure.distinct):
        i = int(np.argmin(np.abs(adj_values - np.conj(d.value))))
        if i in used:
            raise ClusterAmbiguityError(f"cannot align adjoint eigenvalue for mu_{j}")
        used.add(i)
        a = adj.distinct[i]
        chains = []
        for c in a.chains:
            vecs = list(c.vectors)
            if d.is_simple:
                v = d.chains[0].eigenvector
                p = np.vdot(vecs[0], v)
                if abs(p) < pairing_tol:
                    raise VanishingPairingError(
                        f"<v_{j}, v_{j}*> = {abs(p):.3g} for the simple eigenvalue {d.value:.6g}")
                vecs = [w / np.conj(p) for w in vecs]
            chains.append(JordanChain(j, vecs[0], tuple(vecs[1:])))
        distinct.append(DistinctEigenvalue(complex(np.conj(d.value)), a.multiplicity,
                                           tuple(chains), d.gap))
    return EigenStructure(adj.matrix, tuple(distinct), adj.cluster_tol, adj.rank_tol,
                          _flatten(distinct))


def spectral_gap(structure: EigenStructure, j: int) -> float:
    """a_j = min_{i != j} |mu_j - mu_i|; infinite when C has one distinct eigenvalue."""
    return structure.distinct[j].gap

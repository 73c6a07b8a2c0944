"""Large-|k| predictions and the quantities that test them.

For |k| large the eigenvalues of L_t(Q) sit near mu_{k,j} = (2 pi k + t)^2 + mu_j,
mu_j the eigenvalues of the mean matrix C, with eigenfunctions close to
v_j exp(i(2 pi k + t)x).  This module pairs computed eigenvalues with those
predictions, measures the errors and fits their decay in k.

Inner products follow (f, g) = int <f, g> dx with <a, b> = sum a_i conj(b_i).
Every function that appears here has a finite Fourier expansion, so all
inner products reduce to sums over coefficient blocks.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .galerkin import EigenPair
from .matrix_structure import EigenStructure, adjoint_structure
from .potential import PotentialSpec

DEFAULT_K_MIN = 5
_FORBIDDEN = 1e18


@dataclass(frozen=True, eq=False)
class Prediction:
    k: int
    j: int
    value: complex
    disk_radius: float
    r: int
    multiplicity: int
    eigenvector: np.ndarray | None
    chain_vectors: tuple[np.ndarray, ...]
    adjoint_chain: tuple[np.ndarray, ...]
    adjoint_vectors: tuple[np.ndarray, ...]

    @property
    def key(self):
        return (self.k, self.j)


@dataclass(frozen=True, eq=False)
class Assignment:
    prediction: Prediction
    pair: EigenPair
    index: int
    distance: float


@dataclass(frozen=True, eq=False)
class PairingReport:
    assignments: tuple[Assignment, ...]
    unmatched_predictions: tuple[tuple[Prediction, int], ...]
    unmatched_eigenvalues: tuple[EigenPair, ...]
    ambiguous: tuple[tuple[int, int], ...]
    predictions: tuple[Prediction, ...]

    def matched(self, k, j):
        return [a for a in self.assignments if a.prediction.key == (k, j)]

    def keys(self):
        return sorted({a.prediction.key for a in self.assignments})

    def errors(self):
        """(k, j) -> largest |lambda - mu_{k,j}| over the matched eigenvalues."""
        out = {}
        for a in self.assignments:
            out[a.prediction.key] = max(out.get(a.prediction.key, 0.0), a.distance)
        return out

    def cluster_width(self, k, j):
        vals = [a.pair.eigenvalue for a in self.matched(k, j)]
        if len(vals) < 2:
            return 0.0
        vals = np.array(vals)
        return float(np.max(np.abs(vals[:, None] - vals[None, :])))

    def eigenfunction_errors(self):
        """(k, j) -> eigenfunction error for simple mu_j."""
        return {a.prediction.key: eigenfunction_error(a.pair, a.prediction)
                for a in self.assignments if a.prediction.multiplicity == 1}

    def matched_indices(self):
        return {a.index for a in self.assignments}


@dataclass(frozen=True)
class DecayFit:
    model: str
    exponent: float
    r2: float
    n_points: int
    exact: bool = False


def coarse_predict(t, k):
    return (2 * np.pi * k + t) ** 2


def default_rho(spec: PotentialSpec):
    """Disk-radius factor: ten times the Fourier l1 norm of Q - C."""
    return 10.0 * spec.perturbation_norm()


def disk_radius(k, r, gap, rho, center, min_radius_rel=1e-8):
    """min(a_j / 2, rho (ln(|k|+2) / (|k|+1))^{1/r_j}), floored at
    ``min_radius_rel * (1 + |center|)`` so that disks never degenerate."""
    rule = rho * (np.log(abs(k) + 2) / (abs(k) + 1)) ** (1.0 / r)
    return float(max(min(gap / 2, rule), min_radius_rel * (1 + abs(center))))


def predict(structure: EigenStructure, t, k_range, rho=1.0, adjoint=None,
            min_radius_rel=1e-8) -> list[Prediction]:
    """One prediction per (k, distinct eigenvalue j)."""
    if adjoint is None:
        adjoint = adjoint_structure(structure)
    preds = []
    for k in k_range:
        for j, d in enumerate(structure.distinct):
            center = coarse_predict(t, k) + d.value
            a = adjoint.distinct[j]
            longest = max(a.chains, key=lambda c: c.length)
            preds.append(Prediction(
                k=int(k), j=j, value=complex(center),
                disk_radius=disk_radius(k, d.r, d.gap, rho, center, min_radius_rel),
                r=d.r, multiplicity=d.multiplicity,
                eigenvector=d.chains[0].eigenvector if d.is_simple else None,
                chain_vectors=tuple(v for c in d.chains for v in c.vectors),
                adjoint_chain=longest.vectors,
                adjoint_vectors=tuple(v for c in a.chains for v in c.vectors),
            ))
    return preds


def overlapping_disks(predictions):
    """Keys of predictions whose disk intersects another prediction's disk."""
    if not predictions:
        return []
    c = np.array([p.value for p in predictions])
    r = np.array([p.disk_radius for p in predictions])
    hit = np.abs(c[:, None] - c[None, :]) < (r[:, None] + r[None, :])
    np.fill_diagonal(hit, False)
    return sorted({predictions[i].key for i in np.flatnonzero(hit.any(axis=1))})


def pair_eigenvalues(pairs, predictions) -> PairingReport:
    """Assign computed eigenvalues to predictions, respecting the disks.

    Within each k the assignment is an exact minimum-distance bipartite
    matching; clusters are processed in order of increasing |k| and an
    eigenvalue is never used twice.  Eigenvalues outside every disk and
    predictions whose disks are empty are reported, never forced.
    """
    w = np.array([p.eigenvalue for p in pairs])
    by_k = defaultdict(list)
    for p in predictions:
        by_k[p.k].append(p)
    taken = set()
    assignments, unmatched = [], []
    for k in sorted(by_k, key=lambda k: (abs(k), k)):
        preds = by_k[k]
        slots = [p for p in preds for _ in range(p.multiplicity)]
        centers = np.array([p.value for p in slots])
        radii = np.array([p.disk_radius for p in slots])
        dist = np.abs(w[None, :] - centers[:, None])
        inside = dist <= radii[:, None]
        if taken:
            inside[:, sorted(taken)] = False
        cand = np.flatnonzero(inside.any(axis=0))
        filled = defaultdict(int)
        if cand.size:
            cost = np.where(inside[:, cand], dist[:, cand], _FORBIDDEN)
            rows, cols = linear_sum_assignment(cost)
            for r_, c_ in zip(rows, cols):
                if cost[r_, c_] >= _FORBIDDEN:
                    continue
                idx = int(cand[c_])
                taken.add(idx)
                filled[slots[r_].key] += 1
                assignments.append(Assignment(slots[r_], pairs[idx], idx, float(dist[r_, idx])))
        for p in preds:
            missing = p.multiplicity - filled[p.key]
            if missing > 0:
                unmatched.append((p, missing))

    stray = []
    if pairs and predictions:
        ks = set(by_k)
        t = pairs[0].t
        K = pairs[0].K
        lev = (2 * np.pi * np.arange(-K, K + 1) + t) ** 2
        for i, p in enumerate(pairs):
            if i in taken:
                continue
            nearest = int(np.argmin(np.abs(lev - p.eigenvalue))) - K
            if nearest in ks:
                stray.append(p)
    assignments.sort(key=lambda a: (a.prediction.k, a.prediction.j, a.index))
    return PairingReport(tuple(assignments), tuple(unmatched), tuple(stray),
                         tuple(overlapping_disks(predictions)), tuple(predictions))


def label_eigenvalues(values, predictions):
    """Global minimum-distance labelling without disk constraints.

    Each prediction receives ``multiplicity`` eigenvalues.  Used to thread
    band curves, where low-|k| disks overlap and the disk pairing would
    leave them unlabelled.  Returns ``{(k, j): [indices]}``.
    """
    values = np.asarray(values)
    slots = [p for p in predictions for _ in range(p.multiplicity)]
    centers = np.array([p.value for p in slots])
    cost = np.abs(centers[:, None] - values[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = defaultdict(list)
    for r_, c_ in zip(rows, cols):
        out[slots[r_].key].append(int(c_))
    return dict(out)


def pool_by_abs_k(errors, j=None, k_min=0):
    """Collapse ``{(k, j): e}`` (or ``{k: e}``) to sorted ``[(|k|, max e)]``."""
    pooled = {}
    for key, e in errors.items():
        if isinstance(key, tuple):
            k, jj = key
            if j is not None and jj != j:
                continue
        else:
            k = key
        if abs(k) < k_min:
            continue
        pooled[abs(k)] = max(pooled.get(abs(k), 0.0), e)
    return sorted(pooled.items())


def decay_fit(errors, model="lnk_over_k", k_min=DEFAULT_K_MIN, exact_tol=1e-9) -> DecayFit:
    """Least-squares decay exponent of ``errors = [(|k|, e_k)]``.

    ``lnk_over_k`` regresses log e_k on log(ln|k| / |k|) (the slope is the
    exponent, ideally 1); ``k_pow`` regresses on log|k| (slope is negative).
    Only |k| >= k_min enters.  If every error is at most ``exact_tol`` the
    fit is undefined and the result is flagged ``exact``.
    """
    if model not in ("lnk_over_k", "k_pow"):
        raise ValueError(f"unknown model {model!r}")
    data = [(abs(k), float(e)) for k, e in errors if abs(k) >= max(k_min, 2)]
    if data and all(e <= exact_tol for _, e in data):
        return DecayFit(model, float("nan"), float("nan"), len(data), exact=True)
    if len(data) < 5:
        raise ValueError(f"need at least 5 points with |k| >= {k_min}, got {len(data)}")
    k = np.array([d[0] for d in data], dtype=float)
    e = np.array([d[1] for d in data])
    if np.any(e <= 0):
        raise ValueError("errors must be positive unless all vanish")
    x = np.log(np.log(k) / k) if model == "lnk_over_k" else np.log(k)
    y = np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(model, float(slope), float(r2), len(data))


def eigenfunction_error(pair: EigenPair, prediction: Prediction) -> float:
    """min over |alpha| = 1 of ||Psi - alpha v_j exp(i(2 pi k + t)x)||."""
    if prediction.multiplicity != 1:
        raise ValueError(f"mu_{prediction.j} is not simple; no single eigenvector to compare with")
    ck = pair.block(prediction.k)
    ov = np.vdot(prediction.eigenvector, ck)
    alpha = ov / abs(ov) if ov != 0 else 1.0
    # form the difference explicitly; expanding the norm cancels to sqrt(eps)
    diff = np.array(pair.coefficients, dtype=complex)
    diff[prediction.k + pair.K] -= alpha * prediction.eigenvector
    return float(np.linalg.norm(diff))


def projection_deficit(pair: EigenPair, k) -> float:
    """| ||P_k Psi||^2 - 1 | for the projection onto span{phi_{k,s}}."""
    ck = pair.block(k)
    return float(abs(np.vdot(ck, ck).real - 1.0))


def perturbation_block(spec: PotentialSpec, pair: EigenPair, n):
    """Mode-n block of (Q - C) Psi, i.e. sum_{nu != 0} Q_hat(nu) c_{n - nu}."""
    out = np.zeros(spec.m, dtype=complex)
    for nu, b in spec.harmonics(include_zero=False):
        out += b @ pair.block(n - nu)
    return out


def perturbation_residual(pair: EigenPair, prediction: Prediction, spec: PotentialSpec, p=0) -> float:
    """|LHS - RHS| of the chain identity

        (lambda - mu)^{p+1} (Psi, Phi*_p) = sum_{q<=p} (lambda - mu)^q ((Q - C) Psi, Phi*_q)

    with Phi*_q = v*_q exp(i(2 pi k + t)x) the adjoint root functions of the
    unperturbed operator.  Vanishes for exact eigenpairs.
    """
    chain = prediction.adjoint_chain
    if not 0 <= p < len(chain):
        raise ValueError(f"chain depth {p} not available (chain length {len(chain)})")
    d = pair.eigenvalue - prediction.value
    ck = pair.block(prediction.k)
    wk = perturbation_block(spec, pair, prediction.k)
    lhs = d ** (p + 1) * np.vdot(chain[p], ck)
    rhs = sum(d ** q * np.vdot(chain[q], wk) for q in range(p + 1))
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class Lemma2Table:
    rows: tuple[tuple[int, float], ...]
    fit: DecayFit | None


def lemma2_decay(pairs_by_k, spec: PotentialSpec, adjoint: EigenStructure, i, p=0,
                 k_min=DEFAULT_K_MIN) -> Lemma2Table:
    """|(Psi_{k,j}, (Q* - C*) Phi*_{k,i,p})| for each k in ``pairs_by_k``.

    The value is |<sum_{nu != 0} Q_hat(nu) c_{k - nu}, v*_{i,p}>|.  A
    ``lnk_over_k`` fit over |k| >= k_min is attached when it is defined.
    """
    chain = max(adjoint.distinct[i].chains, key=lambda c: c.length).vectors
    if not 0 <= p < len(chain):
        raise ValueError(f"chain depth {p} not available for eigenvalue {i}")
    rows = []
    for k in sorted(pairs_by_k):
        wk = perturbation_block(spec, pairs_by_k[k], k)
        rows.append((k, float(abs(np.vdot(chain[p], wk)))))
    try:
        fit = decay_fit(pool_by_abs_k(dict(rows)), "lnk_over_k", k_min=k_min, exact_tol=1e-13)
    except ValueError:
        fit = None
    return Lemma2Table(tuple(rows), fit)


def lemma3_floor(pair: EigenPair, k, adjoint: EigenStructure) -> float:
    """max over every adjoint chain vector v*_{i,s} of |<c_k, v*_{i,s}>|."""
    ck = pair.block(k)
    return float(max(abs(np.vdot(v, ck)) for d in adjoint.distinct
                     for c in d.chains for v in c.vectors))


class ResonanceError(ValueError):
    """lambda is too close to the unperturbed level of the probed mode."""


def fourier_relation_residual(pair: EigenPair, spec: PotentialSpec, n, s, k=None,
                              resonance_tol=1e-8) -> float:
    """|(lambda - (2 pi n + t)^2) c_n[s] - sum_{q,p} Q_hat_{s,q}(n - p) c_p[q]|.

    This is row (n, s) of the eigen-equation written in the unperturbed basis.
    """
    if k is not None and n == k:
        raise ValueError("the relation is stated for n != k")
    shift = pair.eigenvalue - coarse_predict(pair.t, n)
    if abs(shift) <= resonance_tol:
        raise ResonanceError(f"|lambda - (2 pi n + t)^2| = {abs(shift):.3g} for n = {n}")
    coupled = sum(spec.block(nu)[s] @ pair.block(n - nu)
                  for nu in range(-spec.max_harmonic, spec.max_harmonic + 1))
    return float(abs(shift * pair.block(n)[s] - coupled))


def gap_ratio(pair: EigenPair, k, n_range):
    """min over n != k of |lambda - (2 pi n + t)^2| / |(2 pi k + t)^2 - (2 pi n + t)^2|."""
    n = np.array([x for x in n_range if x != k])
    lev = (2 * np.pi * n + pair.t) ** 2
    return float(np.min(np.abs(pair.eigenvalue - lev) / np.abs(coarse_predict(pair.t, k) - lev)))

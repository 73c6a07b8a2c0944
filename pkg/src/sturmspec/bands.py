"""Band spectrum of the periodic operator on the whole line, obtained as the
union over t of the spectra of L_t.

t = 0 and t = pi are excluded from the grid; curve values there are linear
extrapolations from the two nearest grid points and carry that label.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import default_rho, label_eigenvalues, predict
from .galerkin import DEFAULT_ANGLE_TOL, assemble, check_angle, default_cutoff, eigenvalues
from .matrix_structure import analyze_matrix
from .potential import PotentialSpec


def default_t_grid(per_half=64):
    """``per_half`` points in each of (0, pi) and (pi, 2 pi), offset by half a step."""
    h = np.pi / per_half
    half = (np.arange(per_half) + 0.5) * h
    return np.concatenate([half, np.pi + half])


@dataclass(frozen=True, eq=False)
class BandFamily:
    """``curves[(k, j)]`` has shape (len(t_grid), m_j): the eigenvalues
    labelled (k, j) at each t, sorted by real part within the label."""

    t_grid: np.ndarray
    curves: dict
    jumps: tuple[tuple[tuple[int, int], int], ...]
    endpoints: dict
    hermitian: bool
    K: int
    spreads: dict | None = None

    def halves(self):
        lower = self.t_grid < np.pi
        return {"lower": np.flatnonzero(lower), "upper": np.flatnonzero(~lower)}


def _solve_one(spec, t, K, predictions):
    w = eigenvalues(assemble(spec, t, K))
    labels = label_eigenvalues(w, predictions)
    return {key: np.sort_complex(w[idx]) for key, idx in labels.items()}


def sweep(spec: PotentialSpec, t_grid=None, k_range=range(-3, 4), K=None, rho=None,
          angle_tol=DEFAULT_ANGLE_TOL, workers=1, slope_factor=10.0) -> BandFamily:
    """Solve on every grid point and thread curves by (k, j) label.

    Consecutive points within one half-interval that move by more than
    ``slope_factor * dt * (2 |2 pi k + t| + 1)`` are recorded as jumps.
    """
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    for t in t_grid:
        check_angle(t, angle_tol)
    k_range = list(k_range)
    if K is None:
        K = default_cutoff(max(abs(k) for k in k_range), spec.max_harmonic)
    structure = analyze_matrix(spec.block(0))
    rho = default_rho(spec) if rho is None else rho
    jobs = [(t, predict(structure, t, k_range, rho=rho)) for t in t_grid]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _solve_one(spec, job[0], K, job[1]), jobs))
    else:
        results = [_solve_one(spec, t, K, preds) for t, preds in jobs]

    keys = sorted({key for r in results for key in r})
    curves = {}
    for key in keys:
        width = max(len(r.get(key, ())) for r in results)
        arr = np.full((len(t_grid), width), np.nan + 0j)
        for i, r in enumerate(results):
            vals = r.get(key, ())
            arr[i, : len(vals)] = vals
        curves[key] = arr

    family = BandFamily(t_grid, curves, (), {}, spec.is_hermitian(tol=1e-14), K)
    jumps, endpoints, spreads = [], {}, {}
    for name, idx in family.halves().items():
        if len(idx) < 2:
            continue
        lo_t = 0.0 if name == "lower" else np.pi
        hi_t = np.pi if name == "lower" else 2 * np.pi
        for key, arr in curves.items():
            seg, ts = arr[idx], t_grid[idx]
            dt = np.diff(ts)
            slope = 2 * np.abs(2 * np.pi * key[0] + ts[1:]) + 1
            step = np.max(np.abs(np.diff(seg, axis=0)), axis=1)
            for i in np.flatnonzero(~(step < slope_factor * dt * slope)):
                jumps.append((key, int(idx[i + 1])))
            lo = seg[0] + (lo_t - ts[0]) * (seg[1] - seg[0]) / (ts[1] - ts[0])
            hi = seg[-1] + (hi_t - ts[-1]) * (seg[-1] - seg[-2]) / (ts[-1] - ts[-2])
            endpoints[(key, name)] = ((lo_t, lo), (hi_t, hi))
            if len(idx) >= 3:
                spreads[(key, name)] = (np.abs(_quadratic(ts[:3], seg[:3], lo_t) - lo),
                                        np.abs(_quadratic(ts[-3:], seg[-3:], hi_t) - hi))
    return BandFamily(t_grid, curves, tuple(jumps), endpoints, family.hermitian, K, spreads)


def _quadratic(ts, vals, t):
    """Value at ``t`` of the parabola through three (t, row) samples."""
    out = np.zeros(vals.shape[1], dtype=complex)
    for a in range(3):
        w = np.prod([(t - ts[b]) / (ts[a] - ts[b]) for b in range(3) if b != a])
        out += w * vals[a]
    return out


@dataclass(frozen=True, eq=False)
class BandUnion:
    """``gap_uncertainty[i]`` bounds how far the edges of ``gaps[i]`` may be
    off because they come from extrapolated endpoints (the spread between
    linear and quadratic extrapolation).  Gaps no wider than that are not
    resolved by the grid."""

    intervals: tuple[tuple[float, float], ...] = ()
    gaps: tuple[tuple[float, float], ...] = ()
    points: np.ndarray | None = None
    gap_uncertainty: tuple[float, ...] = ()

    @property
    def resolved_gaps(self):
        return tuple(g for g, u in zip(self.gaps, self.gap_uncertainty) if g[1] - g[0] > u)


def band_intervals(family: BandFamily, with_uncertainty=False):
    """Real intervals [min, max] traced by each curve on each half-interval,
    extrapolated endpoints included.  With ``with_uncertainty`` each item is
    ``(lo, hi, lo_unc, hi_unc)``, nonzero where an extreme is extrapolated."""
    out = []
    spreads = family.spreads or {}
    for name, idx in family.halves().items():
        for key, arr in family.curves.items():
            ends = family.endpoints.get((key, name))
            spread = spreads.get((key, name))
            for s in range(arr.shape[1]):
                vals = arr[idx, s].real
                unc = np.zeros(vals.size)
                if ends is not None:
                    vals = np.concatenate([vals, [ends[0][1][s].real, ends[1][1][s].real]])
                    extra = [spread[0][s], spread[1][s]] if spread is not None else [np.inf, np.inf]
                    unc = np.concatenate([unc, extra])
                ok = np.isfinite(vals)
                vals, unc = vals[ok], unc[ok]
                if vals.size:
                    i, l = int(np.argmin(vals)), int(np.argmax(vals))
                    out.append((float(vals[i]), float(vals[l]), float(unc[i]), float(unc[l])))
    out.sort()
    return out if with_uncertainty else [(a, b) for a, b, *_ in out]


def merge_intervals(intervals, merge_tol=1e-9):
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1] + merge_tol * (1 + abs(merged[-1][1])):
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(x) for x in merged]


def band_union(family: BandFamily, window, merge_tol=1e-9) -> BandUnion:
    """Spectrum inside ``window``.

    Hermitian potentials: ``window = (lo, hi)``; returns merged covered
    intervals clipped to it, the gaps between them and the extrapolation
    uncertainty of each gap.  Otherwise ``window = (re_lo, re_hi, im_lo,
    im_hi)`` and the result is the curve point cloud inside that rectangle.
    """
    if family.hermitian:
        lo, hi = window
        merged = []   # [a, b, unc_a, unc_b]
        for a, b, ua, ub in band_intervals(family, with_uncertainty=True):
            if merged and a <= merged[-1][1] + merge_tol * (1 + abs(merged[-1][1])):
                if b > merged[-1][1]:
                    merged[-1][1], merged[-1][3] = b, ub
            else:
                merged.append([a, b, ua, ub])
        clipped = [(max(a, lo), min(b, hi), ua if a >= lo else 0.0, ub if b <= hi else 0.0)
                   for a, b, ua, ub in merged if b >= lo and a <= hi]
        gaps, unc, cursor, cursor_unc = [], [], lo, 0.0
        for a, b, ua, ub in clipped:
            if a > cursor:
                gaps.append((cursor, a))
                unc.append(cursor_unc + ua)
            if b >= cursor:
                cursor, cursor_unc = b, ub
        if cursor < hi:
            gaps.append((cursor, hi))
            unc.append(cursor_unc)
        return BandUnion(tuple((a, b) for a, b, *_ in clipped), tuple(gaps),
                         gap_uncertainty=tuple(float(u) for u in unc))

    re_lo, re_hi, im_lo, im_hi = window
    pts = np.concatenate([arr.reshape(-1) for arr in family.curves.values()])
    pts = pts[np.isfinite(pts)]
    keep = (pts.real >= re_lo) & (pts.real <= re_hi) & (pts.imag >= im_lo) & (pts.imag <= im_hi)
    return BandUnion(points=pts[keep])

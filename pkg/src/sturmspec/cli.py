"""Command-line front end.

    sturmspec spectrum   --potential Q.json --t 1.5708 --k-max 32
    sturmspec verify     --potential Q.json --t 1.5708 --k-max 32
    sturmspec regularity --m 1 2 3 4
    sturmspec riesz      --potential Q.json --t 1.5708 --k-max 32
    sturmspec bands      --potential Q.json --window 0.1 100

Tables are written as tab-separated files (floats in round-trip ``repr``
form, so reruns diff cleanly) plus ``summary.json`` into ``--out``; without
``--out`` they go to stdout.  Exit status: 0 all checks passed, 1 some
check failed, 2 bad configuration or input.  ``STURMSPEC_WORKERS`` sets the
number of threads used for independent t-points.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (decay_fit, default_rho, eigenfunction_error, fourier_relation_residual,
                          lemma2_decay, lemma3_floor, pair_eigenvalues, perturbation_residual,
                          pool_by_abs_k, predict, projection_deficit)
from .bands import band_union, default_t_grid, sweep
from .galerkin import DEFAULT_ANGLE_TOL, assemble, check_angle, default_cutoff, eigen_solve
from .matrix_structure import adjoint_structure, analyze_matrix
from .potential import DEFAULT_DROP_TOL, load_potential
from .regularity import det_M_closed, det_M_direct, is_regular, root_multiplicity
from .riesz import (bari_partial_sums, build_biorthogonal, random_unit_functions,
                    riesz_condition_estimate, simplicity_certificate)

WORKERS_ENV = "STURMSPEC_WORKERS"


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"stage {stage!r} failed: {exc}")
        self.stage = stage


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except (StageError, ConfigError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass
class RunConfig:
    potential_path: str | None = None
    t: list[float] | None = None
    k_max: int = 32
    k_min: int = 5
    cutoff: int | None = None
    rho: float | None = None
    cluster_tol: float | None = None
    angle_tol: float = DEFAULT_ANGLE_TOL
    drop_tol: float = DEFAULT_DROP_TOL
    seed: int = 0
    output_dir: str | None = None
    m_values: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    window: list[float] | None = None
    n_functions: int = 20
    k_report: list[int] | None = None

    def validate(self):
        for name in ("angle_tol", "drop_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.cluster_tol is not None and not self.cluster_tol > 0:
            raise ConfigError("cluster_tol must be positive")
        if self.k_min < 1:
            raise ConfigError("k_min must be at least 1")
        if self.k_max <= self.k_min:
            raise ConfigError("k_max must exceed k_min")
        for t in self.t or ():
            try:
                check_angle(t, self.angle_tol)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return self

    @property
    def single_t(self):
        if not self.t or len(self.t) != 1:
            raise ConfigError("this command needs exactly one --t value")
        return self.t[0]


@dataclass
class Report:
    command: str
    config: RunConfig
    tables: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    def add_table(self, name, columns, rows):
        self.tables[name] = (tuple(columns), [tuple(r) for r in rows])

    @property
    def passed(self):
        return all(v is True or (isinstance(v, str) and not v.startswith("FAIL"))
                   for v in self.verdicts.values())

    def metadata(self):
        return {
            "command": self.command,
            "config": asdict(self.config),
            "version": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }

    def render_table(self, name):
        columns, rows = self.tables[name]
        lines = ["\t".join(columns)]
        lines += ["\t".join(_fmt(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"

    def write(self, out_dir=None, stream=None):
        if out_dir is None:
            stream = stream or sys.stdout
            for name in self.tables:
                stream.write(f"# {name}\n{self.render_table(name)}\n")
            stream.write(json.dumps({"verdicts": self.verdicts}, indent=1, default=str) + "\n")
            return
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in self.tables:
            (out / f"{name}.tsv").write_text(self.render_table(name))
        summary = {"metadata": self.metadata(), "verdicts": self.verdicts}
        (out / "summary.json").write_text(json.dumps(summary, indent=1, default=str) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _load(config):
    if not config.potential_path:
        raise ConfigError("--potential is required")
    with stage("load_potential"):
        return load_potential(config.potential_path, drop_tol=config.drop_tol)


def _solve_and_pair(spec, config, t, K, structure=None):
    with stage("analyze_matrix"):
        structure = structure or analyze_matrix(spec.block(0), config.cluster_tol)
        adjoint = adjoint_structure(structure)
    rho = default_rho(spec) if config.rho is None else config.rho
    ks = range(-config.k_max, config.k_max + 1)
    with stage("galerkin"):
        pairs = eigen_solve(assemble(spec, t, K, config.angle_tol))
    with stage("pairing"):
        preds = predict(structure, t, ks, rho=rho, adjoint=adjoint)
        report = pair_eigenvalues(pairs, preds)
    return structure, adjoint, pairs, report


def _cutoff(spec, config):
    return config.cutoff if config.cutoff is not None else default_cutoff(config.k_max, spec.max_harmonic)


def cmd_spectrum(config: RunConfig) -> Report:
    spec = _load(config)
    t = config.single_t
    K = _cutoff(spec, config)
    structure, _, pairs, report = _solve_and_pair(spec, config, t, K)
    rep = Report("spectrum", config)
    rows = [(a.prediction.k, a.prediction.j, t, K, a.pair.eigenvalue.real, a.pair.eigenvalue.imag,
             a.pair.residual, a.prediction.value.real, a.prediction.value.imag, a.distance)
            for a in report.assignments]
    rep.add_table("eigenvalues", ["k", "j", "t", "K", "re", "im", "residual",
                                  "pred_re", "pred_im", "error"], rows)
    rep.add_table("unmatched", ["k", "j", "t", "K", "missing"],
                  [(p.k, p.j, t, K, n) for p, n in report.unmatched_predictions])

    constant = not any(True for _ in spec.harmonics(include_zero=False))
    errors = report.errors()
    fits = []
    for j in range(len(structure.distinct)):
        for model in ("lnk_over_k", "k_pow"):
            try:
                f = decay_fit(pool_by_abs_k(errors, j=j), model, k_min=config.k_min)
                fits.append((j, t, K, model, f.exponent, f.r2, f.n_points, f.exact))
            except ValueError as exc:
                fits.append((j, t, K, model, None, None, 0, f"undefined: {exc}"))
    rep.add_table("decay_fits", ["j", "t", "K", "model", "exponent", "r2", "n_points", "exact"], fits)

    high_missing = [(p.k, p.j) for p, _ in report.unmatched_predictions if abs(p.k) >= config.k_min]
    high_ambiguous = [key for key in report.ambiguous if abs(key[0]) >= config.k_min]
    rep.verdicts["pairing"] = True if not high_missing and not high_ambiguous else \
        f"FAIL: unmatched {high_missing}, ambiguous {high_ambiguous}"
    if constant:
        rep.verdicts["asymptotics"] = "exact (constant potential)"
    return rep


def cmd_verify(config: RunConfig) -> Report:
    spec = _load(config)
    t = config.single_t
    K = _cutoff(spec, config)
    V = spec.max_harmonic
    if V > 0 and K < 2 * config.k_max + V:
        raise ConfigError(f"cutoff K = {K} violates the cutoff rule K >= 2 k_max + V = "
                          f"{2 * config.k_max + V}")
    structure, adjoint, pairs, report = _solve_and_pair(spec, config, t, K)
    rep = Report("verify", config)

    pert, fourier, deficit, floor3 = [], [], [], []
    for a in report.assignments:
        k, j = a.prediction.key
        pair = a.pair
        for p in range(len(a.prediction.adjoint_chain)):
            val = perturbation_residual(pair, a.prediction, spec, p)
            bound = 10 * pair.residual + 1e-14 * (1 + abs(pair.eigenvalue))
            pert.append((k, j, t, K, p, val, bound, val <= bound))
        for n in range(k - V, k + V + 1):
            if n == k or abs(n) > K - V:
                continue
            for s in range(spec.m):
                try:
                    val = fourier_relation_residual(pair, spec, n, s, k=k)
                except ValueError:
                    continue
                bound = 10 * pair.residual + 1e-10
                fourier.append((k, j, t, K, n, s, val, bound, val <= bound))
        d = projection_deficit(pair, k)
        deficit.append((k, j, t, K, d, d * k * k))
        floor3.append((k, j, t, K, lemma3_floor(pair, k, adjoint)))
    rep.add_table("perturbation_identity", ["k", "j", "t", "K", "p", "value", "bound", "pass"], pert)
    rep.add_table("fourier_relation", ["k", "j", "t", "K", "n", "s", "value", "bound", "pass"], fourier)
    rep.add_table("projection_deficit", ["k", "j", "t", "K", "deficit", "deficit_k2"], deficit)
    rep.add_table("lemma3_floor", ["k", "j", "t", "K", "floor"], floor3)

    lemma2 = []
    for j, d in enumerate(structure.distinct):
        by_k = {}
        for a in report.assignments:
            if a.prediction.j == j and len(report.matched(*a.prediction.key)) == 1:
                by_k[a.prediction.k] = a.pair
        for i, ad in enumerate(adjoint.distinct):
            longest = max(c.length for c in ad.chains)
            for p in range(longest):
                tab = lemma2_decay(by_k, spec, adjoint, i, p, k_min=config.k_min)
                lemma2 += [(k, j, i, p, t, K, v) for k, v in tab.rows]
    rep.add_table("lemma2", ["k", "j", "i", "p", "t", "K", "value"], lemma2)

    rep.verdicts["perturbation_identity"] = all(r[-1] for r in pert) or "FAIL"
    rep.verdicts["fourier_relation"] = all(r[-1] for r in fourier) or "FAIL"
    return rep


def cmd_regularity(config: RunConfig) -> Report:
    ts = config.t or list(np.linspace(0, 2 * np.pi, 9)[:-1])
    rng = np.random.default_rng(config.seed)
    rep = Report("regularity", config)
    theta_rows, dev_rows, root_rows = [], [], []
    all_ok = True
    for m in config.m_values:
        if m < 1:
            raise ConfigError("m must be positive")
        worst = 0.0
        for _ in range(100):
            tt = rng.uniform(0, 2 * np.pi)
            s = rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            closed = det_M_closed(m, tt, s)
            worst = max(worst, abs(det_M_direct(m, tt, s) - closed) / (1 + abs(closed)))
        dev_rows.append((m, worst, worst <= 1e-10))
        all_ok &= worst <= 1e-10
        for t in ts:
            r = is_regular(m, t)
            theta_rows.append((m, t, r.theta_minus.real, r.theta_minus.imag, r.theta_plus.real,
                               r.theta_plus.imag, r.regular,
                               "roots distinct" if r.roots_distinct else "roots coincide"))
            if r.roots_distinct:
                for root in (np.exp(1j * t), np.exp(-1j * t)):
                    mult = root_multiplicity(m, t, root)
                    root_rows.append((m, t, root.real, root.imag, mult, mult == m))
                    all_ok &= mult == m
    rep.add_table("theta", ["m", "t", "theta_minus_re", "theta_minus_im", "theta_plus_re",
                            "theta_plus_im", "regular", "roots"], theta_rows)
    rep.add_table("closed_form_deviation", ["m", "max_rel_deviation", "pass"], dev_rows)
    rep.add_table("root_multiplicity", ["m", "t", "root_re", "root_im", "multiplicity", "pass"], root_rows)
    rep.verdicts["regularity"] = all_ok or "FAIL"
    return rep


def cmd_riesz(config: RunConfig) -> Report:
    spec = _load(config)
    t = config.single_t
    K = _cutoff(spec, config)
    structure, adjoint, pairs, report = _solve_and_pair(spec, config, t, K)
    with stage("adjoint_solve"):
        T = assemble(spec, t, K, config.angle_tol)
        star_preds = predict(adjoint, t, range(-config.k_max, config.k_max + 1),
                             rho=default_rho(spec) if config.rho is None else config.rho,
                             adjoint=structure)
        pairs_star = eigen_solve(assemble(spec.adjoint(), t, K, config.angle_tol))
        report_star = pair_eigenvalues(pairs_star, star_preds)
    with stage("riesz"):
        family = build_biorthogonal(T, pairs, pairs_star, report, report_star,
                                    k_min=config.k_min, k_family=config.k_max)
        psi_b = riesz_condition_estimate(family)
        chi_b = riesz_condition_estimate(family, which="chi")
        k_report = config.k_report or sorted({config.k_min, config.k_max // 2,
                                               3 * config.k_max // 4, config.k_max})
        fs = random_unit_functions(config.n_functions, K, spec.m, config.k_max // 2, config.seed)
        tables = [bari_partial_sums(f, family, k_report) for f in fs]
    rows = []
    ok = True
    for i, tab in enumerate(tables):
        for kk, a, b in zip(tab.K_report, tab.psi_sums, tab.chi_sums):
            rows.append((i, t, K, kk, a, b))
        mono = all(y >= x - 1e-12 for s in (tab.psi_sums, tab.chi_sums) for x, y in zip(s, s[1:]))
        bounded = max(tab.psi_sums) <= 1.01 * psi_b.upper and max(tab.chi_sums) <= 1.01 * chi_b.upper
        ok &= mono and bounded
    rep = Report("riesz", config)
    rep.add_table("bari_sums", ["f", "t", "K", "K_prime", "S_psi", "S_chi"], rows)
    rep.add_table("frame_bounds", ["family", "t", "K", "lower", "upper", "members"],
                  [("psi", t, K, psi_b.lower, psi_b.upper, psi_b.n_members),
                   ("chi", t, K, chi_b.lower, chi_b.upper, chi_b.n_members)])
    cert = simplicity_certificate(report, pairs, k_min=config.k_min)
    rep.add_table("simplicity", ["k", "j", "t", "K", "status", "value"],
                  [(k, j, t, K, "certified", s) for k, j, s in cert.certified]
                  + [(k, j, t, K, why, v) for k, j, why, v in cert.violations])
    rep.verdicts["bari"] = bool(ok) or "FAIL"
    rep.verdicts["simplicity"] = cert.ok or "FAIL"
    return rep


def cmd_bands(config: RunConfig) -> Report:
    spec = _load(config)
    t_grid = np.array(config.t) if config.t else default_t_grid()
    with stage("bands"):
        fam = sweep(spec, t_grid, range(-config.k_max, config.k_max + 1), K=config.cutoff,
                    rho=config.rho, angle_tol=config.angle_tol, workers=_workers())
    rows = []
    for (k, j), arr in fam.curves.items():
        for i, t in enumerate(fam.t_grid):
            for s, lam in enumerate(arr[i]):
                rows.append((t, lam.real, lam.imag, k, j, s, fam.K, False))
    for ((k, j), _), ends in fam.endpoints.items():
        for t_end, vals in ends:
            for s, lam in enumerate(vals):
                rows.append((t_end, lam.real, lam.imag, k, j, s, fam.K, True))
    rep = Report("bands", config)
    rep.add_table("curves", ["t", "re", "im", "k", "j", "s", "K", "extrapolated"], rows)
    rep.add_table("jumps", ["k", "j", "t_index"], [(k, j, i) for (k, j), i in fam.jumps])
    if config.window:
        union = band_union(fam, tuple(config.window))
        if fam.hermitian:
            rep.add_table("intervals", ["lo", "hi"], union.intervals)
            rep.add_table("gaps", ["lo", "hi", "uncertainty", "resolved"],
                          [(a, b, u, b - a > u) for (a, b), u in zip(union.gaps, union.gap_uncertainty)])
            n = len(union.resolved_gaps)
            rep.verdicts["gaps"] = "no gaps" if not n else f"{n} resolved gap(s)"
        else:
            rep.add_table("points", ["re", "im"], [(z.real, z.imag) for z in union.points])
    rep.verdicts["continuity"] = True if not fam.jumps else f"FAIL: {len(fam.jumps)} jump(s)"
    return rep


COMMANDS = {"spectrum": cmd_spectrum, "verify": cmd_verify, "regularity": cmd_regularity,
            "riesz": cmd_riesz, "bands": cmd_bands}


def build_parser():
    parser = argparse.ArgumentParser(prog="sturmspec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--potential", dest="potential_path")
        p.add_argument("--t", type=float, nargs="+")
        p.add_argument("--k-max", type=int, default=32)
        p.add_argument("--k-min", type=int, default=5)
        p.add_argument("--cutoff", type=int)
        p.add_argument("--rho", type=float)
        p.add_argument("--cluster-tol", type=float)
        p.add_argument("--angle-tol", type=float, default=DEFAULT_ANGLE_TOL)
        p.add_argument("--drop-tol", type=float, default=DEFAULT_DROP_TOL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", dest="output_dir")
        if name == "regularity":
            p.add_argument("--m", dest="m_values", type=int, nargs="+", default=[1, 2, 3, 4])
        if name == "bands":
            p.add_argument("--window", type=float, nargs="+")
        if name == "riesz":
            p.add_argument("--n-functions", type=int, default=20)
            p.add_argument("--k-report", type=int, nargs="+")
    return parser


def run(argv=None, stream=None):
    """Parse, execute and write; returns the exit status."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    try:
        config = RunConfig(**args).validate()
        report = COMMANDS[command](config)
    except (ConfigError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.write(config.output_dir, stream=stream)
    return 0 if report.passed else 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

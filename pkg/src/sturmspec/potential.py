"""Matrix potentials Q(x) stored as finite trigonometric polynomials.

Convention: the block for harmonic ``nu`` is

    Q_hat(nu) = int_0^1 Q(x) exp(-2 pi i nu x) dx,

so that ``Q(x) = sum_nu Q_hat(nu) exp(2 pi i nu x)``.  With this choice the
Galerkin coupling between the modes ``exp(i(2 pi n + t)x)`` and
``exp(i(2 pi p + t)x)`` is exactly ``Q_hat(n - p)``.

Potential files are JSON documents::

    {"m": 2,
     "entries": [[[{"nu": 0, "re": 1.0, "im": 0.0}], []],
                 [[], [{"nu": 1, "re": 0.5, "im": 0.0}]]]}

``entries[s][q]`` lists the nonzero harmonics of the scalar entry b_{s,q}(x);
an empty list is the zero function.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from os import PathLike

import numpy as np

DEFAULT_DROP_TOL = 1e-14


class PotentialError(ValueError):
    """Base class for malformed potential input."""


class PotentialFormatError(PotentialError):
    """The document does not parse or does not follow the schema."""


class PotentialDimensionError(PotentialError):
    """The entry grid is not m x m."""


class HarmonicIndexError(PotentialError):
    """A harmonic index is not an integer."""


class InsufficientGridError(PotentialError):
    """Too few samples to resolve the requested harmonics."""


@dataclass(frozen=True)
class TrigEntry:
    """One scalar entry as a tuple of ``(nu, coeff)`` pairs sorted by nu."""

    harmonics: tuple[tuple[int, complex], ...]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for nu, c in self.harmonics:
            out += c * np.exp(2j * np.pi * nu * x)
        return out


@dataclass(frozen=True)
class FourierBlock:
    nu: int
    block: np.ndarray


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """An m x m trigonometric-polynomial potential.

    ``blocks[nu + V]`` holds ``Q_hat(nu)`` for ``-V <= nu <= V``.  Build
    instances with :meth:`from_blocks` (or the loaders below) rather than
    directly, so that the drop tolerance and the minimal ``V`` are applied.
    """

    m: int
    max_harmonic: int
    blocks: np.ndarray

    def __post_init__(self):
        if self.m < 1:
            raise PotentialDimensionError(f"m must be positive, got {self.m}")
        expected = (2 * self.max_harmonic + 1, self.m, self.m)
        if self.blocks.shape != expected:
            raise PotentialDimensionError(
                f"blocks have shape {self.blocks.shape}, expected {expected}")
        self.blocks.setflags(write=False)

    @classmethod
    def from_blocks(cls, blocks, m=None, drop_tol=DEFAULT_DROP_TOL):
        """Build from a mapping ``nu -> m x m array``.

        Entries with modulus at most ``drop_tol`` are set to zero and the
        harmonic range is trimmed to the largest surviving ``|nu|``.
        """
        cleaned = {}
        for nu, b in dict(blocks).items():
            if not _is_integer(nu):
                raise HarmonicIndexError(f"harmonic index {nu!r} is not an integer")
            b = np.atleast_2d(np.asarray(b, dtype=complex)).copy()
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise PotentialDimensionError(f"block for nu={nu} has shape {b.shape}")
            if m is None:
                m = b.shape[0]
            if b.shape != (m, m):
                raise PotentialDimensionError(
                    f"block for nu={nu} has shape {b.shape}, expected ({m}, {m})")
            b[np.abs(b) <= drop_tol] = 0.0
            nu = int(nu)
            cleaned[nu] = cleaned.get(nu, 0) + b
        if m is None:
            raise PotentialDimensionError("cannot infer m from an empty block mapping")
        support = [nu for nu, b in cleaned.items() if np.any(b != 0)]
        V = max((abs(nu) for nu in support), default=0)
        arr = np.zeros((2 * V + 1, m, m), dtype=complex)
        for nu in support:
            arr[nu + V] = cleaned[nu]
        return cls(m=m, max_harmonic=V, blocks=arr)

    @classmethod
    def constant(cls, C):
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        return cls.from_blocks({0: C})

    @classmethod
    def zero(cls, m):
        return cls.from_blocks({0: np.zeros((m, m))}, m=m)

    def block(self, nu):
        """``Q_hat(nu)`` as an array; zero outside the stored support."""
        if abs(nu) > self.max_harmonic:
            return np.zeros((self.m, self.m), dtype=complex)
        return self.blocks[nu + self.max_harmonic]

    def harmonics(self, include_zero=True):
        """Iterate over ``(nu, block)`` for the nonzero blocks."""
        V = self.max_harmonic
        for i in range(2 * V + 1):
            nu = i - V
            if (nu != 0 or include_zero) and np.any(self.blocks[i] != 0):
                yield nu, self.blocks[i]

    @property
    def entries(self):
        """The m x m grid of :class:`TrigEntry`."""
        grid = []
        for s in range(self.m):
            row = []
            for q in range(self.m):
                hs = tuple((nu, complex(b[s, q])) for nu, b in self.harmonics()
                           if b[s, q] != 0)
                row.append(TrigEntry(hs))
            grid.append(row)
        return grid

    def adjoint(self):
        """The potential Q*(x), i.e. the pointwise conjugate transpose.

        Its blocks are ``Q_hat(-nu)^H``.
        """
        return PotentialSpec.from_blocks(
            {-nu: b.conj().T for nu, b in self.harmonics()}, m=self.m)

    def is_hermitian(self, tol=0.0):
        """True when Q(x) is a Hermitian matrix for every x."""
        V = self.max_harmonic
        for nu in range(-V, V + 1):
            if np.max(np.abs(self.block(nu) - self.block(-nu).conj().T), initial=0) > tol:
                return False
        return True

    def perturbation_norm(self):
        """Fourier l1 norm of Q - C: the sum of spectral norms of Q_hat(nu), nu != 0."""
        return float(sum(np.linalg.norm(b, 2) for _, b in self.harmonics(include_zero=False)))

    def to_dict(self):
        entries = [[[{"nu": nu, "re": c.real, "im": c.imag} for nu, c in e.harmonics]
                    for e in row] for row in self.entries]
        return {"m": self.m, "entries": entries}


def _is_integer(x):
    return isinstance(x, numbers.Integral) and not isinstance(x, bool)


def parse_potential(doc, drop_tol=DEFAULT_DROP_TOL):
    """Validate a decoded potential document and build the PotentialSpec."""
    if not isinstance(doc, dict) or "m" not in doc or "entries" not in doc:
        raise PotentialFormatError("document must be an object with 'm' and 'entries'")
    m = doc["m"]
    if not _is_integer(m) or m < 1:
        raise PotentialFormatError(f"'m' must be a positive integer, got {m!r}")
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != m:
        raise PotentialDimensionError(f"'entries' must be a list of {m} rows")
    blocks = {}
    for s, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != m:
            raise PotentialDimensionError(f"row {s} of 'entries' must have {m} entries")
        for q, entry in enumerate(row):
            if entry is None:
                continue
            if not isinstance(entry, list):
                raise PotentialFormatError(f"entry ({s}, {q}) must be a list of records")
            seen = set()
            for rec in entry:
                if not isinstance(rec, dict) or "nu" not in rec:
                    raise PotentialFormatError(f"entry ({s}, {q}) has a record without 'nu'")
                nu = rec["nu"]
                if not _is_integer(nu):
                    raise HarmonicIndexError(
                        f"entry ({s}, {q}): harmonic index {nu!r} is not an integer")
                if nu in seen:
                    raise PotentialFormatError(f"entry ({s}, {q}): duplicate harmonic {nu}")
                seen.add(nu)
                re, im = rec.get("re", 0.0), rec.get("im", 0.0)
                if not all(isinstance(v, numbers.Real) and not isinstance(v, bool)
                           for v in (re, im)):
                    raise PotentialFormatError(
                        f"entry ({s}, {q}), nu={nu}: 're'/'im' must be numbers")
                blocks.setdefault(nu, np.zeros((m, m), dtype=complex))[s, q] = complex(re, im)
    if not blocks:
        blocks[0] = np.zeros((m, m))
    return PotentialSpec.from_blocks(blocks, m=m, drop_tol=drop_tol)


def load_potential(path: str | PathLike, drop_tol=DEFAULT_DROP_TOL) -> PotentialSpec:
    """Read a potential file (see the module docstring for the schema)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PotentialFormatError(f"{path}: {exc}") from exc
    return parse_potential(doc, drop_tol=drop_tol)


def save_potential(spec: PotentialSpec, path):
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=1)


def fourier_block(spec: PotentialSpec, nu: int) -> FourierBlock:
    return FourierBlock(nu=nu, block=spec.block(nu).copy())


def mean_matrix(spec: PotentialSpec) -> np.ndarray:
    """C = int_0^1 Q(x) dx."""
    return spec.block(0).copy()


def sample_to_spec(samples, V, drop_tol=DEFAULT_DROP_TOL) -> PotentialSpec:
    """Fit a potential to samples ``Q(g/G)``, ``g = 0..G-1``.

    Takes the discrete Fourier transform entrywise and keeps ``|nu| <= V``.
    The result is exact for trigonometric polynomials of degree at most V.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 1:
        samples = samples[:, None, None]
    G = samples.shape[0]
    if G < 2 * V + 1:
        raise InsufficientGridError(f"{G} samples cannot resolve harmonics up to {V}")
    coeffs = np.fft.fft(samples, axis=0) / G
    return PotentialSpec.from_blocks({nu: coeffs[nu % G] for nu in range(-V, V + 1)},
                                     m=samples.shape[1], drop_tol=drop_tol)


def evaluate_potential(spec: PotentialSpec, x) -> np.ndarray:
    """Q(x); for array ``x`` the result has shape ``x.shape + (m, m)``."""
    x = np.asarray(x, dtype=float)
    V = spec.max_harmonic
    nus = np.arange(-V, V + 1)
    phases = np.exp(2j * np.pi * np.multiply.outer(x, nus))
    return np.tensordot(phases, spec.blocks, axes=(-1, 0))


def block_diag(*specs: PotentialSpec) -> PotentialSpec:
    """Block-diagonal potential diag(Q_1, Q_2, ...)."""
    from scipy.linalg import block_diag as _bd

    V = max(s.max_harmonic for s in specs)
    return PotentialSpec.from_blocks(
        {nu: _bd(*(s.block(nu) for s in specs)) for nu in range(-V, V + 1)},
        m=sum(s.m for s in specs))

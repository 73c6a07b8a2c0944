"""Characteristic determinant of the quasiperiodic boundary conditions.

For the m x m system the determinant is that of the 2m x 2m matrix

    M(m) = [[ (e^{it} - s) i I,  (e^{it} - 1/s)(-i) I ],
            [ (e^{it} - s) I,    (e^{it} - 1/s) I     ]],

a Laurent polynomial in s with closed form

    det M(m) = (-2i e^{it} s + 2i + 2i e^{2it} - 2i e^{it} / s)^m.

Its zeros are s = e^{it} and s = e^{-it}, each of multiplicity m; they are
distinct exactly when t is not 0 or pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _check_s(s):
    if s == 0:
        raise ZeroDivisionError("s must be nonzero")


def boundary_matrix(m, t, s):
    _check_s(s)
    e = np.exp(1j * t)
    I = np.eye(m)
    a, b = e - s, e - 1 / s
    return np.block([[a * 1j * I, -1j * b * I], [a * I, b * I]])


def det_M_direct(m, t, s) -> complex:
    """Determinant of the explicitly assembled 2m x 2m matrix."""
    return complex(np.linalg.det(boundary_matrix(m, t, s)))


def det_M_closed(m, t, s) -> complex:
    _check_s(s)
    e = np.exp(1j * t)
    base = -2j * e * s + 2j + 2j * e ** 2 - 2j * e / s
    return complex(base ** m)


def theta_coefficients(m, t):
    """(theta_{-m}, theta_m) as stated with the regularity proof:
    theta_m = (-2i e^{it})^m and theta_{-m} = (-2i e^{it})^{-m}.

    theta_m is the leading Laurent coefficient of det M(m).  The trailing
    coefficient is in fact (-2i e^{it})^m as well (see
    :func:`laurent_coefficients`); both are nonzero for every t, which is
    all that regularity requires.
    """
    base = -2j * np.exp(1j * t)
    return complex(base ** (-m)), complex(base ** m)


def laurent_coefficients(m, t, n_samples=None):
    """Coefficients of s^{-m}, ..., s^m of det M(m), read off the directly
    assembled determinant sampled on the unit circle."""
    L = n_samples or 4 * m + 4
    s = np.exp(2j * np.pi * np.arange(L) / L)
    vals = np.array([det_M_direct(m, t, x) for x in s])
    fft = np.fft.fft(vals) / L
    return np.array([fft[p % L] for p in range(-m, m + 1)])


def expanded_polynomial(m, t):
    """Coefficients (ascending powers) of s^m det M(m) from the closed form."""
    e = np.exp(1j * t)
    quad = np.array([-2j * e, 2j + 2j * e ** 2, -2j * e])
    return np.polynomial.polynomial.polypow(quad, m)


def taylor_coefficients(f, s0, order, h=1e-3, n_points=None):
    """Scaled Taylor coefficients a_j h^j, j = 0..order, of ``f`` at ``s0``
    from samples on the circle |s - s0| = h (a discrete Cauchy formula)."""
    L = n_points or 2 * order + 8
    w = np.exp(2j * np.pi * np.arange(L) / L)
    vals = np.array([f(s0 + h * x) for x in w])
    coeffs = np.fft.fft(vals) / L
    return coeffs[: order + 1], float(np.max(np.abs(vals)))


def root_multiplicity(m, t, root, h=1e-3, rel_threshold=1e-4, max_order=None):
    """Numerical multiplicity of ``root`` as a zero of det M(m).

    The multiplicity is the first j whose scaled Taylor coefficient exceeds
    ``rel_threshold`` times the sample magnitude; all lower ones must be
    below it.
    """
    order = max_order or m + 2
    coeffs, scale = taylor_coefficients(lambda s: det_M_closed(m, t, s), root, order, h)
    big = np.abs(coeffs) > rel_threshold * scale
    return int(np.argmax(big)) if big.any() else None


@dataclass(frozen=True)
class RegularityReport:
    m: int
    t: float
    theta_minus: complex
    theta_plus: complex
    laurent_trailing: complex
    laurent_leading: complex
    regular: bool
    roots_distinct: bool


def is_regular(m, t, tol=1e-12) -> RegularityReport:
    """Regularity holds when the extreme Laurent coefficients are nonzero.

    The report also records whether the roots e^{it}, e^{-it} are distinct.
    """
    theta_minus, theta_plus = theta_coefficients(m, t)
    coeffs = laurent_coefficients(m, t)
    trailing, leading = complex(coeffs[0]), complex(coeffs[-1])
    regular = abs(trailing) > tol and abs(leading) > tol
    distinct = abs(np.exp(1j * t) - np.exp(-1j * t)) > 1e-12
    return RegularityReport(m, float(t), theta_minus, theta_plus, trailing, leading,
                            regular, bool(distinct))

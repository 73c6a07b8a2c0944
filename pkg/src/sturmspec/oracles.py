"""Independent second-order finite-difference discretization of
-y'' + Q(x) y on [0, 1] with y(1) = e^{it} y(0), y'(1) = e^{it} y'(0).

Nodes x_g = g / N, g = 0..N-1; the boundary condition closes the stencil
through y_N = e^{it} y_0 and y_{-1} = e^{-it} y_{N-1}.  The eigenvalue error
is O(N^-2), and one Richardson step with N and N/2 removes that term.
Used only to cross-check the Galerkin solver.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


def fd_matrix(q, t, N):
    """Sparse FD operator.  ``q(x)`` returns an (m, m) matrix per point
    (shape ``x.shape + (m, m)``) or a scalar array for m = 1."""
    x = np.arange(N) / N
    Qx = np.asarray(q(x), dtype=complex)
    if Qx.ndim == 1:
        Qx = Qx[:, None, None]
    m = Qx.shape[-1]
    h2 = N * N
    e = np.exp(1j * t)
    lap = sp.diags([2.0 * np.ones(N), -np.ones(N - 1), -np.ones(N - 1)], [0, 1, -1],
                   shape=(N, N), dtype=complex, format="lil")
    lap[N - 1, 0] = -e
    lap[0, N - 1] = -np.conj(e)
    A = sp.kron(lap.tocsr() * h2, sp.eye(m)) + sp.block_diag(list(Qx))
    return A.tocsc()


def fd_eigenvalues(q, t, N, target, count=6):
    """The ``count`` FD eigenvalues nearest ``target`` (shift-invert)."""
    A = fd_matrix(q, t, N)
    count = min(count, A.shape[0] - 2)
    w = spla.eigs(A, k=count, sigma=target, which="LM", return_eigenvectors=False)
    return w[np.argsort(np.abs(w - target))]


def richardson_eigenvalue(q, t, N, target):
    """Eigenvalue nearest ``target``, extrapolated from grids N/2 and N."""
    fine = fd_eigenvalues(q, t, N, target)[0]
    coarse = fd_eigenvalues(q, t, N // 2, fine)[0]
    return (4 * fine - coarse) / 3


def richardson_spectrum(q, t, N, target, count=6):
    """Several extrapolated eigenvalues around ``target``, sorted by real part."""
    fine = fd_eigenvalues(q, t, N, target, count)
    out = []
    for lam in fine:
        coarse = fd_eigenvalues(q, t, N // 2, lam, count=2)[0]
        out.append((4 * lam - coarse) / 3)
    out = np.array(out)
    return out[np.argsort(out.real)]

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_spec
from sturmspec.asymptotics import pair_eigenvalues, predict
from sturmspec.data import load_example
from sturmspec.galerkin import (CutoffError, DegenerateAngleError, apply_operator, assemble,
                                check_angle, convergence_sweep, default_cutoff, eigen_solve,
                                eigenvalues, evaluate_eigenfunction, levels, residual, EigenPair)
from sturmspec.matrix_structure import analyze_matrix
from sturmspec.oracles import fd_matrix, richardson_eigenvalue
from sturmspec.potential import PotentialSpec, block_diag


def lev(t, n):
    return (2 * np.pi * n + t) ** 2


def test_assemble_free():
    T = assemble(PotentialSpec.zero(2), 1.0, 1)
    expected = np.kron(np.diag([lev(1, -1), 1.0, lev(1, 1)]), np.eye(2))
    assert np.array_equal(T.matrix, expected)
    assert T.dim == 6 and T.m == 2


def test_assemble_constant(rng):
    C = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    T = assemble(PotentialSpec.constant(C), 0.4, 3)
    for n in range(-3, 4):
        i = 2 * (n + 3)
        assert np.allclose(T.matrix[i:i + 2, i:i + 2], lev(0.4, n) * np.eye(2) + C)
    off = T.matrix.copy()
    for i in range(0, 14, 2):
        off[i:i + 2, i:i + 2] = 0
    assert not np.any(off)


def test_assemble_cosine():
    T = assemble(load_example("hill_cos"), 1.0, 1)
    expected = np.diag([lev(1, -1), 1.0, lev(1, 1)]) + np.eye(3, k=1) + np.eye(3, k=-1)
    assert np.allclose(T.matrix, expected)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), V=st.integers(1, 3), K=st.integers(4, 8))
def test_bandwidth(seed, V, K):
    spec = random_spec(np.random.default_rng(seed), m=2, V=V)
    A = assemble(spec, 0.9, K).matrix
    for n in range(-K, K + 1):
        for p in range(-K, K + 1):
            blk = A[2 * (n + K):2 * (n + K) + 2, 2 * (p + K):2 * (p + K) + 2]
            if abs(n - p) > V:
                assert not np.any(blk)
            elif n != p:
                assert np.array_equal(blk, spec.block(n - p))


def test_apply_operator_matches_matrix(rng):
    spec = random_spec(rng, m=2, V=2)
    T = assemble(spec, 0.7, 6)
    c = rng.standard_normal((13, 2)) + 1j * rng.standard_normal((13, 2))
    full = apply_operator(spec, 0.7, c, 6)
    assert np.allclose(full.reshape(-1), T.matrix @ c.reshape(-1))


@pytest.mark.parametrize("t", [0.0, np.pi, 2 * np.pi, 1e-7, np.pi + 1e-7, -1.0])
def test_degenerate_angles(t):
    with pytest.raises(DegenerateAngleError):
        check_angle(t)
    with pytest.raises(DegenerateAngleError):
        assemble(PotentialSpec.zero(1), t, 4)


def test_cutoff_guard():
    with pytest.raises(CutoffError):
        assemble(load_example("hill_cos"), 1.0, -1)
    assert default_cutoff(10, 2) == 36


def test_free_spectrum_twice():
    w = eigenvalues(assemble(PotentialSpec.zero(2), 1.0, 2))
    expected = np.sort(np.repeat([lev(1, n) for n in range(-2, 3)], 2))
    assert np.allclose(w, expected)


def test_decoupled_constant():
    w = eigenvalues(assemble(PotentialSpec.constant(np.diag([1.0, 3.0])), 1.0, 2))
    expected = np.sort([lev(1, n) + mu for n in range(-2, 3) for mu in (1, 3)])
    assert np.allclose(w, expected)


def test_ordering_lexicographic(rng):
    w = eigenvalues(assemble(random_spec(rng, m=2, V=1), 1.3, 6))
    keys = list(zip(w.real, w.imag))
    assert keys == sorted(keys)


def test_fd_oracle_agreement():
    spec = load_example("hill_cos")
    w = eigenvalues(assemble(spec, np.pi / 2, 24))
    lam = w[np.argmin(np.abs(w - (np.pi / 2) ** 2))]
    fd = richardson_eigenvalue(lambda x: 2 * np.cos(2 * np.pi * x), np.pi / 2, 4096, lam)
    assert abs(lam - fd) <= 1e-6


def test_fd_matrix_free_levels():
    # the FD Laplacian with Bloch closure has eigenvalues (2N sin((2 pi n + t)/(2N)))^2
    N, t = 64, 0.8
    w = np.sort(np.linalg.eigvals(fd_matrix(lambda x: np.zeros_like(x), t, N).toarray()).real)
    n = np.arange(N)
    exact = np.sort((2 * N * np.sin((2 * np.pi * n + t) / (2 * N))) ** 2)
    assert np.allclose(w, exact)


def test_pairs_normalized_and_phase(rng):
    spec = random_spec(rng, m=2, V=1)
    for p in eigen_solve(assemble(spec, 1.1, 8)):
        assert abs(p.norm() - 1) < 1e-12
        blocks = np.linalg.norm(p.coefficients, axis=1)
        b = p.coefficients[np.argmax(blocks)]
        first = b[np.flatnonzero(np.abs(b) > 1e-8 * blocks.max())[0]]
        assert abs(first.imag) < 1e-12 and first.real > 0


def test_residual_constant_and_free(rng):
    C = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    for p in eigen_solve(assemble(PotentialSpec.constant(C), 1.0, 6)):
        assert p.residual <= 1e-12 * (1 + abs(p.eigenvalue))
    for p in eigen_solve(assemble(PotentialSpec.zero(2), 1.0, 6)):
        assert p.residual == 0.0


def test_residual_padding_beyond_bandwidth(rng):
    spec = random_spec(rng, m=2, V=2)
    pairs = eigen_solve(assemble(spec, 1.0, 10))
    for p in pairs[::5]:
        a, b = residual(spec, p, p.K + 2), residual(spec, p, p.K + 4)
        assert a == pytest.approx(p.residual, abs=1e-14 * (1 + abs(p.eigenvalue)))
        assert abs(a - b) <= 1e-14 * (1 + abs(p.eigenvalue))
    with pytest.raises(CutoffError):
        residual(spec, pairs[0], pairs[0].K + 1)


def test_probe_residuals_small():
    spec = load_example("nonhermitian_m2")
    k_max = 10
    K = default_cutoff(k_max, 1)
    structure = analyze_matrix(spec.block(0))
    pairs = eigen_solve(assemble(spec, 1.0, K))
    report = pair_eigenvalues(pairs, predict(structure, 1.0, range(-k_max, k_max + 1), rho=10))
    assert max(a.pair.residual for a in report.assignments) <= 1e-6


def test_constant_exactness_all_modes(rng):
    C = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    mu = np.linalg.eigvals(C)
    w = eigenvalues(assemble(PotentialSpec.constant(C), 2.0, 10))
    expected = np.array([lev(2.0, n) + x for n in range(-10, 11) for x in mu])
    assert max(np.min(np.abs(expected - z)) for z in w) <= 1e-8


def test_adjoint_consistency(rng):
    spec = random_spec(rng, m=2, V=2)
    w = eigenvalues(assemble(spec, 0.6, 10))
    ws = eigenvalues(assemble(spec.adjoint(), 0.6, 10))
    assert np.max(np.min(np.abs(np.conj(w)[:, None] - ws[None, :]), axis=1)) <= 1e-8


def test_diagonal_decoupling(rng):
    q1, q2 = random_spec(rng, m=1, V=2), random_spec(rng, m=2, V=1)
    both = eigenvalues(assemble(block_diag(q1, q2), 0.9, 8))
    parts = np.concatenate([eigenvalues(assemble(q, 0.9, 8)) for q in (q1, q2)])
    assert np.max(np.min(np.abs(both[:, None] - parts[None, :]), axis=1)) <= 1e-9
    assert len(both) == len(parts)


def test_self_adjoint_reality():
    spec = load_example("hermitian_m2")
    w = eigenvalues(assemble(spec, 2.2, 12))
    assert np.all(np.abs(w.imag) <= 1e-8 * (1 + np.abs(w)))


def test_convergence_sweep_examples():
    C = PotentialSpec.constant(np.diag([1.0, 3.0]))
    tab = convergence_sweep(C, 1.0, [8, 12, 16], {(2, 0), (2, 1)})
    assert all(r.difference in (None, 0.0) or r.difference < 1e-9 for r in tab.rows)
    assert not tab.non_cauchy and not tab.failures

    hill = load_example("hill_cos")
    tab = convergence_sweep(hill, 1.0, [16, 32], {(3, 0)})
    assert tab.for_target(3, 0)[-1].difference < 1e-10

    tab = convergence_sweep(hill, 1.0, [8], {(3, 0)})
    assert all(r.difference is None for r in tab.rows)

    with pytest.raises(ValueError):
        convergence_sweep(hill, 1.0, [16, 8], {(3, 0)})


def test_evaluate_eigenfunction():
    t, K, m = 0.9, 3, 2
    c = np.zeros((2 * K + 1, m), dtype=complex)
    c[K, 0] = 1
    pure = EigenPair(t ** 2, c, t, 0.0)
    x = np.linspace(0, 1, 5)
    vals = evaluate_eigenfunction(pure, x)
    assert np.allclose(vals[:, 0], np.exp(1j * t * x)) and not np.any(vals[:, 1])
    assert not np.any(evaluate_eigenfunction(EigenPair(0, np.zeros_like(c), t, 0.0), x))


def test_eigenfunction_boundary_condition(rng):
    spec = random_spec(rng, m=2, V=1)
    t = 2.1
    for p in eigen_solve(assemble(spec, t, 6))[:4]:
        v0, v1 = evaluate_eigenfunction(p, 0.0), evaluate_eigenfunction(p, 1.0)
        assert np.allclose(v1, np.exp(1j * t) * v0, atol=1e-10)


def test_levels():
    assert np.allclose(levels(1.0, 1), [lev(1, -1), 1, lev(1, 1)])


def test_dimension_budget():
    with pytest.raises(CutoffError):
        eigen_solve(assemble(PotentialSpec.zero(2), 1.0, 20), max_dim=40)

import numpy as np
import pytest

from sturmspec.asymptotics import default_rho, pair_eigenvalues, predict
from sturmspec.data import load_example
from sturmspec.galerkin import assemble, eigen_solve
from sturmspec.matrix_structure import adjoint_structure, analyze_matrix
from sturmspec.potential import PotentialSpec
from sturmspec.riesz import (bari_partial_sums, build_biorthogonal, random_unit_functions,
                             riesz_condition_estimate, simplicity_certificate)


def family_for(spec, t=np.pi / 2, K=40, k_max=16, k_min=5, rho=None):
    structure = analyze_matrix(spec.block(0))
    adjoint = adjoint_structure(structure)
    rho = rho or default_rho(spec) or 1.0
    ks = range(-k_max, k_max + 1)
    T = assemble(spec, t, K)
    pairs = eigen_solve(T)
    report = pair_eigenvalues(pairs, predict(structure, t, ks, rho=rho, adjoint=adjoint))
    pairs_s = eigen_solve(assemble(spec.adjoint(), t, K))
    report_s = pair_eigenvalues(pairs_s, predict(adjoint, t, ks, rho=rho, adjoint=structure))
    fam = build_biorthogonal(T, pairs, pairs_s, report, report_s, k_min=k_min, k_family=k_max)
    return fam, structure, adjoint, pairs, report


@pytest.fixture(scope="module")
def trig_family():
    return family_for(load_example("nonhermitian_m2"), K=80, k_max=32)


def gram_bounds(vectors):
    V = np.column_stack(vectors)
    ev = np.linalg.eigvalsh(V.conj().T @ V)
    return ev[0], ev[-1]


def test_free_family_orthonormal():
    fam, *_ = family_for(PotentialSpec.zero(1), k_max=10)
    b = riesz_condition_estimate(fam)
    assert b.lower == pytest.approx(1, abs=1e-12) and b.upper == pytest.approx(1, abs=1e-12)
    assert b.n_members == 21


def test_free_bari_single_mode():
    fam, *_ = family_for(PotentialSpec.zero(1), K=40, k_max=16)
    f = np.zeros((2 * 40 + 1, 1), dtype=complex)
    f[40, 0] = 1
    tab = bari_partial_sums(f, fam, (0, 1, 5, 16))
    assert tab.psi_sums == pytest.approx((1, 1, 1, 1)) and tab.chi_sums == pytest.approx((1, 1, 1, 1))


def test_hermitian_family_is_self_dual():
    fam, *_ = family_for(load_example("hermitian_m2"))
    for x in fam.high:
        assert abs(abs(np.vdot(x.psi_star, x.psi)) - 1) < 1e-8
        assert np.allclose(x.chi, x.psi * np.vdot(x.psi, x.chi), atol=1e-8)
    b = riesz_condition_estimate(fam)
    assert abs(b.lower - 1) <= 1e-8 and abs(b.upper - 1) <= 1e-8


def test_hermitian_constant_parseval():
    spec = PotentialSpec.constant([[1, 0.5], [0.5, -1]])
    fam, *_ = family_for(spec, K=40, k_max=16, rho=1.0)
    f = random_unit_functions(1, 40, 2, 8, seed=3)[0]
    tab = bari_partial_sums(f, fam, (2, 4, 8, 12, 16))
    assert all(b >= a - 1e-14 for a, b in zip(tab.psi_sums, tab.psi_sums[1:]))
    assert tab.psi_sums[-1] == pytest.approx(1, abs=1e-10)


def test_constant_pairing_and_gram(rng):
    C = np.array([[1j, 1], [0, -1j]])
    fam, structure, adjoint, *_ = family_for(PotentialSpec.constant(C), rho=1.0)
    for x in fam.high:
        v = structure.distinct[x.j].chains[0].eigenvector
        w = adjoint.distinct[x.j].chains[0].eigenvector
        assert abs(x.pairing) == pytest.approx(abs(np.vdot(w, v)) / np.linalg.norm(w), rel=1e-10)
    lo, hi = gram_bounds([d.chains[0].eigenvector for d in structure.distinct])
    b = riesz_condition_estimate(fam)
    assert b.lower == pytest.approx(lo, rel=1e-8) and b.upper == pytest.approx(hi, rel=1e-8)


def test_trig_pairings_bounded_below(trig_family):
    fam, structure, adjoint, *_ = trig_family
    for x in fam.high:
        v = structure.distinct[x.j].chains[0].eigenvector
        w = adjoint.distinct[x.j].chains[0].eigenvector
        ref = abs(np.vdot(w, v)) / np.linalg.norm(w)
        assert abs(x.pairing) >= 0.5 * ref


def test_pairing_convergence(trig_family):
    fam, structure, adjoint, *_ = trig_family
    for j in (0, 1):
        v = structure.distinct[j].chains[0].eigenvector
        w = adjoint.distinct[j].chains[0].eigenvector
        ref = abs(np.vdot(w, v)) / np.linalg.norm(w)
        dev = {abs(x.k): abs(abs(x.pairing) - ref) for x in fam.high if x.j == j}
        assert dev[32] < dev[8]


def test_biorthogonality(trig_family):
    fam, *_ = trig_family
    assert fam.biorthogonality_defect(fam.high) <= 1e-6
    assert fam.biorthogonality_defect() <= 1e-6
    assert not fam.missing


def test_frame_bounds_near_constant_case(trig_family):
    fam, structure, *_ = trig_family
    b = riesz_condition_estimate(family_for(load_example("nonhermitian_m2"), K=120, k_max=48)[0])
    lo, hi = gram_bounds([d.chains[0].eigenvector for d in structure.distinct])
    assert abs(b.lower / lo - 1) <= 0.2 and abs(b.upper / hi - 1) <= 0.2
    small = riesz_condition_estimate(fam, sample_size=10)
    assert small.n_members == 10


def test_bari_bounded(trig_family):
    fam, *_ = trig_family
    upper = riesz_condition_estimate(fam).upper
    for f in random_unit_functions(5, fam.K, 2, 16, seed=11):
        tab = bari_partial_sums(f, fam, (4, 8, 16, 24, 32))
        assert all(b >= a - 1e-14 for a, b in zip(tab.psi_sums, tab.psi_sums[1:]))
        assert max(tab.psi_sums) <= upper * (1 + 1e-12)
        assert max(tab.psi_sums) <= 10


def test_bari_input_checks(trig_family):
    fam, *_ = trig_family
    with pytest.raises(ValueError):
        bari_partial_sums(np.ones((2 * fam.K + 1, 2)), fam, (4,))
    big = np.zeros((2 * fam.K + 11, 2), dtype=complex)
    big[0, 0] = 1
    with pytest.raises(ValueError):
        bari_partial_sums(big, fam, (4,))
    small = np.zeros((5, 2), dtype=complex)
    small[2, 0] = 1
    assert len(bari_partial_sums(small, fam, (0, 4)).psi_sums) == 2


def test_random_unit_functions():
    fs = random_unit_functions(3, 10, 2, 4, seed=1)
    again = random_unit_functions(3, 10, 2, 4, seed=1)
    for f, g in zip(fs, again):
        assert np.array_equal(f, g)
        assert np.linalg.norm(f) == pytest.approx(1)
        assert not np.any(f[:6]) and not np.any(f[15:])


def test_low_block_jordan():
    # C a Jordan block: the low block of the truncated operator is analysed
    # with its own Jordan structure; the family is still complete
    fam, *_ = family_for(load_example("jordan_m2"), K=30, k_max=12)
    assert fam.biorthogonality_defect() <= 1e-6
    assert len(fam.members) == 2 * 25


def test_simplicity_constant_simple():
    C = np.array([[1j, 1], [0, -1j]])
    _, _, _, pairs, report = family_for(PotentialSpec.constant(C), rho=1.0)
    cert = simplicity_certificate(report, pairs)
    assert cert.ok and cert.certified
    assert min(s for *_, s in cert.certified) == pytest.approx(2.0)


def test_simplicity_hermitian_scalar():
    _, _, _, pairs, report = family_for(load_example("hill_cos"))
    assert simplicity_certificate(report, pairs).ok


def test_simplicity_multiple_eigenvalue():
    _, _, _, pairs, report = family_for(PotentialSpec.constant(np.eye(2)), rho=1.0)
    cert = simplicity_certificate(report, pairs)
    assert not cert.ok
    assert all(why == "count" and n == 2 for _, _, why, n in cert.violations)

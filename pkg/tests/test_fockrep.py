import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbl import fockrep, oracles, waves
from pbl.deform import H0Spec, deform_hamiltonian, exp_map, number_operators
from pbl.models import instantiate
from pbl.opalg import OperatorPoly, commutator, ladder

A1, A2, AD1, AD2 = (ladder(n) for n in ("A1", "A2", "Ad1", "Ad2"))
OMEGA = H0Spec(1.0, 2.0, 0.5)


def ladders_of(model_id, **params):
    inst = instantiate(model_id, params)
    return inst, exp_map(inst.x).ladders()


def families(model_id, gamma, n_max, k):
    inst, lad = ladders_of(model_id, gamma=gamma)
    rep = fockrep.FockRep(n_max)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fockrep.TruncationWarning)
        return inst, rep, lad, fockrep.biorthogonal_families(rep, *lad, k)


# -- matrices -------------------------------------------------------------------------


def test_annihilator_entries():
    rep = fockrep.FockRep(2)
    m = rep.matrix(A1)
    for n2 in range(3):
        assert m[rep.index(0, n2), rep.index(1, n2)] == 1
        assert m[rep.index(1, n2), rep.index(2, n2)] == pytest.approx(math.sqrt(2))
    assert np.count_nonzero(m) == 6


def test_number_diagonal():
    rep = fockrep.FockRep(5)
    m = rep.matrix(OperatorPoly({(1, 1, 0, 0): 1.0}))
    assert np.allclose(m, np.diag(rep.n1), atol=1e-14)


def test_dagger_is_transpose_and_canonical():
    rep = fockrep.FockRep(6)
    for a, ad in ((A1, AD1), (A2, AD2)):
        assert np.array_equal(rep.matrix(ad), rep.matrix(a).T)
        comm = rep.matrix(a) @ rep.matrix(ad) - rep.matrix(ad) @ rep.matrix(a)
        inner = rep.interior(1)
        assert np.allclose(comm[np.ix_(inner, inner)], np.eye(inner.sum()))


def test_matrix_cache_read_only():
    rep = fockrep.FockRep(3)
    m = rep.matrix(A1)
    assert rep.matrix(A1) is m
    with pytest.raises(ValueError):
        m[0, 0] = 1


coeff = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
keys = [(a, b, c, d) for a in range(3) for b in range(3) for c in range(3) for d in range(3) if a + b + c + d <= 2]
polys = st.dictionaries(st.sampled_from(keys), coeff, max_size=5).map(OperatorPoly)


@settings(max_examples=30, deadline=None)
@given(polys, polys)
def test_commutator_homomorphism_on_interior(p, q):
    rep = fockrep.FockRep(7)
    mp, mq = rep.matrix(p), rep.matrix(q)
    inner = rep.interior(2)
    lhs = rep.matrix(commutator(p, q))[np.ix_(inner, inner)]
    rhs = (mp @ mq - mq @ mp)[np.ix_(inner, inner)]
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())


@settings(max_examples=30, deadline=None)
@given(polys)
def test_kernel_matches_ket_by_ket(p):
    rep = fockrep.FockRep(5)
    assert np.abs(rep.matrix(p) - oracles.fock_matrix_direct(5, p)).max() <= 1e-13


# -- spectrum --------------------------------------------------------------------------


def test_undeformed_spectrum_exact():
    rep = fockrep.FockRep(8)
    res = fockrep.spectrum(rep, OMEGA.poly(), OMEGA, 4)
    assert res.max_error <= 1e-12 and res.max_imag == 0


def test_model2_spectrum_and_example_level():
    inst, _ = ladders_of("model2", gamma=0.4)
    res = fockrep.spectrum(fockrep.FockRep(16), deform_hamiltonian(inst.x, OMEGA), OMEGA, 6)
    assert res.max_error <= 1e-8 and res.max_imag <= 1e-8
    (m21,) = [m for m in res.matches if (m.n1, m.n2) == (2, 1)]
    assert m21.target == 4.5
    assert [r["n1"] for r in res.rows()][:3] == [0, 1, 0]


def test_model1_spectrum_converges_with_cutoff():
    inst, _ = ladders_of("model1", gamma=0.2)
    h = deform_hamiltonian(inst.x, OMEGA)
    errs = [fockrep.spectrum(fockrep.FockRep(n), h, OMEGA, 6).max_error for n in (16, 20, 24)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 1e-8


def test_spectrum_guard():
    with pytest.raises(ValueError):
        fockrep.spectrum(fockrep.FockRep(8), OMEGA.poly(), OMEGA, 5)


def test_match_lattice_uses_each_point_once():
    h0 = H0Spec(1.0, 1.0, 0.0)  # degenerate lattice
    values = np.array([0.0, 1.0, 1.0, 2.0, 2.0, 2.0])
    matches = fockrep.match_lattice(values, h0, 2)
    assert sorted((m.n1, m.n2) for m in matches) == sorted(fockrep.family_indices(2))
    assert max(m.abs_err for m in matches) == 0


# -- vacua and families ----------------------------------------------------------------


def test_vacuum_examples():
    rep = fockrep.FockRep(10)
    assert np.allclose(fockrep.vacuum(rep, A1, A2).vector, rep.basis(0, 0))
    _, (a1, a2, _, _) = ladders_of("model2", gamma=0.8)
    assert np.allclose(fockrep.vacuum(rep, a1, a2).vector, rep.basis(0, 0), atol=1e-12)


def test_model1_vacuum_is_exp_x_ground_state():
    inst, (a1, a2, _, _) = ladders_of("model1", gamma=0.25)
    rep = fockrep.FockRep(28)
    v = fockrep.vacuum(rep, a1, a2).vector
    exact = waves.fock_projection(waves.apply_multiplier(waves.phi_state(0.0, 0, 0), inst.x, 1.0), rep.n_max)
    overlap = abs(np.vdot(v, exact)) / np.linalg.norm(exact)
    assert overlap >= 1 - 1e-8


def test_vacuum_rejects_non_normalizable():
    with pytest.warns(Warning):
        _, (a1, a2, _, _) = ladders_of("model1", gamma=0.6)
    with pytest.raises(fockrep.VacuumError):
        fockrep.vacuum(fockrep.FockRep(16), a1, a2)


def test_raise_family_undeformed_and_guard():
    rep = fockrep.FockRep(8)
    fam = fockrep.raise_family(rep, AD1, AD2, rep.basis(0, 0), 4)
    for (n1, n2), v in zip(fam.indices, fam.vectors):
        assert np.allclose(v, rep.basis(n1, n2))
    with pytest.raises(ValueError):
        fockrep.raise_family(rep, AD1, AD2, rep.basis(0, 0), 5)


def test_truncation_warning():
    _, (a1, a2, b1, b2) = ladders_of("model1", gamma=0.2)
    rep = fockrep.FockRep(16)
    vac = fockrep.vacuum(rep, a1, a2).vector
    with pytest.warns(fockrep.TruncationWarning):
        fockrep.raise_family(rep, b1, b2, vac, 8)


def test_model2_closed_forms():
    rep = fockrep.FockRep(10)
    g = 0.35
    assert np.allclose(fockrep.model2_coefficients(rep, 0, 0, g), rep.basis(0, 0))
    one = fockrep.model2_coefficients(rep, 1, 0, g)
    assert np.allclose(one, math.cosh(g) * rep.basis(1, 0) + math.sinh(g) * rep.basis(0, 1))
    assert fockrep.xi(1, 1, 1, 1) == pytest.approx(math.sqrt(2))
    _, rep, _, bo = families("model2", g, 10, 4)
    for n in bo.psi.indices:
        assert np.abs(bo.psi[n] - fockrep.model2_coefficients(rep, *n, g, kind="psi")).max() <= 1e-10


def test_biorthogonal_gram_and_norms():
    rep = fockrep.FockRep(8)
    fam = fockrep.raise_family(rep, AD1, AD2, rep.basis(0, 0), 3)
    assert np.allclose(fockrep.biorth_gram(fam, fam), np.eye(len(fam)))
    _, _, _, bo = families("model2", 0.3, 12, 5)
    assert np.abs(fockrep.biorth_gram(bo.phi, bo.psi) - np.eye(len(bo.phi))).max() <= 1e-9
    assert np.vdot(bo.phi[(1, 0)], bo.phi[(1, 0)]).real == pytest.approx(math.cosh(0.6), rel=1e-12)
    assert math.cosh(0.6) == pytest.approx(1.18546522, abs=1e-8)


@pytest.mark.parametrize("model_id,gamma,n_max", [("model2", 0.5, 12), ("model1", 0.15, 20)])
def test_ladder_actions(model_id, gamma, n_max):
    _, rep, (a1, a2, b1, b2), bo = families(model_id, gamma, n_max, 4)
    for n1, n2 in fockrep.family_indices(3):
        v = bo.phi[(n1, n2)]
        assert np.linalg.norm(rep.matrix(b1) @ v - math.sqrt(n1 + 1) * bo.phi[(n1 + 1, n2)]) <= 1e-6
        lower = bo.phi[(n1 - 1, n2)] if n1 else 0
        assert np.linalg.norm(rep.matrix(a1) @ v - math.sqrt(n1) * lower) <= 1e-6


def test_interior_commutation_all_catalog():
    rep = fockrep.FockRep(10)
    inner = rep.interior(2)
    for model_id, params in (("model1", {"gamma": 0.3}), ("item6", {"gamma": 0.4}), ("item2", {"theta": 0.5})):
        a1, a2, b1, b2 = exp_map(instantiate(model_id, params).x).ladders()
        for j, a in enumerate((a1, a2)):
            for k, b in enumerate((b1, b2)):
                ma, mb = rep.matrix(a), rep.matrix(b)
                c = (ma @ mb - mb @ ma)[np.ix_(inner, inner)]
                assert np.abs(c - (j == k) * np.eye(inner.sum())).max() <= 1e-10


# -- metric, intertwining, quasi-basis ----------------------------------------------------


def test_theta_trivial():
    rep = fockrep.FockRep(6)
    fam = fockrep.raise_family(rep, AD1, AD2, rep.basis(0, 0), 3)
    r = fockrep.theta_check(rep, OperatorPoly.zero(), fam, fam)
    assert r.max_residual == 0 and r.min_rayleigh == pytest.approx(1.0)
    it = fockrep.intertwine_check(rep, OperatorPoly.zero(), (OperatorPoly({(1, 1, 0, 0): 1}),), fam)
    assert it.max_residual == 0


def test_metric_model2_and_corrupted_detector():
    inst, rep, lad, bo = families("model2", 0.2, 14, 3)
    numbers = number_operators(*lad)
    assert fockrep.theta_check(rep, inst.x, bo.phi, bo.psi).max_residual <= 1e-6
    assert fockrep.intertwine_check(rep, inst.x, numbers, bo.phi).max_residual <= 1e-6
    wrong = fockrep.metric_matrix(rep, inst.x * -1)
    assert fockrep.intertwine_check(rep, inst.x, numbers, bo.phi, theta=wrong).max_residual > 1e-2
    assert fockrep.theta_check(rep, inst.x, bo.phi, bo.psi, theta=wrong).max_residual > 1e-2


def test_metric_model1_exact_multiplier():
    inst, rep, _, bo = families("model1", 0.2, 16, 3)
    image = waves.metric_image(inst.x, 0.2, bo.phi.indices, rep.n_max)
    r = fockrep.theta_check(rep, inst.x, bo.phi, bo.psi, theta_phi=image)
    assert r.max_residual <= 1e-4
    assert math.isnan(r.min_rayleigh)


def test_quasi_basis_examples():
    rep = fockrep.FockRep(6)
    fam = fockrep.raise_family(rep, AD1, AD2, rep.basis(0, 0), 3)
    res = fockrep.quasi_basis_sum(fam, fam, rep.basis(0, 0), rep.basis(0, 0))
    assert np.allclose(res.partial_sums, 1)
    _, rep, _, bo = families("model2", 0.6, 12, 4)
    f = rep.basis(1, 0)
    res = fockrep.quasi_basis_sum(bo.phi, bo.psi, f, f)
    assert abs(res.partial_sums[0]) <= 1e-14
    assert np.abs(res.partial_sums[1:] - 1).max() <= 1e-12
    _, rep, _, bo = families("model1", 0.1, 16, 8)
    res = fockrep.quasi_basis_sum(bo.phi, bo.psi, rep.basis(0, 0), rep.basis(0, 0))
    assert np.all(np.diff(res.errors) < 0)
    assert res.first_within(1e-6) is not None

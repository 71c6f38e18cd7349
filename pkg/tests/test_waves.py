import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermval
from scipy.special import eval_laguerre

from pbl import fockrep, waves
from pbl.models import instantiate
from pbl.opalg import parse

SQPI = 1 / math.sqrt(math.pi)


def test_polynomial_examples():
    assert waves.hermite(2, 1.0) == 2.0
    assert waves.hermite(0, 3.7) == 1.0
    assert waves.laguerre(0, -5.0) == 1.0
    with pytest.raises(ValueError):
        waves.hermite(-1, 0.0)


@pytest.mark.parametrize("n", [0, 1, 5, 17])
def test_hermite_against_numpy(n):
    x = np.linspace(-4, 4, 11)
    ref = hermval(x, [0] * n + [1])
    assert np.allclose(waves.hermite(n, x), ref, rtol=1e-12, atol=1e-12)


def test_laguerre_against_scipy_and_growth():
    for t in (0.1, 1.0, 4.0):
        vals = [waves.laguerre(n, -t) for n in range(16)]
        assert np.allclose(vals, [eval_laguerre(n, -t) for n in range(16)], rtol=1e-12)
        assert all(v > 0 for v in vals) and all(b > a for a, b in zip(vals, vals[1:]))


def test_phi_eval_examples():
    assert waves.phi_eval(waves.phi_state(0.0, 0, 0), 0.0, 0.0) == pytest.approx(SQPI)
    g = 0.25
    expect = math.exp(-1 + math.sqrt(2) * g * 2 + 2 * g) * SQPI
    assert waves.phi_eval(waves.phi_state(g, 0, 0), 1.0, 1.0) == pytest.approx(expect)
    x1, x2 = np.array([0.3, -1.2]), np.array([0.7, 0.1])
    assert np.allclose(waves.phi_eval(waves.psi_state(g, 1, 2), x1, x2),
                       waves.phi_eval(waves.phi_state(-g, 1, 2), x1, x2))


def test_integrability_boundary():
    for sign in (1, -1):
        assert waves.phi_state(sign * (0.5 - 1e-6), 0, 0).normalizable
        assert not waves.phi_state(sign * (0.5 + 1e-6), 0, 0).normalizable
    s = waves.phi_state(0.6, 0, 0)
    assert np.isfinite(waves.phi_eval(s, 1.0, 1.0))
    with pytest.raises(waves.NotIntegrableError):
        waves.inner2d(s, s)


def test_inner_product_examples():
    g = 0.25
    assert waves.inner2d(waves.phi_state(g, 0, 0), waves.psi_state(g, 0, 0)) == pytest.approx(1.0, abs=1e-14)
    ground = waves.phi_state(0.0, 0, 0)
    assert waves.inner2d(ground, ground) == pytest.approx(1.0, abs=1e-14)


def test_biorthogonality_quadrature():
    idx = fockrep.family_indices(4)
    for g in (0.1, 0.25, -0.4):
        gram = waves.gram2d([waves.phi_state(g, *i) for i in idx], [waves.psi_state(g, *i) for i in idx])
        assert np.abs(gram - np.eye(len(idx))).max() <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.45, 0.45), st.integers(0, 6), st.integers(0, 6), st.integers(0, 6), st.integers(0, 6))
def test_quadrature_node_independence(g, a, b, c, d):
    s, t = waves.phi_state(g, a, b), waves.psi_state(g, c, d)
    base = waves.inner2d(s, t)
    more = waves.inner2d(s, t, m=waves.node_count(a + b + c + d) + 4)
    assert abs(base - more) <= 1e-12 * max(1.0, abs(base))


def test_norm_examples():
    rows = waves.norm_growth(0.25, [0])
    assert rows[0].lower_bound == pytest.approx(math.pi * math.exp(0.5))
    assert rows[0].lower_bound == pytest.approx(5.17961, abs=1e-5)
    assert rows[0].s0 == pytest.approx(math.sqrt(2) * 0.25 / 0.5)
    for g in (0.1, 0.25, 0.4):
        est = waves.norm_growth(g, range(16))
        assert est[0].i_n == pytest.approx(waves.ground_norm(g), rel=1e-12)
        assert all(r.holds for r in est)
        assert all(b.i_n > a.i_n for a, b in zip(est, est[1:]))


def test_norm_negative_gamma_reports_symmetric_bound():
    rows = waves.norm_growth(-0.25, range(6))
    assert all(r.symmetric_bound is not None for r in rows)
    assert all(r.holds for r in rows)
    with pytest.raises(ValueError):
        waves.norm_growth(0.5, [0])


def test_norm_zero_gamma():
    rows = waves.norm_growth(0.0, range(4))
    assert all(r.i_n == pytest.approx(math.pi) and r.ratio == pytest.approx(1.0) for r in rows)


def test_norms_csv():
    text = waves.norms_csv(waves.norm_growth(0.1, range(3)))
    lines = text.strip().splitlines()
    assert lines[0] == "n,gamma,I_n,lower_bound,ratio,symmetric_bound"
    assert len(lines) == 4


def test_fock_projection_matches_raising():
    g = 0.15
    inst = instantiate("model1", {"gamma": g})
    rep = fockrep.FockRep(20)
    from pbl.deform import exp_map
    a1, a2, b1, b2 = exp_map(inst.x).ladders()
    vac = fockrep.vacuum(rep, a1, a2).vector
    fam = fockrep.raise_family(rep, b1, b2, vac, 3)
    coeffs = np.array([waves.fock_projection(waves.phi_state(g, *i), rep.n_max) for i in fam.indices])
    lam = np.vdot(fam.vectors[0], coeffs[0])
    assert np.abs(coeffs - lam * fam.vectors).max() <= 1e-8


def test_multiplier_form():
    k, v, m = waves.multiplier_form(parse("0.3 + 0.2*x1 - x2 + 0.5*x1*x1 + 0.4*x1*x2"))
    assert k == pytest.approx(0.3)
    assert np.allclose(v, [0.2, -1.0])
    assert np.allclose(m, [[1.0, 0.4], [0.4, 0.0]])
    with pytest.raises(ValueError):
        waves.multiplier_form(parse("x1*p1"))
    with pytest.raises(ValueError):
        waves.multiplier_form(parse("i*x1"))


def test_metric_maps_phi_to_psi_in_real_space():
    g = 0.3
    x = instantiate("model1", {"gamma": g}).x
    image = waves.apply_multiplier(waves.phi_state(g, 2, 1), x, -2.0)
    psi = waves.psi_state(g, 2, 1)
    assert np.allclose(image.q, psi.q) and np.allclose(image.ell, psi.ell)

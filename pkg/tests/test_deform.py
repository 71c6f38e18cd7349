import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from pbl.deform import (AffineLadderMap, H0Spec, ad_generator, conserves_number, deform_hamiltonian,
                        deform_operator, exp_map, expm_taylor, pseudo_boson_check)
from pbl.models import get_spec, instantiate, load_catalog
from pbl.opalg import OperatorPoly, adjoint, commutator, ladder, momentum, parse, position

A1, A2, AD1, AD2 = (ladder(n) for n in ("A1", "A2", "Ad1", "Ad2"))
ONE = OperatorPoly.constant(1.0)
GENERATOR_IDS = [s.id for s in load_catalog() if s.has_x]


def test_zero_generator():
    assert np.array_equal(ad_generator(OperatorPoly.zero()), np.zeros((5, 5)))
    m = exp_map(OperatorPoly.zero())
    assert np.allclose(m.linear, np.eye(4)) and np.allclose(m.shift, 0)
    assert deform_operator(m, A1) == A1


def test_model2_ad_generator():
    g = 0.7
    x = instantiate("model2", {"gamma": g}).x
    assert commutator(x, A1).allclose(A2 * -g)
    assert commutator(x, A2).allclose(A1 * -g)
    m = ad_generator(x)
    assert np.allclose(m[0], [0, -g, 0, 0, 0]) and np.allclose(m[2], [0, 0, 0, g, 0])


@pytest.mark.parametrize("g", [0.3, 0.9, -0.8])
def test_model2_ladders(g):
    a1 = exp_map(instantiate("model2", {"gamma": g}).x).ladders()[0]
    assert a1.allclose(A1 * math.cosh(g) - A2 * math.sinh(g))


@pytest.mark.parametrize("g", [0.2, -0.37])
def test_model1_ladders_exact(g):
    x = instantiate("model1", {"gamma": g}).x
    m = ad_generator(x)
    assert np.abs(m @ m).max() <= 1e-15
    a1, a2, b1, b2 = exp_map(x).ladders()
    assert a1.allclose(A1 - (A2 + AD2 + ONE) * g, atol=1e-15)
    assert b2.allclose(AD2 + (A1 + AD1 + ONE) * g, atol=1e-15)


def test_swanson_map():
    theta = 0.3
    lm = exp_map(instantiate("item2", {"theta": theta}).x)
    assert deform_operator(lm, position(1)).allclose(position(1) * np.exp(1j * theta))
    assert deform_operator(lm, momentum(1)).allclose(momentum(1) * np.exp(-1j * theta))


def test_h0_relations():
    h = H0Spec(1.0, 2.0, 0.5)
    assert (h.wt1, h.wt2, h.wt3) == (0.5, 1.0, -1.0)
    back = H0Spec.from_tilde(h.wt1, h.wt2, h.wt3)
    assert (back.w1, back.w2, back.w3) == (1.0, 2.0, 0.5)
    assert h.energy(2, 1) == 4.5
    assert deform_hamiltonian(OperatorPoly.zero(), h) == h.poly()


def test_small_parameter_limit():
    h0 = H0Spec(1.0, 2.0, 0.5)
    for model_id in ("model1", "model2"):
        x = instantiate(model_id, {"gamma": 1e-8}).x
        assert deform_hamiltonian(x, h0).distance(h0.poly()) <= 1e-6


def test_expm_against_scipy():
    rng = np.random.default_rng(3)
    for scale in (0.01, 1.0, 8.0):
        m = scale * (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
        ref = scipy.linalg.expm(m)
        assert np.abs(expm_taylor(m) - ref).max() <= 1e-12 * np.abs(ref).max()
    with pytest.raises(ValueError):
        expm_taylor(np.full((2, 2), np.nan))


def test_pseudo_boson_detector():
    assert pseudo_boson_check(A1, A2, AD1, AD2).max == 0
    bad = pseudo_boson_check(A1, A2, AD1 + AD2 * 0.1, AD2)
    assert bad.matrix[1, 0] == pytest.approx(0.1)
    assert not bad.passed(1e-3)


@pytest.mark.parametrize("model_id", GENERATOR_IDS)
def test_catalog_maps_invertible_and_symplectic(model_id):
    rng = np.random.default_rng(11)
    spec = get_spec(model_id)
    for _ in range(10):
        x = instantiate(model_id, spec.draw(rng), printed=False).x
        fwd, back = exp_map(x), exp_map(x * -1)
        comp = fwd.then(back)
        assert np.abs(comp.matrix - np.eye(5)).max() <= 1e-10
        assert fwd.symplectic_residual() <= 1e-10
        assert pseudo_boson_check(*fwd.ladders()).max <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.45, 0.45), st.sampled_from(["model1", "model2"]))
def test_adjoint_symmetry(g, model_id):
    plus = exp_map(instantiate(model_id, {"gamma": g}).x).ladders()
    minus = exp_map(instantiate(model_id, {"gamma": -g}).x).ladders()
    # a_j^dag(gamma) = b_j(-gamma)
    assert adjoint(plus[0]).allclose(minus[2], atol=1e-12)
    assert adjoint(plus[1]).allclose(minus[3], atol=1e-12)


def test_conserves_number():
    assert conserves_number(instantiate("model2", {"gamma": 0.4}).x)
    assert not conserves_number(instantiate("model1", {"gamma": 0.4}).x)


def test_composition_is_associative():
    x = parse("0.2*x1*p2 + 0.1*x2")
    y = parse("0.3*p1*p1 - 0.2*x1")
    m = exp_map(x).then(exp_map(y))
    assert isinstance(m, AffineLadderMap)
    assert m.symplectic_residual() <= 1e-12

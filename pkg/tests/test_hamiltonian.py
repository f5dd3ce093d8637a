import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from hjlab.errors import InputError
from hjlab.hamiltonian import (
    ConvexityModuli,
    LagrangianView,
    custom,
    eval_H,
    grad_H,
    grad_L,
    legendre,
    model_from_config,
    normalize,
    numeric_legendre,
    power_norm,
    quartic2d,
)

# sampled directional-convexity constant of the quartic model on the unit
# ball at the default density; frozen from a run checked against a 4x
# denser scan and an independent random pair scan (both lower, as the true
# infimum is 0)
QUARTIC_LAMBDA_R1 = 0.10518991841765737


def central_grad(f, p, h=1e-6):
    p = np.asarray(p, float)
    g = np.zeros_like(p)
    for i in range(len(p)):
        e = np.zeros_like(p)
        e[i] = h
        g[i] = (f(p + e) - f(p - e)) / (2 * h)
    return g


def test_H_values():
    assert eval_H(power_norm(1, 2), [3, 4]) == 25
    assert eval_H(quartic2d(), [0, 0]) == 0
    assert eval_H(quartic2d(), [2, 1]) == pytest.approx(27 / 256 * 16 + 1, abs=1e-14)


@pytest.mark.parametrize(
    "model,p,expected",
    [
        (power_norm(1, 2), [1, 2], [2, 4]),
        (power_norm(2, 1), [0.5], [0.5]),
        (quartic2d(), [1, 1], [27 / 64, 2]),
    ],
)
def test_grad_H(model, p, expected):
    g = grad_H(model, p)
    assert np.allclose(g, expected, atol=1e-12)
    assert np.allclose(g, central_grad(lambda x: eval_H(model, x), p), atol=1e-6)


def test_legendre_values():
    assert legendre(LagrangianView(power_norm(1, 2)), [2, 0]) == pytest.approx(1.0)
    assert legendre(LagrangianView(quartic2d()), [1, 0]) == pytest.approx(1.0)
    # the numeric conjugate agrees with the closed form
    assert numeric_legendre(quartic2d(), np.array([1.0, 0.0]))[0] == pytest.approx(1.0, abs=1e-7)
    for m in (power_norm(1, 1), power_norm(2, 2), quartic2d()):
        assert legendre(LagrangianView(m), np.zeros(m.dim)) == 0


def test_grad_L_values():
    assert np.allclose(grad_L(LagrangianView(power_norm(1, 2)), [2, 0]), [1, 0])
    assert np.allclose(grad_L(LagrangianView(quartic2d()), [0, 0]), [0, 0])
    m = power_norm(2, 1)
    dl = grad_L(LagrangianView(m), [0.5])
    assert dl == pytest.approx([0.5])
    assert grad_H(m, dl) == pytest.approx([0.5], abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.sampled_from([1, 2]))
def test_DH_inverts_DL(q, k):
    """DH(DL(q)) = q for the closed-form conjugates."""
    m = power_norm(k, 2)
    q = np.array(q)
    assert np.allclose(m.grad(LagrangianView(m).DL(q)), q, atol=1e-9 * (1 + np.linalg.norm(q)))


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_numeric_legendre_matches_closed_form(q1, q2):
    q = np.array([q1, q2])
    for m in (power_norm(2, 2), quartic2d(1.0), quartic2d(0.25)):
        val, p = numeric_legendre(m, q)
        assert val == pytest.approx(float(LagrangianView(m).L(q)), abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2), st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_fenchel_young(q, p):
    """L(q) + H(p) >= <p, q> for every pair."""
    for m in (power_norm(1, 2), power_norm(2, 2), quartic2d()):
        v = LagrangianView(m)
        assert v.L(np.array(q)) + m.H(np.array(p)) >= np.dot(p, q) - 1e-12


def test_quartic_legendre_by_optimizer():
    """Independent conjugate via scipy on a few points."""
    m = quartic2d()
    for q in ([0.3, -0.7], [-1.2, 0.4]):
        res = optimize.minimize(lambda p: m.H(p) - np.dot(p, q), np.zeros(2), method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        assert -res.fun == pytest.approx(float(LagrangianView(m).L(np.array(q))), abs=1e-9)


def test_lambda_R():
    assert ConvexityModuli(LagrangianView(power_norm(1, 2))).lambda_R(2.0) == pytest.approx(1.0, abs=1e-12)
    assert ConvexityModuli(LagrangianView(power_norm(2, 1))).lambda_R(1.0) == pytest.approx(1.0, abs=1e-12)
    mod = ConvexityModuli(LagrangianView(quartic2d()))
    lam = mod.lambda_R(1.0)
    assert 0 < lam < 1
    assert lam == pytest.approx(QUARTIC_LAMBDA_R1, rel=1e-9)


@pytest.mark.slow
def test_quartic_lambda_decreases_under_refinement():
    mod = ConvexityModuli(LagrangianView(quartic2d()))
    assert mod.lambda_R(1.0, density=256) < mod.lambda_R(1.0)
    assert mod.convexity_audit(1.0)["degenerate"]


def test_Lambda_M():
    assert ConvexityModuli(LagrangianView(power_norm(1, 1))).Lambda_M(1.0) == pytest.approx(4.0, rel=1e-9)
    # L(q) = c |q|^(4/3) = |q| with c the analytic conjugate coefficient
    c = 3 * 4 ** (-4 / 3)
    root = optimize.brentq(lambda q: c * q ** (4 / 3) - q, 1.0, 100.0, xtol=1e-14)
    assert ConvexityModuli(LagrangianView(power_norm(2, 1))).Lambda_M(1.0) == pytest.approx(root, rel=1e-7)
    assert ConvexityModuli(LagrangianView(power_norm(1, 2))).Lambda_M(1e-9) < 1e-6


def test_psi_phi_values():
    m1 = ConvexityModuli(LagrangianView(power_norm(1, 1)))
    assert m1.psi_M(1.0, 0.5) == pytest.approx(1.0, rel=1e-6)
    assert m1.phi_M(1.0, 0.5) == pytest.approx(1.0, rel=1e-6)
    m2 = ConvexityModuli(LagrangianView(power_norm(2, 1)))
    assert m2.psi_M(1.0, 0.5) == pytest.approx(0.125, rel=1e-3)
    assert m1.psi_M(1.0, 1e-6) < 1e-5
    assert m2.phi_M(1.0, 1e-6) < 1e-5


def test_psi_pair_scan_oracle():
    """Brute minimum of |DH(p) - DH(q)| over pairs with |p - q| >= s in the ball."""
    m = power_norm(2, 1)
    g = np.linspace(-1, 1, 2001)
    P, Q = np.meshgrid(g, g, indexing="ij")
    ok = np.abs(P - Q) >= 0.5
    brute = np.min(np.abs(m.grad(P[ok][:, None]) - m.grad(Q[ok][:, None])))
    assert ConvexityModuli(LagrangianView(m)).psi_M(1.0, 0.5) == pytest.approx(brute, rel=1e-2)


def test_inverses():
    m1 = ConvexityModuli(LagrangianView(power_norm(1, 1)))
    assert m1.psi_inverse(1.0, 1.0) == pytest.approx(0.5, rel=1e-6)
    m2 = ConvexityModuli(LagrangianView(power_norm(2, 1)))
    assert m2.psi_inverse(1.0, 0.125) == pytest.approx(0.5, rel=1e-3)
    for mod in (m1, m2):
        assert mod.phi_inverse(1.0, mod.phi_M(1.0, 0.3)) == pytest.approx(0.3, rel=1e-3)


def test_normalize():
    shifted = custom(lambda P: np.sum(np.asarray(P) ** 2, axis=-1) + 3, 2,
                     grad=lambda P: 2 * np.asarray(P))
    n = normalize(shifted)
    P = np.random.default_rng(0).normal(size=(20, 2))
    assert np.allclose(n.H(P), np.sum(P ** 2, axis=1))
    a = np.array([0.5, -1.0])
    moved = custom(lambda P: np.sum((np.asarray(P) - a) ** 2, axis=-1), 2,
                   grad=lambda P: 2 * (np.asarray(P) - a))
    n2 = normalize(moved)
    assert np.allclose(n2.grad(np.zeros(2)), 0, atol=1e-12)
    assert n2.H(np.zeros(2)) == pytest.approx(0.0)
    assert normalize(power_norm(2, 2)) is power_norm(2, 2) or normalize(power_norm(2, 2)) == power_norm(2, 2)
    n3 = normalize(n)
    assert np.allclose(n3.H(P), n.H(P))


def test_model_from_config():
    assert model_from_config({"kind": "power_norm", "k": 2, "dim": 2}) == power_norm(2, 2)
    assert model_from_config({"kind": "quartic2d"}) == quartic2d()
    with pytest.raises(InputError):
        model_from_config({"kind": "power_norm", "bogus": 1})
    with pytest.raises(InputError):
        model_from_config({"kind": "custom"})
    with pytest.raises(InputError):
        model_from_config({"kind": "quartic2d", "dim": 3})


def test_invalid_models():
    with pytest.raises(InputError):
        power_norm(0, 1)
    with pytest.raises(InputError):
        quartic2d(-1.0)
    with pytest.raises(InputError):
        ConvexityModuli(LagrangianView(power_norm(1, 1))).lambda_R(0.0)


def test_custom_model_uses_numeric_legendre():
    m = custom(lambda P: np.sum(np.asarray(P) ** 2, axis=-1), 1)
    v = LagrangianView(m)
    assert v.kernel_params() is None
    assert float(v.L(np.array([2.0]))) == pytest.approx(1.0, abs=1e-7)
    assert math.isclose(float(v.DL(np.array([2.0]))[0]), 1.0, abs_tol=1e-5)

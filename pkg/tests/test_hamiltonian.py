import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize, minimize_scalar

from pindex.hamiltonian import (EllipsoidSurface, SingularPointError, hamiltonian_eval,
                                legendre_dual, symmetry_residuals)
from pindex.symplectic import build_symmetry

PI = math.pi
SURF = EllipsoidSurface((1.0, 1.3), 1.5)


def test_H_is_one_on_the_surface():
    x = np.array([0.6, 1.3 * 0.8, 0.0, 0.0])  # j(x)^2 = 0.36 + 0.64
    assert hamiltonian_eval(SURF, x)[0] == pytest.approx(1.0, abs=1e-14)


def test_homogeneity():
    x = np.array([0.3, -0.2, 0.5, 0.1])
    assert hamiltonian_eval(SURF, 2 * x)[0] == pytest.approx(2 ** 1.5 * hamiltonian_eval(SURF, x)[0])


def test_hessian_singular_at_origin():
    with pytest.raises(SingularPointError):
        hamiltonian_eval(SURF, np.zeros(4))


def test_gradient_and_hessian_by_finite_differences():
    rng = np.random.default_rng(0)
    x = rng.normal(size=4)
    _, g, Hs = hamiltonian_eval(SURF, x)
    eps = 1e-6
    E = np.eye(4)
    fd_g = np.array([(hamiltonian_eval(SURF, x + eps * e)[0] - hamiltonian_eval(SURF, x - eps * e)[0])
                     / (2 * eps) for e in E])
    fd_h = np.array([(hamiltonian_eval(SURF, x + eps * e)[1] - hamiltonian_eval(SURF, x - eps * e)[1])
                     / (2 * eps) for e in E])
    assert np.allclose(g, fd_g, atol=1e-8)
    assert np.allclose(Hs, fd_h, atol=1e-6)
    assert np.allclose(Hs, Hs.T)
    assert np.linalg.eigvalsh(Hs)[0] > 0


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_scalar_legendre_oracle(s):
    """phi(t) = t^{3/2}: sup_t (s t - phi(t)) by bounded scalar maximisation."""
    res = minimize_scalar(lambda t: -(s * t - t ** 1.5), bounds=(0.0, 100.0), method="bounded",
                          options={"xatol": 1e-12})
    brute = -res.fun
    one_plane = EllipsoidSurface((1.0,), 1.5)
    closed = legendre_dual(one_plane, np.array([s, 0.0]))[0]
    assert closed == pytest.approx(brute, abs=1e-8)


def test_legendre_dual_matches_brute_force_on_ellipsoid():
    rng = np.random.default_rng(1)
    surf = EllipsoidSurface((1.0, 1.3), 1.5)
    for _ in range(3):
        y = rng.normal(size=4)
        res = minimize(lambda x: -(x @ y - hamiltonian_eval(surf, x, hessian=False)[0]),
                       x0=y, method="BFGS", options={"gtol": 1e-12})
        val, grad = legendre_dual(surf, y)
        assert val == pytest.approx(-res.fun, rel=1e-8)
        # the maximiser is grad H*(y)
        assert np.allclose(res.x, grad, atol=1e-5)


def test_dual_at_origin():
    val, grad = legendre_dual(SURF, np.zeros(4))
    assert val == 0.0 and np.all(grad == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(1.1, 1.9))
def test_fenchel_young(seed, alpha):
    rng = np.random.default_rng(seed)
    surf = EllipsoidSurface((0.8, 1.7), alpha)
    x, y = rng.normal(size=4), rng.normal(size=4)
    H, dH, _ = hamiltonian_eval(surf, x, hessian=False)
    assert x @ y <= H + legendre_dual(surf, y)[0] + 1e-12
    assert x @ dH == pytest.approx(H + legendre_dual(surf, dH)[0], rel=1e-10, abs=1e-12)


def test_reciprocity_of_hessians():
    """H*''(H'(x)) H''(x) = I, with H*'' by finite differences of the dual gradient."""
    x = np.array([0.4, -0.3, 0.2, 0.9])
    _, y, Hs = hamiltonian_eval(SURF, x)
    eps = 1e-6
    Hd = np.array([(legendre_dual(SURF, y + eps * e)[1] - legendre_dual(SURF, y - eps * e)[1]) / (2 * eps)
                   for e in np.eye(4)])
    assert np.allclose(Hd @ Hs, np.eye(4), atol=1e-6)


def test_symmetry_residuals():
    P = build_symmetry((PI / 2, PI), 4)
    pts = np.random.default_rng(2).normal(size=(1000, 4))
    res = symmetry_residuals(SURF, P.matrix, pts)
    assert res["gradient"] <= 1e-10 and res["hessian"] <= 1e-10 and res["value"] <= 1e-10


@pytest.mark.parametrize("radii,alpha", [((1.0, -1.0), 1.5), ((1.0,), 2.0), ((1.0,), 1.0)])
def test_invalid_surfaces(radii, alpha):
    with pytest.raises(ValueError):
        EllipsoidSurface(radii, alpha)

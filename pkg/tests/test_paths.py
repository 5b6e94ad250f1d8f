import math

import numpy as np
import pytest

from pindex.families import block_sum, constant, planes, random_smooth
from pindex.paths import (CoefficientError, CoefficientPath, IntegrationError, extend_by_symmetry,
                          integrate_fundamental, monodromy_residual, restrict)
from pindex.symplectic import diamond, rotation

PI = math.pi


def test_constant_path_flow_is_rotation():
    g = integrate_fundamental(constant(2.0, 2))
    assert np.max(np.abs(g.end - diamond(rotation(2.0), rotation(2.0)))) < 1e-9
    assert g.max_defect <= 1e-9


def test_planes_flow_rotates_each_plane_at_its_rate():
    g = integrate_fundamental(planes([1.0, 3.0]))
    assert np.allclose(g.end, diamond(rotation(1.0), rotation(3.0)), atol=1e-9)


def test_at_interpolates_between_grid_points():
    g = integrate_fundamental(constant(1.0, 1))
    assert np.allclose(g.at(0.3141), rotation(0.3141), atol=1e-10)


def test_restrict_matches_fresh_integration():
    A = random_smooth(2, 3)
    g = integrate_fundamental(A)
    r = restrict(g, 0.6)
    fresh = integrate_fundamental(A.restricted(0.6))
    assert np.allclose(r.end, fresh.end, atol=1e-7)


def test_non_symmetric_or_indefinite_coefficients_rejected():
    with pytest.raises(CoefficientError):
        CoefficientPath(lambda ts: np.broadcast_to(np.array([[1.0, 1.0], [0.0, 1.0]]), (len(ts), 2, 2)),
                        1.0, 1)
    with pytest.raises(CoefficientError):
        CoefficientPath(lambda ts: np.broadcast_to(-np.eye(2), (len(ts), 2, 2)), 1.0, 1)


def test_unreachable_defect_raises():
    with pytest.raises(IntegrationError):
        integrate_fundamental(random_smooth(2, 0), steps=16, eps_path=1e-30, max_doublings=1)


def test_rk4_order():
    A = constant(1.0, 1, PI)
    errs = [np.max(np.abs(integrate_fundamental(A, steps=s, eps_path=math.inf).end - rotation(PI)))
            for s in (16, 32, 64)]
    assert errs[0] / errs[1] > 14 and errs[1] / errs[2] > 14


def test_extension_by_symmetry_reproduces_monodromy(P_quarter):
    # A(t) = a I commutes with P, so the symmetry A(t+1)P = PA(t) holds
    A1 = constant(1.3, 2)
    Ak = constant(1.3, 2, 4.0)
    g1 = integrate_fundamental(A1)
    gk = extend_by_symmetry(g1, P_quarter, coefficient=Ak)
    assert monodromy_residual(gk, g1.end, P_quarter) < 1e-12
    direct = integrate_fundamental(Ak)
    assert np.max(np.abs(direct.end - gk.end)) < 1e-8
    assert np.allclose(gk.at(2.5), direct.at(2.5), atol=1e-8)


def test_extension_detects_broken_symmetry(P_mixed):
    A1 = planes([1.0, 2.0])
    g1 = integrate_fundamental(A1)
    rot = random_smooth(2, 1, tau=4.0)
    with pytest.raises(ValueError, match="symmetry"):
        extend_by_symmetry(g1, P_mixed, coefficient=rot)


def test_block_sum_flow_is_diamond_of_flows():
    A1, A2 = random_smooth(1, 5), random_smooth(1, 6)
    g = integrate_fundamental(block_sum(A1, A2))
    want = diamond(integrate_fundamental(A1).end, integrate_fundamental(A2).end)
    assert np.max(np.abs(g.end - want)) < 1e-8


def test_random_smooth_is_deterministic():
    a, b = random_smooth(2, 7), random_smooth(2, 7)
    ts = np.linspace(0, 1, 9)
    assert np.array_equal(a.many(ts), b.many(ts))
    assert a.margin > 0

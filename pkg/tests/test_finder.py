import math

import numpy as np
import pytest

from pindex.ekeland import pi_nodes
from pindex.finder import (DualControl, FinderConfig, _descend, classify, dual_action, dual_gradient,
                           find_characteristic, minimize_dual_action, planar_circle)
from pindex.hamiltonian import EllipsoidSurface, legendre_dual
from pindex.symplectic import build_symmetry, standard_J

PI = math.pi
SURF = EllipsoidSurface((1.0, 1.3), 1.5)
QUICK = FinderConfig(m=32, restarts=2, seed=0)


@pytest.fixture(scope="module")
def P():
    return build_symmetry((PI / 2, PI / 2), 4)


@pytest.fixture(scope="module")
def record(P):
    return find_characteristic(SURF, P, FinderConfig(seed=0))


def test_zero_control_has_zero_action(P):
    assert dual_action(SURF, P, np.zeros((16, 4))) == 0.0


def test_action_invariant_under_P(P):
    u = np.random.default_rng(0).normal(size=(24, 4))
    assert dual_action(SURF, P, u @ P.matrix.T) == pytest.approx(dual_action(SURF, P, u), rel=1e-12)


def test_gradient_matches_finite_differences(P):
    rng = np.random.default_rng(1)
    u, v = rng.normal(size=(20, 4)), rng.normal(size=(20, 4))
    eps = 1e-6
    fd = (dual_action(SURF, P, u + eps * v) - dual_action(SURF, P, u - eps * v)) / (2 * eps)
    an = np.sum(dual_gradient(SURF, P, u) * v) / len(u)
    assert fd == pytest.approx(an, rel=1e-6)


def test_round_sphere_minimum_is_negative(P):
    sphere = EllipsoidSurface((1.0, 1.0), 1.5)
    res = minimize_dual_action(sphere, P, QUICK)
    assert res.value < 0
    assert len(res.minima) == QUICK.restarts


def test_first_order_condition_at_minimiser(P):
    res = minimize_dual_action(SURF, P, QUICK)
    u = res.control.values
    J = standard_J(2)
    x = pi_nodes(u, P.matrix, 1.0)
    mid = 0.5 * (x[:-1] + x[1:])
    grad = legendre_dual(SURF, -(u @ J.T))[1]
    assert np.max(np.abs(grad - mid)) <= 1e-7 * max(1.0, res.control.norm())


def test_doubling_m_refines_monotonically(P):
    res = minimize_dual_action(SURF, P, QUICK)
    fine = res.control.refined()
    assert isinstance(fine, DualControl) and fine.m == 2 * res.control.m
    # nested spaces: the refined control has the same action
    assert dual_action(SURF, P, fine) == pytest.approx(res.value, abs=1e-12)
    _, f2, _, _, _ = _descend(SURF, P, fine.values, QUICK)
    assert f2 <= res.value + 1e-6


def test_planar_circle_oracle(P):
    circ = planar_circle(SURF, P, 0)
    assert circ["psi"] == pytest.approx(-0.2177, abs=1e-4)
    assert circ["transverse_angles"][1] == pytest.approx(4 * (PI / 2) / 1.3 ** 2)


def test_classify():
    assert classify(4, 2) == "elliptic"
    assert classify(2, 2) == "hyperbolic"
    assert classify(2, 3) == "hyperbolic"
    assert classify(4, 3) == "non-hyperbolic-partial"


def test_record_invariants(record, P):
    circ = planar_circle(SURF, P, 0)
    assert record.psi == pytest.approx(circ["psi"], rel=1e-3)
    assert record.residual <= 1e-5 * record.gradient_scale
    assert record.energy_drift <= 1e-6
    assert record.symmetry_residual <= 1e-6
    assert record.closure_residual <= 1e-6
    assert record.monodromy_residual <= 1e-6
    assert max(record.plane_shares) >= 1 - 1e-6
    assert record.classification == "elliptic" and record.elliptic_height == 4
    assert (record.ekeland_index, record.galerkin_index, record.maslov_index) == (0, 0, 0)


def test_trajectory_extension_and_csv(record, P):
    traj = record.trajectory
    ts = np.linspace(0.0, 0.9, 7)
    assert np.allclose(traj(ts + 1.0), traj(ts) @ P.matrix.T, atol=1e-6)
    csv_text = record.trajectory_csv()
    assert csv_text.splitlines()[0] == "t,x0,x1,x2,x3"
    assert len(csv_text.splitlines()) == len(record.samples_t) + 1
    js = record.to_json(samples=False)
    assert "trajectory" not in js and js["index"]["ekeland"] == 0


def test_seed_changes_trajectory_not_integers(P):
    a = find_characteristic(SURF, P, FinderConfig(seed=0))
    b = find_characteristic(SURF, P, FinderConfig(seed=5))
    ints = lambda r: (r.elliptic_height, r.ekeland_index, r.ekeland_nullity, r.galerkin_index,
                      r.maslov_index, r.classification)
    assert ints(a) == ints(b)

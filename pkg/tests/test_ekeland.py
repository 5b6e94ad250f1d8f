import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pindex.acceptance import closed_form_index
from pindex.ekeland import (antisymmetry_check, galerkin_spectrum, index_by_crossings,
                            index_by_galerkin, nullity_at, pi_nodes)
from pindex.families import constant, random_smooth
from pindex.symplectic import build_symmetry

PI = math.pi


def test_nullity_examples(P_quarter):
    assert nullity_at(constant(2 * PI, 2), P_quarter, 1.0) == 0
    assert nullity_at(constant(PI / 2, 2), P_quarter, 1.0) == 4
    assert nullity_at(constant(2 * PI, 2), P_quarter, 1e-3) == 0


def test_crossing_index_full_turn(P_quarter):
    rep = index_by_crossings(constant(2 * PI, 2), P_quarter)
    assert rep.index == 4 and rep.nullity == 0
    # both planes cross together where 2 pi sigma = pi / 2
    assert len(rep.crossings) == 1
    assert rep.crossings[0].sigma == pytest.approx(0.25, abs=1e-8)
    assert rep.crossings[0].nullity == 4


def test_endpoint_crossing_is_not_counted(P_quarter):
    rep = index_by_crossings(constant(PI / 2, 2), P_quarter)
    assert (rep.index, rep.nullity) == (0, 4)


def test_short_horizon_has_zero_index(P_quarter):
    assert index_by_crossings(constant(2 * PI, 2), P_quarter, s=0.2).index == 0


@pytest.mark.parametrize("a", [0.5, 2.0, 5.0, 9.0])
@pytest.mark.parametrize("angles,k", [((PI / 2,), 4), ((PI / 3, PI), 6), ((4 * PI / 3, PI / 2), 12)])
def test_rotation_closed_form(a, angles, k):
    P = build_symmetry(angles, k)
    assert index_by_crossings(constant(a, len(angles)), P).index == closed_form_index(a, angles)


def test_galerkin_matches_crossing_on_full_turn(P_quarter):
    gal = index_by_galerkin(constant(2 * PI, 2), P_quarter, m=64)
    assert gal.index == 4 and gal.nullity == 0


def test_galerkin_positive_below_first_crossing(P_quarter):
    mu = galerkin_spectrum(constant(1.0, 2), P_quarter, 1.0, 64)
    assert mu[0] > 0


def test_galerkin_negative_count_stable_under_doubling(P_mixed):
    A = random_smooth(2, 4)
    counts = [int(np.sum(galerkin_spectrum(A, P_mixed, 1.0, m) < -0.05)) for m in (64, 128, 256)]
    assert counts[0] == counts[1] == counts[2]


@pytest.mark.parametrize("seed", range(4))
def test_crossing_and_galerkin_agree_on_random_paths(seed, P_mixed):
    A = random_smooth(2, seed)
    cr = index_by_crossings(A, P_mixed)
    gal = index_by_galerkin(A, P_mixed)
    assert (cr.index, cr.nullity) == (gal.index, gal.nullity)


def test_pi_zero_control():
    P = build_symmetry((PI / 2,), 4)
    assert np.allclose(pi_nodes(np.zeros((8, 2)), P.matrix, 1.0), 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 40), st.floats(0.1, 4.0))
def test_antisymmetry_and_boundary(seed, m, s):
    rng = np.random.default_rng(seed)
    P = build_symmetry((PI / 2, PI / 2), 4)
    u, v = rng.normal(size=(m, 4)), rng.normal(size=(m, 4))
    nu = math.sqrt(s / m * np.sum(u * u))
    nv = math.sqrt(s / m * np.sum(v * v))
    anti, bc = antisymmetry_check(u, v, P, s)
    assert anti <= 1e-10 * nu * nv
    assert bc <= 1e-12 * nu

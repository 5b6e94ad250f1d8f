import cmath
import math

import numpy as np
import pytest

from pindex.families import block_sum, constant, random_smooth
from pindex.maslov import (UnsupportedFactorError, i_P_omega, inverse_splitting, lemma34i_check,
                           nu_inverse_table, nu_P_omega, rotation_family_factors, splitting_limit,
                           splitting_table, theorem36_check)
from pindex.paths import integrate_fundamental
from pindex.symplectic import NormalForm, build_symmetry, diamond, rotation

PI = math.pi


def test_nu_P_omega_examples(P_quarter):
    assert nu_P_omega(P_quarter.matrix, P_quarter, 1.0) == 4
    assert nu_P_omega(np.eye(4), P_quarter, 1.0) == 0
    assert nu_P_omega(diamond(rotation(PI), rotation(PI)), P_quarter, cmath.exp(-0.5j * PI)) == 2


def test_maslov_index_full_turn(P_quarter):
    A = constant(2 * PI, 2)
    assert i_P_omega(A, P_quarter, 1.0).index == 4
    rep = i_P_omega(A, P_quarter, 1j)
    assert rep.base == 2


def test_maslov_index_before_any_crossing(P_quarter):
    assert i_P_omega(constant(1.0, 2), P_quarter, 1.0).index == 0


def test_bridge_on_random_paths(P_mixed):
    for seed in range(3):
        res = theorem36_check(random_smooth(2, seed), P_mixed)
        assert res["pass"], res


def test_inverse_nu_matches_matrix(P_mixed):
    for w in (1.0, -1.0, 1j, -1j, cmath.exp(0.3j)):
        assert P_mixed.inverse_nu(w) == nu_inverse_table(P_mixed, w)


@pytest.mark.parametrize("factor,omega,want", [
    (NormalForm("N1", (1, 1)), 1.0, (1, 1)),
    (NormalForm("N1", (1, 0)), 1.0, (1, 1)),
    (NormalForm("N1", (1, -1)), 1.0, (0, 0)),
    (NormalForm("N1", (-1, -1)), -1.0, (1, 1)),
    (NormalForm("N1", (-1, 1)), -1.0, (0, 0)),
    (NormalForm("R", (PI / 3,)), cmath.exp(1j * PI / 3), (0, 1)),
    (NormalForm("R", (PI / 3,)), cmath.exp(-1j * PI / 3), (1, 0)),
    (NormalForm("D", (2.0,)), 1.0, (0, 0)),
    (NormalForm("N1", (1, 1)), -1.0, (0, 0)),
])
def test_catalog(factor, omega, want):
    assert splitting_table([factor], omega).pair == want


def test_catalog_is_additive():
    fs = [NormalForm("N1", (1, 1)), NormalForm("N1", (1, 0)), NormalForm("R", (PI / 2,))]
    assert splitting_table(fs, 1.0).pair == (2, 2)
    assert splitting_table(fs, 1j).pair == (0, 1)


def test_unsupported_factor_raises():
    with pytest.raises(UnsupportedFactorError):
        splitting_table([NormalForm("N2", (PI / 2, 1.0, 0.0, 1.0, 1.0))], 1.0)


def test_inverse_splitting_of_quarter_turns(P_quarter):
    # P^{-1} = R(3 pi / 2) in each plane
    assert inverse_splitting(P_quarter, 1j) == (2, 0)
    assert inverse_splitting(P_quarter, -1j) == (0, 2)


@pytest.mark.parametrize("a", [2.0, 4.0, PI / 2 + 2 * PI])
def test_limit_matches_table_on_rotation_family(a, P_mixed):
    A = constant(a, 2)
    g = integrate_fundamental(A)
    factors = rotation_family_factors(a, P_mixed)
    for ang in sorted({PI / 2, PI, abs(math.remainder(a - PI / 2, 2 * PI)),
                       abs(math.remainder(a - PI, 2 * PI))}):
        w = -1.0 if abs(ang - PI) < 1e-12 else (1.0 if ang < 1e-12 else cmath.exp(1j * ang))
        res = lemma34i_check(A, P_mixed, w, factors, gamma=g)
        assert res["pass"], res


def test_limit_vanishes_off_spectrum(P_mixed):
    A = constant(2.0, 2)
    # spectrum angles: pi/2, pi, 2 - pi/2, pi - 2
    assert splitting_limit(A, P_mixed, cmath.exp(0.2j)).pair == (0, 0)


def test_limit_conjugation(P_quarter):
    A = random_smooth(2, 11)
    w = 1j
    plus = splitting_limit(A, P_quarter, w)
    minus = splitting_limit(A, P_quarter, w.conjugate())
    assert plus.plus == minus.minus and plus.minus == minus.plus


def test_limit_is_additive_over_blocks():
    A1, A2 = random_smooth(1, 21, scale=5.0), random_smooth(1, 22, scale=5.0)
    P1, P2 = build_symmetry((PI / 2,), 4), build_symmetry((PI,), 2)
    P = build_symmetry((PI / 2, PI), 4)
    A = block_sum(A1, A2)
    for w in (1j, -1.0, -1j):
        full = splitting_limit(A, P, w).pair
        p1, p2 = splitting_limit(A1, P1, w).pair, splitting_limit(A2, P2, w).pair
        assert full == (p1[0] + p2[0], p1[1] + p2[1])


def test_lemma_check_skips_without_factors(P_quarter):
    assert lemma34i_check(constant(1.0, 2), P_quarter, 1.0)["pass"] is None

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pindex.symplectic import (NormalForm, SymplecticError, algebraic_multiplicity, build_symmetry,
                               diamond, elliptic_height, factor_rotation, normal_form, nu_omega,
                               rotation, standard_J, symplectic_defect, unit_circle_spectrum)

PI = math.pi


def test_standard_J_is_symplectic_and_squares_to_minus_identity():
    J = standard_J(3)
    assert np.allclose(J @ J, -np.eye(6))
    assert symplectic_defect(J) < 1e-15


def test_diamond_interleaves_planes():
    A = np.arange(4.0).reshape(2, 2)
    B = 10 + np.arange(4.0).reshape(2, 2)
    D = diamond(A, B)
    want = np.array([[0, 0, 1, 0], [0, 10, 0, 11], [2, 0, 3, 0], [0, 12, 0, 13]], dtype=float)
    assert np.array_equal(D, want)


def test_diamond_of_symplectic_is_symplectic():
    M = diamond(rotation(0.3), normal_form("N1", 1, 1), normal_form("D", 2))
    assert symplectic_defect(M) < 1e-14


@pytest.mark.parametrize("kind,params", [("D", (3.0,)), ("N1", (1, 2)), ("R", (PI,)), ("X", ())])
def test_invalid_normal_forms(kind, params):
    with pytest.raises(SymplecticError):
        NormalForm(kind, params)


def test_nu_omega_of_rotation_and_jordan_block():
    assert nu_omega(rotation(PI / 3), complex(math.cos(PI / 3), math.sin(PI / 3))) == 1
    assert nu_omega(rotation(PI), -1) == 2
    assert nu_omega(normal_form("N1", 1, 1), 1) == 1
    assert nu_omega(np.eye(4), 1) == 4
    assert nu_omega(rotation(0.4), 1j) == 0


def test_elliptic_height_examples():
    assert elliptic_height(diamond(rotation(0.3), rotation(1.1))) == 4
    assert elliptic_height(diamond(normal_form("N1", 1, 1), normal_form("D", 2))) == 2
    assert elliptic_height(normal_form("D", -2)) == 0


def test_algebraic_multiplicity_counts_jordan_block():
    assert algebraic_multiplicity(normal_form("N1", 1, 1), 1) == 2


def test_unit_spectrum_is_conjugation_closed():
    M = diamond(rotation(0.7), rotation(2.0), normal_form("D", 2))
    spec = unit_circle_spectrum(M)
    zs = sorted((c.eigenvalue for c in spec.entries), key=lambda z: (z.real, z.imag))
    conj = sorted((z.conjugate() for z in zs), key=lambda z: (z.real, z.imag))
    assert np.allclose(zs, conj)


def test_build_symmetry_rejects_zero_angle():
    with pytest.raises(SymplecticError, match=r"ker\(P - I\)"):
        build_symmetry((0.0, PI / 2), 4)


def test_build_symmetry_rejects_wrong_order():
    with pytest.raises(SymplecticError):
        build_symmetry((PI / 3,), 4)


def test_symmetry_is_orthogonal_symplectic_of_order_k(P_mixed):
    P = P_mixed.matrix
    assert np.allclose(P.T @ P, np.eye(4))
    assert symplectic_defect(P) < 1e-14
    assert np.allclose(np.linalg.matrix_power(P, 4), np.eye(4))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 11), min_size=1, max_size=3), st.integers(0, 11))
def test_inverse_nu_matches_matrix_kernel(steps, w):
    """Angle arithmetic for nu_omega(P^{-1}) agrees with the kernel dimension."""
    P = build_symmetry([2 * PI * j / 12 for j in steps], 12)
    omega = complex(math.cos(2 * PI * w / 12), math.sin(2 * PI * w / 12))
    assert P.inverse_nu(omega) == nu_omega(P.inverse, omega)


def test_upper_inverse_eigenvalues(P_mixed):
    ups = P_mixed.upper_inverse_eigenvalues()
    assert [round(a, 12) for a, _, _ in ups] == [round(PI / 2, 12), round(PI, 12)]
    assert [nu for _, _, nu in ups] == [1, 2]


@pytest.mark.parametrize("phi,kind", [(0.0, "N1"), (2 * PI, "N1"), (PI, "N1"), (-PI / 2, "R"), (1.0, "R")])
def test_factor_rotation(phi, kind):
    f = factor_rotation(phi)
    assert f.kind == kind
    assert np.allclose(f.matrix(), rotation(phi), atol=1e-12)

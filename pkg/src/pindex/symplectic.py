"""Linear algebra on Sp(2n) in the diamond-product coordinate convention.

Coordinates are ordered ``(x_1, ..., x_n, y_1, ..., y_n)``; the i-th
symplectic plane is spanned by coordinates ``i`` and ``n + i``.  The
standard form, rotations, basic normal forms and the symmetry matrix all
live in this single convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

EPS_SP = 1e-9
EPS_U = 1e-8
EPS_KER = 1e-8
CLUSTER_TOL = 1e-6
DET_TOL = 1e-6

TWO_PI = 2.0 * math.pi


class SymplecticError(ValueError):
    """Raised when a matrix or parameter violates a structural requirement."""


def standard_J(n: int) -> np.ndarray:
    """Return ``J = [[0, -I_n], [I_n, 0]]``."""
    if n < 1:
        raise SymplecticError(f"block dimension must be >= 1, got {n}")
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


def symplectic_defect(M: np.ndarray) -> float:
    """Max-abs entry of ``M^T J M - J``."""
    M = np.asarray(M, dtype=float)
    J = standard_J(M.shape[0] // 2)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def _block_dim(M: np.ndarray) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SymplecticError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise SymplecticError(f"expected even dimension, got {M.shape[0]}")
    return M.shape[0] // 2


@dataclass(frozen=True)
class SymplecticMatrix:
    """A validated ``2n x 2n`` real symplectic matrix.

    Construction rejects matrices whose defect ``max|M^T J M - J|`` exceeds
    ``tol`` or whose determinant differs from one by more than 1e-6.
    """

    entries: np.ndarray
    tol: float = EPS_SP
    n: int = field(init=False)
    defect: float = field(init=False)

    def __post_init__(self):
        M = np.array(self.entries, dtype=float)
        n = _block_dim(M)
        if n == 0:
            raise SymplecticError("empty matrix")
        defect = symplectic_defect(M)
        if not defect <= self.tol:
            raise SymplecticError(f"symplectic defect {defect:.3e} exceeds {self.tol:.1e}")
        det = float(np.linalg.det(M))
        if abs(det - 1.0) > DET_TOL:
            raise SymplecticError(f"determinant {det!r} is not 1")
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "defect", defect)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def inverse(self) -> np.ndarray:
        # M^{-1} = -J M^T J for symplectic M
        J = standard_J(self.n)
        return -J @ self.entries.T @ J

    def to_json(self) -> list[list[float]]:
        return matrix_to_json(self.entries)


def matrix_to_json(M: np.ndarray) -> list:
    """Row-major nested lists; complex entries become ``[re, im]`` pairs."""
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return [[[float(z.real), float(z.imag)] for z in row] for row in M]
    return [[float(v) for v in row] for row in M]


def diamond(*mats: np.ndarray) -> np.ndarray:
    """Diamond product ``M_1 <> M_2 <> ...`` of even-dimensional square matrices.

    Each ``M_k = [[A_k, B_k], [C_k, D_k]]`` contributes its blocks to the
    interleaved layout ``[[A_1, 0, B_1, 0], [0, A_2, 0, B_2], [C_1, 0, D_1, 0],
    [0, C_2, 0, D_2]]``.  Zero-size factors are neutral.
    """
    blocks = []
    for M in mats:
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise SymplecticError(f"diamond factor must be square with even size, got {M.shape}")
        blocks.append(M)
    dtype = np.result_type(*blocks) if blocks else float
    n = sum(M.shape[0] // 2 for M in blocks)
    out = np.zeros((2 * n, 2 * n), dtype=dtype)
    off = 0
    for M in blocks:
        m = M.shape[0] // 2
        rows = np.r_[off:off + m, n + off:n + off + m]
        out[np.ix_(rows, rows)] = M
        off += m
    return out


def diamond_power(M: np.ndarray, k: int) -> np.ndarray:
    return diamond(*([M] * k))


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class NormalForm:
    """One basic normal-form factor.

    ``kind`` is one of ``"D"`` (params ``(lam,)``, lam = +-2), ``"N1"``
    (``(lam, b)``, lam = +-1, b in {-1, 0, 1}), ``"R"`` (``(theta,)``, theta in
    (0, pi) U (pi, 2 pi)) or ``"N2"`` (``(theta, b1, b2, b3, b4)``, b2 != b3).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        _check_normal_form(self.kind, self.params)

    def matrix(self) -> np.ndarray:
        return normal_form(self.kind, *self.params)

    @property
    def n(self) -> int:
        return 2 if self.kind == "N2" else 1

    def __str__(self):
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.kind}({args})"


def _check_normal_form(kind: str, params: tuple) -> None:
    if kind == "D":
        if len(params) != 1 or params[0] not in (2.0, -2.0):
            raise SymplecticError(f"D(lambda) needs lambda = +-2, got {params}")
    elif kind == "N1":
        if len(params) != 2 or params[0] not in (1.0, -1.0) or params[1] not in (-1.0, 0.0, 1.0):
            raise SymplecticError(f"N1(lambda, b) needs lambda = +-1, b in {{-1,0,1}}, got {params}")
    elif kind in ("R", "N2"):
        need = 1 if kind == "R" else 5
        if len(params) != need:
            raise SymplecticError(f"{kind} takes {need} parameter(s), got {params}")
        theta = params[0]
        if not (0.0 < theta < TWO_PI) or theta == math.pi:
            raise SymplecticError(f"{kind} needs theta in (0, pi) U (pi, 2 pi), got {theta}")
        if kind == "N2" and params[2] == params[3]:
            raise SymplecticError("N2(theta, B) needs b2 != b3")
    else:
        raise SymplecticError(f"unknown normal form {kind!r}")


def normal_form(kind: str, *params: float) -> np.ndarray:
    """Matrix of a basic normal form, exactly as in the catalog."""
    params = tuple(float(p) for p in params)
    _check_normal_form(kind, params)
    if kind == "D":
        lam = params[0]
        return np.array([[lam, 0.0], [0.0, 1.0 / lam]])
    if kind == "N1":
        lam, b = params
        return np.array([[lam, b], [0.0, lam]])
    if kind == "R":
        return rotation(params[0])
    theta, b1, b2, b3, b4 = params
    R = rotation(theta)
    B = np.array([[b1, b2], [b3, b4]])
    return np.block([[R, B], [np.zeros((2, 2)), R]])


def kernel_dim(X: np.ndarray, scale: float, rel_tol: float = EPS_KER) -> int:
    """Number of singular values of ``X`` below ``rel_tol * scale``."""
    s = np.linalg.svd(X, compute_uv=False)
    return int(np.sum(s <= rel_tol * scale))


def _unit_scalar(omega: complex) -> complex:
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > EPS_U:
        raise SymplecticError(f"omega = {omega} is not on the unit circle")
    return omega


def nu_omega(M: np.ndarray, omega: complex, rel_tol: float = EPS_KER) -> int:
    """``dim_C ker_C(M - omega I)``.

    The real matrix is complexified; the rank threshold is ``rel_tol`` times
    ``max(|M|_2, 1)`` so that an (almost) zero difference still reports a
    full kernel.
    """
    omega = _unit_scalar(omega)
    M = np.asarray(M, dtype=float)
    X = M.astype(complex) - omega * np.eye(M.shape[0])
    scale = max(np.linalg.norm(M, 2), 1.0)
    return kernel_dim(X, scale, rel_tol)


@dataclass(frozen=True)
class SpectralCluster:
    eigenvalue: complex
    multiplicity: int
    distance: float
    straddles: bool = False


@dataclass(frozen=True)
class UnitCircleSpectrum:
    """Clustered eigenvalues of a symplectic matrix that lie on the unit circle."""

    entries: tuple[SpectralCluster, ...]
    flagged: tuple[SpectralCluster, ...] = ()

    @property
    def height(self) -> int:
        return sum(c.multiplicity for c in self.entries)


def cluster_eigenvalues(eigs: np.ndarray, tol: float = CLUSTER_TOL) -> list[list[complex]]:
    """Single-linkage clusters of eigenvalues closer than ``tol``."""
    eigs = list(np.asarray(eigs, dtype=complex))
    parent = list(range(len(eigs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(eigs)):
        for j in range(i + 1, len(eigs)):
            if abs(eigs[i] - eigs[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i, z in enumerate(eigs):
        groups.setdefault(find(i), []).append(z)
    return sorted(groups.values(), key=lambda g: (np.angle(np.mean(g)), abs(np.mean(g))))


def unit_circle_spectrum(M: np.ndarray, eps_u: float = EPS_U,
                         cluster_tol: float = CLUSTER_TOL) -> UnitCircleSpectrum:
    M = np.asarray(M, dtype=float)
    try:
        eigs = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SymplecticError(f"eigensolver failed: {exc}") from exc
    on, flagged = [], []
    for group in cluster_eigenvalues(eigs, cluster_tol):
        center = complex(np.mean(group))
        dist = abs(abs(center) - 1.0)
        member_in = [abs(abs(z) - 1.0) <= eps_u for z in group]
        straddles = any(member_in) != all(member_in) or (dist <= eps_u and not all(member_in))
        cl = SpectralCluster(center, len(group), dist, straddles)
        if dist <= eps_u:
            on.append(cl)
        if straddles:
            flagged.append(cl)
    return UnitCircleSpectrum(tuple(on), tuple(flagged))


def elliptic_height(M: np.ndarray, eps_u: float = EPS_U, cluster_tol: float = CLUSTER_TOL) -> int:
    """Total algebraic multiplicity of the eigenvalues of ``M`` on the unit circle."""
    return unit_circle_spectrum(M, eps_u, cluster_tol).height


def algebraic_multiplicity(M: np.ndarray, omega: complex, cluster_tol: float = CLUSTER_TOL) -> int:
    """Size of the eigenvalue cluster of ``M`` sitting at ``omega`` (0 if none)."""
    for group in cluster_eigenvalues(np.linalg.eigvals(np.asarray(M, dtype=float)), cluster_tol):
        if abs(np.mean(group) - omega) <= cluster_tol:
            return len(group)
    return 0


def _angle_fraction(theta: float, k: int) -> Fraction | None:
    """``theta / (2 pi)`` as ``j / k`` if ``theta`` is commensurate with ``k``."""
    j = theta * k / TWO_PI
    jr = round(j)
    if abs(j - jr) > 1e-9 * max(1.0, abs(j)):
        return None
    return Fraction(int(jr), k)


@dataclass(frozen=True)
class SymmetryDescriptor:
    """``P = R(theta_1) <> ... <> R(theta_n)`` with ``P^k = I`` and ``ker(P - I) = 0``."""

    angles: tuple[float, ...]
    k: int
    matrix: np.ndarray
    fractions: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def inverse(self) -> np.ndarray:
        return self.matrix.T

    def inverse_nu(self, omega: complex) -> int:
        """``nu_omega(P^{-1})`` from the angle list.

        ``R(-theta)`` has eigenvalues ``e^{+i theta}`` and ``e^{-i theta}``;
        for ``theta = pi`` both equal -1, contributing two.
        """
        omega = _unit_scalar(omega)
        count = 0
        for theta in self.angles:
            for z in (complex(math.cos(theta), math.sin(theta)),
                      complex(math.cos(theta), -math.sin(theta))):
                if abs(z - omega) <= 1e-9:
                    count += 1
        return count

    def upper_inverse_eigenvalues(self) -> list[tuple[float, complex, int]]:
        """Eigenvalues of ``P^{-1}`` with nonnegative imaginary part.

        Returned as ``(angle, omega, nu)`` sorted anticlockwise, deduplicated,
        computed from the exact angle fractions.
        """
        seen: dict[Fraction, int] = {}
        for fr in self.fractions:
            for f in (fr, 1 - fr):
                if f <= Fraction(1, 2):
                    seen[f] = 0
        out = []
        for f in sorted(seen):
            ang = float(f) * TWO_PI
            omega = complex(math.cos(ang), math.sin(ang))
            if f == Fraction(1, 2):
                omega = complex(-1.0, 0.0)
            out.append((ang, omega, self.inverse_nu(omega)))
        return out

    def to_json(self) -> dict:
        return {"angles": list(self.angles), "k": self.k,
                "fractions": [str(f) for f in self.fractions],
                "matrix": matrix_to_json(self.matrix)}


def build_symmetry(angles, k: int, tol: float = EPS_SP, ker_tol: float = EPS_KER) -> SymmetryDescriptor:
    """Validate angles against the order ``k`` and assemble ``P``."""
    angles = tuple(float(t) for t in angles)
    if not angles:
        raise SymplecticError("need at least one angle")
    if int(k) != k or k < 2:
        raise SymplecticError(f"order k must be an integer >= 2, got {k}")
    k = int(k)
    fractions = []
    for theta in angles:
        fr = _angle_fraction(theta, k)
        if fr is None:
            raise SymplecticError(f"angle {theta} is not a multiple of 2*pi/{k}")
        if fr.numerator % fr.denominator == 0:
            raise SymplecticError(
                f"angle {theta} is 0 mod 2*pi, which violates ker(P - I) = 0")
        if not (0.0 < theta < TWO_PI):
            raise SymplecticError(f"angle {theta} must lie in (0, 2*pi)")
        fractions.append(fr)
    P = diamond(*(rotation(t) for t in angles))
    n = len(angles)
    I = np.eye(2 * n)
    if np.max(np.abs(P.T @ P - I)) > tol:
        raise SymplecticError("P is not orthogonal")
    if np.max(np.abs(np.linalg.matrix_power(P, k) - I)) > k * tol:
        raise SymplecticError(f"P^{k} != I")
    smin = np.linalg.svd(P - I, compute_uv=False)[-1]
    if smin <= ker_tol:
        raise SymplecticError("ker(P - I) != 0")
    P.setflags(write=False)
    return SymmetryDescriptor(angles, k, P, tuple(fractions))


def factor_rotation(phi: float, tol: float = 1e-12) -> NormalForm:
    """Normal-form factor of ``R(phi)``: N1(1,0) at 0, N1(-1,0) at pi, else R."""
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if phi < tol or TWO_PI - phi < tol:
        return NormalForm("N1", (1, 0))
    if abs(phi - math.pi) < tol:
        return NormalForm("N1", (-1, 0))
    return NormalForm("R", (phi,))

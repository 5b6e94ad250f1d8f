"""Maslov (P, omega)-index, nullity and splitting numbers.

Indices are computed only for paths generated by a positive definite
``A(t)``: then ``i_omega^P = nu_omega(P^{-1}) + sum_{0<s<tau} nu_omega^P(gamma(s))``,
a crossing count against ``omega P`` on the complexified path.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .crossings import CrossingRecord, ScanConfig, scan_crossings
from .ekeland import index_by_crossings
from .paths import CoefficientPath, SymplecticPath, integrate_fundamental
from .symplectic import (EPS_KER, EPS_U, NormalForm, SymmetryDescriptor, diamond, factor_rotation,
                         kernel_dim, nu_omega, unit_circle_spectrum)

EPS_SEQUENCE = (1e-2, 1e-3, 1e-4, 1e-5)
OMEGA_TOL = 1e-9


class UnsupportedFactorError(ValueError):
    """Normal-form factor without a catalog entry (N2 blocks)."""


class SplittingError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


def _unit(omega) -> complex:
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > 1e-8:
        raise ValueError(f"omega = {omega} is not on the unit circle")
    return omega


def _same(z: complex, w: complex) -> bool:
    return abs(z - w) <= OMEGA_TOL


def _cjson(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass
class MaslovReport:
    omega: complex
    index: int
    nullity: int
    base: int
    crossings: list[CrossingRecord] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"omega": _cjson(self.omega), "index": self.index, "nullity": self.nullity,
                "base": self.base, "crossings": [c.to_json() for c in self.crossings],
                "params": self.params}


def nu_P_omega(gamma: SymplecticPath | np.ndarray, P: SymmetryDescriptor, omega,
               eps_ker: float = EPS_KER) -> int:
    """``dim_C ker_C(gamma(tau) - omega P)``."""
    omega = _unit(omega)
    end = gamma.end if isinstance(gamma, SymplecticPath) else np.asarray(gamma, dtype=float)
    X = end.astype(complex) - omega * P.matrix
    return kernel_dim(X, max(np.linalg.norm(end, 2), 1.0), eps_ker)


def i_P_omega(A: CoefficientPath, P: SymmetryDescriptor, omega, s: float | None = None,
              gamma: SymplecticPath | None = None, config: ScanConfig = ScanConfig()) -> MaslovReport:
    """Maslov ``(P, omega)``-index of ``gamma_A`` on ``[0, s]`` by crossing count."""
    omega = _unit(omega)
    s = A.tau if s is None else s
    As = A.restricted(s)
    if gamma is None or abs(gamma.tau - s) > 1e-14 * max(1.0, s):
        gamma = integrate_fundamental(As)
    scan = scan_crossings(gamma, omega * P.matrix, As, config)
    base = P.inverse_nu(omega)
    nullity = nu_P_omega(gamma, P, omega, config.eps_ker)
    return MaslovReport(omega, base + scan.interior_sum, nullity, base, scan.interior,
                        {"s": s, "scan_points": config.points, "steps": gamma.steps,
                         "evaluations": scan.evaluations})


def theorem36_check(A: CoefficientPath, P: SymmetryDescriptor, s: float | None = None,
                    gamma: SymplecticPath | None = None,
                    config: ScanConfig = ScanConfig()) -> dict:
    """``i_1^P = nu_1(P^{-1}) + i_P^E`` with the two sides from separate scans.

    The left side scans the complexified ``gamma - 1 * P``; the right side is
    the real Ekeland crossing count plus the angle-arithmetic base term.
    """
    s = A.tau if s is None else s
    lhs = i_P_omega(A, P, 1.0, s, gamma, config)
    ek = index_by_crossings(A, P, s, config, gamma=gamma)
    base = P.inverse_nu(1.0)
    rhs = base + ek.index
    out = {"lhs": lhs.index, "rhs": rhs, "nu1_Pinv": base, "ekeland": ek.index,
           "pass": lhs.index == rhs}
    if lhs.index != rhs:
        out["maslov_crossings"] = [c.to_json() for c in lhs.crossings]
        out["ekeland_crossings"] = [c.to_json() for c in ek.crossings]
    return out


@dataclass
class SplittingReport:
    omega: complex
    plus: int
    minus: int
    method: str
    trace: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    @property
    def pair(self) -> tuple[int, int]:
        return self.plus, self.minus

    def to_json(self) -> dict:
        return {"omega": _cjson(self.omega), "plus": self.plus, "minus": self.minus,
                "method": self.method, "trace": self.trace, "detail": self.detail}


def splitting_limit(A: CoefficientPath, P: SymmetryDescriptor, omega,
                    eps_sequence=EPS_SEQUENCE, gamma: SymplecticPath | None = None,
                    config: ScanConfig = ScanConfig()) -> SplittingReport:
    """``_P S_M^{+-}(omega)`` with ``M = gamma_A(tau)`` as a limit over rotated ``omega``.

    The pair ``(i(omega e^{+i eps}) - i(omega), i(omega e^{-i eps}) - i(omega))``
    is evaluated along ``eps_sequence``; the first pair repeated at two
    consecutive ``eps`` is accepted.
    """
    omega = _unit(omega)
    if gamma is None:
        gamma = integrate_fundamental(A)
    i0 = i_P_omega(A, P, omega, gamma=gamma, config=config).index
    trace = []
    prev = None
    for eps in eps_sequence:
        plus = i_P_omega(A, P, omega * cmath.exp(1j * eps), gamma=gamma, config=config).index - i0
        minus = i_P_omega(A, P, omega * cmath.exp(-1j * eps), gamma=gamma, config=config).index - i0
        trace.append([eps, plus, minus])
        if prev == (plus, minus):
            return SplittingReport(omega, plus, minus, "limit", trace, {"i_omega": i0})
        prev = (plus, minus)
    raise SplittingError(f"splitting numbers at omega={omega:.6g} did not stabilise", trace)


def _factor_splitting(f: NormalForm, omega: complex) -> tuple[int, int]:
    """Catalog entry ``(S^+, S^-)`` of one basic normal form."""
    if f.kind == "N2":
        raise UnsupportedFactorError(f"no catalog entry for {f}")
    if f.kind == "D":
        return 0, 0
    if f.kind == "N1":
        lam, b = f.params
        if not _same(omega, complex(lam, 0.0)):
            return 0, 0
        # S^+(+-1) = S^-(+-1) by conjugation symmetry
        if lam > 0:
            v = 1 if b >= 0 else 0
        else:
            v = 1 if b <= 0 else 0
        return v, v
    theta = f.params[0]
    z = cmath.exp(1j * theta)
    if _same(omega, z):
        return 0, 1
    if _same(omega, z.conjugate()):
        return 1, 0
    return 0, 0


def splitting_table(factors, omega) -> SplittingReport:
    """``S_M^{+-}(omega)`` for ``M`` given as a list of normal-form factors (additive over <>)."""
    omega = _unit(omega)
    factors = [f if isinstance(f, NormalForm) else NormalForm(*f) for f in factors]
    plus = minus = 0
    parts = []
    for f in factors:
        p, m = _factor_splitting(f, omega)
        plus += p
        minus += m
        parts.append([str(f), p, m])
    return SplittingReport(omega, plus, minus, "table", [], {"factors": parts})


def rotation_factors(phis) -> list[NormalForm]:
    """Factored form of ``R(phi_1) <> ... <> R(phi_n)``."""
    return [factor_rotation(p) for p in phis]


def inverse_factors(P: SymmetryDescriptor) -> list[NormalForm]:
    """``P^{-1} = R(-theta_1) <> ... <> R(-theta_n)`` as normal forms."""
    return rotation_factors([-t for t in P.angles])


def inverse_splitting(P: SymmetryDescriptor, omega) -> tuple[int, int]:
    return splitting_table(inverse_factors(P), omega).pair


def factored_matrix(factors) -> np.ndarray:
    factors = [f if isinstance(f, NormalForm) else NormalForm(*f) for f in factors]
    return diamond(*(f.matrix() for f in factors))


def lemma34i_check(A: CoefficientPath, P: SymmetryDescriptor, omega, factors=None,
                   gamma: SymplecticPath | None = None,
                   config: ScanConfig = ScanConfig()) -> dict:
    """Compare the limit ``_P S_M^{+-}(omega)`` with ``S_{P^{-1}M} - S_{P^{-1}}`` from the catalog.

    ``factors`` is the factored form of ``P^{-1} M``; when omitted the check is
    skipped with a notice.
    """
    omega = _unit(omega)
    if factors is None:
        return {"omega": _cjson(omega), "skipped": "P^-1 M has no factored form", "pass": None}
    if gamma is None:
        gamma = integrate_fundamental(A)
    N = P.inverse @ gamma.end
    fm = factored_matrix(factors)
    fact_res = float(np.max(np.abs(fm - N)))
    lim = splitting_limit(A, P, omega, gamma=gamma, config=config)
    tn = splitting_table(factors, omega)
    tp = inverse_splitting(P, omega)
    rhs = (tn.plus - tp[0], tn.minus - tp[1])
    return {"omega": _cjson(omega), "limit": list(lim.pair), "table": list(rhs),
            "factor_residual": fact_res, "pass": lim.pair == rhs and fact_res <= 1e-6,
            "trace": lim.trace}


def rotation_family_factors(a: float, P: SymmetryDescriptor, tau: float = 1.0) -> list[NormalForm]:
    """Factored ``P^{-1} R(a tau)^{<>n}`` for the constant family ``A = a I``."""
    return rotation_factors([a * tau - t for t in P.angles])


def unit_eigen_angles(M: np.ndarray, eps_u: float = EPS_U) -> list[float]:
    """Distinct arguments in ``[0, pi]`` of the unit-circle eigenvalue clusters of ``M``."""
    out: list[float] = []
    for c in unit_circle_spectrum(M, eps_u).entries:
        z = c.eigenvalue
        if z.imag < -1e-12:
            continue
        out.append(abs(math.atan2(z.imag, z.real)))
    return sorted(out)


def nu_inverse_table(P: SymmetryDescriptor, omega) -> int:
    """``nu_omega(P^{-1})`` on the matrix, for cross-checking the angle arithmetic."""
    return nu_omega(P.inverse, omega)

"""Ekeland P-index and nullity of a positive definite coefficient path.

Two independent routes:

* crossing counting -- the index on ``[0, s]`` is the sum of
  ``dim ker(gamma_A(sigma) - P)`` over interior ``sigma``;
* Galerkin counting -- negative eigenvalues of the quadratic form
  ``q_s(u, u) = 1/2 int (Ju, Pi_s u) + (B Ju, Ju)`` restricted to vector-valued
  piecewise constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .crossings import CrossingRecord, ScanConfig, scan_crossings
from .paths import CoefficientPath, integrate_fundamental, SymplecticPath
from .symplectic import EPS_KER, SymmetryDescriptor, kernel_dim, standard_J

EPS_GAL = 1e-4
COND_LIMIT = 1e12
GAUSS3 = np.polynomial.legendre.leggauss(3)


class GalerkinError(RuntimeError):
    pass


@dataclass
class EkelandIndexReport:
    index: int
    nullity: int
    method: str
    crossings: list[CrossingRecord] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"index": self.index, "nullity": self.nullity, "method": self.method,
                "crossings": [c.to_json() for c in self.crossings], "params": self.params}


def _path(A: CoefficientPath, s: float, gamma: SymplecticPath | None, steps=None) -> SymplecticPath:
    if gamma is not None and abs(gamma.tau - s) <= 1e-14 * max(1.0, s):
        return gamma
    return integrate_fundamental(A.restricted(s), steps)


def nullity_at(A: CoefficientPath, P: SymmetryDescriptor, s: float,
               gamma: SymplecticPath | None = None, eps_ker: float = EPS_KER) -> int:
    """``dim ker(gamma_A(s) - P)``."""
    if not (0.0 < s <= A.tau):
        raise ValueError(f"s = {s} outside (0, {A.tau}]")
    g = gamma.at(s) if gamma is not None else _path(A, s, None).end
    return kernel_dim(g - P.matrix, max(np.linalg.norm(g, 2), 1.0), eps_ker)


def index_by_crossings(A: CoefficientPath, P: SymmetryDescriptor, s: float | None = None,
                       config: ScanConfig = ScanConfig(), steps: int | None = None,
                       gamma: SymplecticPath | None = None) -> EkelandIndexReport:
    """Sum of crossing nullities over ``0 < sigma < s``; endpoint nullity reported apart."""
    s = A.tau if s is None else s
    if not (0.0 < s <= A.tau):
        raise ValueError(f"s = {s} outside (0, {A.tau}]")
    As = A.restricted(s)
    g = _path(As, s, gamma, steps)
    scan = scan_crossings(g, P.matrix, As, config)
    nullity = kernel_dim(g.end - P.matrix, max(np.linalg.norm(g.end, 2), 1.0), config.eps_ker)
    return EkelandIndexReport(scan.interior_sum, nullity, "crossing", scan.interior,
                              {"s": s, "scan_points": config.points, "steps": g.steps,
                               "max_defect": g.max_defect, "evaluations": scan.evaluations})


def pi_nodes(u: np.ndarray, P: np.ndarray, s: float) -> np.ndarray:
    """Node values of ``x = Pi_s u`` for piecewise-constant ``u`` of shape ``(m, 2n)``.

    ``x(t) = int_0^t u + (P - I)^{-1} int_0^s u``; ``x`` is affine on each cell.
    """
    u = np.asarray(u, dtype=float)
    m, d = u.shape
    h = s / m
    total = h * u.sum(axis=0)
    x0 = np.linalg.solve(P - np.eye(d), total)
    return x0 + np.vstack([np.zeros(d), h * np.cumsum(u, axis=0)])


def pi_pairing(u: np.ndarray, v: np.ndarray, P: np.ndarray, s: float) -> float:
    """Exact ``int_0^s (Pi_s u, v) dt`` for piecewise constants."""
    x = pi_nodes(u, P, s)
    h = s / len(u)
    mid = 0.5 * (x[:-1] + x[1:])
    return float(h * np.sum(mid * v))


def antisymmetry_check(u: np.ndarray, v: np.ndarray, P: SymmetryDescriptor | np.ndarray,
                       s: float) -> tuple[float, float]:
    """Return ``|int (Pi u, v) + int (u, Pi v)|`` and ``|x(s) - P x(0)|`` for ``x = Pi u``."""
    Pm = P.matrix if isinstance(P, SymmetryDescriptor) else np.asarray(P)
    res = abs(pi_pairing(u, v, Pm, s) + pi_pairing(v, u, Pm, s))
    x = pi_nodes(u, Pm, s)
    return res, float(np.linalg.norm(x[-1] - Pm @ x[0]))


def galerkin_matrices(A: CoefficientPath, P: np.ndarray, s: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``-int (u, J Pi_s u)`` and of ``int (B Ju, Ju)`` on ``m`` uniform cells.

    ``2 q_s(u, u) = U^T (L + G) U`` for the stacked cell values ``U``.  The
    ``Pi_s`` part is exact; ``B = A^{-1}`` uses 3-point Gauss-Legendre per cell.
    """
    n = A.n
    d = 2 * n
    J = standard_J(n)
    K = np.linalg.inv(P - np.eye(d))
    h = s / m
    mask = h * h * (np.tril(np.ones((m, m)), -1) + 0.5 * np.eye(m))
    L = np.kron(mask, J.T) + np.kron(np.full((m, m), h * h), J.T @ K)
    L = 0.5 * (L + L.T)
    nodes, weights = GAUSS3
    left = np.arange(m) * h
    ts = (left[:, None] + 0.5 * h * (nodes[None, :] + 1.0)).ravel()
    B = np.linalg.inv(A.many(ts)).reshape(m, len(nodes), d, d)
    Bc = 0.5 * h * np.einsum("q,cqab->cab", weights, B)
    G = scipy.linalg.block_diag(*(J.T @ Bc @ J))
    return L, G


def galerkin_spectrum(A: CoefficientPath, P: SymmetryDescriptor, s: float, m: int,
                      rescaled: bool = False) -> np.ndarray:
    """Generalised eigenvalues ``mu`` of ``(L + G) v = mu G v`` (ascending).

    ``mu = 1 - lambda`` where ``lambda`` are the eigenvalues of ``Bbar^{-1} J Pi_s``.
    """
    cond = np.linalg.cond(P.matrix - np.eye(2 * P.n))
    if cond > COND_LIMIT:
        raise GalerkinError(f"P - I is ill-conditioned (cond {cond:.2e})")
    if rescaled:
        As = CoefficientPath(lambda ts: A.func(s * ts), 1.0, A.n, A.name)
        L, G = galerkin_matrices(As, P.matrix, 1.0, m)
        L = s * L
    else:
        L, G = galerkin_matrices(A, P.matrix, s, m)
    if not np.all(np.isfinite(G)):
        raise GalerkinError("quadrature of B(t) produced non-finite values")
    return scipy.linalg.eigh(L + G, G, eigvals_only=True)


def _extrapolate(coarse: np.ndarray, fine: np.ndarray, window: float = 0.25) -> np.ndarray:
    """Richardson-extrapolate the fine eigenvalues with ``|mu| < window`` (error is O(h^2)).

    Each one is paired with the nearest coarse eigenvalue; only the low modes
    are resolved on both meshes, so the window is kept small.
    """
    near = fine[np.abs(fine) < window]
    if len(near) == 0:
        return near
    partner = coarse[np.argmin(np.abs(coarse[None, :] - near[:, None]), axis=1)]
    return (4.0 * near - partner) / 3.0


def _classify(coarse: np.ndarray, fine: np.ndarray, eps_gal: float) -> tuple[int, int, float]:
    """(negative, near-zero, closest-to-zero) counts; far eigenvalues use the raw fine mesh."""
    ex = _extrapolate(coarse, fine)
    far_neg = int(np.sum(fine <= -0.25))
    neg = far_neg + int(np.sum(ex < -eps_gal))
    zero = int(np.sum(np.abs(ex) <= eps_gal))
    if len(ex):
        near = float(ex[np.argmin(np.abs(ex))])
    else:
        near = float(fine[np.argmin(np.abs(fine))])
    return neg, zero, near


def index_by_galerkin(A: CoefficientPath, P: SymmetryDescriptor, s: float | None = None,
                      m: int = 32, eps_gal: float = EPS_GAL, m_max: int = 256,
                      stabilize: bool = True, rescaled: bool = False) -> EkelandIndexReport:
    """Negative and near-zero eigenvalue counts of the discretised form ``q_s``.

    Spectra on ``m`` and ``2m`` cells are combined by Richardson extrapolation;
    ``m`` doubles until two consecutive extrapolated counts agree or ``m_max``
    is reached.  With ``stabilize=False`` the raw ``m``-cell spectrum is used.
    """
    s = A.tau if s is None else s
    if m < 8:
        raise ValueError(f"need m >= 8, got {m}")
    if not stabilize:
        mu = galerkin_spectrum(A, P, s, m, rescaled)
        return EkelandIndexReport(int(np.sum(mu < -eps_gal)), int(np.sum(np.abs(mu) <= eps_gal)),
                                  "galerkin", [], {"s": s, "m": m, "eps_gal": eps_gal,
                                                   "stabilized": False, "rescaled": rescaled,
                                                   "lowest": float(mu[0])})
    history = []
    prev = galerkin_spectrum(A, P, s, m, rescaled)
    while 2 * m <= m_max:
        m *= 2
        mu = galerkin_spectrum(A, P, s, m, rescaled)
        neg, zero, near = _classify(prev, mu, eps_gal)
        history.append((m, neg, zero, near))
        prev = mu
        if len(history) >= 2 and history[-1][1:3] == history[-2][1:3]:
            break
    if not history:
        raise ValueError(f"m_max = {m_max} leaves no room for a refinement of m = {m}")
    m, neg, zero, _ = history[-1]
    stable = len(history) >= 2 and history[-1][1:3] == history[-2][1:3]
    return EkelandIndexReport(neg, zero, "galerkin", [],
                              {"s": s, "m": m, "eps_gal": eps_gal, "stabilized": stable,
                               "history": history, "rescaled": rescaled})

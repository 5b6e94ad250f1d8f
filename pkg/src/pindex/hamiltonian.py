"""Rotation-invariant ellipsoid Hamiltonians ``H = j^alpha`` and their Legendre duals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularPointError(ValueError):
    """``H''`` requested too close to the origin."""


@dataclass(frozen=True)
class EllipsoidSurface:
    """``Sigma = {j = 1}`` with ``j(x)^2 = sum_j (x_j^2 + x_{n+j}^2) / r_j^2``.

    Attributes
    ----------
    radii : tuple of float
        Plane radii ``r_1 .. r_n``.
    alpha : float
        Homogeneity exponent of ``H = j^alpha``, in ``(1, 2)``.
    """

    radii: tuple[float, ...]
    alpha: float = 1.5

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or min(radii) <= 0:
            raise ValueError(f"radii must be positive, got {self.radii}")
        if not (1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return len(self.radii)

    @property
    def beta(self) -> float:
        return self.alpha / (self.alpha - 1.0)

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of ``W`` with ``j(x)^2 = x^T W x``."""
        w = 1.0 / np.asarray(self.radii) ** 2
        return np.concatenate([w, w])

    def gauge(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.sum(self.weights * x * x, axis=-1))

    def dual_gauge(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.sqrt(np.sum(y * y / self.weights, axis=-1))

    def to_json(self) -> dict:
        return {"radii": list(self.radii), "alpha": self.alpha}


def hamiltonian_eval(surface: EllipsoidSurface, x, hessian: bool = True,
                     min_norm: float = 1e-8):
    """Value, gradient and (optionally) Hessian of ``H = j^alpha``.

    Works on a single point ``(2n,)`` or a batch ``(m, 2n)``.  With
    ``q = x^T W x``: ``H' = alpha q^{a/2-1} W x`` and
    ``H'' = alpha q^{a/2-1} (W + (alpha - 2) W x x^T W / q)``.

    Returns
    -------
    H, dH, d2H
        ``d2H`` is ``None`` when ``hessian`` is false.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    a = surface.alpha
    w = surface.weights
    q = np.sum(w * X * X, axis=1)
    if hessian and np.any(np.sqrt(q) < min_norm):
        raise SingularPointError("H'' is singular at the origin")
    H = q ** (a / 2)
    # H' -> 0 at the origin since alpha > 1
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(q > 0, a * q ** (a / 2 - 1), 0.0)
    Wx = w * X
    dH = c[:, None] * Wx
    d2H = None
    if hessian:
        d2H = c[:, None, None] * (np.diag(w)[None] + (a - 2.0) * Wx[:, :, None] * Wx[:, None, :]
                                  / q[:, None, None])
    if single:
        return H[0], dH[0], (d2H[0] if hessian else None)
    return H, dH, d2H


def legendre_dual(surface: EllipsoidSurface, y):
    """``H*(y) = (alpha - 1) alpha^{-beta} j*(y)^beta`` and its gradient.

    ``j*(y)^2 = sum_j r_j^2 (y_j^2 + y_{n+j}^2)``; the gradient is
    ``alpha^{1-beta} j*^{beta-2} W^{-1} y`` (zero at the origin).
    """
    y = np.asarray(y, dtype=float)
    a, b = surface.alpha, surface.beta
    js = surface.dual_gauge(y)
    val = (a - 1.0) * a ** (-b) * js ** b
    with np.errstate(divide="ignore", invalid="ignore"):
        fac = np.where(js > 0, a ** (1.0 - b) * js ** (b - 2.0), 0.0)
    grad = np.asarray(fac)[..., None] * (y / surface.weights)
    return val, grad


def symmetry_residuals(surface: EllipsoidSurface, P: np.ndarray, points) -> dict:
    """Max of ``|P H'(x) - H'(Px)|``, ``|H''(Px) P - P H''(x)|`` and ``|H(Px) - H(x)|`` over points."""
    X = np.atleast_2d(np.asarray(points, dtype=float))
    PX = X @ P.T
    H0, g0, h0 = hamiltonian_eval(surface, X)
    H1, g1, h1 = hamiltonian_eval(surface, PX)
    return {"gradient": float(np.max(np.abs(g0 @ P.T - g1))),
            "hessian": float(np.max(np.abs(h1 @ P - P @ h0))),
            "value": float(np.max(np.abs(H1 - H0)))}

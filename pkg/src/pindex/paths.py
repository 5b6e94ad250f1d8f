"""Coefficient paths ``A(t)`` and their fundamental solutions ``gamma_A``.

The fundamental solution of ``z' = J A(t) z`` is integrated with the classical
fixed-step fourth-order Runge-Kutta scheme.  Because the system is linear,
each step is a matrix propagator ``S_i`` and the path is the running product
``gamma(t_{i+1}) = S_i gamma(t_i)``; propagators for all steps are formed in
one batched pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .symplectic import SymmetryDescriptor, matrix_to_json, standard_J

EPS_PATH = 1e-9
MAX_DOUBLINGS = 6
SYM_TOL = 1e-10


class IntegrationError(RuntimeError):
    """The symplectic-defect target could not be met."""

    def __init__(self, message, achieved_defect=None):
        super().__init__(message)
        self.achieved_defect = achieved_defect


class CoefficientError(ValueError):
    """A(t) is not symmetric positive definite on the sample grid."""


@dataclass(frozen=True)
class CoefficientPath:
    """Symmetric positive definite path ``t -> A(t)`` on ``[0, tau]``.

    ``func`` maps an array of times of shape ``(m,)`` to an array of matrices
    of shape ``(m, 2n, 2n)``.  Validation samples ``samples`` equally spaced
    times and caches the smallest eigenvalue seen as ``margin``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    tau: float
    n: int
    name: str = "custom"
    params: dict = field(default_factory=dict)
    samples: int = 257
    margin: float = field(init=False)

    def __post_init__(self):
        if not self.tau >= 0:
            raise CoefficientError(f"horizon must be nonnegative, got {self.tau}")
        ts = np.linspace(0.0, self.tau, self.samples)
        A = self.many(ts)
        if A.shape[1:] != (2 * self.n, 2 * self.n):
            raise CoefficientError(f"A(t) has shape {A.shape[1:]}, expected {(2 * self.n,) * 2}")
        asym = np.max(np.abs(A - np.swapaxes(A, 1, 2)))
        if asym > 1e-10:
            raise CoefficientError(f"A(t) not symmetric (max asymmetry {asym:.2e})")
        lam = np.linalg.eigvalsh(A)[:, 0]
        i = int(np.argmin(lam))
        if lam[i] <= 0:
            raise CoefficientError(f"A(t) not positive definite at t={ts[i]:.6g} (eigenvalue {lam[i]:.3e})")
        object.__setattr__(self, "margin", float(lam[i]))

    def many(self, ts) -> np.ndarray:
        return np.asarray(self.func(np.atleast_1d(np.asarray(ts, dtype=float))), dtype=float)

    def __call__(self, t: float) -> np.ndarray:
        return self.many([t])[0]

    def inverse(self, t: float) -> np.ndarray:
        return np.linalg.inv(self(t))

    def norm_bound(self) -> float:
        ts = np.linspace(0.0, self.tau, self.samples)
        return float(np.max(np.linalg.eigvalsh(self.many(ts))[:, -1]))

    def shifted(self, s: float, tau: float | None = None) -> "CoefficientPath":
        """``t -> A(t + s)`` on ``[0, tau]`` (default ``self.tau - s``)."""
        f = self.func
        return CoefficientPath(lambda ts: f(ts + s), self.tau - s if tau is None else tau,
                               self.n, f"{self.name}|shift{s:g}", dict(self.params))

    def restricted(self, s: float) -> "CoefficientPath":
        return CoefficientPath(self.func, s, self.n, self.name, dict(self.params))

    def rescaled(self, s: float) -> "CoefficientPath":
        """``t -> A(s t)`` on ``[0, 1]``."""
        f = self.func
        return CoefficientPath(lambda ts: f(s * ts), 1.0, self.n, f"{self.name}|scale{s:g}",
                               dict(self.params))

    @classmethod
    def from_samples(cls, times, values, name="sampled") -> "CoefficientPath":
        """Piecewise-linear interpolation of sampled symmetric matrices."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise CoefficientError("sample times must start at 0 and increase strictly")
        flat = values.reshape(len(times), -1)

        def func(ts):
            out = np.empty((len(ts), flat.shape[1]))
            for j in range(flat.shape[1]):
                out[:, j] = np.interp(ts, times, flat[:, j])
            return out.reshape(len(ts), *values.shape[1:])

        return cls(func, float(times[-1]), values.shape[1] // 2, name,
                   samples=max(257, 2 * len(times) + 1))


def rk4_propagators(A: CoefficientPath, t0: np.ndarray, h: np.ndarray) -> np.ndarray:
    """One-step RK4 propagators for ``z' = J A z`` from ``t0`` over ``h`` (batched)."""
    t0 = np.atleast_1d(np.asarray(t0, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), t0.shape)
    J = standard_J(A.n)
    F0 = J @ A.many(t0)
    Fm = J @ A.many(t0 + h / 2)
    F1 = J @ A.many(t0 + h)
    I = np.eye(2 * A.n)
    hh = h[:, None, None]
    k1 = F0
    k2 = Fm @ (I + hh / 2 * k1)
    k3 = Fm @ (I + hh / 2 * k2)
    k4 = F1 @ (I + hh * k3)
    return I + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _defects(values: np.ndarray) -> np.ndarray:
    J = standard_J(values.shape[1] // 2)
    D = np.swapaxes(values, 1, 2) @ J @ values - J
    return np.max(np.abs(D), axis=(1, 2))


@dataclass(frozen=True)
class SymplecticPath:
    """Grid-sampled symplectic path with ``gamma(0) = I``.

    Values between grid points come from ``_eval``: one RK4 step from the
    nearest lower grid point for integrated paths, or the symmetry recursion
    for extended ones.
    """

    grid: np.ndarray
    values: np.ndarray
    max_defect: float
    rule: str
    _eval: Callable[[float], np.ndarray] = field(repr=False, compare=False)
    steps: int = 0

    @property
    def tau(self) -> float:
        return float(self.grid[-1])

    @property
    def n(self) -> int:
        return self.values.shape[1] // 2

    @property
    def end(self) -> np.ndarray:
        return self.values[-1]

    def at(self, s: float) -> np.ndarray:
        if not (0.0 <= s <= self.tau * (1 + 1e-14)):
            raise ValueError(f"time {s} outside [0, {self.tau}]")
        return self._eval(min(float(s), self.tau))

    def to_json(self) -> dict:
        return {"grid": [float(t) for t in self.grid],
                "values": [matrix_to_json(V) for V in self.values],
                "max_defect": self.max_defect, "interpolation": self.rule,
                "steps": self.steps}


def _grid_eval(A: CoefficientPath, grid: np.ndarray, values: np.ndarray):
    def ev(s: float) -> np.ndarray:
        i = int(np.searchsorted(grid, s, side="right") - 1)
        i = min(max(i, 0), len(grid) - 1)
        dt = s - grid[i]
        if dt <= 0.0:
            return values[i].copy()
        return rk4_propagators(A, np.array([grid[i]]), np.array([dt]))[0] @ values[i]
    return ev


def default_steps(A: CoefficientPath, step_angle: float = 0.01, minimum: int = 64) -> int:
    """Step count keeping ``h * max|A|`` near ``step_angle``."""
    return max(minimum, int(math.ceil(A.tau * A.norm_bound() / step_angle)))


def integrate_fundamental(A: CoefficientPath, steps: int | None = None,
                          eps_path: float = EPS_PATH,
                          max_doublings: int = MAX_DOUBLINGS) -> SymplecticPath:
    """Fundamental solution of ``Gamma' = J A(t) Gamma``, ``Gamma(0) = I``, on ``[0, A.tau]``.

    The step count doubles (at most ``max_doublings`` times) until the max
    symplectic defect over the grid is at most ``eps_path``.
    """
    if steps is None:
        steps = default_steps(A)
    if steps < 16:
        raise ValueError(f"need at least 16 steps, got {steps}")
    I = np.eye(2 * A.n)
    if A.tau == 0.0:
        values = I[None].copy()
        grid = np.array([0.0])
        return SymplecticPath(grid, values, 0.0, "rk4-step", _grid_eval(A, grid, values), 0)
    defect = math.inf
    for _ in range(max_doublings + 1):
        grid = np.linspace(0.0, A.tau, steps + 1)
        S = rk4_propagators(A, grid[:-1], np.diff(grid))
        values = np.empty((steps + 1, 2 * A.n, 2 * A.n))
        values[0] = I
        for i in range(steps):
            values[i + 1] = S[i] @ values[i]
        defect = float(np.max(_defects(values)))
        if defect <= eps_path:
            return SymplecticPath(grid, values, defect, "rk4-step", _grid_eval(A, grid, values), steps)
        steps *= 2
    raise IntegrationError(
        f"symplectic defect {defect:.3e} above {eps_path:.1e} after {max_doublings} doublings",
        achieved_defect=defect)


def restrict(gamma: SymplecticPath, s: float) -> SymplecticPath:
    """Restriction of ``gamma`` to ``[0, s]``; the endpoint uses the path's interpolation rule."""
    if not (0.0 < s <= gamma.tau):
        raise ValueError(f"restriction time {s} outside (0, {gamma.tau}]")
    if s == gamma.tau:
        return gamma
    keep = gamma.grid < s
    grid = np.append(gamma.grid[keep], s)
    values = np.concatenate([gamma.values[keep], gamma.at(s)[None]])
    defect = float(np.max(_defects(values)))
    return SymplecticPath(grid, values, defect, gamma.rule, gamma._eval, gamma.steps)


def extend_by_symmetry(gamma1: SymplecticPath, P: SymmetryDescriptor, k: int | None = None,
                       coefficient: CoefficientPath | None = None,
                       sym_tol: float = 1e-8) -> SymplecticPath:
    """Extend a path on ``[0, 1]`` to ``[0, k]`` by ``gamma(t+1) = P gamma(t) P^{-1} gamma(1)``.

    When ``coefficient`` (defined on ``[0, k]``) is given, the symmetry
    ``A(t+1) P = P A(t)`` is checked on the grid first.
    """
    k = P.k if k is None else int(k)
    if abs(gamma1.tau - 1.0) > 1e-12:
        raise ValueError(f"base path must live on [0, 1], got [0, {gamma1.tau}]")
    Pm, Pinv = P.matrix, P.inverse
    if coefficient is not None:
        ts = gamma1.grid
        for i in range(k - 1):
            lhs = coefficient.many(ts + i + 1) @ Pm
            rhs = Pm @ coefficient.many(ts + i)
            res = np.max(np.abs(lhs - rhs), axis=(1, 2))
            j = int(np.argmax(res))
            if res[j] > sym_tol * max(1.0, float(np.max(np.abs(rhs)))):
                raise ValueError(
                    f"symmetry A(t+1)P = PA(t) violated at t={ts[j] + i:.6g} (residual {res[j]:.2e})")
    g1 = gamma1.end
    Q = Pinv @ g1
    # gamma(i + t) = P^i gamma(t) (P^{-1} gamma(1))^i
    grids, vals = [gamma1.grid], [gamma1.values]
    Pi = np.eye(2 * P.n)
    Qi = np.eye(2 * P.n)
    for i in range(1, k):
        Pi = Pi @ Pm
        Qi = Qi @ Q
        grids.append(gamma1.grid[1:] + i)
        vals.append(Pi @ gamma1.values[1:] @ Qi)
    grid = np.concatenate(grids)
    values = np.concatenate(vals)
    base_eval = gamma1._eval

    def ev(s: float) -> np.ndarray:
        i = min(int(math.floor(s)), k - 1)
        return (np.linalg.matrix_power(Pm, i) @ base_eval(s - i)
                @ np.linalg.matrix_power(Q, i))

    defect = float(np.max(_defects(values)))
    return SymplecticPath(grid, values, defect, "symmetry-recursion", ev, gamma1.steps)


def monodromy_residual(gamma: SymplecticPath, gamma1_end: np.ndarray, P: SymmetryDescriptor) -> float:
    """``|gamma(k) - (P^{-1} gamma(1))^k|`` (max-abs)."""
    Q = np.linalg.matrix_power(P.inverse @ gamma1_end, P.k)
    return float(np.max(np.abs(gamma.end - Q)))

"""P-symmetric closed characteristics from minimisers of the dual action.

On ``m`` uniform cells of ``[0, 1]`` the control ``u`` is piecewise constant
and ``x = Pi_1 u`` is piecewise affine with ``x(1) = P x(0)``.  The discrete
action

    psi(u) = sum_c h [ 1/2 (J u_c, xmid_c) + H*(-J u_c) ]

is exact for the quadratic part.  Its critical points satisfy
``u_c = J H'(xmid_c)``, i.e. the nodes of ``x`` are an implicit-midpoint
orbit, which conserves the quadratic invariant ``j^2`` and hence ``H``.
The minimiser is then polished by Newton shooting on the continuous
boundary value problem ``x(1) = P x(0)`` before linearising.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .ekeland import index_by_crossings, index_by_galerkin, pi_nodes
from .hamiltonian import EllipsoidSurface, SingularPointError, hamiltonian_eval, legendre_dual
from .maslov import i_P_omega
from .paths import (CoefficientPath, SymplecticPath, extend_by_symmetry, integrate_fundamental,
                    monodromy_residual)
from .symplectic import SymmetryDescriptor, elliptic_height, standard_J


class ConvergenceError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class UnconvergedTrajectoryError(RuntimeError):
    pass


@dataclass(frozen=True)
class FinderConfig:
    m: int = 128
    restarts: int = 4
    seed: int = 0
    max_iter: int = 20000
    grad_tol: float = 1e-8
    armijo: float = 1e-4
    shrink: float = 0.5
    noise: float = 0.1
    residual_tol: float = 1e-5
    shoot_steps: int = 2048
    shoot_tol: float = 1e-12
    linear_steps: int = 2048
    monodromy_tol: float = 1e-6


@dataclass
class DualControl:
    """Piecewise-constant control on ``m`` uniform cells of ``[0, 1]``."""

    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.m

    def norm(self) -> float:
        """``L^2`` norm."""
        return float(math.sqrt(self.h * np.sum(self.values ** 2)))

    def beta_norm(self, beta: float) -> float:
        return float((self.h * np.sum(np.linalg.norm(self.values, axis=1) ** beta)) ** (1.0 / beta))

    def refined(self) -> "DualControl":
        return DualControl(np.repeat(self.values, 2, axis=0))


def _as_array(u) -> np.ndarray:
    return u.values if isinstance(u, DualControl) else np.asarray(u, dtype=float)


def dual_action(surface: EllipsoidSurface, P: SymmetryDescriptor, u) -> float:
    """Discrete dual action of a piecewise-constant control."""
    u = _as_array(u)
    m = len(u)
    h = 1.0 / m
    J = standard_J(surface.n)
    x = pi_nodes(u, P.matrix, 1.0)
    mid = 0.5 * (x[:-1] + x[1:])
    Ju = u @ J.T
    Hs, _ = legendre_dual(surface, -Ju)
    return float(h * np.sum(0.5 * np.sum(Ju * mid, axis=1) + Hs))


def dual_gradient(surface: EllipsoidSurface, P: SymmetryDescriptor, u) -> np.ndarray:
    """``L^2`` gradient per cell: ``-J xmid_c + J grad H*(-J u_c)``."""
    u = _as_array(u)
    J = standard_J(surface.n)
    x = pi_nodes(u, P.matrix, 1.0)
    mid = 0.5 * (x[:-1] + x[1:])
    _, g = legendre_dual(surface, -(u @ J.T))
    return (g - mid) @ J.T


def _l2(v: np.ndarray) -> float:
    return float(math.sqrt(np.sum(v * v) / len(v)))


def _descend(surface, P, u, cfg: FinderConfig):
    """Barzilai-Borwein gradient descent with nonmonotone Armijo backtracking."""
    h = 1.0 / len(u)
    f = dual_action(surface, P, u)
    g = dual_gradient(surface, P, u)
    step = 1.0
    recent = [f]
    trace = []
    for it in range(cfg.max_iter):
        gn = _l2(g)
        scale = max(1.0, _l2(u))
        if gn <= cfg.grad_tol * scale:
            return u, f, gn, it, trace
        t = step
        ref = max(recent[-10:])
        gg = h * np.sum(g * g)
        for _ in range(60):
            un = u - t * g
            fn = dual_action(surface, P, un)
            if fn <= ref - cfg.armijo * t * gg or fn - f <= 1e-15 * abs(f):
                break
            t *= cfg.shrink
        else:
            raise ConvergenceError("line search failed", trace)
        gnew = dual_gradient(surface, P, un)
        s, y = un - u, gnew - g
        sy = float(np.sum(s * y))
        step = float(np.sum(s * s)) / sy if sy > 0 else 1.0
        step = min(max(step, 1e-6), 1e3)
        u, f, g = un, fn, gnew
        recent.append(f)
        if it % 200 == 0:
            trace.append((it, f, gn))
    raise ConvergenceError(f"no convergence in {cfg.max_iter} iterations "
                           f"(gradient {_l2(g):.2e})", trace)


def _initial_control(surface, P, plane, rng, m, noise) -> np.ndarray:
    """Circle mode in one coordinate plane with random phase and amplitude, plus noise."""
    n = surface.n
    theta = P.angles[plane]
    t = (np.arange(m) + 0.5) / m
    phase = rng.uniform(0, 2 * math.pi)
    rho = surface.radii[plane] * rng.uniform(0.5, 1.5)
    u = np.zeros((m, 2 * n))
    # x = rho (cos, sin)(theta t + phase) in plane (plane, n + plane); u = x'
    u[:, plane] = -rho * theta * np.sin(theta * t + phase)
    u[:, n + plane] = rho * theta * np.cos(theta * t + phase)
    u += noise * rho * theta * rng.normal(size=u.shape)
    return u


@dataclass
class MinimizerResult:
    control: DualControl
    value: float
    gradient_norm: float
    iterations: int
    minima: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"m": self.control.m, "value": self.value, "gradient_norm": self.gradient_norm,
                "iterations": self.iterations, "minima": self.minima}


def minimize_dual_action(surface: EllipsoidSurface, P: SymmetryDescriptor,
                         config: FinderConfig = FinderConfig()) -> MinimizerResult:
    """Seeded multi-start descent; restarts cycle through the coordinate planes."""
    if surface.n != P.n:
        raise ValueError(f"surface has {surface.n} planes but P has {P.n}")
    rng = np.random.default_rng(config.seed)
    best = None
    minima = []
    for r in range(config.restarts):
        plane = r % surface.n
        u0 = _initial_control(surface, P, plane, rng, config.m, config.noise)
        try:
            u, f, gn, it, _ = _descend(surface, P, u0, config)
        except ConvergenceError as exc:
            minima.append({"restart": r, "plane": plane, "error": str(exc)})
            continue
        minima.append({"restart": r, "plane": plane, "value": f, "gradient_norm": gn,
                       "iterations": it, "plane_share": _plane_shares(surface.n, pi_nodes(u, P.matrix, 1.0))})
        if best is None or f < best[1]:
            best = (u, f, gn, it)
    if best is None:
        raise ConvergenceError("every restart failed", minima)
    u, f, gn, it = best
    return MinimizerResult(DualControl(u), f, gn, it, minima)


def _plane_shares(n: int, x: np.ndarray) -> list[float]:
    amp = np.array([np.max(np.hypot(x[:, j], x[:, n + j])) for j in range(n)])
    return [float(a) for a in amp / max(float(np.sum(amp)), 1e-300)]


def shoot(surface: EllipsoidSurface, x0: np.ndarray, steps: int, with_var: bool = True):
    """RK4 flow of ``x' = J H'(x)`` on ``[0, 1]`` with its variational matrix.

    Returns node values ``(steps+1, 2n)``, node derivatives and the
    variational matrix at ``t = 1`` (``None`` if not requested).
    """
    d = 2 * surface.n
    J = standard_J(surface.n)
    h = 1.0 / steps
    xs = np.empty((steps + 1, d))
    xs[0] = x0
    Phi = np.eye(d) if with_var else None

    def f(x, F):
        _, g, hs = hamiltonian_eval(surface, x, hessian=F is not None)
        return J @ g, (J @ hs @ F if F is not None else None)

    x = np.array(x0, dtype=float)
    for i in range(steps):
        k1, K1 = f(x, Phi)
        k2, K2 = f(x + 0.5 * h * k1, None if Phi is None else Phi + 0.5 * h * K1)
        k3, K3 = f(x + 0.5 * h * k2, None if Phi is None else Phi + 0.5 * h * K2)
        k4, K4 = f(x + h * k3, None if Phi is None else Phi + h * K3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if Phi is not None:
            Phi = Phi + h / 6 * (K1 + 2 * K2 + 2 * K3 + K4)
        xs[i + 1] = x
    _, g, _ = hamiltonian_eval(surface, xs, hessian=False)
    return xs, g @ J.T, Phi


def polish_orbit(surface: EllipsoidSurface, P: SymmetryDescriptor, x0: np.ndarray,
                 steps: int = 2048, tol: float = 1e-12, max_iter: int = 20):
    """Gauss-Newton shooting for ``phi_1(x0) = P x0``; returns ``(x0, history)``."""
    Pm = P.matrix
    history = []
    for _ in range(max_iter):
        xs, _, Phi = shoot(surface, x0, steps)
        F = xs[-1] - Pm @ x0
        res = float(np.linalg.norm(F))
        history.append(res)
        if res <= tol * max(1.0, float(np.linalg.norm(x0))):
            return x0, history
        dx = np.linalg.lstsq(Phi - Pm, -F, rcond=1e-10)[0]
        x0 = x0 + dx
    raise UnconvergedTrajectoryError(f"shooting did not converge (residual history {history})")


@dataclass
class Trajectory:
    """Polished orbit on ``[0, 1]``, extended to ``[0, k]`` by ``x(t + i) = P^i x(t)``."""

    surface: EllipsoidSurface
    P: SymmetryDescriptor
    times: np.ndarray
    nodes: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        self._spline = CubicHermiteSpline(self.times, self.nodes, self.slopes, axis=0)

    def __call__(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        i = np.clip(np.floor(ts), 0, self.P.k - 1).astype(int)
        base = self._spline(ts - i)
        out = np.empty_like(base)
        for j in np.unique(i):
            Pj = np.linalg.matrix_power(self.P.matrix, int(j))
            out[i == j] = base[i == j] @ Pj.T
        return out

    def coefficient(self, tau: float = 1.0) -> CoefficientPath:
        """``A(t) = H''(x(t))`` on ``[0, tau]``."""
        surface = self.surface

        def func(ts):
            return hamiltonian_eval(surface, self(ts))[2]

        return CoefficientPath(func, tau, surface.n, "ellipsoid-orbit",
                               {"radii": list(surface.radii), "alpha": surface.alpha})


@dataclass
class CharacteristicRecord:
    surface: EllipsoidSurface
    P: SymmetryDescriptor
    psi: float
    gradient_norm: float
    gradient_scale: float
    residual: float
    polish_shift: float
    energy_drift: float
    symmetry_residual: float
    closure_residual: float
    monodromy_residual: float
    direct_residual: float
    floquet_error: float
    elliptic_height: int
    elliptic_height_reduced: int
    classification: str
    ekeland_index: int
    ekeland_nullity: int
    galerkin_index: int
    galerkin_nullity: int
    maslov_index: int
    plane_shares: list
    monodromy: np.ndarray
    reduced_monodromy: np.ndarray
    multipliers: list
    samples_t: np.ndarray
    samples_x: np.ndarray
    trajectory: Trajectory | None = None
    coefficient: CoefficientPath | None = None
    gamma1: SymplecticPath | None = None
    minima: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_json(self, samples: bool = True) -> dict:
        out = {
            "surface": self.surface.to_json(), "P": self.P.to_json(), "psi": self.psi,
            "gradient_norm": self.gradient_norm,
            "gradient_scale": self.gradient_scale, "residual": self.residual,
            "polish_shift": self.polish_shift, "energy_drift": self.energy_drift,
            "symmetry_residual": self.symmetry_residual, "closure_residual": self.closure_residual,
            "monodromy_residual": self.monodromy_residual, "direct_residual": self.direct_residual,
            "floquet_error": self.floquet_error, "elliptic_height": self.elliptic_height,
            "elliptic_height_reduced": self.elliptic_height_reduced,
            "classification": self.classification,
            "index": {"ekeland": self.ekeland_index, "ekeland_nullity": self.ekeland_nullity,
                      "galerkin": self.galerkin_index, "galerkin_nullity": self.galerkin_nullity,
                      "maslov_1": self.maslov_index},
            "plane_shares": self.plane_shares,
            "monodromy": self.monodromy.tolist(),
            "multipliers": self.multipliers, "minima": self.minima, "timings": self.timings,
        }
        if samples:
            out["trajectory"] = {"t": self.samples_t.tolist(), "x": self.samples_x.tolist()}
        return out

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        d = self.samples_x.shape[1]
        w.writerow(["t"] + [f"x{i}" for i in range(d)])
        for t, x in zip(self.samples_t, self.samples_x):
            w.writerow([f"{t:.12g}"] + [f"{v:.12g}" for v in x])
        return buf.getvalue()


def classify(height: int, n: int) -> str:
    if height == 2 * n:
        return "elliptic"
    if height == 2:
        return "hyperbolic"
    return "non-hyperbolic-partial"


def _match_multipliers(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance in a greedy nearest matching of two eigenvalue lists."""
    b = list(b)
    worst = 0.0
    for z in sorted(a, key=lambda z: (np.angle(z), abs(z))):
        j = int(np.argmin([abs(z - w) for w in b]))
        worst = max(worst, abs(z - b.pop(j)))
    return float(worst)


def recover_and_extend(result: MinimizerResult, surface: EllipsoidSurface, P: SymmetryDescriptor,
                       config: FinderConfig = FinderConfig(), certify: bool = True,
                       samples_per_unit: int = 64) -> CharacteristicRecord:
    """Trajectory, linearisation, monodromy and index certificates of a minimiser."""
    timings = {}
    t0 = time.perf_counter()
    u = result.control.values
    J = standard_J(surface.n)
    x = pi_nodes(u, P.matrix, 1.0)
    mid = 0.5 * (x[:-1] + x[1:])
    if np.min(surface.gauge(x)) < 1e-6:
        raise SingularPointError("recovered trajectory passes through the origin")
    _, gmid, _ = hamiltonian_eval(surface, mid, hessian=False)
    residual = float(np.max(np.linalg.norm(u - gmid @ J.T, axis=1)))
    unorm = result.control.norm()
    if residual > config.residual_tol * max(unorm, 1.0):
        raise UnconvergedTrajectoryError(
            f"midpoint residual {residual:.2e} exceeds {config.residual_tol:.0e} * |u|")

    x0, shots = polish_orbit(surface, P, x[0], config.shoot_steps, config.shoot_tol)
    xs, dxs, _ = shoot(surface, x0, config.shoot_steps, with_var=False)
    times = np.linspace(0.0, 1.0, config.shoot_steps + 1)
    traj = Trajectory(surface, P, times, xs, dxs)
    coarse = traj(np.linspace(0.0, 1.0, len(x)))
    polish_shift = float(np.max(np.abs(coarse - x)))
    timings["trajectory"] = time.perf_counter() - t0

    k = P.k
    ts = np.linspace(0.0, k, k * samples_per_unit + 1)
    X = traj(ts)
    Hs = hamiltonian_eval(surface, traj(np.linspace(0, 1, 4097)), hessian=False)[0]
    energy_drift = float((np.max(Hs) - np.min(Hs)) / np.mean(Hs))
    # x(t + 1) = P x(t) on the sample grid, checked on the continuous flow
    xs1, _, _ = shoot(surface, xs[-1], config.shoot_steps, with_var=False)
    symmetry_residual = float(np.max(np.abs(xs1 - xs @ P.matrix.T)))
    xk = np.array(xs[0])
    for _ in range(k):
        xk, _, _ = shoot(surface, xk, config.shoot_steps, with_var=False)
        xk = xk[-1]
    closure = float(np.linalg.norm(xk - xs[0]))

    t1 = time.perf_counter()
    A1 = traj.coefficient(1.0)
    Ak = traj.coefficient(float(k))
    g1 = integrate_fundamental(A1, steps=config.linear_steps)
    gk = extend_by_symmetry(g1, P, k, coefficient=Ak)
    mono_res = monodromy_residual(gk, g1.end, P)
    direct = integrate_fundamental(Ak, steps=k * g1.steps)
    direct_res = float(np.max(np.abs(direct.end - np.linalg.matrix_power(P.inverse @ g1.end, k))))
    mult = np.linalg.eigvals(gk.end)
    floquet_err = _match_multipliers(mult, np.linalg.eigvals(direct.end))
    height = elliptic_height(gk.end)
    reduced = P.inverse @ g1.end
    timings["monodromy"] = time.perf_counter() - t1
    if mono_res > config.monodromy_tol:
        raise UnconvergedTrajectoryError(f"monodromy residual {mono_res:.2e} too large")

    ek_i = ek_n = gal_i = gal_n = ms_i = -1
    if certify:
        t2 = time.perf_counter()
        ek = index_by_crossings(A1, P, gamma=g1)
        gal = index_by_galerkin(A1, P)
        ms = i_P_omega(A1, P, 1.0, gamma=g1)
        ek_i, ek_n, gal_i, gal_n, ms_i = ek.index, ek.nullity, gal.index, gal.nullity, ms.index
        timings["certificates"] = time.perf_counter() - t2

    return CharacteristicRecord(
        surface=surface, P=P, psi=result.value, gradient_norm=result.gradient_norm,
        gradient_scale=max(1.0, _l2(u)),
        residual=residual, polish_shift=polish_shift, energy_drift=energy_drift,
        symmetry_residual=symmetry_residual, closure_residual=closure,
        monodromy_residual=mono_res, direct_residual=direct_res, floquet_error=floquet_err,
        elliptic_height=height, elliptic_height_reduced=elliptic_height(reduced),
        classification=classify(height, surface.n),
        ekeland_index=ek_i, ekeland_nullity=ek_n, galerkin_index=gal_i, galerkin_nullity=gal_n,
        maslov_index=ms_i, plane_shares=_plane_shares(surface.n, xs),
        monodromy=gk.end, reduced_monodromy=reduced,
        multipliers=[[float(z.real), float(z.imag)] for z in mult],
        samples_t=ts, samples_x=X, trajectory=traj, coefficient=A1, gamma1=g1,
        minima=result.minima, timings=timings)


def find_characteristic(surface: EllipsoidSurface, P: SymmetryDescriptor,
                        config: FinderConfig = FinderConfig(), certify: bool = True
                        ) -> CharacteristicRecord:
    t0 = time.perf_counter()
    res = minimize_dual_action(surface, P, config)
    t1 = time.perf_counter()
    rec = recover_and_extend(res, surface, P, config, certify)
    rec.timings["minimize"] = t1 - t0
    return rec


def planar_circle(surface: EllipsoidSurface, P: SymmetryDescriptor, plane: int) -> dict:
    """Closed-form circle orbit in one plane turning by ``theta`` in unit time.

    Returns the radius, ``H``, the dual action ``(alpha/2 - 1) H`` and the
    transverse rotation angles of the linearised flow over ``[0, k]``.
    """
    a = surface.alpha
    r = surface.radii[plane]
    theta = P.angles[plane]
    H = (theta * r * r / a) ** (a / (a - 2.0))
    rho = r * H ** (1.0 / a)
    transverse = {j: P.k * theta * r * r / surface.radii[j] ** 2
                  for j in range(surface.n) if j != plane}
    return {"radius": rho, "H": H, "psi": (a / 2 - 1.0) * H, "transverse_angles": transverse}

"""Named coefficient-path families used by tests, configs and the CLI."""

from __future__ import annotations

import numpy as np

from .paths import CoefficientPath
from .symplectic import diamond


def constant(a: float, n: int, tau: float = 1.0) -> CoefficientPath:
    """``A(t) = a I_{2n}``; the flow is ``R(a t)`` in every plane."""
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    I = np.eye(2 * n)
    return CoefficientPath(lambda ts: np.broadcast_to(a * I, (len(ts), 2 * n, 2 * n)).copy(),
                           tau, n, "constant", {"a": float(a)})


def planes(rates, tau: float = 1.0) -> CoefficientPath:
    """``A(t) = a_1 I_2 <> ... <> a_n I_2``."""
    rates = [float(a) for a in rates]
    if min(rates) <= 0:
        raise ValueError("plane rates must be positive")
    A0 = diamond(*(a * np.eye(2) for a in rates))
    n = len(rates)
    return CoefficientPath(lambda ts: np.broadcast_to(A0, (len(ts), 2 * n, 2 * n)).copy(),
                           tau, n, "planes", {"rates": rates})


def random_smooth(n: int, seed: int, scale: float = 6.0, floor: float = 0.3,
                  modes: int = 3, tau: float = 1.0) -> CoefficientPath:
    """Random smooth positive definite path ``M(t) M(t)^T + floor I``.

    ``M(t) = M_0 + sum_j (C_j cos(2 pi j t) + S_j sin(2 pi j t)) / (j + 1)``
    with Gaussian coefficients, normalised so that the mean of ``|A(t)|``
    is about ``scale``.
    """
    rng = np.random.default_rng(seed)
    d = 2 * n
    M0 = rng.normal(size=(d, d))
    C = rng.normal(size=(modes, d, d)) / np.arange(2, modes + 2)[:, None, None]
    S = rng.normal(size=(modes, d, d)) / np.arange(2, modes + 2)[:, None, None]
    freqs = 2 * np.pi * np.arange(1, modes + 1)

    def raw(ts):
        ph = ts[:, None] * freqs[None, :]
        M = (M0[None] + np.einsum("tj,jab->tab", np.cos(ph), C)
             + np.einsum("tj,jab->tab", np.sin(ph), S))
        return M @ np.swapaxes(M, 1, 2)

    probe = raw(np.linspace(0.0, tau, 65))
    norm = float(np.mean(np.linalg.eigvalsh(probe)[:, -1]))
    c = (scale - floor) / norm
    I = np.eye(d)

    def func(ts):
        return c * raw(ts) + floor * I

    return CoefficientPath(func, tau, n, "random_smooth",
                           {"seed": int(seed), "scale": scale, "floor": floor, "modes": modes})


def block_sum(*paths: CoefficientPath) -> CoefficientPath:
    """``A_1(t) <> A_2(t) <> ...`` on the common horizon of the factors."""
    taus = {p.tau for p in paths}
    if len(taus) != 1:
        raise ValueError(f"factors must share one horizon, got {sorted(taus)}")

    n = sum(p.n for p in paths)
    index, off = [], 0
    for p in paths:
        index.append(np.r_[off:off + p.n, n + off:n + off + p.n])
        off += p.n

    def func(ts):
        out = np.zeros((len(ts), 2 * n, 2 * n))
        for p, rows in zip(paths, index):
            out[:, rows[:, None], rows[None, :]] = p.many(ts)
        return out

    return CoefficientPath(func, paths[0].tau, n, "block_sum",
                           {"blocks": [{"name": p.name, **p.params} for p in paths]})


FAMILIES = {"constant": constant, "planes": planes, "random_smooth": random_smooth}


def make_family(name: str, **params) -> CoefficientPath:
    try:
        build = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown coefficient family {name!r}; known: {sorted(FAMILIES)}") from None
    return build(**params)

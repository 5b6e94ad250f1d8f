"""Locate parameter values where ``gamma(sigma) - T`` drops rank.

The scan scalar is the smallest singular value ``f(sigma)``.  Its zeros are
V-shaped minima rather than sign changes, so candidates are grid-local minima
of ``f`` which are refined by golden-section search.  After a zero is found
the remainder of its bracket is searched again, so two crossings that share a
scan cell are still separated (down to ``gap_floor``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .paths import CoefficientPath, SymplecticPath

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateCrossingError(RuntimeError):
    """Crossings could not be separated or a crossing is not transversal."""


@dataclass(frozen=True)
class ScanConfig:
    points: int = 512
    eps_cross: float = 1e-7
    eps_ker: float = 1e-8
    bisect_tol: float = 1e-10
    gap_floor: float = 1e-6
    end_tol: float = 1e-8
    tangential_slope: float = 1e-4


@dataclass(frozen=True)
class CrossingRecord:
    sigma: float
    nullity: int
    bracket_width: float
    residual: float
    slope: float = math.nan

    def to_json(self) -> dict:
        return {k: float(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


@dataclass
class ScanResult:
    interior: list[CrossingRecord]
    at_start: list[CrossingRecord] = field(default_factory=list)
    at_end: list[CrossingRecord] = field(default_factory=list)
    points: int = 0
    evaluations: int = 0

    @property
    def interior_sum(self) -> int:
        return sum(c.nullity for c in self.interior)


def _smallest_sv(X: np.ndarray) -> np.ndarray:
    return np.linalg.svd(X, compute_uv=False)[..., -1]


class _Scalar:
    """``sigma -> s_min(gamma(sigma) - T)`` with evaluation counting."""

    def __init__(self, gamma: SymplecticPath, T: np.ndarray):
        self.gamma = gamma
        self.T = T
        self.calls = 0

    def matrix(self, s: float) -> np.ndarray:
        self.calls += 1
        return self.gamma.at(s) - self.T

    def __call__(self, s: float) -> float:
        return float(_smallest_sv(self.matrix(s)))


def _golden_min(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    # the minimum may sit on a bracket end (crossing at sigma = 0 or s)
    best = min(((fc, c), (fd, d), (f(lo), lo), (f(hi), hi)))
    return best[1], best[0]


def scan_crossings(gamma: SymplecticPath, T: np.ndarray, A: CoefficientPath | None = None,
                   config: ScanConfig = ScanConfig()) -> ScanResult:
    """All ``sigma`` in ``[0, gamma.tau]`` where ``gamma(sigma) - T`` is singular.

    Crossings within ``end_tol * s`` of either end are reported separately
    from interior ones.  ``T`` may be complex (``omega P``).
    """
    s = gamma.tau
    cfg = config
    f = _Scalar(gamma, np.asarray(T))
    sig = np.linspace(0.0, s, cfg.points + 1)
    G = np.stack([gamma.at(x) for x in sig])
    vals = _smallest_sv(G - f.T)
    f.calls += len(sig)
    h = s / cfg.points
    gnorm = float(np.max(np.linalg.norm(G, ord=2, axis=(1, 2))))
    anorm = A.norm_bound() if A is not None else 1.0
    if A is None:
        diffs = np.abs(np.diff(vals)) / h
        lip = 4.0 * float(np.max(diffs)) if len(diffs) else 1.0
    else:
        lip = 1.5 * anorm * gnorm
    scale = max(gnorm, 1.0)
    thresh = cfg.eps_cross * scale

    cand = []
    for j in range(len(sig)):
        left = vals[j - 1] if j > 0 else math.inf
        right = vals[j + 1] if j < len(sig) - 1 else math.inf
        if vals[j] <= left and vals[j] <= right and vals[j] <= lip * h + thresh:
            cand.append(j)

    found: list[float] = []
    tol = cfg.bisect_tol * s
    gap = cfg.gap_floor * s

    def search(lo: float, hi: float, depth: int = 0):
        if hi - lo <= tol or depth > 8:
            return
        x, fx = _golden_min(f, lo, hi, tol)
        if fx > thresh:
            return
        if any(abs(x - y) <= tol * 10 for y in found):
            return
        for y in found:
            if abs(x - y) < gap:
                raise DegenerateCrossingError(
                    f"crossings at {x:.12g} and {y:.12g} closer than gap floor {gap:.1e}")
        found.append(x)
        # look for a second zero sharing the bracket
        if x - gap - lo > tol:
            xl, fl = _golden_min(f, lo, x - gap, tol)
            if fl <= thresh and xl < x - gap - tol:
                search(lo, x - gap, depth + 1)
        if hi - (x + gap) > tol:
            xr, fr = _golden_min(f, x + gap, hi, tol)
            if fr <= thresh and xr > x + gap + tol:
                search(x + gap, hi, depth + 1)

    for j in cand:
        search(sig[max(j - 1, 0)], sig[min(j + 1, len(sig) - 1)])

    result = ScanResult([], points=cfg.points)
    end_tol = cfg.end_tol * s
    for x in sorted(found):
        X = f.matrix(x)
        sv = np.linalg.svd(X, compute_uv=False)
        nullity = int(np.sum(sv <= thresh))
        delta = max(100 * tol, 1e-7 * s)
        slopes = []
        for y in (x - delta, x + delta):
            if 0.0 <= y <= s:
                slopes.append((f(y) - sv[-1]) / delta)
        slope = max(slopes) if slopes else math.nan
        rec = CrossingRecord(float(x), nullity, float(tol), float(sv[-1]), float(slope))
        if x <= end_tol:
            result.at_start.append(rec)
        elif s - x <= end_tol:
            result.at_end.append(rec)
        else:
            if A is not None and slope < cfg.tangential_slope * A.margin:
                raise DegenerateCrossingError(
                    f"crossing at sigma={x:.12g} looks tangential (slope {slope:.2e})")
            if nullity == 0:
                continue
            result.interior.append(rec)
    result.evaluations = f.calls
    return result

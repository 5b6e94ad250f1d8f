"""Line-by-line audits of the index chains behind the ellipticity results.

Each audit evaluates every term of the chain numerically and records one
``AuditLine`` per identity or inequality.  The ellipticity chain walks
the eigenvalues of ``P^{-1}`` on the upper half circle; because ``i_omega^P``
also jumps at eigenvalues of ``P^{-1} M`` that fall strictly between two
consecutive ladder points, the ladder is refined by those eigenvalues and the
literal two-point identities are checked against the sum of the skipped jumps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .crossings import ScanConfig
from .maslov import (SplittingReport, factored_matrix, i_P_omega, inverse_splitting,
                     splitting_limit, splitting_table, unit_eigen_angles)
from .paths import CoefficientPath, SymplecticPath, integrate_fundamental
from .symplectic import (NormalForm, SymmetryDescriptor, algebraic_multiplicity,
                         elliptic_height, nu_omega)

ANGLE_TOL = 1e-6


@dataclass
class AuditLine:
    label: str
    statement: str
    lhs: float
    rhs: float
    relation: str
    passed: bool
    note: str = ""

    def to_json(self) -> dict:
        return {"label": self.label, "statement": self.statement, "lhs": self.lhs,
                "rhs": self.rhs, "relation": self.relation, "residual": self.lhs - self.rhs,
                "pass": self.passed, "note": self.note}

    def text(self) -> str:
        mark = "ok  " if self.passed else "FAIL"
        s = f"[{mark}] ({self.label}) {self.statement}: {self.lhs:g} {self.relation} {self.rhs:g}"
        return s + (f"  -- {self.note}" if self.note else "")


@dataclass
class AuditReport:
    chain: str
    status: str
    lines: list[AuditLine] = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "contradiction", "hypothesis not met") and all(
            ln.passed for ln in self.lines)

    @property
    def failing(self) -> list[str]:
        return [ln.label for ln in self.lines if not ln.passed]

    def add(self, label, statement, lhs, rhs, relation="=", note="") -> AuditLine:
        ops = {"=": lambda a, b: abs(a - b) <= 1e-12, "<=": lambda a, b: a <= b + 1e-12,
               ">=": lambda a, b: a >= b - 1e-12, "<": lambda a, b: a < b - 1e-12,
               "info": lambda a, b: True}
        ln = AuditLine(label, statement, float(lhs), float(rhs), relation,
                       bool(ops[relation](lhs, rhs)), note)
        self.lines.append(ln)
        return ln

    def to_json(self) -> dict:
        return {"chain": self.chain, "status": self.status, "pass": self.passed,
                "failing": self.failing, "lines": [ln.to_json() for ln in self.lines],
                "values": self.values}

    def transcript(self) -> str:
        head = f"{self.chain}: {self.status}"
        return "\n".join([head] + [ln.text() for ln in self.lines])


def _omega(angle: float) -> complex:
    if abs(angle - math.pi) <= ANGLE_TOL:
        return complex(-1.0, 0.0)
    if abs(angle) <= ANGLE_TOL:
        return complex(1.0, 0.0)
    return cmath.exp(1j * angle)


def _fmt(angle: float) -> str:
    return f"e^(i*{angle:.6f})"


class _Splitter:
    """Splitting numbers of ``N = P^{-1} M`` and ``P^{-1}`` at ladder points."""

    def __init__(self, A, P, gamma, config, N_factors=None):
        self.A, self.P, self.gamma, self.config = A, P, gamma, config
        self.N_factors = N_factors
        self.cache: dict[float, dict] = {}

    def at(self, angle: float) -> dict:
        key = round(angle, 9)
        if key in self.cache:
            return self.cache[key]
        w = _omega(angle)
        sp = inverse_splitting(self.P, w)
        rec = {"angle": angle, "Sinv": sp}
        if self.N_factors is not None:
            sn = splitting_table(self.N_factors, w).pair
            rec["SN"] = sn
            rec["PS"] = (sn[0] - sp[0], sn[1] - sp[1])
        else:
            lim: SplittingReport = splitting_limit(self.A, self.P, w, gamma=self.gamma,
                                                   config=self.config)
            rec["PS"] = lim.pair
            rec["i"] = lim.detail["i_omega"]
            rec["trace"] = lim.trace
            # S_{P^{-1}M} = _P S_M + S_{P^{-1}}
            rec["SN"] = (lim.plus + sp[0], lim.minus + sp[1])
        self.cache[key] = rec
        return rec

    def index(self, angle: float) -> int:
        rec = self.at(angle)
        if "i" not in rec:
            rec["i"] = i_P_omega(self.A, self.P, _omega(angle), gamma=self.gamma,
                                 config=self.config).index
        return rec["i"]


def audit_theorem11_chain(A: CoefficientPath, P: SymmetryDescriptor,
                          gamma: SymplecticPath | None = None,
                          config: ScanConfig = ScanConfig()) -> AuditReport:
    """Evaluate the ladder identities, the splitting bounds and the ellipticity conclusion.

    ``A`` generates ``gamma`` on ``[0, 1]``; ``P`` must have all angles in ``(0, pi]``.
    """
    n = P.n
    rep = AuditReport("ellipticity chain", "pass")
    if any(not (0.0 < t <= math.pi + 1e-12) for t in P.angles):
        rep.status = "P not of the required form"
        rep.add("pre", "all theta_i in (0, pi]", 0, 1, "=")
        return rep
    if gamma is None:
        gamma = integrate_fundamental(A.restricted(1.0))
    M = gamma.end
    N = P.inverse @ M
    ladder = [0.0] + [ang for ang, _, _ in P.upper_inverse_eigenvalues()]
    q = len(ladder) - 1
    last = ladder[-1]
    extra = [a for a in unit_eigen_angles(N)
             if ANGLE_TOL < a < last - ANGLE_TOL
             and all(abs(a - b) > ANGLE_TOL for b in ladder)]
    nodes = sorted(ladder + extra)
    sp = _Splitter(A, P, gamma, config)
    recs = [sp.at(a) for a in nodes]
    idx = {round(a, 9): sp.index(a) for a in nodes}
    I = lambda a: idx[round(a, 9)]
    S = {round(a, 9): r for a, r in zip(nodes, recs)}
    R = lambda a: S[round(a, 9)]
    nuinv = lambda a: P.inverse_nu(_omega(a))
    alg = lambda a: algebraic_multiplicity(N, _omega(a))
    rep.values = {"ladder": [_fmt(a) for a in ladder], "intermediate": [_fmt(a) for a in extra],
                  "index": {_fmt(a): I(a) for a in nodes},
                  "PS": {_fmt(a): list(R(a)["PS"]) for a in nodes},
                  "S_PinvM": {_fmt(a): list(R(a)["SN"]) for a in nodes},
                  "S_Pinv": {_fmt(a): list(R(a)["Sinv"]) for a in nodes}}

    rep.add("i1-zero", "i_1^P(gamma|[0,1])", I(0.0), 0)
    for a in nodes[1:]:
        rep.add("base-bound", f"i^P at {_fmt(a)} >= nu(P^-1)", I(a), nuinv(a), ">=")
    for a in ladder[1:]:
        sinv = R(a)["Sinv"]
        if _omega(a) == -1:
            rep.add("inverse-table", "S^+_(P^-1)(-1) = nu/2", sinv[0], nuinv(a) / 2)
            rep.add("inverse-table", "S^-_(P^-1)(-1) = nu/2", sinv[1], nuinv(a) / 2)
        else:
            rep.add("inverse-table", f"S^+_(P^-1)({_fmt(a)}) = nu", sinv[0], nuinv(a))
            rep.add("inverse-table", f"S^-_(P^-1)({_fmt(a)}) = 0", sinv[1], 0)
    for a in nodes:
        sn = R(a)["SN"]
        rep.add("split-bounds", f"0 <= S^+_(P^-1 M)({_fmt(a)}) <= alg mult", sn[0], alg(a), "<=")
        rep.add("split-bounds", f"0 <= S^-_(P^-1 M)({_fmt(a)}) <= alg mult", sn[1], alg(a), "<=")
        rep.add("split-bounds", f"S^+-_(P^-1 M)({_fmt(a)}) >= 0", min(sn), 0, ">=")

    # two-point identities on the refined ladder
    for a, b in zip(nodes[:-1], nodes[1:]):
        rep.add("refined-step", f"i({_fmt(a)}) + PS^+ = i({_fmt(b)}) + PS^-",
                I(a) + R(a)["PS"][0], I(b) + R(b)["PS"][1])
    # literal identities between consecutive ladder points
    for i in range(q):
        a, b = ladder[i], ladder[i + 1]
        skipped = [e for e in extra if a < e < b]
        jump = sum(R(e)["PS"][0] - R(e)["PS"][1] for e in skipped)
        lhs = I(a) + R(a)["PS"][0]
        rhs = I(b) + R(b)["PS"][1]
        rep.add("ladder-step", f"i(w_{i}) + PS^+(w_{i}) = i(w_{i+1}) + PS^-(w_{i+1})", lhs, rhs, "info",
                note=f"literal residual {rhs - lhs:g}")
        rep.add("ladder-residual", f"literal residual over w_{i}..w_{i+1} = skipped jumps", rhs - lhs, jump,
                note=f"{len(skipped)} intermediate eigenvalue(s) of P^-1 M")
        # generic step form S_N^+(w_i) - S_N^-(w_i+1) - S_Pinv^+(w_i) + S_Pinv^-(w_i+1)
        formula = (R(a)["SN"][0] - R(b)["SN"][1] - R(a)["Sinv"][0] + R(b)["Sinv"][1])
        label = "step-formula"
        rep.add(label, f"i(w_{i+1}) - i(w_{i}) = step formula + skipped jumps",
                I(b) - I(a), formula + jump)
        if i > 0:
            paper = R(a)["SN"][0] - R(b)["SN"][1] - nuinv(a)
            if i == q - 1:
                paper += nuinv(math.pi) / 2
            rep.add("step-formula-displayed", "paper's step formula equals generic one", paper, formula)

    # telescoping
    total = I(last) - I(0.0)
    steps = sum(I(b) - I(a) for a, b in zip(nodes[:-1], nodes[1:]))
    rep.add("telescope", "sum of refined steps = i(w_q) - i(1)", steps, total)
    sum_plus = sum(R(a)["SN"][0] for a in nodes[:-1])
    sum_minus = sum(R(a)["SN"][1] for a in nodes[1:])
    corr = -sum(nuinv(a) for a in ladder[1:-1]) + nuinv(math.pi) / 2
    rep.add("telescope", "i(w_q) - i(1) = sum S^+ - sum S^- - sum nu(w_i) + nu(-1)/2",
            total, sum_plus - sum_minus + corr)

    # lower bound
    if _omega(last) == -1:
        target = sum(nuinv(a) for a in ladder[1:-1]) + nuinv(math.pi) / 2
    else:
        target = sum(nuinv(a) for a in ladder[1:])
    rep.add("nu-sum", "weighted nu(P^-1) sum = n", target, n)
    lit_plus = sum(R(a)["SN"][0] for a in ladder[:-1])
    rep.add("plus-sum-ladder", "sum_{i<q} S^+_(P^-1 M)(w_i) >= n (ladder points only)", lit_plus, n, "info",
            note="literal sum; intermediate eigenvalues enter the refined sum")
    rep.add("plus-sum-refined", "sum over refined nodes of S^+_(P^-1 M) >= n", sum_plus, n, ">=")

    # upper bound
    e = elliptic_height(N)
    u2 = alg(0.0) / 2 + sum(alg(a) for a in nodes[1:-1])
    rep.add("upper-bound", "sum S^+ <= alg(1)/2 + sum alg(eta_j)", sum_plus, u2, "<=")
    rep.add("upper-bound", "alg(1)/2 + sum alg(eta_j) <= e(P^-1 M)/2", u2, e / 2, "<=")
    rep.add("upper-bound", "e(P^-1 M)/2 <= n", e / 2, n, "<=")
    geo = nu_omega(N, 1.0) / 2 + sum(nu_omega(N, _omega(a)) for a in ladder[1:-1])
    rep.add("upper-bound-geometric", "paper's bound with geometric nu", lit_plus, geo, "info",
            note="S^+(1) <= nu(1)/2 needs algebraic multiplicity for N1(1,1) blocks")
    rep.add("elliptic", "e(P^-1 gamma(1)) = 2n", e, 2 * n)
    gk = np.linalg.matrix_power(N, P.k)
    rep.add("monodromy-height", "e(gamma(k)) = e((P^-1 gamma(1))^k) = 2n", elliptic_height(gk), 2 * n)
    rep.values.update({"e_PinvM": e, "e_gamma_k": elliptic_height(gk)})
    if any(not ln.passed for ln in rep.lines):
        rep.status = "fail"
    return rep


def _ab_counts(P: SymmetryDescriptor) -> tuple[int, int]:
    a = sum(1 for t in P.angles if 0 < t < math.pi - 1e-12)
    b = sum(1 for t in P.angles if abs(t - math.pi) <= 1e-12)
    return a, b


def audit_theorem12_chain(P: SymmetryDescriptor, A: CoefficientPath | None = None,
                          gamma: SymplecticPath | None = None, factors=None,
                          config: ScanConfig = ScanConfig()) -> AuditReport:
    """Evaluate the contradiction chain under the hyperbolicity hypothesis.

    Either a generating path ``A`` (with optional ``gamma``) or the factored
    form ``factors`` of ``P^{-1} gamma(1)`` must be given.  Returns status
    ``"hypothesis not met"`` when ``P^{-1} gamma(1)`` is not hyperbolic with a
    double eigenvalue 1, ``"contradiction"`` when the lower bound exceeds the
    computed index difference.
    """
    n = P.n
    rep = AuditReport("non-hyperbolicity chain", "pass")
    if factors is not None:
        factors = [f if isinstance(f, NormalForm) else NormalForm(*f) for f in factors]
        N = factored_matrix(factors)
    else:
        if A is None:
            raise ValueError("need a coefficient path or a factored monodromy")
        if gamma is None:
            gamma = integrate_fundamental(A.restricted(1.0))
        N = P.inverse @ gamma.end
    a, b = _ab_counts(P)
    rep.values.update({"a": a, "b": b, "n": n})
    rep.add("angle-count", "a + b - (n - a - b) >= 2", a + b - (n - a - b), 2, ">=")
    e = elliptic_height(N)
    m1 = algebraic_multiplicity(N, 1.0)
    rep.values.update({"e_PinvM": e, "alg_mult_1": m1})
    if e != 2 or m1 != 2:
        rep.status = "hypothesis not met"
        rep.add("hyp", "e(P^-1 gamma(1))", e, 2, "info",
                note="hyperbolicity hypothesis (e = 2 with N1(1,1) at 1) not met")
        return rep
    rep.add("hyp", "e(P^-1 gamma(1)) = 2 with double eigenvalue 1", e, 2)

    ladder = [0.0] + [ang for ang, _, _ in P.upper_inverse_eigenvalues()]
    q = len(ladder) - 1
    last = ladder[-1]
    sp = _Splitter(A, P, gamma, config, N_factors=factors)
    R = {round(x, 9): sp.at(x) for x in ladder}
    r = lambda x: R[round(x, 9)]
    nuinv = lambda x: P.inverse_nu(_omega(x))
    sn1 = r(0.0)["SN"]
    rep.add("hyperbolic-splitting", "S^+_(P^-1 gamma(1))(1) = 1", sn1[0], 1)
    rep.add("hyperbolic-splitting", "S^-_(P^-1 gamma(1))(1)", sn1[1], 0, "info",
            note="conjugation symmetry forces S^-(1) = S^+(1); only S^+(1) enters the first step")
    for x in ladder[1:]:
        rep.add("hyperbolic-splitting", f"S^+-_(P^-1 gamma(1))({_fmt(x)}) = 0", sum(r(x)["SN"]), 0)
    steps = []
    for i in range(q):
        x, y = ladder[i], ladder[i + 1]
        generic = (r(x)["SN"][0] - r(x)["Sinv"][0]) - (r(y)["SN"][1] - r(y)["Sinv"][1])
        if i == 0:
            paper = 1 + r(y)["Sinv"][1]
        else:
            paper = -r(x)["Sinv"][0] + r(y)["Sinv"][1]
        rep.add("step", f"step w_{i}->w_{i+1}: generic = displayed", generic, paper)
        steps.append(generic)
    V = sum(steps)
    if _omega(last) == -1:
        closed = 1 + (n - a - b + b) - a
        bound = 2 * b
    else:
        closed = 1 + (n - a - b) - (a - r(last)["Sinv"][0])
        bound = r(last)["Sinv"][0]
    rep.add("difference", "i(w_q) - i(w_0) from the table", V, closed)
    rep.add("lower-bound", "nu_(P^-1)(w_q) = displayed case value", nuinv(last), bound)
    margin = nuinv(last) - V
    rep.values.update({"difference": V, "lower_bound": nuinv(last), "margin": margin,
                       "ladder": [_fmt(x) for x in ladder]})
    if A is not None and factors is None:
        direct = i_P_omega(A, P, _omega(last), gamma=gamma, config=config).index - \
            i_P_omega(A, P, 1.0, gamma=gamma, config=config).index
        rep.add("difference-direct", "direct i(w_q) - i(w_0) = table value", direct, V)
    rep.add("contradiction", "difference < lower bound", V, nuinv(last), "<")
    if any(not ln.passed for ln in rep.lines[:-1]):
        rep.status = "fail"
    else:
        rep.status = "contradiction" if margin > 0 else "no contradiction"
    return rep

import math

import pytest

from pindex.audit import audit_theorem11_chain, audit_theorem12_chain
from pindex.families import constant
from pindex.symplectic import NormalForm, build_symmetry

PI = math.pi


def test_ellipticity_chain_on_unit_rate(P_mixed):
    rep = audit_theorem11_chain(constant(1.0, 2), P_mixed)
    assert rep.passed, rep.transcript()
    labels = {ln.label for ln in rep.lines}
    assert {"i1-zero", "telescope", "nu-sum", "upper-bound", "elliptic"} <= labels


def test_ellipticity_chain_reports_nonzero_start(P_mixed):
    rep = audit_theorem11_chain(constant(4.0, 2), P_mixed)
    assert not rep.passed
    assert "i1-zero" in rep.failing


@pytest.mark.parametrize("angles,k", [((PI / 2, PI / 2), 4), ((PI / 2, PI), 4),
                                      ((PI / 2, PI / 2, PI), 4)])
def test_synthetic_hyperbolic_contradiction(angles, k):
    P = build_symmetry(angles, k)
    factors = [NormalForm("N1", (1, 1))] + [NormalForm("D", (2.0,))] * (P.n - 1)
    rep = audit_theorem12_chain(P, factors=factors)
    assert rep.status == "contradiction", rep.transcript()
    assert rep.values["margin"] > 0
    assert rep.values["lower_bound"] > rep.values["difference"]


def test_counters_from_angles():
    P = build_symmetry((PI / 2, PI / 2, PI), 4)
    rep = audit_theorem12_chain(P, factors=[NormalForm("N1", (1, 1)), NormalForm("D", (2.0,)),
                                            NormalForm("D", (2.0,))])
    assert (rep.values["a"], rep.values["b"]) == (2, 1)


def test_elliptic_input_does_not_meet_hypothesis(P_quarter):
    rep = audit_theorem12_chain(P_quarter, A=constant(1.0, 2))
    assert rep.status == "hypothesis not met"


def test_angle_count_outside_hypothesis():
    P = build_symmetry((2 * PI / 3, 4 * PI / 3), 3)
    rep = audit_theorem12_chain(P, factors=[NormalForm("N1", (1, 1)), NormalForm("D", (2.0,))])
    assert rep.status != "contradiction"

"""Acceptance matrix: one test per criterion, each printing a PASS/FAIL line.

The suite runs once through the command-line entry point; the last
criterion runs it a second time and compares the integer report fields
byte for byte.
"""

import json
from pathlib import Path

import pytest

from pindex.acceptance import TITLES
from pindex.cli import run

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "suite.ini"


def _suite(out: Path) -> tuple[int, dict, bytes]:
    code = run(["suite", "--config", str(CONFIG), "--out", str(out)])
    report = json.loads((out / "suite.json").read_text())
    return code, report, (out / "suite.integers.json").read_bytes()


@pytest.fixture(scope="module")
def first_run(tmp_path_factory):
    return _suite(tmp_path_factory.mktemp("suite_a"))


def _report_line(capsys, number, passed, detail=""):
    with capsys.disabled():
        mark = "PASS" if passed else "FAIL"
        print(f"\n[acceptance] criterion {number:2d} {mark}: {TITLES[number]}{detail}")


def _row(report, number):
    rows = {r["criterion"]: r for r in report["results"]["rows"]}
    return rows[number]


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number, first_run, capsys):
    _, report, _ = first_run
    row = _row(report, number)
    detail = f" ({row['elapsed']:.1f} s)"
    if row["failures"]:
        detail += " -- " + "; ".join(row["failures"][:3])
    _report_line(capsys, number, row["pass"], detail)
    assert row["pass"], row["failures"]


def test_criterion_12_reproducible_suite(first_run, tmp_path, capsys):
    code_a, report_a, ints_a = first_run
    code_b, report_b, ints_b = _suite(tmp_path / "suite_b")
    same = ints_a == ints_b
    in_suite = _row(report_a, 12)["pass"]
    _report_line(capsys, 12, same and in_suite and code_a == code_b,
                 f" (integer fields {'identical' if same else 'DIFFER'}, {len(ints_a)} bytes)")
    assert same
    assert in_suite
    assert code_a == code_b == 0

import json
import math
from pathlib import Path

import jsonschema
import pytest

from pindex.acceptance import integer_fields
from pindex.cli import load_schema, parse_factors, run
from pindex.config import ConfigError, parse_int_list, parse_number, scenario_from_string

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(tmp_path, *argv):
    out = tmp_path / f"out{len(list(tmp_path.glob('out*'))) if tmp_path.exists() else 0}"
    code = run(list(argv) + ["--out", str(out)])
    reports = sorted(out.glob("*.json")) if out.exists() else []
    main = [p for p in reports if not p.name.endswith(".integers.json")]
    return code, (json.loads(main[0].read_text()) if main else None), out


def test_parse_number_expressions():
    assert parse_number("pi/2") == pytest.approx(math.pi / 2)
    assert parse_number("2*pi + 1") == pytest.approx(2 * math.pi + 1)
    assert parse_number("-3e-2") == -0.03
    with pytest.raises(ConfigError):
        parse_number("__import__('os')")
    with pytest.raises(ConfigError):
        parse_number("pi/")


def test_parse_int_list_ranges():
    assert parse_int_list("0-3, 7") == [0, 1, 2, 3, 7]


def test_parse_factors():
    fs = parse_factors("N1(1, 1); D(2); R(pi/2)")
    assert [f.kind for f in fs] == ["N1", "D", "R"]
    with pytest.raises(ConfigError):
        parse_factors("N1(1, 5)")


def test_scenario_requires_known_kind():
    with pytest.raises(ConfigError):
        scenario_from_string("[scenario]\nkind = nope\n")


def test_negative_tolerance_rejected():
    sc = scenario_from_string("[scenario]\nkind = ekeland\n[numerics]\neps_ker = -1\n")
    with pytest.raises(ConfigError):
        sc.scan_config()


def test_every_committed_config_parses():
    from pindex.config import load_scenario
    for p in CONFIGS.glob("*.ini"):
        assert load_scenario(p).kind


def test_index_ekeland_rotation(tmp_path):
    code, rep, _ = _run(tmp_path, "index", "ekeland", "--config", str(CONFIGS / "ekeland_rotation.ini"))
    assert code == 0
    inst = rep["results"]["instances"][0]
    assert inst["crossing"]["index"] == 4 == inst["closed_form"]
    assert inst["galerkin"]["index"] == 4
    jsonschema.validate(rep, load_schema())
    assert rep["seed"] == 0 and rep["status"] == "pass"


def test_bad_angle_exits_2_citing_kernel_condition(tmp_path, capsys):
    code, rep, _ = _run(tmp_path, "index", "ekeland", "--config", str(CONFIGS / "bad_angle.ini"))
    assert code == 2
    assert "ker(P - I) = 0" in capsys.readouterr().err
    assert rep["error"]["type"] == "ConfigError"


def test_missing_file_and_kind_mismatch_exit_2(tmp_path):
    assert _run(tmp_path, "find", "--config", str(tmp_path / "none.ini"))[0] == 2
    assert _run(tmp_path, "find", "--config", str(CONFIGS / "ekeland_rotation.ini"))[0] == 2


def test_failed_expectation_exits_1(tmp_path):
    text = (CONFIGS / "ekeland_rotation.ini").read_text().replace("index = 4", "index = 6")
    cfg = tmp_path / "wrong.ini"
    cfg.write_text(text)
    code, rep, _ = _run(tmp_path, "index", "ekeland", "--config", str(cfg))
    assert code == 1
    assert [c["name"] for c in rep["checks"] if not c["pass"]][0].startswith("expected index")


def test_numerical_failure_exits_3(tmp_path):
    text = (CONFIGS / "ekeland_rotation.ini").read_text() + "\n[numerics]\neps_path = 1e-30\n"
    cfg = tmp_path / "tight.ini"
    cfg.write_text(text)
    code, rep, _ = _run(tmp_path, "index", "ekeland", "--config", str(cfg))
    assert code == 3
    assert rep["error"]["type"] == "IntegrationError"


def test_maslov_splitting_and_thm36(tmp_path):
    assert _run(tmp_path, "index", "maslov", "--config", str(CONFIGS / "maslov_rotation.ini"))[0] == 0
    assert _run(tmp_path, "splitting", "--config", str(CONFIGS / "splitting_catalog.ini"))[0] == 0
    assert _run(tmp_path, "splitting", "--config", str(CONFIGS / "splitting_rotation.ini"))[0] == 0
    code, rep, _ = _run(tmp_path, "verify", "thm36", "--config", str(CONFIGS / "thm36_rotation.ini"))
    assert code == 0
    assert rep["results"]["summary"]["passed"] == rep["results"]["summary"]["total"] == 15


def test_audits(tmp_path):
    assert _run(tmp_path, "audit", "thm11", "--config", str(CONFIGS / "audit11_rotation.ini"))[0] == 0
    code, rep, _ = _run(tmp_path, "audit", "thm12", "--config", str(CONFIGS / "audit12_synthetic.ini"))
    assert code == 0 and rep["results"]["audit"]["status"] == "contradiction"


def test_find_csv_and_seed_independence(tmp_path):
    cfg = str(CONFIGS / "find_n2.ini")
    code, rep, out = _run(tmp_path / "a", "find", "--config", cfg, "--format", "csv")
    assert code == 0
    assert (out / "find.csv").read_text().startswith("t,x0,x1,x2,x3")
    code2, rep2, _ = _run(tmp_path / "b", "find", "--config", cfg, "--seed", "7")
    assert code2 == 0 and rep2["seed"] == 7
    assert integer_fields(rep["results"]) == integer_fields(rep2["results"])


def test_suite_perturbed_tolerance_fails_loudly(tmp_path, capsys):
    code, rep, out = _run(tmp_path, "suite", "--config", str(CONFIGS / "suite_perturbed.ini"),
                          "--format", "csv")
    assert code == 1
    assert "criterion 8" in capsys.readouterr().err
    assert (out / "suite.csv").read_text().splitlines()[1].startswith("8,")


def test_workers_share_results(tmp_path):
    cfg = str(CONFIGS / "thm36_rotation.ini")
    _, one, _ = _run(tmp_path / "one", "verify", "thm36", "--config", cfg)
    _, two, _ = _run(tmp_path / "two", "verify", "thm36", "--config", cfg, "--workers", "2")
    assert integer_fields(one["results"]) == integer_fields(two["results"])

"""Command-line front end: ``pindex <command> --config scenario.ini``.

Exit codes: 0 all embedded checks pass, 1 a check failed, 2 the scenario
could not be parsed or validated, 3 a numerical procedure failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .acceptance import DEFAULT_SUITE, closed_form_index, integer_fields, run_suite
from .audit import audit_theorem11_chain, audit_theorem12_chain
from .config import ConfigError, Scenario, load_scenario, parse_list, parse_number, scenario_from_string
from .crossings import DegenerateCrossingError
from .ekeland import GalerkinError, index_by_crossings, index_by_galerkin
from .families import make_family
from .finder import ConvergenceError, UnconvergedTrajectoryError, find_characteristic
from .hamiltonian import EllipsoidSurface, SingularPointError
from .maslov import (SplittingError, UnsupportedFactorError, i_P_omega, lemma34i_check,
                     rotation_family_factors, splitting_limit, splitting_table, theorem36_check)
from .paths import CoefficientError, IntegrationError, integrate_fundamental
from .symplectic import NormalForm, SymplecticError, build_symmetry

COMMANDS = {
    ("index", "ekeland"): "ekeland", ("index", "maslov"): "maslov", ("splitting",): "splitting",
    ("verify", "thm36"): "thm36", ("find",): "find", ("audit", "thm11"): "audit11",
    ("audit", "thm12"): "audit12", ("suite",): "suite",
}

NUMERICAL_ERRORS = (IntegrationError, DegenerateCrossingError, GalerkinError, SplittingError,
                    ConvergenceError, UnconvergedTrajectoryError, SingularPointError,
                    UnsupportedFactorError, np.linalg.LinAlgError)
INPUT_ERRORS = (ConfigError, SymplecticError, CoefficientError)


class CheckList:
    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.items.append({"name": name, "pass": bool(ok), "detail": detail})
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.items)

    @property
    def failing(self) -> list[str]:
        return [c["name"] for c in self.items if not c["pass"]]


# scenario -> inputs

_FACTOR = re.compile(r"\s*(\w+)\s*\(([^)]*)\)\s*")


def parse_factors(text: str, location: str = "") -> list[NormalForm]:
    """``N1(1, 1); D(2); R(pi/2)`` -> normal-form factors."""
    out = []
    for part in text.split(";"):
        if not part.strip():
            continue
        m = _FACTOR.fullmatch(part)
        if not m:
            raise ConfigError(f"cannot parse factor {part.strip()!r}", location)
        try:
            out.append(NormalForm(m.group(1), tuple(parse_list(m.group(2), location))))
        except SymplecticError as exc:
            raise ConfigError(str(exc), location) from None
    return out


def symmetries(sc: Scenario) -> list:
    """``[sweep] symmetries = a, b @ k; ...`` or the single ``[symmetry]`` entry."""
    items = []
    if sc.has("sweep", "symmetries"):
        for part in sc.raw("sweep", "symmetries").split(";"):
            if not part.strip():
                continue
            if "@" not in part:
                raise ConfigError(f"expected 'angles @ k', got {part.strip()!r}", "[sweep] symmetries")
            ang, k = part.split("@")
            items.append((parse_list(ang, "[sweep] symmetries"), int(parse_number(k))))
    else:
        items.append((sc.numbers("symmetry", "angles"), sc.integer("symmetry", "k")))
    out = []
    for angles, k in items:
        try:
            out.append(build_symmetry(angles, k))
        except SymplecticError as exc:
            raise ConfigError(f"invalid symmetry: {exc}", "[symmetry] angles") from None
    return out


def _label(family: str, spec: dict, P) -> str:
    parts = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in spec.items() if k != "n")
    return f"{family}({parts}) P={[round(t, 6) for t in P.angles]}"


def instances(sc: Scenario) -> list[tuple]:
    """``(label, A, P, (family, spec))`` for every symmetry and path in the scenario.

    The ``(family, spec)`` pair rebuilds ``A`` in a worker process.
    """
    family = sc.raw("path", "family")
    if family is None:
        raise ConfigError("missing required key", "[path] family")
    tau = sc.number("path", "tau", 1.0)
    out = []
    for P in symmetries(sc):
        if family == "constant":
            rates = sc.numbers("sweep", "rates") if sc.has("sweep", "rates") else [sc.number("path", "a")]
            specs = [dict(a=a, n=P.n, tau=tau) for a in rates]
        elif family == "random_smooth":
            seeds = (sc.integers("sweep", "path_seeds") if sc.has("sweep", "path_seeds")
                     else [sc.integer("path", "seed", 0)])
            specs = [dict(n=P.n, seed=s, scale=sc.number("path", "scale", 6.0), tau=tau) for s in seeds]
        elif family == "planes":
            specs = [dict(rates=sc.numbers("path", "rates"), tau=tau)]
        else:
            raise ConfigError(f"unknown family {family!r}", "[path] family")
        for spec in specs:
            try:
                A = make_family(family, **spec)
            except (ValueError, CoefficientError) as exc:
                raise ConfigError(str(exc), "[path]") from None
            if A.n != P.n:
                raise ConfigError(f"path has {A.n} planes but P has {P.n}", "[path]")
            out.append((_label(family, spec, P), A, P, (family, spec)))
    return out


def omegas(sc: Scenario) -> list[complex]:
    angs = sc.numbers("omega", "angles", [0.0])
    out = []
    for a in angs:
        if abs(math.remainder(a, 2 * math.pi)) < 1e-15:
            out.append(complex(1.0, 0.0))
        elif abs(math.remainder(a - math.pi, 2 * math.pi)) < 1e-15:
            out.append(complex(-1.0, 0.0))
        else:
            out.append(complex(math.cos(a), math.sin(a)))
    return out


def _cj(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _map(func, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# commands


def _rebuild(spec):
    family, kw = spec
    return make_family(family, **kw)


def _ekeland_one(args):
    label, spec, P, sc = args
    A = _rebuild(spec)
    cfg = sc.scan_config()
    g = integrate_fundamental(A, eps_path=sc.numeric("eps_path"))
    cr = index_by_crossings(A, P, config=cfg, gamma=g)
    out = {"label": label, "path": {"name": A.name, "params": A.params}, "P": P.to_json(),
           "crossing": cr.to_json()}
    method = sc.raw("index", "method", "both")
    if method in ("both", "galerkin"):
        gal = index_by_galerkin(A, P, m=int(sc.numeric("galerkin_m")), eps_gal=sc.numeric("eps_gal"),
                                m_max=int(sc.numeric("galerkin_m_max")))
        out["galerkin"] = gal.to_json()
    return out


def cmd_ekeland(sc: Scenario, checks: CheckList, workers: int) -> dict:
    rows = _map(_ekeland_one, [(lb, spec, P, sc) for lb, _, P, spec in instances(sc)], workers)
    for r in rows:
        cr = r["crossing"]
        if r["path"]["name"] == "constant":
            want = closed_form_index(r["path"]["params"]["a"], r["P"]["angles"], tau=cr["params"]["s"])
            r["closed_form"] = want
            checks.add(f"closed form: {r['label']}", cr["index"] == want,
                       f"crossing {cr['index']} vs closed form {want}")
        if "galerkin" in r:
            g = r["galerkin"]
            checks.add(f"crossing = Galerkin: {r['label']}",
                       (cr["index"], cr["nullity"]) == (g["index"], g["nullity"]),
                       f"({cr['index']},{cr['nullity']}) vs ({g['index']},{g['nullity']})")
        if sc.has("expect", "index"):
            want = sc.integer("expect", "index")
            checks.add(f"expected index: {r['label']}", cr["index"] == want, f"{cr['index']} vs {want}")
    return {"instances": rows}


def _maslov_one(args):
    label, spec, P, sc, ws = args
    A = _rebuild(spec)
    cfg = sc.scan_config()
    g = integrate_fundamental(A, eps_path=sc.numeric("eps_path"))
    return {"label": label, "P": P.to_json(), "path": {"name": A.name, "params": A.params},
            "reports": [i_P_omega(A, P, w, gamma=g, config=cfg).to_json() for w in ws]}


def cmd_maslov(sc: Scenario, checks: CheckList, workers: int) -> dict:
    ws = omegas(sc)
    rows = _map(_maslov_one, [(lb, spec, P, sc, ws) for lb, _, P, spec in instances(sc)], workers)
    if sc.has("expect", "index"):
        want = sc.integers("expect", "index")
        for r in rows:
            got = [rep["index"] for rep in r["reports"]]
            checks.add(f"expected indices: {r['label']}", got == want, f"{got} vs {want}")
    return {"instances": rows}


def cmd_splitting(sc: Scenario, checks: CheckList, workers: int) -> dict:
    ws = omegas(sc)
    cfg = sc.scan_config()
    out = {}
    if sc.has("splitting", "factors"):
        factors = parse_factors(sc.raw("splitting", "factors"), "[splitting] factors")
        out["table"] = [splitting_table(factors, w).to_json() for w in ws]
        for w, rep in zip(ws, out["table"]):
            conj = splitting_table(factors, w.conjugate()).pair
            checks.add(f"conjugation at {_cj(w)}", (rep["plus"], rep["minus"]) == (conj[1], conj[0]))
        if sc.has("expect", "pairs"):
            want = sc.integers("expect", "pairs")
            got = [v for rep in out["table"] for v in (rep["plus"], rep["minus"])]
            checks.add("expected table pairs", got == want, f"{got} vs {want}")
    if sc.has("path", "family"):
        rows = []
        for label, A, P, _ in instances(sc):
            g = integrate_fundamental(A, eps_path=sc.numeric("eps_path"))
            factors = rotation_family_factors(A.params["a"], P, A.tau) if A.name == "constant" else None
            per = []
            for w in ws:
                if factors is not None:
                    res = lemma34i_check(A, P, w, factors, gamma=g, config=cfg)
                    checks.add(f"limit = table: {label} at {_cj(w)}", res["pass"],
                               f"limit {res['limit']} vs table {res['table']}")
                    per.append(res)
                else:
                    per.append(splitting_limit(A, P, w, gamma=g, config=cfg).to_json())
            rows.append({"label": label, "omegas": per})
        out["limit"] = rows
    if not out:
        raise ConfigError("need [splitting] factors or a [path]", "[splitting]")
    return out


def _thm36_one(args):
    label, spec, P, sc = args
    A = _rebuild(spec)
    g = integrate_fundamental(A, eps_path=sc.numeric("eps_path"))
    res = theorem36_check(A, P, gamma=g, config=sc.scan_config())
    res["label"] = label
    return res


def cmd_thm36(sc: Scenario, checks: CheckList, workers: int) -> dict:
    rows = _map(_thm36_one, [(lb, spec, P, sc) for lb, _, P, spec in instances(sc)], workers)
    for r in rows:
        checks.add(f"i_1 = nu_1(P^-1) + i_E: {r['label']}", r["pass"],
                   f"{r['lhs']} vs {r['nu1_Pinv']} + {r['ekeland']}")
    return {"instances": rows, "summary": {"total": len(rows), "passed": sum(r["pass"] for r in rows)}}


def _surface(sc: Scenario) -> EllipsoidSurface:
    try:
        return EllipsoidSurface(tuple(sc.numbers("surface", "radii")), sc.number("surface", "alpha", 1.5))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "[surface]") from None


def _find(sc: Scenario, checks: CheckList | None = None):
    surface = _surface(sc)
    (P,) = symmetries(sc)[:1]
    if surface.n != P.n:
        raise ConfigError(f"surface has {surface.n} planes, P has {P.n}", "[surface] radii")
    rec = find_characteristic(surface, P, sc.finder_config(),
                              certify=sc.raw("finder", "certify", "yes") == "yes")
    if checks is not None:
        cfg = sc.finder_config()
        checks.add("gradient", rec.gradient_norm <= cfg.grad_tol * rec.gradient_scale,
                   f"{rec.gradient_norm:.3e}")
        checks.add("trajectory residual", rec.residual <= cfg.residual_tol * rec.gradient_scale,
                   f"{rec.residual:.3e}")
        checks.add("energy conservation", rec.energy_drift <= 1e-6, f"{rec.energy_drift:.3e}")
        checks.add("monodromy identity", rec.monodromy_residual <= cfg.monodromy_tol,
                   f"{rec.monodromy_residual:.3e}")
        checks.add("Floquet oracle", rec.floquet_error <= 1e-5, f"{rec.floquet_error:.3e}")
        if rec.ekeland_index >= 0:
            checks.add("Ekeland index of the minimum", rec.ekeland_index == 0, str(rec.ekeland_index))
            checks.add("Maslov index at 1", rec.maslov_index == 0, str(rec.maslov_index))
            checks.add("crossing = Galerkin", (rec.ekeland_index, rec.ekeland_nullity)
                       == (rec.galerkin_index, rec.galerkin_nullity))
        if sc.has("expect", "classification"):
            want = sc.raw("expect", "classification")
            checks.add("classification", rec.classification == want, f"{rec.classification} vs {want}")
        if sc.has("expect", "elliptic_height"):
            want = sc.integer("expect", "elliptic_height")
            checks.add("elliptic height", rec.elliptic_height == want, f"{rec.elliptic_height} vs {want}")
    return rec, P


def cmd_find(sc: Scenario, checks: CheckList, workers: int) -> dict:
    rec, _ = _find(sc, checks)
    return {"record": rec.to_json(samples=True), "_record": rec}


def _audit_source(sc: Scenario):
    source = sc.raw("audit", "source", "path")
    if source == "find":
        rec, P = _find(sc)
        return rec.coefficient, P, rec.gamma1, {"finder": rec.to_json(samples=False)}
    if source == "path":
        (label, A, P, _), *rest = instances(sc)
        if rest:
            raise ConfigError("audits take a single path", "[sweep]")
        if abs(A.tau - 1.0) > 1e-12:
            raise ConfigError("audits need tau = 1", "[path] tau")
        return A, P, integrate_fundamental(A, eps_path=sc.numeric("eps_path")), {"path": label}
    raise ConfigError(f"source must be find, path or factors, got {source!r}", "[audit] source")


def cmd_audit11(sc: Scenario, checks: CheckList, workers: int) -> dict:
    A, P, g, extra = _audit_source(sc)
    rep = audit_theorem11_chain(A, P, gamma=g, config=sc.scan_config())
    for ln in rep.lines:
        checks.add(ln.label, ln.passed, ln.text())
    return {"audit": rep.to_json(), **extra, "_transcript": rep.transcript()}


def cmd_audit12(sc: Scenario, checks: CheckList, workers: int) -> dict:
    if sc.raw("audit", "source") == "factors":
        (P,) = symmetries(sc)[:1]
        factors = parse_factors(sc.raw("audit", "factors", ""), "[audit] factors")
        rep = audit_theorem12_chain(P, factors=factors, config=sc.scan_config())
        extra = {}
    else:
        A, P, g, extra = _audit_source(sc)
        rep = audit_theorem12_chain(P, A=A, gamma=g, config=sc.scan_config())
    for ln in rep.lines:
        checks.add(ln.label, ln.passed, ln.text())
    if sc.has("expect", "status"):
        want = sc.raw("expect", "status")
        checks.add("status", rep.status == want, f"{rep.status} vs {want}")
    return {"audit": rep.to_json(), **extra, "_transcript": rep.transcript()}


def cmd_suite(sc: Scenario, checks: CheckList, workers: int) -> dict:
    rows = run_suite(sc, workers)
    for r in rows:
        checks.add(f"criterion {r.number}: {r.title}", r.passed, "; ".join(r.failures[:3]))
    return {"rows": [r.to_json() for r in rows], "_lines": [r.line() for r in rows]}


HANDLERS = {"ekeland": cmd_ekeland, "maslov": cmd_maslov, "splitting": cmd_splitting,
            "thm36": cmd_thm36, "find": cmd_find, "audit11": cmd_audit11, "audit12": cmd_audit12,
            "suite": cmd_suite}


# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def load_schema() -> dict:
    text = resources.files("pindex").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema())


def checks_csv(checks: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["name", "pass", "detail"])
    for c in checks:
        w.writerow([c["name"], int(c["pass"]), c.get("detail", "")])
    return buf.getvalue()


def crossings_csv(results: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["instance", "method", "sigma", "nullity", "bracket_width", "residual"])
    for r in results.get("instances", []):
        for key in ("crossing",):
            for c in r.get(key, {}).get("crossings", []):
                w.writerow([r["label"], key, f"{c['sigma']:.12g}", c["nullity"],
                            f"{c['bracket_width']:.3e}", f"{c['residual']:.3e}"])
    return buf.getvalue()


def suite_csv(results: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["criterion", "title", "pass", "elapsed", "failures"])
    for r in results["rows"]:
        w.writerow([r["criterion"], r["title"], int(r["pass"]), f"{r['elapsed']:.2f}",
                    " | ".join(r["failures"])])
    return buf.getvalue()


def summary_table(command: str, checks: CheckList, results: dict) -> str:
    if "_lines" in results:
        body = list(results["_lines"])
    else:
        body = [f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}" for c in checks.items]
    if "_transcript" in results:
        body = [results["_transcript"]]
    status = "all checks pass" if checks.passed else f"failing: {', '.join(checks.failing)}"
    return "\n".join([f"pindex {command}"] + body + [status])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (INI)")
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--seed", type=int, help="override [scenario] seed")
    common.add_argument("--workers", type=int, default=1, help="process workers (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="pindex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pindex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    idx = sub.add_parser("index", help="Ekeland or Maslov P-index")
    idx_sub = idx.add_subparsers(dest="sub", required=True)
    idx_sub.add_parser("ekeland", parents=[common], help="Ekeland P-index by crossings and Galerkin")
    idx_sub.add_parser("maslov", parents=[common], help="Maslov (P, omega)-index")
    sub.add_parser("splitting", parents=[common], help="splitting numbers by limit or table")
    ver = sub.add_parser("verify", help="cross-method identities")
    ver.add_subparsers(dest="sub", required=True).add_parser(
        "thm36", parents=[common], help="Maslov index at 1 vs nu_1(P^-1) + Ekeland index")
    sub.add_parser("find", parents=[common], help="P-symmetric closed characteristic on an ellipsoid")
    aud = sub.add_parser("audit", help="proof-chain audits")
    aud_sub = aud.add_subparsers(dest="sub", required=True)
    aud_sub.add_parser("thm11", parents=[common], help="ellipticity chain")
    aud_sub.add_parser("thm12", parents=[common], help="non-hyperbolicity chain")
    sub.add_parser("suite", parents=[common], help="run the acceptance matrix")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    key = (args.command,) + ((args.sub,) if getattr(args, "sub", None) else ())
    kind = COMMANDS[key]
    command = " ".join(key)
    t0 = time.perf_counter()
    checks = CheckList()
    results: dict = {}
    error = None
    sc = None
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.config:
            sc = load_scenario(args.config, args.seed)
        elif kind == "suite":
            sc = scenario_from_string(DEFAULT_SUITE, args.seed)
        else:
            raise ConfigError(f"{command} needs --config")
        if sc.kind != kind:
            raise ConfigError(f"scenario kind {sc.kind!r} does not match command {command!r}",
                              f"{sc.source} [scenario] kind")
        sc.scan_config()  # validates tolerances
        results = HANDLERS[kind](sc, checks, args.workers)
        code = 0 if checks.passed else 1
    except INPUT_ERRORS as exc:
        code, error = 2, exc
    except NUMERICAL_ERRORS as exc:
        code, error = 3, exc
    except ValueError as exc:
        code, error = 2, exc
    wall = time.perf_counter() - t0

    report = {
        "tool": "pindex", "version": __version__, "command": command,
        "scenario": sc.echo() if sc else {"kind": kind, "source": str(args.config), "sections": {}},
        "seed": sc.seed if sc else (args.seed or 0),
        "status": {0: "pass", 1: "fail"}.get(code, "error"), "exit_code": code,
        "checks": checks.items, "results": _jsonable(results), "wall_clock": wall,
    }
    if error is not None:
        report["error"] = {"type": type(error).__name__, "message": str(error)}
        trace = getattr(error, "trace", None)
        if trace:
            report["results"]["trace"] = _jsonable(trace)
    validate_report(report)

    if error is not None:
        kind_txt = "parse error" if code == 2 else "numerical failure"
        print(f"pindex {command}: {kind_txt}: {error}", file=sys.stderr)
    else:
        print(summary_table(command, checks, results), file=stdout)
        if code == 1:
            print(f"failed checks: {', '.join(checks.failing)}", file=sys.stderr)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = command.replace(" ", "_")
        (out / f"{stem}.json").write_text(json.dumps(report, indent=1) + "\n")
        (out / f"{stem}.integers.json").write_text(
            json.dumps(integer_fields(report["results"]), sort_keys=True) + "\n")
        if args.format == "csv":
            if kind == "find" and "_record" in results:
                text = results["_record"].trajectory_csv()
            elif kind == "suite" and error is None:
                text = suite_csv(report["results"])
            elif kind == "ekeland" and error is None:
                text = crossings_csv(report["results"])
            else:
                text = checks_csv(checks.items)
            (out / f"{stem}.csv").write_text(text)
    elif args.format == "csv":
        stdout.write(checks_csv(checks.items))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Scenario files: flat INI sections read with ``configparser``.

Numbers may be written as arithmetic in ``pi`` (``pi/2``, ``2*pi/3``); lists
are comma separated.  Every tolerance that feeds an integer decision has a
key in ``[numerics]`` with the default listed in ``NUMERIC_DEFAULTS``.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

from .crossings import ScanConfig
from .ekeland import EPS_GAL
from .finder import FinderConfig
from .paths import EPS_PATH

KINDS = ("ekeland", "maslov", "splitting", "thm36", "find", "audit11", "audit12", "suite")

NUMERIC_DEFAULTS = {
    "scan_points": 512,
    "eps_cross": 1e-7,
    "eps_ker": 1e-8,
    "bisect_tol": 1e-10,
    "gap_floor": 1e-6,
    "end_tol": 1e-8,
    "tangential_slope": 1e-4,
    "eps_gal": EPS_GAL,
    "galerkin_m": 32,
    "galerkin_m_max": 256,
    "eps_path": EPS_PATH,
}


class ConfigError(ValueError):
    """Malformed scenario; ``location`` names the section/key."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}


def parse_number(text: str, location: str = "") -> float:
    """Evaluate a numeric literal or a small arithmetic expression in ``pi``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(f"cannot parse number {text!r}", location) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported expression {text!r}", location)

    return float(ev(tree))


def parse_list(text: str, location: str = "") -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    return [parse_number(p, location) for p in parts]


def parse_int_list(text: str, location: str = "") -> list[int]:
    """Comma-separated integers; ``a-b`` expands to an inclusive range."""
    out = []
    for p in text.split(","):
        p = p.strip()
        if not p:
            continue
        try:
            if "-" in p[1:]:
                lo, hi = p.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(p))
        except ValueError:
            raise ConfigError(f"bad integer list entry {p!r}", location) from None
    return out


@dataclass
class Scenario:
    kind: str
    sections: dict[str, dict[str, str]]
    source: str = "<memory>"
    seed: int = 0
    extras: dict = field(default_factory=dict)

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def raw(self, section: str, key: str, default=None) -> str | None:
        return self.sections.get(section, {}).get(key, default)

    def number(self, section: str, key: str, default=None) -> float:
        v = self.raw(section, key)
        if v is None:
            if default is None:
                raise ConfigError("missing required key", f"[{section}] {key}")
            return float(default)
        return parse_number(v, f"[{section}] {key}")

    def integer(self, section: str, key: str, default=None) -> int:
        v = self.raw(section, key)
        if v is None:
            if default is None:
                raise ConfigError("missing required key", f"[{section}] {key}")
            return int(default)
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"expected an integer, got {v!r}", f"[{section}] {key}") from None

    def numbers(self, section: str, key: str, default=None) -> list[float]:
        v = self.raw(section, key)
        if v is None:
            if default is None:
                raise ConfigError("missing required key", f"[{section}] {key}")
            return list(default)
        return parse_list(v, f"[{section}] {key}")

    def integers(self, section: str, key: str, default=None) -> list[int]:
        v = self.raw(section, key)
        if v is None:
            if default is None:
                raise ConfigError("missing required key", f"[{section}] {key}")
            return list(default)
        return parse_int_list(v, f"[{section}] {key}")

    def numeric(self, key: str) -> float:
        return self.number("numerics", key, NUMERIC_DEFAULTS[key])

    def scan_config(self) -> ScanConfig:
        cfg = ScanConfig(points=int(self.numeric("scan_points")),
                         eps_cross=self.numeric("eps_cross"), eps_ker=self.numeric("eps_ker"),
                         bisect_tol=self.numeric("bisect_tol"), gap_floor=self.numeric("gap_floor"),
                         end_tol=self.numeric("end_tol"),
                         tangential_slope=self.numeric("tangential_slope"))
        for name in ("eps_cross", "eps_ker", "bisect_tol", "gap_floor", "end_tol", "tangential_slope"):
            if getattr(cfg, name) <= 0:
                raise ConfigError("tolerance must be positive", f"[numerics] {name}")
        return cfg

    def finder_config(self) -> FinderConfig:
        d = FinderConfig()
        kw = {}
        for key in ("m", "restarts", "max_iter", "shoot_steps", "linear_steps"):
            kw[key] = self.integer("finder", key, getattr(d, key))
        for key in ("grad_tol", "armijo", "shrink", "noise", "residual_tol", "shoot_tol",
                    "monodromy_tol"):
            kw[key] = self.number("finder", key, getattr(d, key))
        kw["seed"] = self.seed
        return FinderConfig(**kw)

    def echo(self) -> dict:
        return {"kind": self.kind, "source": self.source, "sections": self.sections}


def load_scenario(path: str | Path, seed: int | None = None) -> Scenario:
    """Read a scenario file; ``seed`` (if given) overrides ``[scenario] seed``."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file {path}") from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), str(path)) from None
    return scenario_from_parser(parser, str(path), seed)


def scenario_from_string(text: str, seed: int | None = None) -> Scenario:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), "<string>") from None
    return scenario_from_parser(parser, "<string>", seed)


def scenario_from_parser(parser: configparser.ConfigParser, source: str,
                         seed: int | None) -> Scenario:
    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    if "scenario" not in sections:
        raise ConfigError("missing [scenario] section", source)
    kind = sections["scenario"].get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}",
                          f"{source} [scenario] kind")
    sc = Scenario(kind, sections, source)
    sc.seed = int(seed) if seed is not None else sc.integer("scenario", "seed", 0)
    if sc.seed < 0:
        raise ConfigError("seed must be nonnegative", f"{source} [scenario] seed")
    return sc

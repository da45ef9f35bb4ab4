"""Run configuration: [block] key = value files, with per-field typing and line diagnostics."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .errors import UsageError

COMMANDS = ("audit", "energy", "minimize", "scaling", "perturb", "symmetry", "checks")


class ConfigError(UsageError):
    """Malformed configuration; carries the offending line and field."""

    def __init__(self, message: str, line: Optional[int] = None, fieldname: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if fieldname is not None:
            where.append(f"field {fieldname}")
        super().__init__(f"config error ({', '.join(where)}): {message}" if where else f"config error: {message}")
        self.line = line
        self.fieldname = fieldname


def _float_list(text: str) -> list:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ValueError("empty list")
    return [float(p) for p in parts]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    t = text.strip().lower()
    return None if t in ("", "none", "default") else float(t)


def _choice(*options) -> Callable:
    def parse(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


# block -> key -> (parser, default)
SCHEMA: dict = {
    "run": {
        "command": (_choice(*COMMANDS), None),
        "seed": (int, 0),
        "threads": (int, 1),
        "out": (str, "out"),
    },
    "kernel": {
        "family": (_choice("pLaplacian", "meanCurvature"), "pLaplacian"),
        "n": (int, 1),
        "s": (float, 0.5),
        "p": (_opt_float, None),
    },
    "potential": {
        "family": (_choice("doubleWell", "zero"), "doubleWell"),
    },
    "domain": {
        "R": (float, 4.0),
        "R_box": (_opt_float, None),          # default 2R
        "h": (_opt_float, None),              # default R/32
        "profile": (_choice("ramp", "layer_tanh", "constant", "psi_aux", "grid"), "ramp"),
        "angle_deg": (float, 0.0),
        "width": (float, 1.0),
        "value": (float, 0.0),
        "input": (str, ""),                   # GridFunction text file when profile = grid
    },
    "solver": {
        "max_iters": (int, 5000),
        "grad_tol": (_opt_float, None),
        "step0": (float, 1.0),
        "backtrack_factor": (float, 0.5),
        "armijo_c": (float, 1e-4),
        "box": (_bool, True),
    },
    "quadrature": {
        "self_pair_policy": (_choice("exclude", "midpoint_correction"), "exclude"),
        "tail_policy": (_choice("analytic_constant", "quadrature_1d", "none"), "quadrature_1d"),
        "summation": (_choice("fixed_order", "compensated"), "fixed_order"),
        "backend": (_choice("auto", "direct", "fft"), "auto"),
        "tail_radial_nodes": (int, 64),
        "tail_angular_nodes": (int, 64),
    },
    "experiment": {
        "R_list": (_float_list, None),
        "sample_count": (int, 10_000),
        "data_rule": (_choice("ramp", "psi"), "ramp"),
        "h_divisions": (int, 32),
        "box_factor": (float, 2.0),
        "tol": (_opt_float, None),
        "pairs": (int, 100),
        "nodes": (int, 20),
        "residual_threshold": (float, 0.02),
        "angle_tolerance_deg": (float, 2.0),
    },
}

# command-line overrides: flag name -> (block, key)
OVERRIDES = {
    "family": ("kernel", "family"), "n": ("kernel", "n"), "s": ("kernel", "s"), "p": ("kernel", "p"),
    "potential": ("potential", "family"),
    "R": ("domain", "R"), "R_box": ("domain", "R_box"), "h": ("domain", "h"),
    "profile": ("domain", "profile"), "angle": ("domain", "angle_deg"), "input": ("domain", "input"),
    "max_iters": ("solver", "max_iters"), "grad_tol": ("solver", "grad_tol"),
    "tail_policy": ("quadrature", "tail_policy"), "backend": ("quadrature", "backend"),
    "summation": ("quadrature", "summation"),
    "R_list": ("experiment", "R_list"), "sample_count": ("experiment", "sample_count"),
    "data_rule": ("experiment", "data_rule"), "h_divisions": ("experiment", "h_divisions"),
    "pairs": ("experiment", "pairs"),
}


@dataclass
class RunConfig:
    command: str
    blocks: dict = field(default_factory=dict)     # block -> key -> typed value

    def get(self, block: str, key: str):
        return self.blocks[block][key]


def _key_lines(text: str) -> dict:
    """(block, key) -> line number, for diagnostics."""
    out, block = {}, None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            block = m.group(1).strip()
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and block is not None:
            out[(block, m.group(1).strip())] = i
    return out


def defaults() -> dict:
    return {b: {k: d for k, (_, d) in keys.items()} for b, keys in SCHEMA.items()}


def parse_text(text: str) -> dict:
    """Typed blocks from config text; unknown blocks or keys and bad values raise ConfigError."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key = value line before any [block] header", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", exc.lineno, f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate block", exc.lineno, exc.section) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("line is neither a [block] header nor key = value", lineno) from None
    lines = _key_lines(text)
    blocks = defaults()
    for block in cp.sections():
        if block not in SCHEMA:
            raise ConfigError(f"unknown block [{block}]", None, block)
        for key, raw in cp.items(block):
            name = f"{block}.{key}"
            if key not in SCHEMA[block]:
                raise ConfigError("unknown key", lines.get((block, key)), name)
            parser = SCHEMA[block][key][0]
            try:
                blocks[block][key] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}", lines.get((block, key)), name) from None
    return blocks


def load(path: Optional[str]) -> dict:
    if path is None:
        return defaults()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such file {path!r}")
    return parse_text(p.read_text())


def apply_overrides(blocks: dict, overrides: dict) -> dict:
    """Flag values (strings, None when absent) shadow config values."""
    for flag, raw in overrides.items():
        if raw is None:
            continue
        block, key = OVERRIDES[flag]
        try:
            blocks[block][key] = SCHEMA[block][key][0](str(raw))
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} for --{flag}: {exc}", None, f"{block}.{key}") from None
    return blocks

"""Experiment configuration: a strict sectioned ``key = value`` format.

Example::

    [domain]
    n = 2
    extent = 1.5
    cells = 300

    [flow]
    alpha = 1.5
    h = 0.0016
    n_steps = 100

    [norm]
    kind = euclidean

    [initial]
    set = ball 0 0 1

    [scenario]
    name = shrink_circle

Blank lines and ``#`` comments are ignored.  Unknown sections or keys,
repeated keys and malformed values are errors that name the line.  Lists
are whitespace separated.  :func:`format_config` prints the keys that were
set, in schema order, with canonical value spelling, so a file written in
that form reproduces itself byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import domain as dom
from . import forcing as frc
from . import kernel, norms


class ConfigError(ValueError):
    pass


# type tags: int, float, str, floats (list), strs (list), bool
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "domain": {
        "n": ("int", None),
        "extent": ("float", None),
        "cells": ("int", None),
        "margin": ("int", 4),
    },
    "flow": {
        "alpha": ("float", None),
        "h": ("float", None),
        "n_steps": ("int", 0),
        "engine": ("str", "threshold"),
        "pde_dt": ("float", 0.0),
        "pde_eta": ("float", 0.0),
        "n_dirs": ("int", 1024),
        "eps_tail": ("float", 1e-3),
    },
    "norm": {
        "kind": ("str", None),
        "q": ("float", 2.0),
        "matrix": ("floats", ()),
        "vertices": ("floats", ()),
    },
    "forcing": {
        "kind": ("str", "zero"),
        "value": ("float", 0.0),
        "breakpoints": ("floats", ()),
        "values": ("floats", ()),
        "space_coeffs": ("floats", ()),
        "path": ("str", ""),
    },
    "initial": {
        "set": ("str", None),
    },
    "output": {
        "dir": ("str", "out"),
        "cadence": ("int", 10),
        "formats": ("strs", ("csv",)),
    },
    "scenario": {
        "name": ("str", None),
    },
}

REQUIRED_SECTIONS = ("domain", "flow", "norm", "initial", "scenario")

# scenario-specific keys live in [scenario]
SCENARIO_KEYS: dict[str, dict[str, tuple[str, object]]] = {
    "shrink_circle": {"tolerance": ("float", 0.05), "t_fraction": ("float", 0.8), "halving": ("bool", True)},
    "wulff": {"t_end": ("float", None), "tolerance": ("float", 0.1)},
    "convexity": {"factor": ("float", 4.0)},
    "ball_speed": {"radii": ("floats", (0.5, 1.0, 2.0)), "levels": ("int", 3), "steps": ("int", 4), "refine": ("bool", True)},
    "splitting": {"t_end": ("float", None), "divisors": ("floats", (4.0, 8.0, 16.0)), "slack": ("float", 0.1)},
    "distance": {
        "outer": ("str", None),
        "g2": ("float", 0.5),
        "t_end": ("float", None),
        "samples": ("int", 20),
    },
    "stability": {
        "alphas": ("floats", (0.9, 0.99, 0.999)),
        "n_specs": ("int", 10),
        "seed": ("int", 0),
        "tolerance": ("float", 0.02),
    },
    "crossval": {"t_end": ("float", None), "factor": ("float", 3.0), "samples": ("int", 10), "pde_cells": ("int", 0)},
    "anisotropy_report": {"n_pairs": ("int", 10000), "n_ratio": ("int", 256), "seed": ("int", 0)},
}

ENGINES = ("threshold", "pde", "both")
# scenarios that never time-step a grid
GRIDLESS = ("stability", "anisotropy_report")
FORMATS = ("csv", "pgm", "grid")


def _parse_value(kind: str, text: str, where: str):
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            v = float(text)
            if math.isnan(v):
                raise ValueError
            return v
        if kind == "floats":
            return tuple(float(t) for t in text.split())
        if kind == "strs":
            return tuple(text.split())
        if kind == "bool":
            if text.lower() in ("true", "yes", "1"):
                return True
            if text.lower() in ("false", "no", "0"):
                return False
            raise ValueError
        return text
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text!r} as {kind}") from None


def _format_value(kind: str, v) -> str:
    if kind == "float":
        return repr(float(v))
    if kind == "floats":
        return " ".join(repr(float(x)) for x in v)
    if kind == "strs":
        return " ".join(v)
    if kind == "bool":
        return "true" if v else "false"
    return str(v)


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)  # section -> key -> value (explicitly set keys)
    source: str = ""

    def get(self, section: str, key: str):
        sec = self.values.get(section, {})
        if key in sec:
            return sec[key]
        schema = _section_schema(section, self.values.get("scenario", {}).get("name"))
        if key not in schema:
            raise ConfigError(f"unknown key {section}.{key}")
        default = schema[key][1]
        if default is None:
            raise ConfigError(f"missing required key {section}.{key}")
        return default

    def has(self, section: str, key: str) -> bool:
        return key in self.values.get(section, {})

    # typed accessors ---------------------------------------------------

    @property
    def scenario(self) -> str:
        return self.get("scenario", "name")

    def domain(self) -> dom.Domain:
        try:
            return dom.Domain(
                self.get("domain", "n"), self.get("domain", "extent"), self.get("domain", "cells"), self.get("domain", "margin")
            )
        except dom.DomainError as exc:
            raise ConfigError(str(exc)) from None

    def norm(self) -> norms.NormDescriptor:
        kind = self.get("norm", "kind")
        n = self.get("domain", "n")
        q = self.get("norm", "q")
        if kind == "pnorm" and not self.has("norm", "q"):
            raise ConfigError("norm.kind = pnorm needs norm.q")
        try:
            return norms.from_config(
                kind,
                n,
                q=q,
                matrix=self.get("norm", "matrix") or None,
                vertices=np.reshape(self.get("norm", "vertices"), (-1, 2)) if self.get("norm", "vertices") else None,
            )
        except norms.NormError as exc:
            raise ConfigError(f"norm: {exc}") from None

    def forcing(self) -> frc.ForcingSpec:
        kind = self.get("forcing", "kind")
        try:
            if kind == "zero":
                return frc.zero()
            if kind == "constant":
                return frc.constant(self.get("forcing", "value"))
            if kind == "time_table":
                return frc.time_table(self.get("forcing", "breakpoints"), self.get("forcing", "values"))
            if kind == "separable":
                return frc.separable(
                    self.get("forcing", "space_coeffs"), self.get("forcing", "breakpoints"), self.get("forcing", "values")
                )
            if kind == "grid_sequence":
                path = self.get("forcing", "path")
                if not path:
                    raise ConfigError("forcing.kind = grid_sequence needs forcing.path (an .npz of per-step grids)")
                with np.load(path) as data:
                    grids = [data[k] for k in sorted(data.files)]
                return frc.grid_sequence(grids)
        except frc.ForcingError as exc:
            raise ConfigError(f"forcing: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"forcing.path: {exc}") from None
        raise ConfigError(f"unknown forcing kind {kind!r}; expected one of {frc.KINDS}")

    def initial_set(self) -> dom.SetSpec:
        try:
            return dom.parse_set(self.get("initial", "set"), self.get("domain", "n"))
        except dom.DomainError as exc:
            raise ConfigError(f"initial.set: {exc}") from None

    def params(self) -> kernel.SchemeParams:
        try:
            return kernel.scheme_params(self.get("flow", "alpha"), self.get("flow", "h"))
        except kernel.KernelError as exc:
            raise ConfigError(f"flow: {exc}") from None


def _section_schema(section: str, scenario: str | None) -> dict:
    base = dict(SCHEMA.get(section, {}))
    if section == "scenario" and scenario in SCENARIO_KEYS:
        base.update(SCENARIO_KEYS[scenario])
    return base


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    values: dict[str, dict] = {}
    raw: list[tuple[str, str, str, str]] = []  # (section, key, value, where)
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{source}:{lineno}"
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("["):
            if not s.endswith("]"):
                raise ConfigError(f"{where}: malformed section header {s!r}")
            section = s[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            if section in values:
                raise ConfigError(f"{where}: section [{section}] appears twice")
            values[section] = {}
            continue
        if "=" not in s:
            raise ConfigError(f"{where}: expected 'key = value', got {s!r}")
        if section is None:
            raise ConfigError(f"{where}: key outside of any section")
        key, val = (t.strip() for t in s.split("=", 1))
        if not key or not val:
            raise ConfigError(f"{where}: empty key or value")
        raw.append((section, key, val, where))
        values[section][key] = None
    for sec in REQUIRED_SECTIONS:
        if sec not in values:
            raise ConfigError(f"missing section [{sec}]")
    # the scenario name decides which extra keys [scenario] accepts
    name = next((v for s, k, v, _ in raw if s == "scenario" and k == "name"), None)
    if name is None:
        raise ConfigError("missing required key scenario.name")
    if name not in SCENARIO_KEYS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {tuple(SCENARIO_KEYS)}")
    seen = set()
    for sec, key, val, where in raw:
        schema = _section_schema(sec, name)
        if key not in schema:
            raise ConfigError(f"{where}: unknown key {sec}.{key}")
        if (sec, key) in seen:
            raise ConfigError(f"{where}: key {sec}.{key} set twice")
        seen.add((sec, key))
        values[sec][key] = _parse_value(schema[key][0], val, where)
    cfg = ExperimentConfig(values, source)
    for sec in values:
        for key, (_, default) in _section_schema(sec, name).items():
            if default is None and key not in values[sec]:
                raise ConfigError(f"missing required key {sec}.{key}")
    validate(cfg)
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def format_config(cfg: ExperimentConfig) -> str:
    name = cfg.scenario
    out = []
    for sec in SCHEMA:
        if sec not in cfg.values:
            continue
        if out:
            out.append("")
        out.append(f"[{sec}]")
        for key, (kind, _) in _section_schema(sec, name).items():
            if key in cfg.values[sec]:
                out.append(f"{key} = {_format_value(kind, cfg.values[sec][key])}")
    return "\n".join(out) + "\n"


def validate(cfg: ExperimentConfig) -> None:
    """Cross-field checks, done before any computation."""
    d = cfg.domain()
    if not math.isfinite(d.extent):
        raise ConfigError("domain.extent must be finite")
    alpha = cfg.get("flow", "alpha")
    if not 1.0 <= alpha < 2.0:
        raise ConfigError(f"alpha must be in [1,2), got flow.alpha = {alpha}")
    h = cfg.get("flow", "h")
    if not 0 < h < math.inf:
        raise ConfigError(f"flow.h must be a positive number, got {h}")
    if alpha == 1.0 and h >= kernel.ALPHA1_H_MAX:
        raise ConfigError(f"alpha=1 requires h < 1/(2e) = {kernel.ALPHA1_H_MAX:.6f}, got flow.h = {h}")
    if cfg.get("flow", "n_steps") < 0:
        raise ConfigError("flow.n_steps must be >= 0")
    engine = cfg.get("flow", "engine")
    if engine not in ENGINES:
        raise ConfigError(f"flow.engine must be one of {ENGINES}, got {engine!r}")
    if cfg.get("flow", "n_dirs") < 64:
        raise ConfigError(f"flow.n_dirs must be >= 64, got {cfg.get('flow', 'n_dirs')}")
    eps = cfg.get("flow", "eps_tail")
    if not 0 < eps < 1:
        raise ConfigError(f"flow.eps_tail must be in (0,1), got {eps}")
    if engine in ("threshold", "both") and cfg.scenario not in GRIDLESS:
        p = cfg.params()
        if d.spacing > p.width / 4.0 * (1 + 1e-12):
            raise ConfigError(
                f"grid too coarse for the kernel: spacing {d.spacing:.6g} > sigma^(1/alpha)/4 = {p.width / 4.0:.6g} "
                f"(flow.h = {h}, domain.cells = {d.cells})"
            )
    if engine in ("pde", "both") and d.dim != 2 and cfg.scenario not in GRIDLESS:
        raise ConfigError("the pde engine is 2-D only")
    cfg.norm()
    g = cfg.forcing()
    spec = cfg.initial_set()
    try:
        dom.check_inside(spec, d)
    except dom.DomainError as exc:
        raise ConfigError(f"initial.set: {exc}") from None
    cad = cfg.get("output", "cadence")
    if cad < 1:
        raise ConfigError(f"output.cadence must be >= 1, got {cad}")
    bad = [f for f in cfg.get("output", "formats") if f not in FORMATS]
    if bad:
        raise ConfigError(f"output.formats: unknown format(s) {bad}; expected {FORMATS}")
    if g.kind == "grid_sequence" and g.grids[0].shape != d.shape:
        raise ConfigError(f"forcing grids have shape {g.grids[0].shape}, domain is {d.shape}")


def with_scenario(cfg: ExperimentConfig, name: str) -> ExperimentConfig:
    """Copy of ``cfg`` running scenario ``name``; its [scenario] keys must suit the new name."""
    if name not in SCENARIO_KEYS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {tuple(SCENARIO_KEYS)}")
    values = {s: dict(v) for s, v in cfg.values.items()}
    values["scenario"]["name"] = name
    schema = _section_schema("scenario", name)
    for key in values["scenario"]:
        if key not in schema:
            raise ConfigError(f"key scenario.{key} does not apply to scenario {name!r}")
    for key, (_, default) in schema.items():
        if default is None and key not in values["scenario"]:
            raise ConfigError(f"missing required key scenario.{key}")
    new = ExperimentConfig(values, cfg.source)
    validate(new)
    return new

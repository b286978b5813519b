"""Scenario files: sectioned ``key = value`` text describing a topology.

Example::

    [scenario]
    name = demo
    duration_us = 200000

    [switch]                 # defaults for every switch output port
    target_utilization = 0.9

    [node A]
    kind = source
    [node S]
    kind = switch
    [node D]
    kind = destination

    [link access]
    from = A
    to = S
    bandwidth_bps = 10e6
    [link out]
    from = S
    to = D
    bandwidth_bps = 10e6

    [vc 1]
    path = A S D
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources

from .core import DEFAULT_CELL_SIZE_BITS, link_cell_rate
from .switch import FairnessOption, SwitchConfig

NODE_KINDS = ("source", "switch", "destination")


class ScenarioError(ValueError):
    """Carries every validation problem found, not only the first."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.errors))


@dataclass
class NodeSpec:
    name: str
    kind: str


@dataclass
class LinkSpec:
    name: str
    src: str
    dst: str
    bandwidth_bps: float
    delay_us: float = 10.0
    # per-port overrides of the [switch] defaults
    target_utilization: float | None = None
    tub_half_width: float | None = None
    averaging_interval_us: float | None = None
    phase_offset_us: float = 0.0


@dataclass
class VcSpec:
    vc: int
    path: list[str]
    initial_cell_rate: str = "peak"  # "peak", "min", "<f>*peak" or cells/s
    peak_cell_rate: float | None = None
    min_cell_rate: float | None = None
    traffic: str = "greedy"  # or "bursts"
    bursts: list[tuple[float, int]] = field(default_factory=list)
    start_us: float = 0.0
    phase_offset_us: float = 0.0


@dataclass
class Scenario:
    name: str = "unnamed"
    cell_size_bits: int = DEFAULT_CELL_SIZE_BITS
    duration_us: float = 100_000.0
    seed: int = 0
    option: FairnessOption = FairnessOption.BASIC
    becn: bool = False
    randomize_phases: bool = False
    sample_interval_us: float | None = None
    target_utilization: float = 0.9
    tub_half_width: float = 0.1
    averaging_interval_us: float = 1000.0
    count_rm_cells: bool = False
    source_averaging_interval_us: float | None = None
    nodes: dict[str, NodeSpec] = field(default_factory=dict)
    links: dict[str, LinkSpec] = field(default_factory=dict)
    vcs: dict[int, VcSpec] = field(default_factory=dict)

    # derived helpers -----------------------------------------------------

    def link_between(self, a: str, b: str) -> LinkSpec | None:
        for link in self.links.values():
            if link.src == a and link.dst == b:
                return link
        return None

    def route_links(self, vc: int) -> list[str]:
        path = self.vcs[vc].path
        return [self.link_between(a, b).name for a, b in zip(path, path[1:])]

    def is_switch_port(self, link: LinkSpec) -> bool:
        node = self.nodes.get(link.src)
        return node is not None and node.kind == "switch"

    def port_config(self, link_name: str) -> SwitchConfig:
        link = self.links[link_name]
        return SwitchConfig(
            target_utilization=_pick(link.target_utilization, self.target_utilization),
            tub_half_width=_pick(link.tub_half_width, self.tub_half_width),
            averaging_interval=_pick(link.averaging_interval_us, self.averaging_interval_us),
            option=self.option,
            becn_option=self.becn,
            link_bandwidth=link.bandwidth_bps,
            cell_size=self.cell_size_bits,
            count_rm_cells=self.count_rm_cells,
        )

    def port_target_rates(self) -> dict[str, float]:
        return {name: self.port_config(name).target_cell_rate
                for name, link in self.links.items() if self.is_switch_port(link)}

    def vc_peak_rate(self, vc: int) -> float:
        spec = self.vcs[vc]
        if spec.peak_cell_rate is not None:
            return spec.peak_cell_rate
        first = self.links[self.route_links(vc)[0]]
        return link_cell_rate(first.bandwidth_bps, self.cell_size_bits)

    def source_interval(self) -> float:
        return _pick(self.source_averaging_interval_us, self.averaging_interval_us)

    def vc_min_rate(self, vc: int) -> float:
        spec = self.vcs[vc]
        if spec.min_cell_rate is not None:
            return spec.min_cell_rate
        return 1e6 / self.source_interval()

    def vc_initial_rate(self, vc: int) -> float:
        text = str(self.vcs[vc].initial_cell_rate).strip().lower()
        peak = self.vc_peak_rate(vc)
        if text == "peak":
            return peak
        if text == "min":
            return self.vc_min_rate(vc)
        m = re.fullmatch(r"([0-9.eE+-]+)\s*\*\s*peak", text)
        if m:
            return float(m.group(1)) * peak
        return float(text)

    def maxmin_optimum(self) -> dict[int, float]:
        from .oracle import maxmin_oracle
        routes = {vc: self.route_links(vc) for vc in self.vcs}
        return maxmin_oracle(self.port_target_rates(), routes)


def _pick(value, default):
    return default if value is None else value


# parsing ---------------------------------------------------------------

_SCENARIO_KEYS = {
    "name": str, "cell_size_bits": int, "duration_us": float, "seed": int,
    "option": str, "becn": bool, "randomize_phases": bool, "sample_interval_us": float,
}
_SWITCH_KEYS = {"target_utilization": float, "tub_half_width": float,
                "averaging_interval_us": float, "count_rm_cells": bool}
_SOURCE_KEYS = {"averaging_interval_us": float, "initial_cell_rate": str}
_NODE_KEYS = {"kind": str}
_LINK_KEYS = {"from": str, "to": str, "bandwidth_bps": float, "delay_us": float,
              "target_utilization": float, "tub_half_width": float,
              "averaging_interval_us": float, "phase_offset_us": float}
_VC_KEYS = {"path": str, "initial_cell_rate": str, "peak_cell_rate": float,
            "min_cell_rate": float, "traffic": str, "bursts": str, "start_us": float,
            "phase_offset_us": float}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(kind, raw: str, where: str, errors: list):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind is int:
            if re.fullmatch(r"[+-]?\d+", raw):
                return int(raw)
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
        return raw
    except ValueError:
        errors.append(f"{where}: cannot read {raw!r} as {kind.__name__}")
        return None


def _read_section(section, allowed: dict, where: str, errors: list) -> dict:
    out = {}
    for key, raw in section.items():
        if key not in allowed:
            errors.append(f"{where}: unknown key {key!r}")
            continue
        value = _convert(allowed[key], raw, f"{where}.{key}", errors)
        if value is not None:
            out[key] = value
    return out


def _parse_bursts(text: str, where: str, errors: list) -> list[tuple[float, int]]:
    bursts = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            t, n = item.split(":")
            bursts.append((float(t), int(n)))
        except ValueError:
            errors.append(f"{where}: burst entry {item!r} is not 'time_us:cells'")
    return bursts


def parse_scenario(text: str) -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",), default_section="\0none")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError([f"syntax: {exc}"]) from None

    errors: list[str] = []
    sc = Scenario()
    source_defaults: dict = {}
    for name in parser.sections():
        section = parser[name]
        head, _, ident = name.partition(" ")
        ident = ident.strip()
        if name == "scenario":
            vals = _read_section(section, _SCENARIO_KEYS, "[scenario]", errors)
            if "option" in vals:
                try:
                    vals["option"] = FairnessOption(vals["option"])
                except ValueError:
                    errors.append(f"[scenario].option: {vals.pop('option')!r} is not one of "
                                  "basic, aggressive, precise")
            for key, value in vals.items():
                setattr(sc, key, value)
        elif name == "switch":
            vals = _read_section(section, _SWITCH_KEYS, "[switch]", errors)
            for key, value in vals.items():
                setattr(sc, key, value)
        elif name == "source":
            source_defaults = _read_section(section, _SOURCE_KEYS, "[source]", errors)
            if "averaging_interval_us" in source_defaults:
                sc.source_averaging_interval_us = source_defaults["averaging_interval_us"]
        elif head == "node" and ident:
            vals = _read_section(section, _NODE_KEYS, f"[{name}]", errors)
            kind = vals.get("kind")
            if kind not in NODE_KINDS:
                errors.append(f"[{name}].kind: expected one of {', '.join(NODE_KINDS)}, got {kind!r}")
                continue
            sc.nodes[ident] = NodeSpec(ident, kind)
        elif head == "link" and ident:
            vals = _read_section(section, _LINK_KEYS, f"[{name}]", errors)
            missing = [k for k in ("from", "to", "bandwidth_bps") if k not in vals]
            if missing:
                errors.append(f"[{name}]: missing {', '.join(missing)}")
                continue
            src, dst = vals.pop("from"), vals.pop("to")
            sc.links[ident] = LinkSpec(ident, src, dst, **vals)
        elif head == "vc" and ident:
            where = f"[{name}]"
            try:
                vc = int(ident)
            except ValueError:
                errors.append(f"{where}: VC identifier must be an integer")
                continue
            vals = _read_section(section, _VC_KEYS, where, errors)
            if "path" not in vals:
                errors.append(f"{where}: missing path")
                continue
            vals["path"] = vals["path"].split()
            vals.setdefault("initial_cell_rate", source_defaults.get("initial_cell_rate", "peak"))
            if "bursts" in vals:
                vals["bursts"] = _parse_bursts(vals["bursts"], f"{where}.bursts", errors)
            sc.vcs[vc] = VcSpec(vc, **vals)
        else:
            errors.append(f"[{name}]: unknown section")
    errors.extend(validate(sc))
    if errors:
        raise ScenarioError(errors)
    return sc


def validate(sc: Scenario) -> list[str]:
    """Every problem with a Scenario, as human-readable messages."""
    errors = []
    if not 0 < sc.tub_half_width < 0.5:
        errors.append(f"tub_half_width {sc.tub_half_width} outside (0, 0.5): the band "
                      "is only closed for half-widths below 0.5")
    if not 0 < sc.target_utilization < 1:
        errors.append(f"target_utilization {sc.target_utilization} outside (0, 1)")
    if sc.averaging_interval_us <= 0:
        errors.append("averaging_interval_us must be > 0")
    if sc.cell_size_bits <= 0:
        errors.append("cell_size_bits must be > 0")
    if sc.duration_us < 0:
        errors.append("duration_us must be >= 0")
    if sc.sample_interval_us is not None and sc.sample_interval_us <= 0:
        errors.append("sample_interval_us must be > 0")
    for link in sc.links.values():
        where = f"link {link.name}"
        for end in (link.src, link.dst):
            if end not in sc.nodes:
                errors.append(f"{where}: unknown node {end!r}")
        if link.src == link.dst:
            errors.append(f"{where}: self-loop")
        if link.bandwidth_bps <= 0:
            errors.append(f"{where}: bandwidth must be > 0")
        if link.delay_us < 0:
            errors.append(f"{where}: delay must be >= 0")
        if link.tub_half_width is not None and not 0 < link.tub_half_width < 0.5:
            errors.append(f"{where}: tub_half_width {link.tub_half_width} outside (0, 0.5)")
        if link.target_utilization is not None and not 0 < link.target_utilization < 1:
            errors.append(f"{where}: target_utilization {link.target_utilization} outside (0, 1)")
        if link.averaging_interval_us is not None and link.averaging_interval_us <= 0:
            errors.append(f"{where}: averaging_interval_us must be > 0")
    pairs = [(l.src, l.dst) for l in sc.links.values()]
    if len(pairs) != len(set(pairs)):
        errors.append("two links join the same ordered node pair")
    for vc, spec in sc.vcs.items():
        where = f"vc {vc}"
        path = spec.path
        if len(path) < 2:
            errors.append(f"{where}: path needs at least a source and a destination")
            continue
        if len(set(path)) != len(path):
            errors.append(f"{where}: path revisits a node")
        unknown = [n for n in path if n not in sc.nodes]
        if unknown:
            errors.append(f"{where}: unknown node(s) {', '.join(unknown)}")
            continue
        if sc.nodes[path[0]].kind != "source":
            errors.append(f"{where}: path must start at a source node")
        if sc.nodes[path[-1]].kind != "destination":
            errors.append(f"{where}: path must end at a destination node")
        for mid in path[1:-1]:
            if sc.nodes[mid].kind != "switch":
                errors.append(f"{where}: interior node {mid} is not a switch")
        for a, b in zip(path, path[1:]):
            if sc.link_between(a, b) is None:
                errors.append(f"{where}: no link from {a} to {b}")
        if spec.traffic not in ("greedy", "bursts"):
            errors.append(f"{where}: traffic must be 'greedy' or 'bursts'")
        if spec.start_us < 0:
            errors.append(f"{where}: start_us must be >= 0")
    if errors:
        return errors
    for vc in sc.vcs:
        try:
            rate = sc.vc_initial_rate(vc)
        except ValueError:
            errors.append(f"vc {vc}: unreadable initial_cell_rate {sc.vcs[vc].initial_cell_rate!r}")
            continue
        lo, hi = sc.vc_min_rate(vc), sc.vc_peak_rate(vc)
        if not lo <= rate <= hi * (1 + 1e-12):
            errors.append(f"vc {vc}: initial_cell_rate {rate} outside [{lo}, {hi}]")
    return errors


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, FairnessOption):
        return value.value
    return str(value)


def print_scenario(sc: Scenario) -> str:
    """Text that ``parse_scenario`` reads back into an equal Scenario."""
    lines = ["[scenario]"]
    for key in ("name", "cell_size_bits", "duration_us", "seed", "option", "becn",
                "randomize_phases", "sample_interval_us"):
        value = getattr(sc, key)
        if value is not None:
            lines.append(f"{key} = {_fmt(value)}")
    lines += ["", "[switch]"]
    for key in _SWITCH_KEYS:
        lines.append(f"{key} = {_fmt(getattr(sc, key))}")
    if sc.source_averaging_interval_us is not None:
        lines += ["", "[source]", f"averaging_interval_us = {_fmt(sc.source_averaging_interval_us)}"]
    for node in sc.nodes.values():
        lines += ["", f"[node {node.name}]", f"kind = {node.kind}"]
    for link in sc.links.values():
        lines += ["", f"[link {link.name}]", f"from = {link.src}", f"to = {link.dst}",
                  f"bandwidth_bps = {_fmt(link.bandwidth_bps)}", f"delay_us = {_fmt(link.delay_us)}"]
        for key in ("target_utilization", "tub_half_width", "averaging_interval_us"):
            value = getattr(link, key)
            if value is not None:
                lines.append(f"{key} = {_fmt(value)}")
        if link.phase_offset_us:
            lines.append(f"phase_offset_us = {_fmt(link.phase_offset_us)}")
    for spec in sc.vcs.values():
        lines += ["", f"[vc {spec.vc}]", f"path = {' '.join(spec.path)}",
                  f"initial_cell_rate = {spec.initial_cell_rate}", f"traffic = {spec.traffic}"]
        for key in ("peak_cell_rate", "min_cell_rate"):
            value = getattr(spec, key)
            if value is not None:
                lines.append(f"{key} = {_fmt(value)}")
        if spec.bursts:
            lines.append("bursts = " + ", ".join(f"{_fmt(t)}:{n}" for t, n in spec.bursts))
        if spec.start_us:
            lines.append(f"start_us = {_fmt(spec.start_us)}")
        if spec.phase_offset_us:
            lines.append(f"phase_offset_us = {_fmt(spec.phase_offset_us)}")
    return "\n".join(lines) + "\n"


def bundled_scenarios() -> list[str]:
    files = resources.files("osuabr.scenarios")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".ini"))


def load_bundled(name: str) -> Scenario:
    text = resources.files("osuabr.scenarios").joinpath(f"{name}.ini").read_text("utf-8")
    return parse_scenario(text)


def load_scenario(ref: str) -> Scenario:
    """Read a scenario from a file path, or by bundled name."""
    from pathlib import Path
    path = Path(ref)
    if path.exists():
        return parse_scenario(path.read_text("utf-8"))
    if ref in bundled_scenarios():
        return load_bundled(ref)
    raise FileNotFoundError(f"no scenario file or bundled scenario named {ref!r}")


def with_overrides(sc: Scenario, **changes) -> Scenario:
    """Copy with top-level fields replaced, ``None`` values ignored."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if "option" in changes:
        changes["option"] = FairnessOption(changes["option"])
    out = replace(sc, **changes)
    errors = validate(out)
    if errors:
        raise ScenarioError(errors)
    return out

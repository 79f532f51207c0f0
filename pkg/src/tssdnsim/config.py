"""Scenario configuration: YAML loading, unit-suffixed times, validation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import yaml

from .frames import MacAddress
from .srp import SR_CLASSES


class ConfigError(Exception):
    """Invalid scenario file; CLI maps this to exit code 2."""


_TIME_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(ns|us|ms|s)?\s*$")
_UNIT_NS = {"ns": 1, "us": 1_000, "ms": 1_000_000, "s": 1_000_000_000, None: 1}


def parse_time_ns(value, field_name: str = "time") -> int:
    """Parse '100ms', '25us', '3.5ms' or a bare integer (ns) to integer ns."""
    if isinstance(value, int):
        if value < 0:
            raise ConfigError(f"{field_name}: negative time {value}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{field_name}: expected a time, got {value!r}")
    m = _TIME_RE.match(value)
    if m is None:
        raise ConfigError(f"{field_name}: cannot parse time {value!r}")
    amount = Fraction(m.group(1)) * _UNIT_NS[m.group(2)]
    if amount.denominator != 1:
        raise ConfigError(f"{field_name}: {value!r} is not a whole number of ns")
    return int(amount)


@dataclass
class LinkConfig:
    a: str
    b: str
    rate_bps: int
    propagation_ns: int


@dataclass
class ControlConfig:
    one_way_delay_ns: int = 25_000
    processing_delay_ns: int = 25_000


@dataclass
class TalkerSpec:
    node: str
    unique_id: int
    dst_group: MacAddress
    vid: int
    pcp: int
    sr_class: str
    frame_bytes: int
    interval_ns: int
    advertise_at_ns: int


@dataclass
class ListenerSpec:
    node: str
    unique_id: int


@dataclass
class CrossTrafficSpec:
    node: str
    dst_node: str
    frame_bytes: int
    send_interval_ns: int
    start_at_ns: int
    count: Optional[int] = None
    vid: Optional[int] = None
    pcp: int = 0


@dataclass
class ScenarioConfig:
    name: str
    sdn_enabled: bool
    idle_setup_ns: int
    run_until_ns: int
    clients: list
    switches: list
    links: list
    controller: Optional[str] = None
    control: ControlConfig = field(default_factory=ControlConfig)
    talker: Optional[TalkerSpec] = None
    listeners: list = field(default_factory=list)
    cross_traffic: Optional[CrossTrafficSpec] = None
    queue_capacity: int = 100
    shaper_enabled: bool = True
    convergence_bound_ns: int = 10_000_000

    def node_names(self) -> list:
        return list(self.clients) + list(self.switches)

    def adjacency(self) -> dict:
        adj: dict = {n: set() for n in self.node_names()}
        for link in self.links:
            adj[link.a].add(link.b)
            adj[link.b].add(link.a)
        return adj


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return mapping[key]


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(raw, source=str(path))


def parse_config(raw: dict, source: str = "<config>") -> ScenarioConfig:
    name = raw.get("name", source)
    sdn_enabled = bool(_require(raw, "sdn_enabled", source))
    controller = raw.get("controller")
    if not sdn_enabled and controller is not None:
        raise ConfigError(f"{source}: sdn_enabled=false forbids a controller node")
    if sdn_enabled and controller is None:
        raise ConfigError(f"{source}: sdn_enabled=true requires a controller node")

    clients = list(_require(raw, "clients", source))
    switches = list(_require(raw, "switches", source))
    names = clients + switches
    if len(set(names)) != len(names):
        raise ConfigError(f"{source}: duplicate node names")

    defaults = raw.get("defaults", {})
    default_rate = int(defaults.get("link_rate_bps", 100_000_000))
    default_prop = parse_time_ns(defaults.get("propagation", 0), "defaults.propagation")

    links = []
    for i, item in enumerate(_require(raw, "links", source)):
        where = f"{source}: links[{i}]"
        a, b = _require(item, "a", where), _require(item, "b", where)
        for end in (a, b):
            if end not in names:
                raise ConfigError(f"{where}: unknown node '{end}'")
        rate = int(item.get("rate_bps", default_rate))
        if rate <= 0:
            raise ConfigError(f"{where}: rate_bps must be positive")
        links.append(LinkConfig(a, b, rate,
                                parse_time_ns(item.get("propagation", default_prop),
                                              f"{where}.propagation")))

    cfg = ScenarioConfig(
        name=name,
        sdn_enabled=sdn_enabled,
        idle_setup_ns=parse_time_ns(raw.get("idle_setup", "100ms"), "idle_setup"),
        run_until_ns=parse_time_ns(_require(raw, "run_until", source), "run_until"),
        clients=clients,
        switches=switches,
        links=links,
        controller=controller,
        queue_capacity=int(raw.get("queue_capacity", 100)),
        shaper_enabled=bool(raw.get("shaper_enabled", True)),
        convergence_bound_ns=parse_time_ns(raw.get("convergence_bound", "10ms"),
                                           "convergence_bound"),
    )

    control_raw = raw.get("control", {})
    cfg.control = ControlConfig(
        one_way_delay_ns=parse_time_ns(control_raw.get("one_way_delay", "25us"),
                                       "control.one_way_delay"),
        processing_delay_ns=parse_time_ns(control_raw.get("processing_delay", "25us"),
                                          "control.processing_delay"),
    )

    if "talker" in raw:
        t = raw["talker"]
        where = f"{source}: talker"
        node = _require(t, "node", where)
        if node not in clients:
            raise ConfigError(f"{where}: unknown client '{node}'")
        sr_class = str(t.get("sr_class", "A"))
        if sr_class not in SR_CLASSES:
            raise ConfigError(f"{where}: unknown SR class '{sr_class}'")
        cfg.talker = TalkerSpec(
            node=node,
            unique_id=int(t.get("unique_id", 1)),
            dst_group=MacAddress.parse(_require(t, "dst_group", where)),
            vid=int(_require(t, "vid", where)),
            pcp=int(t.get("pcp", SR_CLASSES[sr_class].pcp)),
            sr_class=sr_class,
            frame_bytes=int(t.get("frame_bytes", 150)),
            interval_ns=parse_time_ns(t.get("interval", "125us"), f"{where}.interval"),
            advertise_at_ns=parse_time_ns(t.get("advertise_at", cfg.idle_setup_ns),
                                          f"{where}.advertise_at"),
        )
        if not cfg.talker.dst_group.is_multicast:
            raise ConfigError(f"{where}: dst_group must be a multicast address")

    for i, item in enumerate(raw.get("listeners", [])):
        where = f"{source}: listeners[{i}]"
        node = _require(item, "node", where)
        if node not in clients:
            raise ConfigError(f"{where}: unknown client '{node}'")
        cfg.listeners.append(ListenerSpec(node, int(item.get("unique_id", 1))))

    if "cross_traffic" in raw:
        c = raw["cross_traffic"]
        where = f"{source}: cross_traffic"
        node = _require(c, "node", where)
        dst = _require(c, "dst_node", where)
        for n in (node, dst):
            if n not in clients:
                raise ConfigError(f"{where}: unknown client '{n}'")
        cfg.cross_traffic = CrossTrafficSpec(
            node=node,
            dst_node=dst,
            frame_bytes=int(c.get("frame_bytes", 1000)),
            send_interval_ns=parse_time_ns(c.get("send_interval", "100us"),
                                           f"{where}.send_interval"),
            start_at_ns=parse_time_ns(c.get("start_at", cfg.idle_setup_ns),
                                      f"{where}.start_at"),
            count=(int(c["count"]) if c.get("count") is not None else None),
            vid=(int(c["vid"]) if c.get("vid") is not None else None),
            pcp=int(c.get("pcp", 0)),
        )

    # connectivity check over the data topology
    adj = cfg.adjacency()
    if names:
        seen = {names[0]}
        stack = [names[0]]
        while stack:
            for neigh in adj[stack.pop()]:
                if neigh not in seen:
                    seen.add(neigh)
                    stack.append(neigh)
        if seen != set(names):
            raise ConfigError(f"{source}: topology graph is not connected")

    return cfg

"""Scenario construction and execution: build the network, run it, emit outputs."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .config import ScenarioConfig
from .control import Controller
from .engine import Endpoint, Link, Simulator
from .frames import MacAddress, VlanTag
from .hosts import CrossTrafficConfig, Host, TalkerConfig
from .metrics import (GuaranteeResult, MetricsSink, check_guarantee, summarize,
                      write_control_trace, write_counters, write_frame_csv,
                      write_summary_csv)
from .srp import SR_CLASSES, count_scheduled_ports
from .switching import Switch


def client_mac(index: int) -> MacAddress:
    return MacAddress(bytes([0x02, 0, 0, 0, 0, index + 1]))


@dataclass
class RunResult:
    config: ScenarioConfig
    sink: MetricsSink
    counters: dict
    control_trace: list
    flow_installs: list
    stream_start_ns: Optional[int]
    lr_arrival_ns: Optional[int]
    udp_first_send_ns: Optional[int]
    scheduled_ports: Optional[int]
    sent_counts: dict = field(default_factory=dict)

    @property
    def records(self) -> list:
        return self.sink.records

    def stream_records(self) -> list:
        return sorted((r for r in self.records if r.flow.startswith("stream")),
                      key=lambda r: r.seq)

    def udp_records(self) -> list:
        return sorted((r for r in self.records if r.flow == "udp"), key=lambda r: r.seq)

    @property
    def traffic_start_ns(self) -> Optional[int]:
        starts = [t for t in (self.stream_start_ns, self.udp_first_send_ns) if t is not None]
        return min(starts) if starts else None

    def steady_window(self) -> tuple:
        """Send-time window after the configured convergence bound, to run end."""
        start = self.traffic_start_ns
        if start is None:
            return (self.config.run_until_ns, self.config.run_until_ns)
        return (start + self.config.convergence_bound_ns, self.config.run_until_ns)

    def check_guarantee(self) -> GuaranteeResult:
        cls = SR_CLASSES[self.config.talker.sr_class] if self.config.talker else SR_CLASSES["A"]
        ports = self.scheduled_ports if self.scheduled_ports else 1
        return check_guarantee(self.records, cls, ports)

    def frame_csv_hash(self) -> str:
        lines = ["|".join(map(str, (r.flow, r.seq, r.send_ns, r.recv_ns)))
                 for r in sorted(self.records, key=lambda r: (r.recv_ns, r.flow, r.seq))]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    sim = Simulator()
    sink = MetricsSink()

    hosts: dict = {}
    for i, name in enumerate(cfg.clients):
        hosts[name] = Host(sim, name, client_mac(i), protocol_addr=name, sink=sink)

    switches: dict = {}
    for name in cfg.switches:
        switches[name] = Switch(sim, name, sdn=cfg.sdn_enabled,
                                queue_capacity=cfg.queue_capacity,
                                shaper_enabled=cfg.shaper_enabled,
                                log=sink.warn)
    nodes = {**hosts, **switches}

    for link_cfg in cfg.links:
        node_a, node_b = nodes[link_cfg.a], nodes[link_cfg.b]
        link = Link(a=None, b=None, rate_bps=link_cfg.rate_bps,
                    propagation_ns=link_cfg.propagation_ns,
                    name=f"{link_cfg.a}--{link_cfg.b}")
        port_a = node_a.attach_port(link, queue_capacity=cfg.queue_capacity,
                                    shaper_enabled=cfg.shaper_enabled)
        port_b = node_b.attach_port(link, queue_capacity=cfg.queue_capacity,
                                    shaper_enabled=cfg.shaper_enabled)
        link.a = Endpoint(node_a, port_a)
        link.b = Endpoint(node_b, port_b)

    controller = None
    if cfg.sdn_enabled:
        controller = Controller(sim, cfg.controller, log=sink.warn)
        for name in cfg.switches:
            controller.attach_switch(switches[name],
                                     cfg.control.one_way_delay_ns,
                                     cfg.control.processing_delay_ns)
        controller.start()

    talker_host = None
    if cfg.talker is not None:
        talker_host = hosts[cfg.talker.node]
        talker_host.run_talker(TalkerConfig(
            unique_id=cfg.talker.unique_id,
            dst_group=cfg.talker.dst_group,
            vlan=VlanTag(cfg.talker.vid, cfg.talker.pcp),
            sr_class=cfg.talker.sr_class,
            frame_bytes=cfg.talker.frame_bytes,
            interval_ns=cfg.talker.interval_ns,
            advertise_at_ns=cfg.talker.advertise_at_ns,
        ))
    for spec in cfg.listeners:
        hosts[spec.node].run_listener(spec.unique_id)

    cross_host = None
    if cfg.cross_traffic is not None:
        cross_host = hosts[cfg.cross_traffic.node]
        vlan = None
        if cfg.cross_traffic.vid is not None:
            vlan = VlanTag(cfg.cross_traffic.vid, cfg.cross_traffic.pcp)
        cross_host.run_udp_source(CrossTrafficConfig(
            dst_addr=cfg.cross_traffic.dst_node,
            frame_bytes=cfg.cross_traffic.frame_bytes,
            send_interval_ns=cfg.cross_traffic.send_interval_ns,
            start_at_ns=cfg.cross_traffic.start_at_ns,
            count=cfg.cross_traffic.count,
            vlan=vlan,
        ))

    sim.run_until(cfg.run_until_ns)

    scheduled_ports = None
    if cfg.talker is not None and cfg.listeners:
        scheduled_ports = count_scheduled_ports(
            cfg.adjacency(), cfg.talker.node, cfg.listeners[0].node)

    stream_records = [r for r in sink.records if r.flow.startswith("stream")]
    udp_sent = cross_host.udp_seq if cross_host is not None else 0
    first_udp = None
    if cross_host is not None and udp_sent:
        udp_recs = [r for r in sink.records if r.flow == "udp"]
        if udp_recs:
            first_udp = min(r.send_ns for r in udp_recs)

    counters = {name: switches[name].counters() for name in cfg.switches}
    for name, host in hosts.items():
        counters[name] = {
            "sent_stream": host.sent_stream,
            "sent_udp": host.sent_udp,
            "dropped_overflow": sum(p.dropped_overflow for p in host.ports),
        }

    stream_start = None
    if talker_host is not None and talker_host.lr_arrival_ns is not None \
            and talker_host.sent_stream:
        stream_start = min(r.send_ns for r in stream_records) if stream_records else None
        if stream_start is None:
            stream_start = talker_host.lr_arrival_ns + cfg.talker.interval_ns

    return RunResult(
        config=cfg,
        sink=sink,
        counters=counters,
        control_trace=list(controller.trace) if controller else [],
        flow_installs=list(controller.flow_installs) if controller else [],
        stream_start_ns=stream_start,
        lr_arrival_ns=talker_host.lr_arrival_ns if talker_host else None,
        udp_first_send_ns=first_udp,
        scheduled_ports=scheduled_ports,
    )


def emit_outputs(result: RunResult, outdir, window: Optional[tuple] = None) -> dict:
    """Write per-frame CSV, summary CSV, control trace, counters and a report."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ws, we = window if window is not None else result.steady_window()
    stats = summarize(result.records, ws, we)
    paths = {
        "frames": outdir / "frames.csv",
        "summary": outdir / "summary.csv",
        "counters": outdir / "counters.json",
        "report": outdir / "report.txt",
    }
    write_frame_csv(paths["frames"], result.records)
    write_summary_csv(paths["summary"], stats, ws, we)
    write_counters(paths["counters"], result.counters)
    if result.control_trace:
        paths["control_trace"] = outdir / "control_trace.log"
        write_control_trace(paths["control_trace"], result.control_trace)
    paths["report"].write_text(format_report(result, stats, ws, we))
    return paths


PAPER_REFERENCE_NOTE = """\
Reference magnitudes (calibration-dependent, not pass/fail):
  no-SDN stream  min/mean/max = 110/390/499 us
  no-SDN UDP     min/mean/max = 423/481/820 us
  SDN stream     min/mean/max = 210/373/483 us
  SDN UDP        min/mean/max = 408/466/1478 us
"""


def format_report(result: RunResult, stats: dict, ws: int, we: int) -> str:
    cfg = result.config
    lines = [f"scenario: {cfg.name}",
             f"sdn_enabled: {cfg.sdn_enabled}",
             f"run_until_ns: {cfg.run_until_ns}",
             f"frames recorded: {len(result.records)}",
             f"summary window (send_ns): [{ws}, {we})"]
    for flow in sorted(stats):
        st = stats[flow]
        if st is None:
            lines.append(f"  {flow}: empty window")
        else:
            lines.append(f"  {flow}: n={st.count} min={st.min_ns} "
                         f"mean={st.mean_ns:.1f} max={st.max_ns} (ns)")
    if result.stream_start_ns is not None:
        lines.append(f"stream start: {result.stream_start_ns} ns")
    if result.udp_first_send_ns is not None:
        lines.append(f"first UDP send: {result.udp_first_send_ns} ns")
    gr = result.check_guarantee()
    lines.append(f"guarantee check ({gr.limit_ns} ns over "
                 f"{result.scheduled_ports} scheduled ports): "
                 f"{'PASS' if gr.passed else 'FAIL'} -- {gr.reason}")
    for warning in result.sink.warnings:
        lines.append(f"warning: {warning}")
    lines.append("")
    lines.append(PAPER_REFERENCE_NOTE)
    return "\n".join(lines) + "\n"


def compare_report(sdn: RunResult, nosdn: RunResult) -> str:
    """Differential SDN vs no-SDN report over the common steady-state window."""
    ws = max(sdn.steady_window()[0], nosdn.steady_window()[0])
    we = min(sdn.config.run_until_ns, nosdn.config.run_until_ns)
    sdn_stats = summarize(sdn.records, ws, we)
    nosdn_stats = summarize(nosdn.records, ws, we)
    lines = ["SDN vs no-SDN comparison",
             f"steady-state window (send_ns): [{ws}, {we})"]
    if sdn.stream_start_ns is not None and nosdn.stream_start_ns is not None:
        delta = sdn.stream_start_ns - nosdn.stream_start_ns
        lines.append(f"stream start delta (SDN - noSDN): {delta} ns")
    for flow in sorted(set(sdn_stats) | set(nosdn_stats)):
        a, b = sdn_stats.get(flow), nosdn_stats.get(flow)
        if a is None or b is None:
            lines.append(f"  {flow}: empty window in one run")
            continue
        lines.append(f"  {flow}: steady mean delta {a.mean_ns - b.mean_ns:+.1f} ns "
                     f"(SDN {a.mean_ns:.1f} vs noSDN {b.mean_ns:.1f})")
    return "\n".join(lines) + "\n"

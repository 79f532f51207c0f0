"""Endpoint applications: TSN talker and listener, UDP cross-traffic source, sinks.

Hosts are event-handler state machines on the simulation thread. Host
processing delays are zero so all measured latency is attributable to the
network elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .frames import (ArpKind, ArpMessage, BROADCAST, EthernetFrame, MacAddress,
                     SrpKind, SrpMessage, StreamData, StreamId, UdpDatagram,
                     VlanTag, make_frame)
from .network import Node
from .srp import Reservation, SR_CLASSES, admit

SRP_FRAME_BYTES = 64
ARP_FRAME_BYTES = 64

DEFAULT_LR_TIMEOUT_NS = 1_000_000_000
DEFAULT_ARP_RETRIES = 3
DEFAULT_ARP_RETRY_INTERVAL_NS = 1_000_000


@dataclass
class TalkerConfig:
    unique_id: int
    dst_group: MacAddress
    vlan: VlanTag
    sr_class: str
    frame_bytes: int
    interval_ns: int
    advertise_at_ns: int
    lr_timeout_ns: int = DEFAULT_LR_TIMEOUT_NS


@dataclass
class CrossTrafficConfig:
    dst_addr: str
    frame_bytes: int
    send_interval_ns: int
    start_at_ns: int
    count: Optional[int] = None
    vlan: Optional[VlanTag] = None
    arp_retries: int = DEFAULT_ARP_RETRIES
    arp_retry_interval_ns: int = DEFAULT_ARP_RETRY_INTERVAL_NS


class Host(Node):
    """A client: answers ARP for its protocol address and runs attached apps."""

    def __init__(self, sim, name, mac: MacAddress, protocol_addr: str, sink) -> None:
        super().__init__(sim, name)
        self.mac = mac
        self.protocol_addr = protocol_addr
        self.sink = sink
        self.talker: Optional[TalkerConfig] = None
        self.stream_id: Optional[StreamId] = None
        self.lr_arrival_ns: Optional[int] = None
        self.stream_seq = 0
        self.streams_listened: set = set()      # unique_ids this host subscribes to
        self._lr_sent: set = set()
        self.cross: Optional[CrossTrafficConfig] = None
        self._arp_resolved: Optional[MacAddress] = None
        self._arp_tries = 0
        self._arp_retry_event = None
        self.udp_seq = 0
        self.sent_stream = 0
        self.sent_udp = 0

    # -- app wiring -------------------------------------------------------

    def run_talker(self, cfg: TalkerConfig) -> None:
        self.talker = cfg
        self.stream_id = StreamId(self.mac, cfg.unique_id)
        self.sim.schedule(cfg.advertise_at_ns, self._advertise, label=f"advertise@{self.name}")
        self.sim.schedule(cfg.advertise_at_ns + cfg.lr_timeout_ns, self._check_lr_timeout,
                          label=f"lr-timeout@{self.name}")

    def run_listener(self, unique_id: int) -> None:
        self.streams_listened.add(unique_id)

    def run_udp_source(self, cfg: CrossTrafficConfig) -> None:
        self.cross = cfg
        self.sim.schedule(cfg.start_at_ns, self._send_arp_request, label=f"arp@{self.name}")

    # -- talker -----------------------------------------------------------

    def _descriptor(self, kind: SrpKind) -> SrpMessage:
        cfg = self.talker
        return SrpMessage(kind, self.stream_id, cfg.dst_group, cfg.vlan,
                          cfg.frame_bytes, cfg.interval_ns, cfg.sr_class)

    def _advertise(self) -> None:
        cfg = self.talker
        reservation = Reservation(self.stream_id, SR_CLASSES[cfg.sr_class],
                                  cfg.frame_bytes, cfg.interval_ns)
        rejected = admit(self.ports[0], reservation)
        if rejected is not None:
            self.sink.warn(f"{self.name}: NIC reservation rejected: {rejected.reason}")
            return
        frame = make_frame(self.mac, cfg.dst_group,
                           self._descriptor(SrpKind.TALKER_ADVERTISE), SRP_FRAME_BYTES)
        self.send(0, frame)

    def _check_lr_timeout(self) -> None:
        if self.lr_arrival_ns is None:
            self.sink.warn(f"{self.name}: no listener ready within timeout; "
                           f"stream {self.stream_id} never starts")

    def _send_stream_frame(self) -> None:
        cfg = self.talker
        frame = make_frame(self.mac, cfg.dst_group,
                           StreamData(self.stream_id, self.stream_seq, self.sim.now()),
                           cfg.frame_bytes, vlan=cfg.vlan)
        self.stream_seq += 1
        self.sent_stream += 1
        self.send(0, frame)
        self.sim.schedule_in(cfg.interval_ns, self._send_stream_frame,
                             label=f"stream@{self.name}")

    # -- cross traffic ----------------------------------------------------

    def _send_arp_request(self) -> None:
        cfg = self.cross
        if self._arp_resolved is not None:
            return
        if self._arp_tries > cfg.arp_retries:
            self.sink.warn(f"{self.name}: ARP for {cfg.dst_addr} unanswered after "
                           f"{cfg.arp_retries} retries; cross traffic never starts")
            return
        self._arp_tries += 1
        frame = make_frame(self.mac, BROADCAST,
                           ArpMessage(ArpKind.REQUEST, cfg.dst_addr), ARP_FRAME_BYTES)
        self.send(0, frame)
        self._arp_retry_event = self.sim.schedule_in(
            cfg.arp_retry_interval_ns, self._send_arp_request, label=f"arp-retry@{self.name}")

    def _send_udp_frame(self) -> None:
        cfg = self.cross
        if cfg.count is not None and self.udp_seq >= cfg.count:
            return
        frame = make_frame(self.mac, self._arp_resolved,
                           UdpDatagram(self.udp_seq, self.sim.now(),
                                       self.protocol_addr, cfg.dst_addr),
                           cfg.frame_bytes, vlan=cfg.vlan)
        self.udp_seq += 1
        self.sent_udp += 1
        self.send(0, frame)
        self.sim.schedule_in(cfg.send_interval_ns, self._send_udp_frame,
                             label=f"udp@{self.name}")

    # -- receive path -----------------------------------------------------

    def handle_frame(self, in_port: int, frame: EthernetFrame) -> None:
        payload = frame.payload
        if isinstance(payload, SrpMessage):
            self._handle_srp(payload)
        elif isinstance(payload, ArpMessage):
            self._handle_arp(frame, payload)
        elif isinstance(payload, StreamData):
            if payload.stream_id.unique_id in self.streams_listened:
                self.sink.record(f"stream-{payload.stream_id.unique_id}",
                                 payload.seq, payload.sent_at, self.sim.now())
        elif isinstance(payload, UdpDatagram):
            if payload.dst_addr == self.protocol_addr:
                self.sink.record("udp", payload.seq, payload.sent_at, self.sim.now())

    def _handle_srp(self, msg: SrpMessage) -> None:
        if msg.kind is SrpKind.TALKER_ADVERTISE:
            if msg.stream_id.unique_id in self.streams_listened \
                    and msg.stream_id not in self._lr_sent:
                self._lr_sent.add(msg.stream_id)
                ready = SrpMessage(SrpKind.LISTENER_READY, msg.stream_id, msg.dst_group,
                                   msg.vlan, msg.max_frame_bytes, msg.interval_ns,
                                   msg.sr_class)
                self.send(0, make_frame(self.mac, msg.stream_id.talker, ready,
                                        SRP_FRAME_BYTES))
        else:
            if self.stream_id == msg.stream_id and self.lr_arrival_ns is None:
                self.lr_arrival_ns = self.sim.now()
                # first data frame strictly after the listener ready arrives
                self.sim.schedule_in(self.talker.interval_ns, self._send_stream_frame,
                                     label=f"stream-start@{self.name}")

    def _handle_arp(self, frame: EthernetFrame, msg: ArpMessage) -> None:
        if msg.kind is ArpKind.REQUEST:
            if msg.asked == self.protocol_addr:
                reply = ArpMessage(ArpKind.REPLY, msg.asked, self.mac)
                self.send(0, make_frame(self.mac, frame.src, reply, ARP_FRAME_BYTES))
        else:
            cfg = self.cross
            if cfg is not None and msg.asked == cfg.dst_addr and self._arp_resolved is None:
                self._arp_resolved = msg.answer
                if self._arp_retry_event is not None:
                    self._arp_retry_event.cancel()
                self._send_udp_frame()

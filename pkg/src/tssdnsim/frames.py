"""Dataplane domain model: Ethernet frames, VLAN tags, SRP/ARP/UDP/stream payloads.

Frames are plain immutable values; no byte-exact header encoding is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

MIN_FRAME_BYTES = 64
MAX_FRAME_BYTES = 1522
# preamble 7 + SFD 1 + interframe gap 12
WIRE_OVERHEAD_BYTES = 20

BROADCAST = None  # forward decl, assigned below


@dataclass(frozen=True)
class MacAddress:
    octets: bytes

    def __post_init__(self) -> None:
        if len(self.octets) != 6:
            raise ValueError(f"MAC address needs 6 octets, got {len(self.octets)}")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        parts = text.replace("-", ":").split(":")
        if len(parts) != 6:
            raise ValueError(f"bad MAC address {text!r}")
        return cls(bytes(int(p, 16) for p in parts))

    @property
    def is_multicast(self) -> bool:
        # I/G bit: least-significant bit of the first octet
        return bool(self.octets[0] & 0x01)

    @property
    def is_broadcast(self) -> bool:
        return self.octets == b"\xff" * 6

    def __str__(self) -> str:
        return ":".join(f"{o:02X}" for o in self.octets)


BROADCAST = MacAddress(b"\xff" * 6)


def is_multicast(addr: MacAddress) -> bool:
    return addr.is_multicast


@dataclass(frozen=True)
class VlanTag:
    vid: int
    pcp: int

    def __post_init__(self) -> None:
        if not 0 <= self.vid <= 4095:
            raise ValueError(f"VLAN id {self.vid} out of range")
        if not 0 <= self.pcp <= 7:
            raise ValueError(f"PCP {self.pcp} out of range")


@dataclass(frozen=True)
class StreamId:
    talker: MacAddress
    unique_id: int

    def __post_init__(self) -> None:
        if not 0 <= self.unique_id <= 0xFFFF:
            raise ValueError(f"stream unique_id {self.unique_id} out of range")

    def __str__(self) -> str:
        return f"{self.talker}#{self.unique_id}"


class SrpKind(Enum):
    TALKER_ADVERTISE = "talker_advertise"
    LISTENER_READY = "listener_ready"


@dataclass(frozen=True)
class SrpMessage:
    kind: SrpKind
    stream_id: StreamId
    dst_group: MacAddress
    vlan: VlanTag
    max_frame_bytes: int
    interval_ns: int
    sr_class: str  # "A" or "B"

    def __post_init__(self) -> None:
        if not self.dst_group.is_multicast:
            raise ValueError("stream listener group must be a multicast address")


class ArpKind(Enum):
    REQUEST = "request"
    REPLY = "reply"


@dataclass(frozen=True)
class ArpMessage:
    kind: ArpKind
    asked: str
    answer: Optional[MacAddress] = None


@dataclass(frozen=True)
class UdpDatagram:
    seq: int
    sent_at: int
    src_addr: str
    dst_addr: str


@dataclass(frozen=True)
class StreamData:
    stream_id: StreamId
    seq: int
    sent_at: int


Payload = Union[SrpMessage, ArpMessage, UdpDatagram, StreamData]


@dataclass(frozen=True)
class EthernetFrame:
    src: MacAddress
    dst: MacAddress
    vlan: Optional[VlanTag]
    payload: Payload
    frame_bytes: int

    def __post_init__(self) -> None:
        if not MIN_FRAME_BYTES <= self.frame_bytes <= MAX_FRAME_BYTES:
            raise ValueError(f"frame_bytes {self.frame_bytes} outside [64, 1522]")
        if isinstance(self.payload, StreamData) and self.vlan is None:
            raise ValueError("TSN stream frames must carry a VLAN tag")

    @property
    def pcp(self) -> int:
        return self.vlan.pcp if self.vlan is not None else 0


def make_frame(src: MacAddress, dst: MacAddress, payload: Payload,
               frame_bytes: int, vlan: Optional[VlanTag] = None) -> EthernetFrame:
    """Build a frame, padding short payloads to the 64-byte Ethernet minimum."""
    return EthernetFrame(src, dst, vlan, payload, max(frame_bytes, MIN_FRAME_BYTES))


def wire_size(frame: EthernetFrame) -> int:
    return frame.frame_bytes + WIRE_OVERHEAD_BYTES


def wire_bits(frame: EthernetFrame) -> int:
    return wire_size(frame) * 8

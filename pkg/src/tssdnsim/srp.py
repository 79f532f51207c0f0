"""Stream reservation semantics: SR classes, bandwidth accounting, latency guarantee."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import NS_PER_S
from .frames import WIRE_OVERHEAD_BYTES, StreamId

US = 1_000


@dataclass(frozen=True)
class SrClass:
    name: str
    pcp: int
    per_hop_max_latency_ns: int
    default_interval_ns: int


CLASS_A = SrClass("A", pcp=6, per_hop_max_latency_ns=250_000, default_interval_ns=125_000)
# Class B is modeled but unused by the shipped scenarios; its per-hop bound is a
# placeholder since only the Class A 250 us figure is standardized per hop.
CLASS_B = SrClass("B", pcp=5, per_hop_max_latency_ns=1_000_000, default_interval_ns=250_000)

SR_CLASSES = {"A": CLASS_A, "B": CLASS_B}

DEFAULT_ADMISSION_FRACTION = 0.75


def reserved_bps(max_frame_bytes: int, interval_ns: int) -> int:
    """Reserved bandwidth for one stream, counting per-frame wire overhead."""
    if max_frame_bytes <= 0:
        raise ValueError("reservation frame size must be positive")
    if interval_ns <= 0:
        raise ValueError("reservation interval must be positive")
    return (max_frame_bytes + WIRE_OVERHEAD_BYTES) * 8 * NS_PER_S // interval_ns


@dataclass(frozen=True)
class Reservation:
    stream_id: StreamId
    sr_class: SrClass
    max_frame_bytes: int
    interval_ns: int

    @property
    def reserved_bps(self) -> int:
        return reserved_bps(self.max_frame_bytes, self.interval_ns)


@dataclass(frozen=True)
class Rejected:
    port_name: str
    reason: str


def analytic_guarantee(sr_class: SrClass, scheduled_ports: int) -> int:
    """Worst-case end-to-end latency bound: per-hop bound times scheduled ports."""
    if scheduled_ports < 1:
        raise ValueError("need at least one scheduled port")
    return sr_class.per_hop_max_latency_ns * scheduled_ports


def admit(port, reservation: Reservation,
          fraction: float = DEFAULT_ADMISSION_FRACTION) -> Optional[Rejected]:
    """Admission control on an egress port; on success raises the port idle slope.

    Returns None when admitted, a Rejected record otherwise.
    """
    new_bps = reservation.reserved_bps
    if port.total_reserved_bps + new_bps > fraction * port.rate_bps:
        return Rejected(port.name, f"would exceed {fraction:.0%} of {port.rate_bps} bit/s")
    port.add_reservation(reservation.sr_class.pcp, new_bps)
    return None


def count_scheduled_ports(adjacency: dict, talker: str, listener: str) -> int:
    """Number of egress ports a stream traverses, including the talker NIC.

    `adjacency` maps node name to the set of directly linked node names.
    Equals the hop count of the shortest path.
    """
    if talker == listener:
        return 0
    seen = {talker: 0}
    frontier = [talker]
    while frontier:
        nxt = []
        for node in frontier:
            for neigh in sorted(adjacency.get(node, ())):
                if neigh not in seen:
                    seen[neigh] = seen[node] + 1
                    if neigh == listener:
                        return seen[neigh]
                    nxt.append(neigh)
        frontier = nxt
    raise ValueError(f"no path between {talker} and {listener}")

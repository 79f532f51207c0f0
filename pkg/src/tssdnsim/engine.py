"""Deterministic discrete-event engine: integer-nanosecond clock, event queue, links.

All simulation time is integer nanoseconds; there is no floating-point time
anywhere, so two runs of the same configuration replay bit-identically.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

NS_PER_S = 1_000_000_000


class SimulationError(Exception):
    """A model bug or fatal configuration error (e.g. scheduling in the past)."""


@dataclass
class Event:
    fire_at: int
    seq: int
    callback: Callable[[], None]
    label: str = ""
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True


class Simulator:
    """Single-threaded event loop. Equal-time events dispatch in insertion order."""

    def __init__(self) -> None:
        self._now = 0
        self._seq = 0
        self._heap: list[tuple[int, int, Event]] = []
        self.dispatch_log: list[tuple[int, int, str]] = []

    def now(self) -> int:
        return self._now

    def schedule(self, fire_at: int, callback: Callable[[], None], label: str = "") -> Event:
        if fire_at < self._now:
            raise SimulationError(
                f"scheduling in the past: fire_at={fire_at} < now={self._now} ({label})"
            )
        ev = Event(fire_at, self._seq, callback, label)
        self._seq += 1
        heapq.heappush(self._heap, (ev.fire_at, ev.seq, ev))
        return ev

    def schedule_in(self, delay: int, callback: Callable[[], None], label: str = "") -> Event:
        return self.schedule(self._now + delay, callback, label)

    def run_until(self, t_end: int) -> None:
        """Dispatch every event with fire_at <= t_end, then set the clock to t_end."""
        while self._heap and self._heap[0][0] <= t_end:
            fire_at, seq, ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self._now = fire_at
            self.dispatch_log.append((fire_at, seq, ev.label))
            ev.callback()
        self._now = max(self._now, t_end)


@dataclass
class Endpoint:
    node: "object"
    port: int


@dataclass
class Link:
    """Full-duplex point-to-point link; each direction serializes independently."""

    a: Endpoint
    b: Endpoint
    rate_bps: int = 100_000_000
    propagation_ns: int = 0
    name: str = ""
    # per-direction serialization guard: direction key is the sending endpoint index
    _busy_until: dict[int, int] = field(default_factory=lambda: {0: 0, 1: 0})

    def __post_init__(self) -> None:
        if self.rate_bps <= 0:
            raise SimulationError(f"link {self.name}: rate must be positive")

    def serialization_ns(self, wire_bytes: int) -> int:
        return wire_bytes * 8 * NS_PER_S // self.rate_bps

    def peer_of(self, node: object) -> Endpoint:
        if self.a.node is node:
            return self.b
        if self.b.node is node:
            return self.a
        raise SimulationError(f"node not attached to link {self.name}")

    def transmit(self, sim: Simulator, sender: object, wire_bytes: int,
                 deliver: Callable[[], None], label: str = "") -> int:
        """Start serializing a frame from `sender`; returns the far-end arrival time.

        Overlapping transmissions in one direction are a fatal model bug: the
        egress port owning this direction must keep it busy until tx end.
        """
        direction = 0 if self.a.node is sender else 1
        start = sim.now()
        if start < self._busy_until[direction]:
            raise SimulationError(
                f"link {self.name}: overlapping transmission (dir {direction})"
            )
        tx_end = start + self.serialization_ns(wire_bytes)
        self._busy_until[direction] = tx_end
        arrival = tx_end + self.propagation_ns
        sim.schedule(arrival, deliver, label or f"arrival@{self.name}")
        return arrival

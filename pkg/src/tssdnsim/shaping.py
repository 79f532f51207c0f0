"""Egress port model: 8 priority FIFOs, credit-based shaping, transmission selection.

Credits are kept as integers scaled to nanobits (bit/s times ns), so the whole
shaper replays exactly. A frame in transmission is never preempted.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .engine import Event, Link, NS_PER_S, SimulationError, Simulator
from .frames import EthernetFrame, wire_size

NUM_QUEUES = 8
DEFAULT_QUEUE_CAPACITY = 100


@dataclass
class CreditState:
    """CBS state for one shaped class; credit is in nanobits (bits * ns/s)."""

    idle_slope_bps: int
    send_slope_bps: int
    credit: int = 0
    last_update: int = 0

    def credit_bits(self) -> float:
        return self.credit / NS_PER_S


@dataclass
class TxRecord:
    start: int
    end: int
    pcp: int
    wire_bits: int


class EgressPort:
    """One transmit direction of a node port, feeding exactly one link."""

    def __init__(self, sim: Simulator, owner, link: Link, name: str = "",
                 queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
                 shaper_enabled: bool = True) -> None:
        self.sim = sim
        self.owner = owner
        self.link = link
        self.name = name
        self.queue_capacity = queue_capacity
        self.shaper_enabled = shaper_enabled
        self.rate_bps = link.rate_bps
        self.queues: list[deque] = [deque() for _ in range(NUM_QUEUES)]
        self.shaped: dict[int, CreditState] = {}
        self.total_reserved_bps = 0
        self.tx_busy_until = 0
        self.transmitting_pcp: Optional[int] = None
        self._wakeup: Optional[Event] = None
        # counters
        self.frames_sent = 0
        self.dropped_overflow = 0
        self.max_depth = [0] * NUM_QUEUES
        self.tx_log: list[TxRecord] = []

    # -- reservations -----------------------------------------------------

    def add_reservation(self, pcp: int, bps: int) -> None:
        """Raise the idle slope of a shaped class; called on SR-table changes."""
        now = self.sim.now()
        self._update_credits(now)
        if not self.shaper_enabled:
            self.total_reserved_bps += bps
            return
        cs = self.shaped.get(pcp)
        if cs is None:
            cs = CreditState(idle_slope_bps=0, send_slope_bps=-self.rate_bps, last_update=now)
            self.shaped[pcp] = cs
        cs.idle_slope_bps += bps
        cs.send_slope_bps = cs.idle_slope_bps - self.rate_bps
        self.total_reserved_bps += bps
        if self._idle(now):
            self._select(now)

    # -- queueing ---------------------------------------------------------

    def enqueue(self, frame: EthernetFrame) -> bool:
        """Append a frame to its priority queue; returns False on overflow drop."""
        now = self.sim.now()
        pcp = frame.pcp
        q = self.queues[pcp]
        if len(q) >= self.queue_capacity:
            self.dropped_overflow += 1
            return False
        self._update_credits(now)
        q.append(frame)
        self.max_depth[pcp] = max(self.max_depth[pcp], len(q))
        if self._idle(now):
            self._select(now)
        return True

    def queue_depth(self, pcp: int) -> int:
        return len(self.queues[pcp])

    # -- credit dynamics --------------------------------------------------

    def _update_credits(self, now: int) -> None:
        for pcp, cs in self.shaped.items():
            dt = now - cs.last_update
            if dt < 0:
                raise SimulationError(f"port {self.name}: credit update in the past")
            if dt == 0:
                continue
            if self.transmitting_pcp == pcp:
                cs.credit += cs.send_slope_bps * dt
            elif self.queues[pcp]:
                cs.credit += cs.idle_slope_bps * dt
            elif cs.credit < 0:
                # replenish toward zero while the queue is empty
                cs.credit = min(0, cs.credit + cs.idle_slope_bps * dt)
            else:
                cs.credit = 0
            cs.last_update = now

    # -- transmission selection -------------------------------------------

    def _idle(self, now: int) -> bool:
        return self.transmitting_pcp is None and now >= self.tx_busy_until

    def _select(self, now: int) -> None:
        """Pick the highest-priority eligible frame and start serializing it."""
        if self._wakeup is not None:
            self._wakeup.cancel()
            self._wakeup = None
        chosen = None
        for pcp in range(NUM_QUEUES - 1, -1, -1):
            if not self.queues[pcp]:
                continue
            cs = self.shaped.get(pcp)
            if cs is None or cs.credit >= 0:
                chosen = pcp
                break
        if chosen is None:
            self._schedule_wakeup(now)
            return
        frame = self.queues[chosen].popleft()
        tx_ns = self.link.serialization_ns(wire_size(frame))
        self.transmitting_pcp = chosen
        self.tx_busy_until = now + tx_ns
        peer = self.link.peer_of(self.owner)
        self.link.transmit(
            self.sim, self.owner, wire_size(frame),
            lambda f=frame, p=peer: p.node.handle_frame(p.port, f),
            label=f"rx@{peer.node.name}:{peer.port}",
        )
        self.sim.schedule(self.tx_busy_until, self._on_tx_done, label=f"txdone@{self.name}")
        self.frames_sent += 1
        self.tx_log.append(TxRecord(now, self.tx_busy_until, chosen, wire_size(frame) * 8))

    def _on_tx_done(self) -> None:
        now = self.sim.now()
        self._update_credits(now)
        pcp = self.transmitting_pcp
        self.transmitting_pcp = None
        cs = self.shaped.get(pcp) if pcp is not None else None
        if cs is not None and not self.queues[pcp] and cs.credit > 0:
            cs.credit = 0
        self._select(now)

    def _schedule_wakeup(self, now: int) -> None:
        """Idle port, every backlogged class blocked on credit: wake at first zero."""
        wake_at = None
        for pcp, cs in self.shaped.items():
            if self.queues[pcp] and cs.credit < 0 and cs.idle_slope_bps > 0:
                dt = (-cs.credit + cs.idle_slope_bps - 1) // cs.idle_slope_bps
                t = now + dt
                if wake_at is None or t < wake_at:
                    wake_at = t
        if wake_at is not None:
            self._wakeup = self.sim.schedule(wake_at, self._on_wakeup, label=f"credit@{self.name}")

    def _on_wakeup(self) -> None:
        self._wakeup = None
        now = self.sim.now()
        if not self._idle(now):
            return
        self._update_credits(now)
        self._select(now)

from __future__ import annotations

import pytest

from tssdnsim.config import load_config
from tssdnsim.cli import resolve_scenario
from tssdnsim.engine import Endpoint, Link, Simulator
from tssdnsim.frames import MacAddress
from tssdnsim.network import Node
from tssdnsim.scenario import run_scenario


class Recorder(Node):
    """Terminal node that just records what arrives on each port."""

    def __init__(self, sim, name="recorder"):
        super().__init__(sim, name)
        self.received = []  # (time_ns, in_port, frame)

    def handle_frame(self, in_port, frame):
        self.received.append((self.sim.now(), in_port, frame))


def wire(sim, node_a, node_b, rate_bps=100_000_000, propagation_ns=0,
         queue_capacity=100, shaper_enabled=True):
    """Connect two nodes with one link; returns (link, port_at_a, port_at_b)."""
    link = Link(a=None, b=None, rate_bps=rate_bps, propagation_ns=propagation_ns,
                name=f"{node_a.name}--{node_b.name}")
    pa = node_a.attach_port(link, queue_capacity=queue_capacity,
                            shaper_enabled=shaper_enabled)
    pb = node_b.attach_port(link, queue_capacity=queue_capacity,
                            shaper_enabled=shaper_enabled)
    link.a = Endpoint(node_a, pa)
    link.b = Endpoint(node_b, pb)
    return link, pa, pb


def mac(text):
    return MacAddress.parse(text)


@pytest.fixture(scope="session")
def sdn_result():
    return run_scenario(load_config(resolve_scenario("case_study_sdn")))


@pytest.fixture(scope="session")
def nosdn_result():
    return run_scenario(load_config(resolve_scenario("case_study_nosdn")))


@pytest.fixture(scope="session")
def fault_result():
    return run_scenario(load_config(resolve_scenario("fault_injection")))

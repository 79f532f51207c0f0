"""Deterministic discrete-event simulator for TSN switching under SDN control."""

__version__ = "0.1.0"

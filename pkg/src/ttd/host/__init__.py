"""Synthetic browser-like host environment.

Everything here runs on a virtual clock; no wall time, no real I/O. The world
is deterministic given the scenario, the two seeds, and the guest program,
except for choices drawn from the scheduler stream, which the recorder
captures in the log.
"""

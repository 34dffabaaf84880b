"""Record/replay time-travel debugger for an event-driven guest runtime.

The package records a guest program running against a simulated browser-like
host (DOM, timers, network, animations, incremental parsing) into a trace of
checkpoints plus a nondeterminism log, then replays that trace deterministically
and lets a debugger step forward and backward through it.
"""

from ttd.errors import (
    GuestSyntaxError,
    GuestRuntimeError,
    ScenarioError,
    TraceIntegrityError,
    TravelError,
)
from ttd.lang.parser import parse_program
from ttd.host.scenario import Scenario
from ttd.record import RecordingPolicy, record_session
from ttd.replay import DivergenceReport, start_replay, verify_replay
from ttd.tracefile import load_trace, save_trace
from ttd.debugger import DebugSession

__all__ = [
    "DebugSession",
    "DivergenceReport",
    "GuestRuntimeError",
    "GuestSyntaxError",
    "RecordingPolicy",
    "Scenario",
    "ScenarioError",
    "TraceIntegrityError",
    "TravelError",
    "load_trace",
    "parse_program",
    "record_session",
    "save_trace",
    "start_replay",
    "verify_replay",
]

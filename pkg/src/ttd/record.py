"""Recording: run guest scripts against a live world, capture the log.

The recorder drives the only loop in which the world advances on its own:

    while work remains:
        if the queue is empty, advance background processes; else
        flush accumulated between-events updates, maybe checkpoint,
        dispatch the next queued event through the interpreter.

Everything nondeterministic funnels into log entries: background updates
into InterEvent/Concurrent entries, nondeterministic host call results into
Simple entries, the dispatch order into Event entries. Checkpoints are taken
at dispatch boundaries only, so a checkpoint for event k is the world state
immediately before event k runs and after every update logged ahead of it.
"""

from __future__ import annotations

from dataclasses import dataclass

from ttd.canon import world_dump_json
from ttd.errors import ScenarioError
from ttd.graph import snapshot_image
from ttd.host.prng import Xorshift64Star
from ttd.host.scenario import Scenario
from ttd.host.world import HostWorld
from ttd.hostapi import SIMPLE_LOGGED_KINDS
from ttd.lang.interp import DEFAULT_STATEMENT_BUDGET, Interp
from ttd.lang.parser import parse_program
from ttd.lang.values import Closure, render
from ttd.logentries import (
    Audit,
    ConcurrentEntry,
    EventEntry,
    InterEventEntry,
    SimpleEntry,
)
from ttd.tracefile import Checkpoint, Trace

DEFAULT_CHECKPOINT_INTERVAL_MS = 2000.0


@dataclass
class RecordingPolicy:
    checkpoint_interval_ms: float = DEFAULT_CHECKPOINT_INTERVAL_MS
    statement_budget: int = DEFAULT_STATEMENT_BUDGET
    scheduler_seed: int | None = None  # overrides the scenario's seed


class _Recorder:
    """Interposer wiring host nondeterminism into the growing log."""

    def __init__(self):
        self.entries = []
        self.updates = []  # between-events bucket, flushed at dispatch
        self.audit_calls = []

    def on_update(self, update) -> None:
        self.updates.append(update)

    def pre_call(self, world: HostWorld, kind: str, args) -> None:
        outer = self.updates
        self.updates = []
        world.concurrent_tick()
        concurrent, self.updates = self.updates, outer
        if concurrent:
            self.entries.append(ConcurrentEntry(world.interactions, tuple(concurrent)))

    def post_call(self, world: HostWorld, kind: str, args, result):
        if kind in SIMPLE_LOGGED_KINDS:
            self.entries.append(SimpleEntry(world.interactions, kind, float(result)))
        self.audit_calls.append((world.interactions, kind, render(result)))
        return result


def record_session(scripts: list, scenario: Scenario,
                   policy: RecordingPolicy | None = None) -> Trace:
    """Record one run. ``scripts`` is a list of (script_id, source) pairs;
    each script's toplevel runs as one initial event, in list order."""
    if policy is None:
        policy = RecordingPolicy()
    if not scripts:
        raise ScenarioError("a recording needs at least one guest script")

    program = parse_program(scripts)
    toplevel_fn = {sid: program.toplevels[i] for i, (sid, _) in enumerate(scripts)}

    world = HostWorld(scenario, recording=True)
    if policy.scheduler_seed is not None:
        world.sched = Xorshift64Star(policy.scheduler_seed)
    interp = Interp(program, world, budget=policy.statement_budget)
    world.toplevel_resolver = lambda sid: Closure(toplevel_fn[sid], interp.globals)

    rec = _Recorder()
    world.interposer = rec
    world.on_update = rec.on_update

    for sid, _ in scripts:
        world._enqueue(world._new_event("script", script=sid))

    checkpoints: list[Checkpoint] = []
    event_statements: list[int] = []
    event_errors: list = []
    last_checkpoint_at: float | None = None
    event_index = 0

    while True:
        if not world.queue:
            if not world.advance_background():
                break
            continue
        if rec.updates:
            rec.entries.append(InterEventEntry(event_index, tuple(rec.updates)))
            rec.updates = []
        if last_checkpoint_at is None or \
                world.clock - last_checkpoint_at >= policy.checkpoint_interval_ms:
            checkpoints.append(Checkpoint(
                event_index, world.clock, snapshot_image(world, interp.globals)))
            last_checkpoint_at = world.clock
        ev = world.pop_event()
        descriptor = ev.descriptor()
        rec.entries.append(EventEntry(event_index, ev.seq, world.clock, descriptor))
        invocations = world.prepare_dispatch(descriptor)
        completion = interp.run_event(invocations)
        event_statements.append(completion.statements)
        event_errors.append(completion.error)
        event_index += 1

    if rec.updates:
        rec.entries.append(InterEventEntry(event_index, tuple(rec.updates)))
        rec.updates = []

    audit = Audit(event_statements, event_errors, rec.audit_calls, world_dump_json(world))
    meta = {
        "events": event_index,
        "interactions": world.interactions,
        "checkpointIntervalMs": policy.checkpoint_interval_ms,
        "statementBudget": policy.statement_budget,
    }
    return Trace(list(scripts), scenario.raw, rec.entries, audit, checkpoints, meta)

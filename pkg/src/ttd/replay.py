"""Replay: re-execute a trace with the log as the only source of truth.

The world never advances on its own during replay. Events dispatch straight
from Event entries (the timer table transitions at dispatch, as it does
during recording); background changes come from InterEvent and Concurrent
entries; nondeterministic host call results are adopted from Simple entries.

Replay is also the integrity check. Every host call is compared against the
recorded fingerprint sequence, every event against its recorded statement
count and error outcome, and the final world against the recorded canonical
dump. Any mismatch stops the session with a DivergenceReport; a divergence
is never silent.
"""

from __future__ import annotations

from dataclasses import dataclass

from ttd.canon import world_dump_json
from ttd.errors import TtdError
from ttd.graph import restore_image
from ttd.host.world import HostWorld
from ttd.hostapi import SIMPLE_LOGGED_KINDS
from ttd.lang.interp import DEFAULT_STATEMENT_BUDGET, EventCompletion, Interp
from ttd.lang.parser import Program, parse_program
from ttd.lang.values import Closure, render
from ttd.logentries import ConcurrentEntry, EventEntry, InterEventEntry, SimpleEntry
from ttd.tracefile import Checkpoint, Trace


@dataclass
class DivergenceReport:
    kind: str  # unexpected-host-call | missing-log-entry | leftover-entries | state-mismatch
    detail: str
    event_index: int | None = None
    interaction: int | None = None

    def __str__(self) -> str:
        where = []
        if self.event_index is not None:
            where.append(f"event {self.event_index}")
        if self.interaction is not None:
            where.append(f"interaction {self.interaction}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{self.kind}: {self.detail}{suffix}"


class ReplayDivergence(TtdError):
    def __init__(self, report: DivergenceReport):
        super().__init__(str(report))
        self.report = report


class _ReplayInterposer:
    def __init__(self, session: "ReplaySession"):
        self.session = session

    def pre_call(self, world: HostWorld, kind: str, args) -> None:
        s = self.session
        if s.cursor < len(s.entries):
            entry = s.entries[s.cursor]
            if isinstance(entry, ConcurrentEntry) and entry.interaction == world.interactions:
                s.cursor += 1
                for update in entry.updates:
                    try:
                        world.apply_update(update)
                    except LookupError as e:
                        s.diverge("state-mismatch", f"cannot apply update: {e}")

    def post_call(self, world: HostWorld, kind: str, args, result):
        s = self.session
        if kind in SIMPLE_LOGGED_KINDS:
            entry = s.entries[s.cursor] if s.cursor < len(s.entries) else None
            if not (isinstance(entry, SimpleEntry)
                    and entry.interaction == world.interactions and entry.kind == kind):
                if entry is None:
                    s.diverge("missing-log-entry",
                              f"log ended before host call {kind}")
                s.diverge("unexpected-host-call",
                          f"host call {kind} does not match log entry {entry.to_json()}")
            s.cursor += 1
            if kind != "date_now" and float(result) != entry.value:
                s.diverge("state-mismatch",
                          f"{kind} assigned id {result}, recording assigned {entry.value}")
            result = entry.value
        if s.audit_checks:
            calls = s.trace.audit.host_calls
            actual = (world.interactions, kind, render(result))
            if s.audit_cursor >= len(calls):
                s.diverge("unexpected-host-call",
                          f"call {actual} is beyond the recorded call sequence")
            expected = calls[s.audit_cursor]
            if actual != expected:
                s.diverge("unexpected-host-call",
                          f"call {actual} does not match recorded {expected}")
            s.audit_cursor += 1
        return result


class ReplaySession:
    """One replay pass over a trace, optionally starting at a checkpoint."""

    def __init__(self, trace: Trace, checkpoint: Checkpoint | None = None,
                 program: Program | None = None, audit_checks: bool = True):
        self.trace = trace
        self.entries = trace.entries
        self.audit_checks = audit_checks
        self.program = program if program is not None else parse_program(trace.scripts)
        self.toplevel_fn = {sid: self.program.toplevels[i]
                            for i, (sid, _) in enumerate(trace.scripts)}
        budget = int(trace.meta.get("statementBudget", DEFAULT_STATEMENT_BUDGET))

        if checkpoint is None:
            self.world = HostWorld(trace.scenario, recording=False)
            self.interp = Interp(self.program, self.world, budget=budget)
            self.cursor = 0
            self.event_cursor = 0
        else:
            self.world, genv = restore_image(checkpoint.image, trace.scenario)
            self.interp = Interp(self.program, self.world, budget=budget)
            self.interp.globals = genv
            self.event_cursor = checkpoint.event_index
            self.cursor = self._seek_event_entry(checkpoint.event_index)
        self.audit_cursor = self._seek_audit(self.world.interactions)

        self.world.interposer = _ReplayInterposer(self)
        self.world.toplevel_resolver = \
            lambda sid: Closure(self.toplevel_fn[sid], self.interp.globals)

    def _seek_event_entry(self, event_index: int) -> int:
        for i, entry in enumerate(self.entries):
            if isinstance(entry, EventEntry) and entry.event_index == event_index:
                return i
        return len(self.entries)  # no such event: nothing left to consume

    def _seek_audit(self, interactions: int) -> int:
        calls = self.trace.audit.host_calls
        for i, (inter, _, _) in enumerate(calls):
            if inter > interactions:
                return i
        return len(calls)

    def diverge(self, kind: str, detail: str):
        # Raised mid-call this unwinds through the interpreter, whose frame
        # cleanup empties the stack; clearing it here would break that.
        raise ReplayDivergence(DivergenceReport(
            kind, detail, event_index=self.event_cursor,
            interaction=self.world.interactions))

    # -- event-by-event driving --

    def apply_boundary_updates(self) -> None:
        """Apply InterEvent entries due before the next event. Idempotent;
        begin_event calls it, the debugger also calls it directly before
        taking an opportunistic checkpoint."""
        while self.cursor < len(self.entries):
            entry = self.entries[self.cursor]
            if isinstance(entry, InterEventEntry) and \
                    entry.before_event_index == self.event_cursor:
                self.cursor += 1
                for update in entry.updates:
                    try:
                        self.world.apply_update(update)
                    except LookupError as e:
                        self.diverge("state-mismatch", f"cannot apply update: {e}")
                continue
            break

    def begin_event(self):
        """Apply pending between-events updates; return (entry, invocations)
        for the next event, or None at the end of the recording."""
        self.apply_boundary_updates()
        if self.cursor >= len(self.entries):
            return None
        entry = self.entries[self.cursor]
        if not isinstance(entry, EventEntry):
            return None  # stray entries; finalize() reports them
        if entry.event_index != self.event_cursor:
            self.diverge("missing-log-entry",
                         f"expected event {self.event_cursor}, log has event {entry.event_index}")
        self.cursor += 1
        self.world.clock = entry.at
        try:
            invocations = self.world.prepare_dispatch(entry.descriptor)
        except LookupError as e:
            self.diverge("state-mismatch", f"cannot dispatch {entry.descriptor}: {e}")
        return entry, invocations

    def finish_event(self, completion: EventCompletion) -> None:
        k = self.event_cursor
        if self.audit_checks:
            audit = self.trace.audit
            if k >= len(audit.event_statements):
                self.diverge("state-mismatch", f"event {k} beyond recorded event count")
            if completion.statements != audit.event_statements[k]:
                self.diverge("state-mismatch",
                             f"event {k} ran {completion.statements} statements, "
                             f"recording ran {audit.event_statements[k]}")
            if completion.error != audit.event_errors[k]:
                self.diverge("state-mismatch",
                             f"event {k} outcome {completion.error!r} != "
                             f"recorded {audit.event_errors[k]!r}")
        self.event_cursor += 1

    def replay_next_event(self) -> bool:
        started = self.begin_event()
        if started is None:
            return False
        _, invocations = started
        completion = self.interp.run_event(invocations)
        self.finish_event(completion)
        return True

    def finalize(self) -> None:
        if self.cursor != len(self.entries):
            self.diverge("leftover-entries",
                         f"{len(self.entries) - self.cursor} log entries never consumed")
        if self.audit_checks:
            audit = self.trace.audit
            if self.event_cursor != len(audit.event_statements):
                self.diverge("state-mismatch",
                             f"replayed up to event {self.event_cursor}, "
                             f"recording had {len(audit.event_statements)}")
            if self.audit_cursor != len(audit.host_calls):
                self.diverge("missing-log-entry",
                             f"replay made {self.audit_cursor} audited host calls, "
                             f"recording made {len(audit.host_calls)}")
            dump = world_dump_json(self.world)
            if dump != audit.final_dump:
                self.diverge("state-mismatch",
                             "final world dump differs from the recording's")

    def run_to_end(self) -> None:
        while self.replay_next_event():
            pass
        self.finalize()


def start_replay(trace: Trace, checkpoint: Checkpoint | None = None,
                 program: Program | None = None) -> ReplaySession:
    return ReplaySession(trace, checkpoint=checkpoint, program=program)


def verify_replay(trace: Trace, all_checkpoints: bool = False) -> list:
    """Replay and cross-check. Returns [(label, DivergenceReport | None)]:
    one result for the full replay, plus one per checkpoint when asked."""
    results = []
    program = parse_program(trace.scripts)

    def attempt(label: str, checkpoint: Checkpoint | None):
        try:
            ReplaySession(trace, checkpoint=checkpoint, program=program).run_to_end()
            results.append((label, None))
        except ReplayDivergence as e:
            results.append((label, e.report))

    attempt("start", None)
    if all_checkpoints:
        for cp in trace.checkpoints:
            attempt(f"checkpoint@{cp.event_index}", cp)
    return results

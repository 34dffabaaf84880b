"""Replay fidelity and divergence detection.

A replay must reproduce the recording exactly (states, call results, error
outcomes) and must stop with a typed report on any mismatch. Tampering with
a recorded trace here exercises each report kind.
"""

from __future__ import annotations

import pytest

from ttd.canon import world_dump_json
from ttd.host.scenario import load_scenario
from ttd.logentries import (
    EventEntry,
    InterEventEntry,
    ParseAdvance,
    SimpleEntry,
)
from ttd.record import RecordingPolicy, record_session
from ttd.replay import ReplayDivergence, ReplaySession, start_replay, verify_replay
from ttd.tracefile import trace_from_bytes, trace_to_bytes

RICH_SCRIPT = """\
function onTick() {
    storage_set("n", str(floor(date_now())));
    console_log("tick");
}
function onClick(ev) {
    storage_set("clicked", str(ev.x));
}
function onParse(ev) {
    console_log("parsed " + ev.document);
    let btn = query_node("#btn");
    add_event_listener(btn, "click", onClick);
}
function onState(ev) {
    if (xhr_status(ev.target) == 200.0) {
        console_log(xhr_response(ev.target));
    }
}
let iv = set_interval(onTick, 30);
let req = xhr_open("GET", "/api");
add_event_listener(req, "readystatechange", onState);
xhr_send(req);
add_event_listener(query_node("#d"), "parse", onParse);
let luck = random();
"""

RICH_SCENARIO = {
    "version": 1,
    "prng_seed": 11,
    "scheduler_seed": 4,
    "duration_ms": 150,
    "documents": [{"id": "d", "markup": '[div #btn "go"]'}],
    "inputs": [{"at": 50, "type": "click", "target": "#btn", "payload": {"x": 9}}],
    "responses": {"/api": {"status": 200, "body": "payload!",
                           "schedule": [{"after_ms": 40, "bytes": 8}]}},
}


def record_rich():
    scenario = load_scenario(RICH_SCENARIO)
    return record_session([("main", RICH_SCRIPT)], scenario,
                          RecordingPolicy(checkpoint_interval_ms=40.0))


@pytest.fixture(scope="module")
def rich_trace():
    return record_rich()


def reload(trace):
    """Deep, independent copy via the byte format."""
    return trace_from_bytes(trace_to_bytes(trace))


class TestCleanReplay:
    def test_replay_from_start(self, rich_trace):
        start_replay(reload(rich_trace)).run_to_end()

    def test_recording_is_deterministic(self, rich_trace):
        again = record_rich()
        assert trace_to_bytes(again) == trace_to_bytes(rich_trace)

    def test_verify_reports_one_ok_per_replay(self, rich_trace):
        results = verify_replay(reload(rich_trace), all_checkpoints=True)
        assert len(results) == 1 + len(rich_trace.checkpoints)
        assert results[0][0] == "start"
        assert all(report is None for _, report in results)
        labels = [label for label, _ in results[1:]]
        assert labels == [f"checkpoint@{c.event_index}" for c in rich_trace.checkpoints]

    def test_event_mix_is_rich_enough(self, rich_trace):
        kinds = {e.descriptor["kind"] for e in rich_trace.entries
                 if isinstance(e, EventEntry)}
        assert kinds == {"script", "timer", "input", "net", "parse"}
        assert len(rich_trace.checkpoints) >= 3

    def test_guest_errors_replay_cleanly(self):
        scenario = load_scenario({"version": 1})
        trace = record_session(
            [("bad", "let x = ghost;"), ("ok", 'console_log("fine");')], scenario)
        assert trace.audit.event_errors[0].startswith("undefined-variable")
        start_replay(reload(trace)).run_to_end()

    def test_budget_overruns_replay_cleanly(self):
        scenario = load_scenario({"version": 1})
        trace = record_session(
            [("spin", "let i = 0; while (true) { i = i + 1; }")],
            scenario, RecordingPolicy(statement_budget=500))
        assert trace.audit.event_errors[0].startswith("budget-exceeded")
        start_replay(reload(trace)).run_to_end()


class TestCheckpointStarts:
    def test_resume_from_each_checkpoint(self, rich_trace):
        for cp in rich_trace.checkpoints:
            trace = reload(rich_trace)
            ReplaySession(trace, checkpoint=trace.checkpoints[
                rich_trace.checkpoints.index(cp)]).run_to_end()

    def test_checkpoint_resume_is_transparent(self, rich_trace):
        # dumps at every boundary of a full replay...
        full = start_replay(reload(rich_trace))
        dumps = []
        while True:
            full.apply_boundary_updates()
            dumps.append(world_dump_json(full.world))
            if not full.replay_next_event():
                break
        # ...match a fresh session started at each checkpoint
        for cp in reload(rich_trace).checkpoints:
            session = ReplaySession(reload(rich_trace), checkpoint=cp)
            session.apply_boundary_updates()
            assert world_dump_json(session.world) == dumps[cp.event_index]

    def test_checkpoint_session_skips_earlier_events(self, rich_trace):
        trace = reload(rich_trace)
        last = trace.checkpoints[-1]
        session = ReplaySession(trace, checkpoint=last)
        assert session.event_cursor == last.event_index
        entry = trace.entries[session.cursor]
        assert isinstance(entry, EventEntry)
        assert entry.event_index == last.event_index


class TestDivergence:
    def run_expect(self, trace, kind, match=None):
        with pytest.raises(ReplayDivergence) as exc:
            start_replay(trace).run_to_end()
        report = exc.value.report
        assert report.kind == kind
        if match is not None:
            assert match in report.detail
        assert report.event_index is not None
        return report

    def find(self, trace, pred):
        return next(i for i, e in enumerate(trace.entries) if pred(e))

    def test_tampered_timer_id(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, SimpleEntry)
                      and e.kind == "set_interval")
        old = trace.entries[i]
        trace.entries[i] = SimpleEntry(old.interaction, old.kind, old.value + 5.0)
        self.run_expect(trace, "state-mismatch", "assigned")

    def test_reordered_simple_entry_kind(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, SimpleEntry)
                      and e.kind == "set_interval")
        old = trace.entries[i]
        trace.entries[i] = SimpleEntry(old.interaction, "date_now", old.value)
        self.run_expect(trace, "unexpected-host-call", "does not match log entry")

    def test_truncated_log(self, rich_trace):
        trace = reload(rich_trace)
        first_event = self.find(trace, lambda e: isinstance(e, EventEntry))
        del trace.entries[first_event + 1:]
        self.run_expect(trace, "missing-log-entry", "log ended")

    def test_leftover_entries(self, rich_trace):
        trace = reload(rich_trace)
        trace.entries.append(InterEventEntry(9999, ()))
        self.run_expect(trace, "leftover-entries", "never consumed")

    def test_skipped_event_index(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, EventEntry)
                      and e.event_index == 1)
        old = trace.entries[i]
        trace.entries[i] = EventEntry(7, old.seq, old.at, old.descriptor)
        self.run_expect(trace, "missing-log-entry", "expected event 1")

    def test_undispatchable_descriptor(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, EventEntry)
                      and e.descriptor["kind"] == "net")
        old = trace.entries[i]
        trace.entries[i] = EventEntry(old.event_index, old.seq, old.at,
                                      {"kind": "net", "request": 42, "state": "DONE"})
        self.run_expect(trace, "state-mismatch", "cannot dispatch")

    def test_unappliable_update(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, InterEventEntry)
                      and any(isinstance(u, ParseAdvance) for u in e.updates))
        old = trace.entries[i]
        bad = tuple(ParseAdvance("ghost", u.new_consumed_offset, u.attached,
                                 u.completed) if isinstance(u, ParseAdvance) else u
                    for u in old.updates)
        trace.entries[i] = InterEventEntry(old.before_event_index, bad)
        self.run_expect(trace, "state-mismatch", "cannot apply update")

    def test_tampered_statement_count(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.event_statements[0] += 1
        report = self.run_expect(trace, "state-mismatch", "statements")
        assert report.event_index == 0

    def test_tampered_event_outcome(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.event_errors[0] = "type-error: fabricated"
        self.run_expect(trace, "state-mismatch", "outcome")

    def test_tampered_call_fingerprint(self, rich_trace):
        trace = reload(rich_trace)
        inter, kind, _ = trace.audit.host_calls[1]
        trace.audit.host_calls[1] = (inter, kind, "tampered-render")
        self.run_expect(trace, "unexpected-host-call", "does not match recorded")

    def test_extra_recorded_call(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.host_calls.append((999, "console_log", "phantom"))
        self.run_expect(trace, "missing-log-entry", "host calls")

    def test_tampered_final_dump(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.final_dump = trace.audit.final_dump.replace(
            '"tick"', '"tock"', 1)
        self.run_expect(trace, "state-mismatch", "final world dump")

    def test_report_renders_location(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.event_statements[0] += 1
        with pytest.raises(ReplayDivergence) as exc:
            start_replay(trace).run_to_end()
        text = str(exc.value.report)
        assert "state-mismatch" in text and "event 0" in text

    def test_mid_call_divergence_unwinds_the_guest_stack(self, rich_trace):
        trace = reload(rich_trace)
        i = self.find(trace, lambda e: isinstance(e, SimpleEntry)
                      and e.kind == "set_interval")
        old = trace.entries[i]
        trace.entries[i] = SimpleEntry(old.interaction, "date_now", old.value)
        session = start_replay(trace)
        with pytest.raises(ReplayDivergence):
            session.run_to_end()
        assert session.interp.stack == []

    def test_audit_checks_can_be_disabled(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.event_statements[0] += 1
        trace.audit.final_dump = "{}"
        ReplaySession(trace, audit_checks=False).run_to_end()

    def test_verify_surfaces_reports_per_label(self, rich_trace):
        trace = reload(rich_trace)
        trace.audit.final_dump = "{}"
        results = verify_replay(trace, all_checkpoints=True)
        assert all(report is not None for _, report in results)
        assert {report.kind for _, report in results} == {"state-mismatch"}

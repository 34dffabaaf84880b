"""Interactive sessions over a recorded trace: stepping both directions,
breakpoints, travel, and inspection.

The fixture records two scripts against one scenario. The aux script is
pure compute with a known statement-instance table (hand-derived from its
control flow), so backward stepping can be checked against exact
(line, call-ordinal, back-jump) coordinates. The main script drives loops,
timers, a parsed document, and an input event.
"""

import pytest

import ttd.debugger as debugger_mod
from ttd.debugger import DebugSession
from ttd.errors import TravelError
from ttd.host.scenario import load_scenario
from ttd.logentries import EventEntry
from ttd.record import RecordingPolicy, record_session

MAIN = """\
let ticks = 0;
let results = [];
let cfg = {"name": "demo", "items": [10, 20, 30], "limits": {"hi": 9}};
let handle = null;

function double(x) {
    let y = x * 2;
    return y;
}

function total(n) {
    let sum = 0;
    let i = 0;
    while (i < n) {
        sum = sum + double(i);
        i = i + 1;
    }
    return sum;
}

function onTick() {
    ticks = ticks + 1;
    push(results, total(3));
    push(results, total(ticks));
    push(results, total(3));
    if (ticks >= 3) {
        clear_timer(handle);
    }
}

function onClick(ev) {
    storage_set("clicked", str(ev.x));
    console_log("done");
}

function onParse(ev) {
    add_event_listener(query_node("#app"), "click", onClick);
}

add_event_listener(query_node("#page"), "parse", onParse);
handle = set_interval(onTick, 20);
"""

AUX = """\
function add(a, b) {
    return a + b;
}

function twice(v) {
    let w = add(v, v);
    let z = add(w, 1);
    return z;
}

function nest(q) {
    let r = add(add(q, 1), 2);
    return r;
}

let first = nest(3);
let second = twice(4);
"""

SCRIPTS = [("main", MAIN), ("aux", AUX)]

MARKUP = '[div #app "hello" [p #msg "inner"] [s #spin anim="30"]]'

SCENARIO = {
    "version": 1,
    "duration_ms": 150.0,
    "documents": [{"id": "page", "markup": MARKUP}],
    "inputs": [{"at": 90.0, "type": "click", "target": "#app", "payload": {"x": 5}}],
}

# Every statement instance of the aux toplevel event, in execution order:
# (script, line, (c, b), depth, fn). nest(3) runs add twice inside one
# statement; twice(4) runs it twice more, so add's call ordinals reach 4.
AUX_WALK = [
    ("aux", 1, (1, 0), 1, "<toplevel:aux>"),
    ("aux", 5, (1, 0), 1, "<toplevel:aux>"),
    ("aux", 11, (1, 0), 1, "<toplevel:aux>"),
    ("aux", 16, (1, 0), 1, "<toplevel:aux>"),
    ("aux", 12, (1, 0), 2, "nest"),
    ("aux", 2, (1, 0), 3, "add"),
    ("aux", 2, (2, 0), 3, "add"),
    ("aux", 13, (1, 0), 2, "nest"),
    ("aux", 17, (1, 0), 1, "<toplevel:aux>"),
    ("aux", 6, (1, 0), 2, "twice"),
    ("aux", 2, (3, 0), 3, "add"),
    ("aux", 7, (1, 0), 2, "twice"),
    ("aux", 2, (4, 0), 3, "add"),
    ("aux", 8, (1, 0), 2, "twice"),
]


@pytest.fixture(scope="module")
def sparse_trace():
    # Default cadence: only the mandatory checkpoint at event 0 fits in
    # a 150ms recording, so positioning really has to replay.
    return record_session(SCRIPTS, load_scenario(SCENARIO))


@pytest.fixture(scope="module")
def dense_trace():
    return record_session(SCRIPTS, load_scenario(SCENARIO),
                          RecordingPolicy(checkpoint_interval_ms=0.0))


@pytest.fixture(scope="module")
def ev(sparse_trace):
    """Event indices by descriptor kind, discovered from the trace."""
    kinds: dict = {}
    for e in sparse_trace.entries:
        if isinstance(e, EventEntry):
            kinds.setdefault(e.descriptor["kind"], []).append(e.event_index)
    return kinds


@pytest.fixture
def ds(sparse_trace):
    return DebugSession(sparse_trace)


def shape(pause):
    return (pause.script, pause.line, pause.time, pause.depth, pause.fn)


def walk_event(session, k):
    """Forward-step through event k; returns its PauseInfo list."""
    pause = session.travel_to_event(k)
    out = []
    while pause.status == "paused" and pause.event_index == k:
        out.append(pause)
        pause = session.step_forward()
    return out


class TestSessionSetup:
    def test_opens_at_the_first_statement(self, ds):
        p = ds.last_pause
        assert p.status == "paused"
        assert p.reason == "travel"
        assert (p.event_index, p.script, p.line, p.col) == (0, "main", 1, 1)
        assert p.time == (1, 0)
        assert p.depth == 1
        assert p.fn == "<toplevel:main>"

    def test_recorded_event_mix(self, ev, sparse_trace):
        assert ev["script"] == [0, 1]
        assert len(ev["timer"]) == 3
        assert len(ev["parse"]) == 1
        assert len(ev["input"]) == 1
        total = sum(len(v) for v in ev.values())
        assert total == int(sparse_trace.meta["events"]) == 7
        # The click listener only exists once the document has parsed.
        assert ev["parse"][0] < ev["input"][0]

    def test_aux_event_walk_matches_hand_table(self, ds):
        got = [shape(p) for p in walk_event(ds, 1)]
        assert got == AUX_WALK

    def test_pause_json_shapes(self, ds):
        j = ds.travel_to_event(1).to_json()
        assert j == {
            "status": "paused", "reason": "travel", "event": 1, "uid": j["uid"],
            "script": "aux", "line": 1, "col": 1, "time": [1, 0],
            "depth": 1, "fn": "<toplevel:aux>",
        }
        end = ds.travel_to_event(ds.total_events).to_json()
        assert end == {"status": "end", "reason": "travel", "event": 7}


class TestForwardStepping:
    def test_step_forward_walks_the_block(self, ds):
        lines = [ds.step_forward().line for _ in range(3)]
        assert lines == [2, 3, 4]

    def test_step_forward_enters_calls(self, ds):
        ds.time_travel_to(1, "aux", 16, (1, 0))
        p = ds.step_forward()
        assert (p.line, p.depth, p.fn) == (12, 2, "nest")

    def test_step_over_skips_the_whole_call_subtree(self, ds):
        ds.time_travel_to(1, "aux", 16, (1, 0))
        p = ds.step_over()
        assert (p.line, p.time, p.depth) == (17, (1, 0), 1)

    def test_step_over_inside_a_callee(self, ds):
        ds.time_travel_to(1, "aux", 12, (1, 0))
        p = ds.step_over()
        assert (p.line, p.fn) == (13, "nest")

    def test_step_over_without_a_call_is_one_step(self, ds):
        ds.travel_to_event(1)
        assert ds.step_over().line == 5

    def test_step_out_to_the_calling_frame(self, ds):
        ds.time_travel_to(1, "aux", 2, (1, 0))
        p = ds.step_out()
        assert (p.line, p.depth, p.fn) == (13, 2, "nest")

    def test_step_out_from_depth_two(self, ds):
        ds.time_travel_to(1, "aux", 12, (1, 0))
        p = ds.step_out()
        assert (p.line, p.depth) == (17, 1)

    def test_step_over_stops_at_the_next_event_boundary(self, ds):
        ds.time_travel_to(0, "main", 41, (1, 0))
        p = ds.step_over()
        assert (p.event_index, p.script, p.line) == (1, "aux", 1)
        assert p.reason == "step"

    def test_stepping_at_the_end_stays_there(self, ds):
        ds.travel_to_event(ds.total_events)
        for move in (ds.step_forward, ds.step_over, ds.step_out):
            p = move()
            assert (p.status, p.reason) == ("end", "end")

    def test_continue_without_breakpoints_runs_out(self, ds):
        p = ds.continue_()
        assert (p.status, p.reason, p.event_index) == ("end", "end", 7)


class TestStepBack:
    """Each analytic resolution case, pinned to exact coordinates."""

    def test_previous_statement_in_the_same_block(self, ds):
        ds.time_travel_to(0, "main", 2, (1, 0))
        p = ds.step_back()
        assert (p.line, p.time) == (1, (1, 0))

    def test_into_a_loop_header_over_plain_fallthrough(self, ds, ev):
        # First pause at the while line: no branch recorded yet, so the
        # predecessor is found by walking the goto chain from fn entry.
        ds.time_travel_to(ev["timer"][0], "main", 14, (1, 0))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (13, (1, 0), "total")

    def test_from_loop_body_back_to_the_condition(self, ds, ev):
        ds.time_travel_to(ev["timer"][0], "main", 15, (1, 1))
        p = ds.step_back()
        assert (p.line, p.time) == (14, (1, 1))

    def test_over_a_back_edge_decrements_the_jump_count(self, ds, ev):
        ds.time_travel_to(ev["timer"][0], "main", 14, (1, 2))
        p = ds.step_back()
        assert (p.line, p.time) == (16, (1, 1))

    def test_continuation_lands_on_the_callee_final_statement(self, ds, ev):
        # sum = sum + double(i) at iteration b=1 runs the event's second
        # double call, so its return statement carries ordinal 2.
        ds.time_travel_to(ev["timer"][0], "main", 16, (1, 1))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (8, (2, 0), "double")

    def test_callee_entry_returns_to_the_call_site(self, ds, ev):
        ds.time_travel_to(ev["timer"][0], "main", 7, (2, 0))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (15, (1, 1), "total")

    def test_nested_call_entry_lands_inside_the_inner_call(self, ds):
        # add(add(q, 1), 2): entering the outer add, the same statement
        # instance already completed the inner one, so the predecessor is
        # the inner call's return, not the call site.
        ds.time_travel_to(1, "aux", 2, (2, 0))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (2, (1, 0), "add")

    def test_after_a_call_statement_lands_on_its_return(self, ds):
        ds.time_travel_to(1, "aux", 7, (1, 0))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (2, (3, 0), "add")

    def test_condition_after_three_calls_sees_the_last_total(self, ds, ev):
        ds.time_travel_to(ev["timer"][0], "main", 26, (1, 0))
        p = ds.step_back()
        assert (p.line, p.time, p.fn) == (18, (3, 3), "total")

    def test_return_statement_back_to_the_failed_condition(self, ds, ev):
        # Second total call of a tick runs total(ticks); in tick 2 the
        # loop exits after two back jumps.
        ds.time_travel_to(ev["timer"][1], "main", 18, (2, 2))
        p = ds.step_back()
        assert (p.line, p.time) == (14, (2, 2))

    def test_first_statement_of_an_event_crosses_back(self, ds, ev):
        k = ev["timer"][1]
        prev_last = walk_event(ds, k - 1)[-1]
        ds.travel_to_event(k)
        p = ds.step_back()
        assert p.event_index == k - 1
        assert shape(p) == shape(prev_last)
        forward = ds.step_forward()
        assert (forward.event_index, forward.line) == (k, 22)

    def test_at_the_origin_stays_put(self, ds):
        p = ds.step_back()
        assert (p.status, p.reason) == ("paused", "start")
        assert (p.event_index, p.line) == (0, 1)

    def test_from_the_end_of_the_recording(self, ds, ev):
        ds.travel_to_event(ds.total_events)
        p = ds.step_back()
        assert (p.event_index, p.line, p.fn) == (ev["input"][0], 33, "onClick")

    def test_inverse_of_step_forward_across_aux(self, ds):
        pauses = walk_event(ds, 1)
        for i in range(len(pauses) - 1, 0, -1):
            ds.travel_to_instance(1, pauses[i].uid, pauses[i].time)
            assert shape(ds.step_back()) == shape(pauses[i - 1])

    def test_walks_a_whole_tick_event_backwards(self, ds, ev):
        k = ev["timer"][1]
        pauses = walk_event(ds, k)
        assert len(pauses) == 57
        ds.travel_to_instance(k, pauses[-1].uid, pauses[-1].time)
        for expect in reversed(pauses[:-1]):
            assert shape(ds.step_back()) == shape(expect)

    def test_forward_is_the_inverse_of_back(self, ds, ev):
        pauses = walk_event(ds, ev["timer"][0])
        for i in (1, 9, 20, 33, len(pauses) - 1):
            ds.travel_to_instance(ev["timer"][0], pauses[i].uid, pauses[i].time)
            ds.step_back()
            assert shape(ds.step_forward()) == shape(pauses[i])


class TestReverseOverOut:
    def test_reverse_over_skips_a_completed_subtree(self, ds):
        ds.time_travel_to(1, "aux", 17, (1, 0))
        p = ds.reverse_step_over()
        assert (p.line, p.time, p.depth) == (16, (1, 0), 1)

    def test_reverse_over_within_a_block(self, ds):
        ds.time_travel_to(1, "aux", 11, (1, 0))
        assert ds.reverse_step_over().line == 5

    def test_reverse_over_from_deeper_may_surface(self, ds):
        ds.time_travel_to(1, "aux", 2, (3, 0))
        p = ds.reverse_step_over()
        assert (p.line, p.depth) == (6, 2)

    def test_reverse_over_crosses_event_boundaries(self, ds):
        ds.travel_to_event(1)
        p = ds.reverse_step_over()
        assert (p.event_index, p.script, p.line) == (0, "main", 41)

    def test_reverse_out_reaches_the_call_site(self, ds):
        ds.time_travel_to(1, "aux", 2, (1, 0))
        p = ds.reverse_step_out()
        assert (p.line, p.time, p.fn) == (12, (1, 0), "nest")
        ds.time_travel_to(1, "aux", 2, (2, 0))
        p = ds.reverse_step_out()
        assert (p.line, p.fn) == (12, "nest")

    def test_reverse_out_at_the_root_has_no_caller(self, ds):
        before = ds.time_travel_to(1, "aux", 17, (1, 0))
        p = ds.reverse_step_out()
        assert (p.status, p.reason) == ("paused", "no-caller")
        assert (p.line, p.time) == (before.line, before.time)

    def test_reverse_out_never_crosses_events(self, ds):
        ds.travel_to_event(1)
        p = ds.reverse_step_out()
        assert (p.reason, p.event_index, p.line) == ("no-caller", 1, 1)

    def test_reverse_moves_from_the_end(self, ds, ev):
        ds.travel_to_event(ds.total_events)
        p = ds.reverse_step_over()
        assert (p.event_index, p.line) == (ev["input"][0], 33)
        ds.travel_to_event(ds.total_events)
        p = ds.reverse_step_out()
        assert (p.status, p.reason) == ("end", "no-caller")


class TestTravel:
    def test_travel_to_event_is_idempotent(self, ds, ev):
        k = ev["timer"][1]
        assert ds.travel_to_event(k) == ds.travel_to_event(k)

    def test_travel_to_instance_is_repeatable(self, ds, ev):
        k = ev["timer"][1]
        uid = ds.program.resolve_line("main", 15)
        first = ds.travel_to_instance(k, uid, (2, 1))
        heap_first = ds.inspect_heap()
        ds.travel_to_event(0)
        again = ds.travel_to_instance(k, uid, (2, 1))
        assert first == again
        assert ds.inspect_heap() == heap_first

    def test_travel_positions_full_world_state(self, ds, ev):
        ds.time_travel_to(ev["timer"][1], "main", 22, (1, 0))
        heap = ds.inspect_heap()["globals"]
        assert heap["ticks"] == "1"
        assert heap["results"] == "[6, 0, 6]"

    def test_time_travel_resolves_script_lines(self, ds):
        p = ds.time_travel_to(1, "aux", 7, (1, 0))
        assert p.uid == ds.program.resolve_line("aux", 7)
        assert (p.line, p.fn) == (7, "twice")

    def test_travel_to_the_final_boundary_is_the_end(self, ds):
        p = ds.travel_to_event(ds.total_events)
        assert (p.status, p.reason) == ("end", "travel")

    def test_travel_beyond_the_recording_fails(self, ds):
        with pytest.raises(TravelError, match="beyond the recording"):
            ds.travel_to_event(ds.total_events + 1)

    def test_travel_to_a_missing_instance_fails(self, ds):
        uid = ds.program.resolve_line("aux", 2)
        with pytest.raises(TravelError, match="no statement instance"):
            ds.travel_to_instance(1, uid, (9, 0))

    def test_travel_to_an_unknown_line_fails(self, ds):
        with pytest.raises(TravelError, match="no statement at aux:4"):
            ds.time_travel_to(1, "aux", 4, (1, 0))
        with pytest.raises(TravelError, match="no statement at nope:1"):
            ds.time_travel_to(1, "nope", 1, (1, 0))

    def test_travel_into_listener_events(self, ds, ev):
        p = ds.travel_to_event(ev["parse"][0])
        assert (p.script, p.line, p.fn, p.depth) == ("main", 37, "onParse", 1)
        p = ds.travel_to_event(ev["input"][0])
        assert (p.line, p.fn) == (32, "onClick")


class TestBreakpoints:
    def test_unconditional_hits_every_instance(self, ds):
        bp = ds.set_breakpoint("aux", 2)
        ds.travel_to_event(0)
        hits = []
        while True:
            p = ds.continue_()
            if p.status == "end":
                break
            hits.append((p.reason, p.event_index, p.line, p.time))
        assert hits == [(f"breakpoint:{bp.id}", 1, 2, (c, 0)) for c in (1, 2, 3, 4)]

    def test_call_ordinal_condition_hits_once(self, ds):
        ds.set_breakpoint("aux", 2, time=(3, 0))
        ds.travel_to_event(0)
        p = ds.continue_()
        assert (p.line, p.time) == (2, (3, 0))
        assert ds.continue_().status == "end"

    def test_condition_on_call_ordinal_and_back_jumps(self, ds, ev):
        # total runs three times per tick; (3, 2) pins the third call's
        # third loop check, once per tick event.
        ds.set_breakpoint("main", 14, time=(3, 2))
        ds.travel_to_event(0)
        stops = []
        while (p := ds.continue_()).status == "paused":
            stops.append((p.event_index, p.line, p.time, p.fn))
        assert stops == [(k, 14, (3, 2), "total") for k in ev["timer"]]

    def test_breakpoint_on_a_blank_line_fails(self, ds):
        with pytest.raises(TravelError, match="no statement at main:5"):
            ds.set_breakpoint("main", 5)

    def test_clear_breakpoint(self, ds):
        bp = ds.set_breakpoint("aux", 2)
        assert ds.clear_breakpoint(bp.id) is True
        assert ds.clear_breakpoint(bp.id) is False
        ds.travel_to_event(0)
        assert ds.continue_().status == "end"

    def test_list_breakpoints(self, ds):
        a = ds.set_breakpoint("aux", 2)
        b = ds.set_breakpoint("main", 14, time=(1, 2))
        assert ds.list_breakpoints() == [
            {"id": a.id, "script": "aux", "line": 2, "time": None},
            {"id": b.id, "script": "main", "line": 14, "time": [1, 2]},
        ]

    def test_earlier_statement_stops_first(self, ds):
        one = ds.set_breakpoint("aux", 2, time=(2, 0))
        two = ds.set_breakpoint("aux", 16)
        ds.travel_to_event(0)
        assert ds.continue_().reason == f"breakpoint:{two.id}"
        assert ds.continue_().reason == f"breakpoint:{one.id}"


class TestOpportunisticCheckpoints:
    def test_positioning_beyond_the_recorded_checkpoint_replays(self, ds, ev):
        assert ds.events_replayed_during_positioning == 0
        k = ev["timer"][2]
        ds.travel_to_event(k)
        assert ds.events_replayed_during_positioning == k
        assert ds.checkpoints_created == 1
        assert ds.timeline()["cachedCheckpoints"] == [k]

    def test_later_travel_inside_a_cached_event_is_free(self, ds, ev):
        k = ev["timer"][2]
        ds.time_travel_to(k, "main", 26, (1, 0))
        spent = ds.events_replayed_during_positioning
        for _ in range(5):
            ds.step_back()
        ds.time_travel_to(k, "main", 14, (3, 2))
        assert ds.events_replayed_during_positioning == spent

    def test_dense_recorded_checkpoints_leave_nothing_to_replay(self, dense_trace):
        session = DebugSession(dense_trace)
        for k in range(session.total_events):
            session.travel_to_event(k)
        assert session.events_replayed_during_positioning == 0
        assert session.checkpoints_created == 0
        assert session.timeline()["cachedCheckpoints"] == []

    def test_cache_evicts_least_recently_used(self, sparse_trace, monkeypatch):
        monkeypatch.setattr(debugger_mod, "OPPORTUNISTIC_CACHE_LIMIT", 2)
        session = DebugSession(sparse_trace)
        for k in (1, 2, 3):
            session.travel_to_event(k)
        assert session.timeline()["cachedCheckpoints"] == [2, 3]

    def test_checkpoint_hook_fires_on_cache_fill(self, ds, ev):
        seen = []
        ds.on_checkpoint = seen.append
        k = ev["timer"][1]
        ds.travel_to_event(k)
        ds.travel_to_event(k)
        assert seen == [k]

    def test_cached_and_recorded_starts_agree(self, sparse_trace, dense_trace, ev):
        k = ev["timer"][1]
        a = DebugSession(sparse_trace)
        b = DebugSession(dense_trace)
        assert a.travel_to_event(k) == b.travel_to_event(k)
        assert a.inspect_heap() == b.inspect_heap()
        assert a.inspect_world("timers") == b.inspect_world("timers")
        for _ in range(25):
            assert shape(a.step_forward()) == shape(b.step_forward())


class TestInspection:
    def test_locals_report_every_scope(self, ds):
        ds.time_travel_to(1, "aux", 2, (1, 0))
        scopes = ds.inspect_locals()
        assert scopes[0] == {"kind": "local", "vars": {"a": "3", "b": "1"}}
        assert scopes[-1]["kind"] == "global"
        top = scopes[-1]["vars"]
        assert top["cfg"] == "{name: demo, items: [10, 20, 30], limits: {hi: 9}}"
        assert "first" not in top  # its let has not finished yet

    def test_locals_inside_a_loop(self, ds, ev):
        ds.time_travel_to(ev["timer"][0], "main", 15, (1, 2))
        local = ds.inspect_locals()[0]["vars"]
        assert local == {"n": "3", "sum": "2", "i": "2"}

    def test_locals_render_the_event_argument(self, ds, ev):
        ds.travel_to_event(ev["input"][0])
        local = ds.inspect_locals()[0]["vars"]
        assert local == {"ev": "{type: click, target: <node#4>, x: 5}"}

    def test_locals_are_empty_at_the_end(self, ds):
        ds.travel_to_event(ds.total_events)
        assert ds.inspect_locals() == []

    def test_stack_lists_frames_innermost_first(self, ds):
        ds.time_travel_to(1, "aux", 2, (1, 0))
        stack = ds.inspect_stack()
        assert [(f["fn"], f["line"], f["time"]) for f in stack] == [
            ("add", 2, [1, 0]),
            ("nest", 12, [1, 0]),
            ("<toplevel:aux>", 16, [1, 0]),
        ]
        assert all(f["script"] == "aux" for f in stack)

    def test_documents_before_and_after_parsing(self, ds, ev):
        assert ds.travel_to_event(0) and ds.inspect_dom() == [
            {"id": "page", "complete": False, "consumed": 0, "root": 1}]
        ds.travel_to_event(ev["input"][0])
        assert ds.inspect_dom() == [
            {"id": "page", "complete": True, "consumed": len(MARKUP), "root": 1}]

    def test_node_view_and_child_paging(self, ds, ev):
        ds.travel_to_event(ds.total_events)
        onclick = next(f for f in ds.program.functions.values() if f.name == "onClick")
        view = ds.inspect_node(4)
        assert (view["tag"], view["attrs"], view["text"]) == ("div", {"id": "app"}, "hello")
        assert view["listeners"] == [f"click:fn#{onclick.fn_id}"]
        assert view["childCount"] == 2
        assert view["children"] == [{"id": 2, "tag": "p"}, {"id": 3, "tag": "s"}]
        page = ds.inspect_node(4, offset=1, limit=5)
        assert (page["childOffset"], page["children"]) == (1, [{"id": 3, "tag": "s"}])

    def test_missing_node_fails(self, ds):
        with pytest.raises(TravelError, match="no node 99"):
            ds.inspect_node(99)

    def test_heap_paths_walk_nested_values(self, ds):
        ds.travel_to_event(ds.total_events)
        v = ds.inspect_heap_path("globals.cfg.items[1]")
        assert (v["kind"], v["render"]) == ("number", "20")
        assert ds.inspect_heap_path("globals.cfg.limits.hi")["render"] == "9"
        obj = ds.inspect_heap_path("globals.cfg")
        assert (obj["kind"], obj["count"]) == ("object", 3)
        assert [c["key"] for c in obj["children"]] == ["name", "items", "limits"]
        arr = ds.inspect_heap_path("globals.results")
        assert arr["render"] == "[6, 0, 6, 6, 2, 6, 6, 6, 6]"
        tail = ds.inspect_heap_path("globals.results", offset=7, limit=5)
        assert [c["key"] for c in tail["children"]] == ["7", "8"]
        handle = ds.inspect_heap_path("globals.handle")
        assert (handle["kind"], handle["render"]) == ("number", "1")

    @pytest.mark.parametrize("path,msg", [
        ("cfg.items", "must start with 'globals'"),
        ("globals..x", "name expected"),
        ("globals.cfg.items[x]", "index expected"),
        ("globals.missing", "no global named"),
        ("globals.cfg.zzz", "no property"),
        ("globals.ticks.x", "has no properties"),
        ("globals.cfg.items[99]", "out of range"),
        ("globals.ticks[0]", "is not an array"),
        ("globals.", "invalid heap path"),
        ("globals.cfg!", "unexpected"),
        ("", "invalid heap path"),
    ])
    def test_heap_path_errors(self, ds, path, msg):
        ds.travel_to_event(ds.total_events)
        with pytest.raises(TravelError, match=msg):
            ds.inspect_heap_path(path)

    def test_world_sections(self, ds, ev):
        ds.travel_to_event(ev["timer"][0])
        timers = ds.inspect_world("timers")
        assert len(timers) == 1
        assert timers[0]["one_shot"] is False
        assert timers[0]["period"] == 20.0
        ds.travel_to_event(ds.total_events)
        assert ds.inspect_world("timers") == []  # cleared on the third tick
        assert ds.inspect_world("storage") == {"clicked": "5"}
        assert ds.inspect_world("console") == ["done"]
        assert ds.inspect_world("requests") == []

    def test_animation_section_tracks_frames(self, ds):
        ds.travel_to_event(ds.total_events)
        rows = ds.inspect_world("animations")
        assert len(rows) == 1
        row = rows[0]
        assert row["period"] == 30.0
        assert row["frames"] >= 1
        assert ds.inspect_node(row["node"])["attrs"]["frame"] == str(row["frames"])

    def test_unknown_section_fails(self, ds):
        with pytest.raises(TravelError, match="no inspectable section"):
            ds.inspect_world("sockets")


class TestTimeline:
    def test_timeline_summary(self, ds, sparse_trace):
        t = ds.timeline()
        assert t["events"] == 7
        assert t["interactions"] == int(sparse_trace.meta["interactions"])
        assert t["checkpoints"] == [{"event": 0, "at": 0.0}]
        assert [row["index"] for row in t["timeline"]] == list(range(7))
        ats = [row["at"] for row in t["timeline"]]
        assert ats == sorted(ats)
        kinds = {row["descriptor"]["kind"] for row in t["timeline"]}
        assert kinds == {"script", "timer", "parse", "input"}

    def test_timeline_shows_cached_positions(self, ds, ev):
        ds.travel_to_event(ev["timer"][0])
        assert ds.timeline()["cachedCheckpoints"] == [ev["timer"][0]]

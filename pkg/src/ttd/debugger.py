"""Interactive time-traveling sessions over a recorded trace.

A session is always positioned either at a statement pause (the statement is
about to execute) or at the end of the recording. Forward motion drives the
live interpreter generator; backward motion is re-execution: resolve where
the predecessor lies, restore the nearest checkpoint at or before that
event, replay forward with monitors off, then run the event monitored until
the target statement instance comes up. Within one event a statement
instance is exactly identified by (statement, call ordinal, back-jump
count), so travel targets are never ambiguous.

Positioning cost is bounded by checkpoints. Whenever positioning replays at
least one whole event, the session caches an opportunistic checkpoint at the
target event boundary, so later backward steps inside that event replay no
prior events at all. The cache holds up to 64 images, evicting the least
recently used; checkpoints recorded in the trace are separate and permanent.

Backward stepping resolves the predecessor analytically from the per-frame
monitor state (last recorded branch, call edge or return edge, last return
landing). Only when the predecessor lies before the current root frame began
(first statement of a listener) does it fall back to a monitored trace pass
over the current event.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

from ttd.canon import node_dump, world_dump
from ttd.errors import TravelError
from ttd.graph import snapshot_image
from ttd.lang.cfg import Cfg, Goto
from ttd.lang.parser import Program, parse_program
from ttd.lang.values import Closure, Env, GuestArray, GuestObject, HostRef, render
from ttd.logentries import EventEntry
from ttd.replay import ReplaySession
from ttd.tracefile import Checkpoint, Trace

OPPORTUNISTIC_CACHE_LIMIT = 64


@dataclass
class PauseInfo:
    status: str  # "paused" | "end" | "start"
    reason: str
    event_index: int | None = None
    uid: int | None = None
    script: str | None = None
    line: int | None = None
    col: int | None = None
    time: tuple | None = None  # (c, b)
    depth: int | None = None
    fn: str | None = None

    def to_json(self) -> dict:
        out = {"status": self.status, "reason": self.reason}
        if self.status == "paused":
            out.update({
                "event": self.event_index, "uid": self.uid,
                "script": self.script, "line": self.line, "col": self.col,
                "time": list(self.time), "depth": self.depth, "fn": self.fn,
            })
        elif self.event_index is not None:
            out["event"] = self.event_index
        return out


@dataclass
class Breakpoint:
    id: int
    script: str
    line: int
    uid: int
    time: tuple | None  # exact (c, b) condition, or None


class DebugSession:
    def __init__(self, trace: Trace, program: Program | None = None):
        self.trace = trace
        self.program = program if program is not None else parse_program(trace.scripts)
        self.total_events = int(trace.meta.get("events", 0))
        self.breakpoints: dict[int, Breakpoint] = {}
        self._next_bp_id = 1
        self._cache: OrderedDict[int, Checkpoint] = OrderedDict()
        self.events_replayed_during_positioning = 0
        self.checkpoints_created = 0
        self.on_checkpoint = None  # hook(event_index), used by the protocol server

        self.rs: ReplaySession | None = None
        self.gen = None
        self.current_stmt = None
        self.at_end = False
        self.last_pause = self.travel_to_event(0)

    # ---- positioning machinery ----

    def _best_checkpoint(self, k: int) -> Checkpoint | None:
        best: Checkpoint | None = None
        for cp in self.trace.checkpoints:
            if cp.event_index <= k and (best is None or cp.event_index > best.event_index):
                best = cp
        cached_keys = [ck for ck in self._cache if ck <= k]
        if cached_keys:
            ck = max(cached_keys)
            if best is None or ck >= best.event_index:
                self._cache.move_to_end(ck)
                best = self._cache[ck]
        return best

    def _position_session(self, k: int) -> ReplaySession:
        """Fresh ReplaySession parked at the boundary before event k, with
        boundary updates applied and nothing of event k started."""
        if k > self.total_events:
            raise TravelError(f"event {k} is beyond the recording ({self.total_events} events)")
        cp = self._best_checkpoint(k)
        rs = ReplaySession(self.trace, checkpoint=cp, program=self.program)
        replayed = k - (cp.event_index if cp is not None else 0)
        for _ in range(replayed):
            if not rs.replay_next_event():
                raise TravelError(f"recording ended while positioning to event {k}")
        self.events_replayed_during_positioning += replayed
        rs.apply_boundary_updates()
        if replayed >= 1 and k not in self._cache:
            image = snapshot_image(rs.world, rs.interp.globals)
            self._cache[k] = Checkpoint(k, rs.world.clock, image)
            self._cache.move_to_end(k)
            while len(self._cache) > OPPORTUNISTIC_CACHE_LIMIT:
                self._cache.popitem(last=False)
            self.checkpoints_created += 1
            if self.on_checkpoint is not None:
                self.on_checkpoint(k)
        return rs

    def _ensure_at_event_start(self, k: int) -> None:
        self.rs = self._position_session(k)
        self.gen = None
        self.current_stmt = None
        self.at_end = False

    def _enter_event_execution(self) -> bool:
        """Start the next event monitored. False at end of recording."""
        self.rs.interp.enable_monitors()
        started = self.rs.begin_event()
        if started is None:
            self.gen = None
            self.current_stmt = None
            self.at_end = True
            return False
        _, invocations = started
        self.gen = self.rs.interp.event_gen(invocations)
        return True

    def _advance(self) -> bool:
        """Move to the next statement pause, crossing event boundaries.
        False when the recording is exhausted."""
        while True:
            if self.gen is None:
                if not self._enter_event_execution():
                    return False
            try:
                stmt = next(self.gen)
            except StopIteration as stop:
                self.rs.finish_event(stop.value)
                self.gen = None
                continue
            self.current_stmt = stmt
            return True

    def _advance_within_event(self) -> bool:
        """Move to the next pause inside the current event only."""
        if self.gen is None:
            if not self._enter_event_execution():
                return False
        try:
            stmt = next(self.gen)
        except StopIteration as stop:
            self.rs.finish_event(stop.value)
            self.gen = None
            return False
        self.current_stmt = stmt
        return True

    @property
    def event_index(self) -> int:
        return self.rs.event_cursor

    def _pause(self, reason: str) -> PauseInfo:
        if self.at_end:
            info = PauseInfo("end", reason, event_index=self.total_events)
        elif self.current_stmt is None:
            info = PauseInfo("start", reason, event_index=self.event_index)
        else:
            frame = self.rs.interp.stack[-1]
            loc = self.current_stmt.loc
            info = PauseInfo(
                "paused", reason, event_index=self.event_index,
                uid=self.current_stmt.uid, script=loc.script, line=loc.line,
                col=loc.col, time=frame.time(), depth=len(self.rs.interp.stack),
                fn=frame.fn.name)
        self.last_pause = info
        return info

    # ---- travel primitives ----

    def travel_to_event(self, k: int) -> PauseInfo:
        """Position at the first statement of event k (or beyond, if k has
        none; or at the end of the recording)."""
        self._ensure_at_event_start(k)
        self._advance()
        return self._pause("travel")

    def travel_to_instance(self, k: int, uid: int, time: tuple) -> PauseInfo:
        """Position exactly at statement instance (uid, time) in event k."""
        self._ensure_at_event_start(k)
        while self._advance_within_event():
            if self.current_stmt.uid == uid and self.rs.interp.stack[-1].time() == time:
                return self._pause("travel")
        raise TravelError(
            f"event {k} contains no statement instance uid={uid} time={time}; "
            "replayed the whole event without finding it")

    def time_travel_to(self, event_index: int, script: str, line: int, time: tuple) -> PauseInfo:
        uid = self.program.resolve_line(script, line)
        if uid is None:
            raise TravelError(f"no statement at {script}:{line}")
        return self.travel_to_instance(event_index, uid, tuple(time))

    def _trace_event(self, k: int) -> list:
        """Monitored scratch pass over event k: [(uid, c, b, depth), ...]."""
        rs = self._position_session(k)
        rs.interp.enable_monitors()
        started = rs.begin_event()
        if started is None:
            return []
        _, invocations = started
        out = []
        gen = rs.interp.event_gen(invocations)
        while True:
            try:
                stmt = next(gen)
            except StopIteration as stop:
                rs.finish_event(stop.value)
                return out
            frame = rs.interp.stack[-1]
            out.append((stmt.uid, frame.c, frame.b, len(rs.interp.stack)))

    # ---- forward stepping ----

    def step_forward(self) -> PauseInfo:
        if self.at_end:
            return self._pause("end")
        self._advance()
        return self._pause("step")

    def step_over(self) -> PauseInfo:
        if self.at_end:
            return self._pause("end")
        entry_depth = len(self.rs.interp.stack)
        entry_event = self.event_index
        while self._advance():
            if self.event_index != entry_event:
                break  # crossed into the next event: stop at its first statement
            if len(self.rs.interp.stack) <= entry_depth:
                break
        return self._pause("step")

    def step_out(self) -> PauseInfo:
        if self.at_end:
            return self._pause("end")
        entry_depth = len(self.rs.interp.stack)
        entry_event = self.event_index
        while self._advance():
            if self.event_index != entry_event:
                break
            if len(self.rs.interp.stack) < entry_depth:
                break
        return self._pause("step")

    def continue_(self) -> PauseInfo:
        while self._advance():
            bp = self._breakpoint_here()
            if bp is not None:
                return self._pause(f"breakpoint:{bp.id}")
        return self._pause("end")

    def _breakpoint_here(self) -> Breakpoint | None:
        if self.current_stmt is None:
            return None
        uid = self.current_stmt.uid
        for bp in self.breakpoints.values():
            if bp.uid == uid:
                if bp.time is None or self.rs.interp.stack[-1].time() == bp.time:
                    return bp
        return None

    # ---- backward stepping ----

    def step_back(self) -> PauseInfo:
        if self.at_end:
            return self._travel_to_last_before(self.total_events)
        if self.current_stmt is None:
            return self._pause("start")
        k = self.event_index
        target = self._resolve_step_back()
        if target is not None:
            return self.travel_to_instance(k, target[0], target[1])
        # Predecessor lies before this root frame began: consult the trace.
        tr = self._trace_event(k)
        i = self._instance_index(tr)
        if i > 0:
            uid, c, b, _ = tr[i - 1]
            return self.travel_to_instance(k, uid, (c, b))
        return self._travel_to_last_before(k)

    def reverse_step_over(self) -> PauseInfo:
        return self._reverse_scan(lambda d, here: d <= here, cross_events=True)

    def reverse_step_out(self) -> PauseInfo:
        # The call stack empties between events, so a caller can never live
        # in an earlier event: no crossing, signal the boundary instead.
        return self._reverse_scan(lambda d, here: d < here, cross_events=False)

    def _reverse_scan(self, depth_ok, cross_events: bool) -> PauseInfo:
        if self.at_end:
            if cross_events:
                return self._travel_to_last_before(self.total_events)
            return self._pause("no-caller")
        if self.current_stmt is None:
            return self._pause("start")
        k = self.event_index
        tr = self._trace_event(k)
        i = self._instance_index(tr)
        here_depth = tr[i][3]
        for j in range(i - 1, -1, -1):
            if depth_ok(tr[j][3], here_depth):
                uid, c, b, _ = tr[j]
                return self.travel_to_instance(k, uid, (c, b))
        if cross_events:
            return self._travel_to_last_before(k)
        return self._pause("no-caller")

    def _instance_index(self, tr: list) -> int:
        uid = self.current_stmt.uid
        frame = self.rs.interp.stack[-1]
        key = (uid, frame.c, frame.b)
        for i, (u, c, b, _) in enumerate(tr):
            if (u, c, b) == key:
                return i
        raise TravelError(
            f"current position {key} not found in its own event trace; "
            "the trace may be corrupt")

    def _travel_to_last_before(self, k: int) -> PauseInfo:
        """Land on the last statement of the nearest earlier non-empty
        event; no-op at the very start of the recording."""
        for ev in range(k - 1, -1, -1):
            if ev < len(self.trace.audit.event_statements) \
                    and self.trace.audit.event_statements[ev] == 0:
                continue
            tr = self._trace_event(ev)
            if tr:
                uid, c, b, _ = tr[-1]
                return self.travel_to_instance(ev, uid, (c, b))
        return self._pause("start")

    def _resolve_step_back(self):
        """(uid, (c, b)) of the within-event trace predecessor, or None when
        it lies before the current root frame began."""
        interp = self.rs.interp
        frame = interp.stack[-1]
        info = self.program.stmts[self.current_stmt.uid]
        cfg: Cfg = frame.fn.cfg
        t = frame.time()
        if info.index > 0:
            prev = cfg.blocks[info.block_id].stmts[info.index - 1]
            return _post_check(frame, prev.uid, t)
        e = frame.bts
        if e is None or e[0] == "call":
            # No edge recorded since frame entry: execution fell through
            # plain Goto chains from the function's entry block.
            if info.block_id != cfg.entry:
                prev_uid = _chain_predecessor(cfg, cfg.entry, info.block_id)
                if prev_uid is None:
                    return None
                return _post_check(frame, prev_uid, t)
            if e is None:
                return None  # first statement of a root frame
            caller = interp.stack[-2]
            return _post_check(caller, e[1], caller.time())
        if e[0] == "return":
            _, fuid, fc, fb, cont = e
            if cont is None:
                return None  # inconsistent record; trace pass decides
            if cont == info.block_id:
                return (fuid, (fc, fb))
            prev_uid = _chain_predecessor(cfg, cont, info.block_id)
            if prev_uid is None:
                return None
            return _post_check(frame, prev_uid, t)
        _, src_uid, target, is_back = e
        if target == info.block_id:
            tt = (t[0], t[1] - 1) if is_back else t
            return _post_check(frame, src_uid, tt)
        prev_uid = _chain_predecessor(cfg, target, info.block_id)
        if prev_uid is None:
            return None
        return _post_check(frame, prev_uid, t)

    # ---- breakpoints ----

    def set_breakpoint(self, script: str, line: int, time=None) -> Breakpoint:
        uid = self.program.resolve_line(script, line)
        if uid is None:
            raise TravelError(f"no statement at {script}:{line}")
        bp = Breakpoint(self._next_bp_id, script, line, uid,
                        tuple(time) if time is not None else None)
        self._next_bp_id += 1
        self.breakpoints[bp.id] = bp
        return bp

    def clear_breakpoint(self, bp_id: int) -> bool:
        return self.breakpoints.pop(bp_id, None) is not None

    def list_breakpoints(self) -> list:
        return [
            {"id": bp.id, "script": bp.script, "line": bp.line,
             "time": list(bp.time) if bp.time else None}
            for bp in self.breakpoints.values()
        ]

    # ---- inspection ----

    def inspect_locals(self) -> list:
        if self.current_stmt is None:
            return []
        scopes = []
        env: Env | None = self.rs.interp.stack[-1].env
        genv = self.rs.interp.globals
        while env is not None:
            scopes.append({
                "kind": "global" if env is genv else "local",
                "vars": {name: render(value) for name, value in env.vars.items()},
            })
            env = env.parent
        return scopes

    def inspect_stack(self) -> list:
        frames = []
        for frame in reversed(self.rs.interp.stack):
            loc = self.program.loc_of(frame.cur_uid) if frame.cur_uid is not None else None
            frames.append({
                "fn": frame.fn.name,
                "script": loc.script if loc else None,
                "line": loc.line if loc else None,
                "col": loc.col if loc else None,
                "time": [frame.c, frame.b],
            })
        return frames

    def inspect_dom(self) -> list:
        world = self.rs.world
        return [
            {"id": doc.doc_id, "complete": doc.complete, "consumed": doc.consumed,
             "root": doc.root_id}
            for doc in world.documents.values()
        ]

    def inspect_node(self, node_id: int, offset: int = 0, limit: int = 256) -> dict:
        world = self.rs.world
        node = world.nodes.get(node_id)
        if node is None:
            raise TravelError(f"no node {node_id}")
        full = node_dump(node)
        children = node.children[offset : offset + limit]
        return {
            "id": node.id, "tag": node.tag, "attrs": full["attrs"],
            "text": node.text, "listeners": full["listeners"],
            "resource": full.get("resource"), "animation": full.get("animation"),
            "childCount": len(node.children), "childOffset": offset,
            "children": [{"id": c.id, "tag": c.tag} for c in children],
        }

    def inspect_heap(self) -> dict:
        genv = self.rs.interp.globals
        return {"globals": {name: render(value) for name, value in genv.vars.items()}}

    def inspect_heap_path(self, path: str, offset: int = 0, limit: int = 256) -> dict:
        """Structured view of the value at a dotted path rooted at the global
        scope, e.g. "globals.config.items[2]". Container children are paged."""
        steps = _parse_heap_path(path)
        genv = self.rs.interp.globals
        if steps[0] != ("name", "globals"):
            raise TravelError(f"heap path must start with 'globals': {path!r}")
        value: object = genv
        for kind, key in steps[1:]:
            value = _heap_step(value, kind, key, path)
        return _value_view(value, path, offset, limit)

    def inspect_world(self, section: str):
        dump = world_dump(self.rs.world)
        if section == "timers":
            return dump["timers"]
        if section == "requests":
            return dump["requests"]
        if section == "storage":
            return dump["storage"]
        if section == "console":
            return dump["console"]
        if section == "animations":
            out = []
            for nid in sorted(self.rs.world.nodes):
                anim = self.rs.world.nodes[nid].animation
                if anim is not None:
                    out.append({"node": nid, "period": anim.period_ms,
                                "frames": anim.frame_count})
            return out
        raise TravelError(f"no inspectable section {section!r}")

    def timeline(self) -> dict:
        events = [
            {"index": e.event_index, "at": e.at, "descriptor": e.descriptor}
            for e in self.trace.entries
            if isinstance(e, EventEntry)
        ]
        return {
            "events": self.total_events,
            "interactions": int(self.trace.meta.get("interactions", 0)),
            "checkpoints": [
                {"event": cp.event_index, "at": cp.at} for cp in self.trace.checkpoints
            ],
            "cachedCheckpoints": sorted(self._cache),
            "timeline": events,
        }


def _post_check(frame, uid: int, time: tuple):
    """If a call completed during the candidate statement instance, the true
    predecessor is the final statement of that completed call subtree."""
    lr = frame.last_return
    if lr is not None and lr[0] == uid and (lr[1], lr[2]) == time:
        return (lr[3], (lr[4], lr[5]))
    return (uid, time)


def _chain_predecessor(cfg: Cfg, start_block: int, target_block: int):
    """Follow the unique fall-through chain from start_block until it enters
    target_block; return the uid of the last statement executed before the
    target, or None if no such chain exists."""
    seen = {start_block}
    current = start_block
    while True:
        term = cfg.blocks[current].term
        if not isinstance(term, Goto):
            return None
        if term.target == target_block:
            stmts = cfg.blocks[current].stmts
            return stmts[-1].uid if stmts else None
        current = term.target
        if current in seen:
            return None
        seen.add(current)


# ---- heap path access ----


def _parse_heap_path(path: str) -> list:
    """"a.b[2].c" -> [("name","a"), ("name","b"), ("index",2), ("name","c")]."""
    steps = []
    i, n = 0, len(path)
    expect_name = True
    while i < n:
        ch = path[i]
        if expect_name:
            j = i
            while j < n and (path[j].isalnum() or path[j] == "_"):
                j += 1
            if j == i:
                raise TravelError(f"invalid heap path {path!r}: name expected at {i}")
            steps.append(("name", path[i:j]))
            i = j
            expect_name = False
        elif ch == ".":
            i += 1
            expect_name = True
        elif ch == "[":
            j = path.find("]", i)
            digits = path[i + 1 : j] if j != -1 else ""
            if not digits.isdigit():
                raise TravelError(f"invalid heap path {path!r}: index expected at {i}")
            steps.append(("index", int(digits)))
            i = j + 1
        else:
            raise TravelError(f"invalid heap path {path!r}: unexpected {ch!r} at {i}")
    if expect_name or not steps:
        raise TravelError(f"invalid heap path {path!r}")
    return steps


def _heap_step(value, kind: str, key, path: str):
    if kind == "name":
        if isinstance(value, Env):
            if key in value.vars:
                return value.vars[key]
            raise TravelError(f"heap path {path!r}: no global named {key!r}")
        if isinstance(value, GuestObject):
            if key in value.props:
                return value.props[key]
            raise TravelError(f"heap path {path!r}: no property {key!r}")
        raise TravelError(f"heap path {path!r}: {render(value)} has no properties")
    if isinstance(value, GuestArray):
        if 0 <= key < len(value.items):
            return value.items[key]
        raise TravelError(f"heap path {path!r}: index {key} out of range")
    raise TravelError(f"heap path {path!r}: {render(value)} is not an array")


def _kind_of(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, GuestArray):
        return "array"
    if isinstance(value, GuestObject):
        return "object"
    if isinstance(value, Closure):
        return "closure"
    if isinstance(value, HostRef):
        return value.kind
    return type(value).__name__


def _value_view(value, path: str, offset: int, limit: int) -> dict:
    view = {"path": path, "kind": _kind_of(value), "render": render(value)}
    children = None
    if isinstance(value, GuestArray):
        children = [(str(i), v) for i, v in enumerate(value.items)]
    elif isinstance(value, GuestObject):
        children = list(value.props.items())
    if children is not None:
        view["count"] = len(children)
        view["childOffset"] = offset
        view["children"] = [
            {"key": k, "kind": _kind_of(v), "preview": render(v)}
            for k, v in children[offset : offset + limit]
        ]
    return view

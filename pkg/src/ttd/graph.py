"""Checkpoint codec: one entangled image of guest heap plus host state.

Guest values (objects, arrays, closures, environments) form a general graph
with cycles and observable sharing; host structures (timers, listeners) hold
guest closures. A checkpoint therefore encodes everything in a single pass
with one shared identity table, so that sharing and cycles survive the round
trip exactly.

Static inputs (the program, the scenario with its markup and canned
responses) are not part of the image; restore receives the scenario and
reattaches it. Record-only scheduling tables are likewise omitted: a
restored world only ever replays.

The byte format is tag-prefixed and self-delimiting: LEB128 varints, big
endian f64 for numbers, UTF-8 strings. Mutable guest values are registered
in the identity table before their bodies are encoded, so self-references
become back-references.
"""

from __future__ import annotations

import struct

from ttd.errors import TraceIntegrityError
from ttd.host.scenario import Scenario
from ttd.host.world import (
    AnimationState,
    DocumentState,
    DomNode,
    HostWorld,
    NetRequest,
    PendingEvent,
    ResourceState,
    TimerRecord,
)
from ttd.host.prng import Xorshift64Star
from ttd.lang.values import Closure, Env, GuestArray, GuestObject, HostRef

_VERSION = 1

T_NULL = 0
T_TRUE = 1
T_FALSE = 2
T_NUM = 3
T_STR = 4
T_REF = 5
T_OBJ = 6
T_ARR = 7
T_CLOSURE = 8
T_ENV = 9
T_NODE_REF = 10
T_REQ_REF = 11


class _Writer:
    def __init__(self):
        self.buf = bytearray()
        self.table: dict[int, int] = {}

    def varint(self, n: int) -> None:
        assert n >= 0
        while True:
            b = n & 0x7F
            n >>= 7
            if n:
                self.buf.append(b | 0x80)
            else:
                self.buf.append(b)
                return

    def f64(self, v: float) -> None:
        self.buf += struct.pack(">d", v)

    def string(self, s: str) -> None:
        raw = s.encode("utf-8")
        self.varint(len(raw))
        self.buf += raw

    def opt_string(self, s: str | None) -> None:
        if s is None:
            self.buf.append(0)
        else:
            self.buf.append(1)
            self.string(s)

    def boolean(self, v: bool) -> None:
        self.buf.append(1 if v else 0)

    def opt_varint(self, n: int | None) -> None:
        if n is None:
            self.buf.append(0)
        else:
            self.buf.append(1)
            self.varint(n)

    def opt_f64(self, v: float | None) -> None:
        if v is None:
            self.buf.append(0)
        else:
            self.buf.append(1)
            self.f64(v)

    # -- guest value graph --

    def value(self, v) -> None:
        if v is None:
            self.buf.append(T_NULL)
        elif v is True:
            self.buf.append(T_TRUE)
        elif v is False:
            self.buf.append(T_FALSE)
        elif isinstance(v, float):
            self.buf.append(T_NUM)
            self.f64(v)
        elif isinstance(v, str):
            self.buf.append(T_STR)
            self.string(v)
        elif isinstance(v, HostRef):
            self.buf.append(T_NODE_REF if v.kind == "node" else T_REQ_REF)
            self.varint(v.id)
        elif isinstance(v, GuestObject):
            if not self._ref(v):
                self.buf.append(T_OBJ)
                self._register(v)
                self.varint(len(v.props))
                for key, val in v.props.items():
                    self.string(key)
                    self.value(val)
        elif isinstance(v, GuestArray):
            if not self._ref(v):
                self.buf.append(T_ARR)
                self._register(v)
                self.varint(len(v.items))
                for item in v.items:
                    self.value(item)
        elif isinstance(v, Closure):
            if not self._ref(v):
                self.buf.append(T_CLOSURE)
                self._register(v)
                self.varint(v.fn_id)
                self.value(v.env)
        elif isinstance(v, Env):
            if not self._ref(v):
                self.buf.append(T_ENV)
                self._register(v)
                self.value(v.parent)
                self.varint(len(v.vars))
                for key, val in v.vars.items():
                    self.string(key)
                    self.value(val)
        else:
            raise TraceIntegrityError(f"cannot checkpoint value of type {type(v).__name__}")

    def _ref(self, v) -> bool:
        idx = self.table.get(id(v))
        if idx is None:
            return False
        self.buf.append(T_REF)
        self.varint(idx)
        return True

    def _register(self, v) -> None:
        self.table[id(v)] = len(self.table)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.table: list = []

    def fail(self, msg: str):
        raise TraceIntegrityError(f"checkpoint image corrupt at byte {self.pos}: {msg}")

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            self.fail("truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def varint(self) -> int:
        shift = 0
        out = 0
        while True:
            b = self.take(1)[0]
            out |= (b & 0x7F) << shift
            if not b & 0x80:
                return out
            shift += 7
            if shift > 70:
                self.fail("varint too long")

    def f64(self) -> float:
        return struct.unpack(">d", self.take(8))[0]

    def string(self) -> str:
        n = self.varint()
        return self.take(n).decode("utf-8")

    def opt_string(self) -> str | None:
        return self.string() if self.take(1)[0] else None

    def boolean(self) -> bool:
        return self.take(1)[0] != 0

    def opt_varint(self) -> int | None:
        return self.varint() if self.take(1)[0] else None

    def opt_f64(self) -> float | None:
        return self.f64() if self.take(1)[0] else None

    def value(self):
        tag = self.take(1)[0]
        if tag == T_NULL:
            return None
        if tag == T_TRUE:
            return True
        if tag == T_FALSE:
            return False
        if tag == T_NUM:
            return self.f64()
        if tag == T_STR:
            return self.string()
        if tag == T_REF:
            idx = self.varint()
            if idx >= len(self.table):
                self.fail(f"back-reference {idx} out of range")
            return self.table[idx]
        if tag == T_NODE_REF:
            return HostRef("node", self.varint())
        if tag == T_REQ_REF:
            return HostRef("request", self.varint())
        if tag == T_OBJ:
            obj = GuestObject({})
            self.table.append(obj)
            for _ in range(self.varint()):
                key = self.string()
                obj.props[key] = self.value()
            return obj
        if tag == T_ARR:
            arr = GuestArray([])
            self.table.append(arr)
            for _ in range(self.varint()):
                arr.items.append(self.value())
            return arr
        if tag == T_CLOSURE:
            closure = Closure(0, None)
            self.table.append(closure)
            closure.fn_id = self.varint()
            closure.env = self.value()
            return closure
        if tag == T_ENV:
            env = Env(None)
            self.table.append(env)
            env.parent = self.value()
            for _ in range(self.varint()):
                key = self.string()
                env.vars[key] = self.value()
            return env
        self.fail(f"unknown value tag {tag}")


def snapshot_image(world: HostWorld, globals_env: Env) -> bytes:
    w = _Writer()
    w.varint(_VERSION)
    w.f64(world.clock)
    w.varint(world.prng.state)
    w.varint(world.interactions)
    w.varint(world.next_node_id)
    w.varint(world.next_timer_id)
    w.varint(world.next_request_id)
    w.varint(world.next_seq)
    w.varint(world._input_cursor)

    w.varint(len(world.documents))
    for doc in world.documents.values():
        w.string(doc.doc_id)
        w.varint(doc.root_id)
        w.varint(doc.consumed)
        w.varint(doc.attached_roots)
        w.boolean(doc.complete)

    w.varint(len(world.nodes))
    for nid in sorted(world.nodes):
        node = world.nodes[nid]
        w.varint(nid)
        w.string(node.tag)
        w.boolean(node.is_root)
        w.opt_string(node.text)
        w.varint(len(node.attrs))
        for key in sorted(node.attrs):
            w.string(key)
            w.string(node.attrs[key])
        w.varint(len(node.children))
        for child in node.children:
            w.varint(child.id)
        _write_listeners(w, node.listeners)
        if node.resource is None:
            w.boolean(False)
        else:
            w.boolean(True)
            w.string(node.resource.url)
            w.string(node.resource.state)
            w.varint(node.resource.width)
            w.varint(node.resource.height)
        if node.animation is None:
            w.boolean(False)
        else:
            w.boolean(True)
            w.f64(node.animation.period_ms)
            w.f64(node.animation.start_ms)
            w.varint(node.animation.frame_count)

    w.varint(len(world.timers))
    for tid in sorted(world.timers):
        rec = world.timers[tid]
        w.varint(tid)
        w.f64(rec.due)
        w.opt_f64(rec.period)
        w.value(rec.closure)

    w.varint(len(world.requests))
    for rid in sorted(world.requests):
        req = world.requests[rid]
        w.varint(rid)
        w.string(req.method)
        w.string(req.url)
        w.string(req.state)
        w.varint(req.status)
        w.varint(req.received)
        w.boolean(req.sent)
        _write_listeners(w, req.listeners)

    w.varint(len(world.queue))
    for ev in world.queue:
        w.varint(ev.seq)
        w.f64(ev.at)
        w.string(ev.kind)
        w.opt_string(ev.script)
        w.opt_varint(ev.timer)
        w.opt_varint(ev.input_index)
        w.opt_varint(ev.request)
        w.opt_string(ev.net_state)
        w.opt_string(ev.document)
        w.opt_varint(ev.node)

    w.varint(len(world.storage))
    for key in sorted(world.storage):
        w.string(key)
        w.string(world.storage[key])

    w.varint(len(world.console))
    for line in world.console:
        w.string(line)

    w.value(globals_env)
    return bytes(w.buf)


def _write_listeners(w: _Writer, listeners: list) -> None:
    w.varint(len(listeners))
    for etype, closure in listeners:
        w.string(etype)
        w.value(closure)


def restore_image(data: bytes, scenario: Scenario) -> tuple[HostWorld, Env]:
    r = _Reader(data)
    if r.varint() != _VERSION:
        r.fail("unsupported image version")

    world = HostWorld.__new__(HostWorld)
    world.scenario = scenario
    world.recording = False
    world.clock = r.f64()
    world.prng = Xorshift64Star(r.varint())
    world.interactions = r.varint()
    world.next_node_id = r.varint()
    world.next_timer_id = r.varint()
    world.next_request_id = r.varint()
    world.next_seq = r.varint()
    world._input_cursor = r.varint()
    world.interposer = None
    world.on_update = None
    world.toplevel_resolver = None
    world.sched = None
    world._xhr_plans = {}
    world._resource_due = {}
    world._doc_feed_at = {}

    world.documents = {}
    for _ in range(r.varint()):
        doc_id = r.string()
        world.documents[doc_id] = DocumentState(
            doc_id, r.varint(), r.varint(), r.varint(), r.boolean())

    world.nodes = {}
    child_ids: dict[int, list[int]] = {}
    for _ in range(r.varint()):
        nid = r.varint()
        tag = r.string()
        is_root = r.boolean()
        text = r.opt_string()
        attrs = {}
        for _ in range(r.varint()):
            key = r.string()
            attrs[key] = r.string()
        node = DomNode(nid, tag, attrs, text, is_root=is_root)
        child_ids[nid] = [r.varint() for _ in range(r.varint())]
        node.listeners = _read_listeners(r)
        if r.boolean():
            node.resource = ResourceState(r.string(), r.string(), r.varint(), r.varint())
        if r.boolean():
            node.animation = AnimationState(r.f64(), r.f64(), r.varint())
        world.nodes[nid] = node
    for nid, kids in child_ids.items():
        parent = world.nodes[nid]
        for kid in kids:
            child = world.nodes.get(kid)
            if child is None:
                r.fail(f"node {nid} references missing child {kid}")
            child.parent = parent
            parent.children.append(child)

    world.timers = {}
    for _ in range(r.varint()):
        tid = r.varint()
        world.timers[tid] = TimerRecord(tid, None, 0.0, None)
        world.timers[tid].due = r.f64()
        world.timers[tid].period = r.opt_f64()
        world.timers[tid].closure = r.value()

    world.requests = {}
    for _ in range(r.varint()):
        rid = r.varint()
        req = NetRequest(rid, r.string(), r.string())
        req.state = r.string()
        req.status = r.varint()
        req.received = r.varint()
        req.sent = r.boolean()
        req.listeners = _read_listeners(r)
        world.requests[rid] = req

    world.queue = []
    for _ in range(r.varint()):
        world.queue.append(PendingEvent(
            seq=r.varint(), at=r.f64(), kind=r.string(),
            script=r.opt_string(), timer=r.opt_varint(),
            input_index=r.opt_varint(), request=r.opt_varint(),
            net_state=r.opt_string(), document=r.opt_string(),
            node=r.opt_varint()))

    world.storage = {}
    for _ in range(r.varint()):
        key = r.string()
        world.storage[key] = r.string()

    world.console = [r.string() for _ in range(r.varint())]

    globals_env = r.value()
    if not isinstance(globals_env, Env):
        r.fail("image does not end with a global environment")
    if r.pos != len(data):
        r.fail(f"{len(data) - r.pos} trailing bytes")
    return world, globals_env


def _read_listeners(r: _Reader) -> list:
    out = []
    for _ in range(r.varint()):
        etype = r.string()
        closure = r.value()
        if not isinstance(closure, Closure):
            r.fail("listener is not a closure")
        out.append((etype, closure))
    return out

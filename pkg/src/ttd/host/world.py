"""The simulated host: DOM, timers, network requests, animations, parsers.

One HostWorld instance backs a recording or a replay. All state lives on the
virtual clock. The guest talks to the world only through ``host_call``; the
run driver (recorder or replayer) talks to it through a small surface:

* ``advance_background()`` moves the clock to the next due moment and runs
  every background process due there, in an order drawn from the scheduler
  stream (recording only; replay applies logged updates instead);
* ``apply_update()`` applies one logged host update (shared by both sides:
  the recorder funnels its own background effects through it so record and
  replay mutate state through identical code);
* ``prepare_dispatch()`` resolves an event descriptor into guest callbacks
  and performs the timer table transition for timer events.

Timer table transitions happen at dispatch, not when the due moment passes,
so world state at any between-events point is identical on both sides.

Record-only scheduling knowledge (network delivery plans, parser feed times,
resource completion times) lives in side tables that are not part of the
checkpointed image; replay never reads them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ttd.errors import GuestRuntimeError
from ttd.host.markup import NodeSpec
from ttd.host.prng import Xorshift64Star
from ttd.host.scenario import Scenario
from ttd.lang.values import Closure, GuestObject, HostRef, render
from ttd.logentries import (
    AnimationAdvance,
    ClockAdvance,
    HostUpdate,
    ParseAdvance,
    ResourceLoaded,
    TimerRearm,
    XhrTransition,
)

XHR_STATES = ("UNSENT", "OPENED", "HEADERS_RECEIVED", "LOADING", "DONE")

DEFAULT_ANIMATION_PERIOD = 16.0
PARSER_FEED_BASE_MS = 6.0
PARSER_FEED_SPREAD_MS = 10.0
PARSER_BYTES_SPREAD = 24
UNKNOWN_URL_LATENCY_MS = 10.0


@dataclass
class ResourceState:
    url: str
    state: str  # "loading" | "loaded"
    width: int = 0
    height: int = 0


@dataclass
class AnimationState:
    period_ms: float
    start_ms: float
    frame_count: int = 0


class DomNode:
    __slots__ = ("id", "tag", "attrs", "text", "children", "parent",
                 "listeners", "resource", "animation", "is_root")

    def __init__(self, node_id: int, tag: str, attrs: dict[str, str],
                 text: str | None, is_root: bool = False):
        self.id = node_id
        self.tag = tag
        self.attrs = attrs
        self.text = text
        self.children: list[DomNode] = []
        self.parent: DomNode | None = None
        self.listeners: list[tuple[str, Closure]] = []
        self.resource: ResourceState | None = None
        self.animation: AnimationState | None = None
        self.is_root = is_root

    def attached(self) -> bool:
        node = self
        while node.parent is not None:
            node = node.parent
        return node.is_root


@dataclass
class TimerRecord:
    id: int
    closure: Closure
    due: float
    period: float | None  # None: one-shot


@dataclass
class NetRequest:
    id: int
    method: str
    url: str
    state: str = "UNSENT"
    status: int = 0
    received: int = 0
    sent: bool = False
    listeners: list = field(default_factory=list)  # (type, Closure)


@dataclass
class DocumentState:
    doc_id: str
    root_id: int
    consumed: int = 0
    attached_roots: int = 0
    complete: bool = False


@dataclass
class PendingEvent:
    """Queued dispatch, pure data so checkpoints never capture closures."""

    seq: int
    at: float
    kind: str  # script | timer | input | net | parse | load
    script: str | None = None
    timer: int | None = None
    input_index: int | None = None
    request: int | None = None
    net_state: str | None = None
    document: str | None = None
    node: int | None = None

    def descriptor(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == "script":
            d["script"] = self.script
        elif self.kind == "timer":
            d["timer"] = self.timer
        elif self.kind == "input":
            d["index"] = self.input_index
        elif self.kind == "net":
            d["request"] = self.request
            d["state"] = self.net_state
        elif self.kind == "parse":
            d["document"] = self.document
        elif self.kind == "load":
            d["node"] = self.node
        return d


class HostWorld:
    def __init__(self, scenario: Scenario, recording: bool):
        self.scenario = scenario
        self.recording = recording
        self.clock = 0.0
        self.prng = Xorshift64Star(scenario.prng_seed)
        self.interactions = 0
        self.next_node_id = 1
        self.next_timer_id = 1
        self.next_request_id = 1
        self.next_seq = 0
        self.nodes: dict[int, DomNode] = {}
        self.documents: dict[str, DocumentState] = {}
        self.timers: dict[int, TimerRecord] = {}
        self.requests: dict[int, NetRequest] = {}
        self.queue: list[PendingEvent] = []
        self.storage: dict[str, str] = {}
        self.console: list[str] = []
        # Driver-provided, never checkpointed.
        self.interposer = None
        self.on_update = None
        self.toplevel_resolver = None
        self.sched: Xorshift64Star | None = None
        # Record-only scheduling tables, never checkpointed.
        self._xhr_plans: dict[int, list] = {}
        self._resource_due: dict[int, float] = {}
        self._doc_feed_at: dict[str, float] = {}
        self._input_cursor = 0

        for spec in scenario.documents:
            nid = self._alloc_node_id()
            root = DomNode(nid, "#document", {"id": spec.id}, None, is_root=True)
            self.nodes[nid] = root
            complete = len(spec.markup.strip()) == 0
            consumed = len(spec.markup) if complete else 0
            self.documents[spec.id] = DocumentState(
                spec.id, nid, consumed=consumed, complete=complete)
            if recording and not complete:
                self._doc_feed_at[spec.id] = 0.0
        if recording:
            self.sched = Xorshift64Star(scenario.scheduler_seed)

    # ---- id allocation ----

    def _alloc_node_id(self) -> int:
        nid = self.next_node_id
        self.next_node_id += 1
        return nid

    # ---- guest-facing calls ----

    def host_call(self, kind: str, args: list):
        self.interactions += 1
        if self.interposer is not None:
            self.interposer.pre_call(self, kind, args)
        method = _OPS.get(kind)
        if method is None:
            raise GuestRuntimeError("unknown-host-call", f"no host call named {kind!r}")
        result = method(self, args)
        if self.interposer is not None:
            result = self.interposer.post_call(self, kind, args, result)
        return result

    def _op_random(self, args):
        _arity("random", args, 0)
        return self.prng.next_float()

    def _op_date_now(self, args):
        _arity("date_now", args, 0)
        return float(self.clock)

    def _op_set_timeout(self, args):
        _arity("set_timeout", args, 2)
        return self._make_timer(args, period=None)

    def _op_set_interval(self, args):
        _arity("set_interval", args, 2)
        delay = _number("set_interval", args[1])
        return self._make_timer(args, period=max(delay, 1.0))

    def _make_timer(self, args, period: float | None) -> float:
        closure, delay = args[0], _number("timer delay", args[1])
        if not isinstance(closure, Closure):
            raise GuestRuntimeError("type-error", "timer callback must be a function")
        tid = self.next_timer_id
        self.next_timer_id += 1
        self.timers[tid] = TimerRecord(tid, closure, self.clock + max(delay, 0.0), period)
        return float(tid)

    def _op_clear_timer(self, args):
        _arity("clear_timer", args, 1)
        tid = _ident_int("timer id", args[0])
        self.timers.pop(tid, None)
        return None

    def _op_create_element(self, args):
        _arity("create_element", args, 1)
        tag = _string("tag name", args[0])
        nid = self._alloc_node_id()
        self.nodes[nid] = DomNode(nid, tag, {}, None)
        return HostRef("node", nid)

    def _op_append_child(self, args):
        _arity("append_child", args, 2)
        parent = self._node(args[0])
        child = self._node(args[1])
        if child.is_root:
            raise GuestRuntimeError("dom-error", "cannot reparent a document root")
        probe = parent
        while probe is not None:
            if probe is child:
                raise GuestRuntimeError("dom-error", "append_child would create a cycle")
            probe = probe.parent
        if child.parent is not None:
            child.parent.children.remove(child)
        parent.children.append(child)
        child.parent = parent
        return None

    def _op_remove_child(self, args):
        _arity("remove_child", args, 2)
        parent = self._node(args[0])
        child = self._node(args[1])
        if child.parent is not parent:
            raise GuestRuntimeError("dom-error", "node is not a child of that parent")
        parent.children.remove(child)
        child.parent = None
        return None

    def _op_set_attribute(self, args):
        _arity("set_attribute", args, 3)
        node = self._node(args[0])
        name = _string("attribute name", args[1])
        value = args[2]
        node.attrs[name] = value if isinstance(value, str) else render(value)
        return None

    def _op_get_attribute(self, args):
        _arity("get_attribute", args, 2)
        node = self._node(args[0])
        name = _string("attribute name", args[1])
        return node.attrs.get(name)

    def _op_query_node(self, args):
        _arity("query_node", args, 1)
        node = self._query(_string("selector", args[0]))
        return None if node is None else HostRef("node", node.id)

    def _op_add_event_listener(self, args):
        _arity("add_event_listener", args, 3)
        target = self._event_target(args[0])
        etype = _string("event type", args[1])
        closure = args[2]
        if not isinstance(closure, Closure):
            raise GuestRuntimeError("type-error", "listener must be a function")
        target.listeners.append((etype, closure))
        return None

    def _op_remove_event_listener(self, args):
        _arity("remove_event_listener", args, 3)
        target = self._event_target(args[0])
        etype = _string("event type", args[1])
        closure = args[2]
        for i, (t, c) in enumerate(target.listeners):
            if t == etype and c is closure:
                del target.listeners[i]
                break
        return None

    def _op_xhr_open(self, args):
        _arity("xhr_open", args, 2)
        method = _string("method", args[0])
        url = _string("url", args[1])
        rid = self.next_request_id
        self.next_request_id += 1
        self.requests[rid] = NetRequest(rid, method, url, state="OPENED")
        return HostRef("request", rid)

    def _op_xhr_send(self, args):
        _arity("xhr_send", args, 1)
        req = self._request(args[0])
        if req.state != "OPENED" or req.sent:
            raise GuestRuntimeError("xhr-state", f"cannot send request in state {req.state}")
        req.sent = True
        if self.recording:
            self._xhr_plans[req.id] = self._delivery_plan(req)
        return None

    def _op_xhr_status(self, args):
        _arity("xhr_status", args, 1)
        return float(self._request(args[0]).status)

    def _op_xhr_response(self, args):
        _arity("xhr_response", args, 1)
        req = self._request(args[0])
        spec = self.scenario.responses.get(req.url)
        body = spec.body if spec is not None else ""
        return body[: req.received]

    def _op_storage_get(self, args):
        _arity("storage_get", args, 1)
        return self.storage.get(_string("storage key", args[0]))

    def _op_storage_set(self, args):
        _arity("storage_set", args, 2)
        key = _string("storage key", args[0])
        value = args[1]
        self.storage[key] = value if isinstance(value, str) else render(value)
        return None

    def _op_storage_remove(self, args):
        _arity("storage_remove", args, 1)
        self.storage.pop(_string("storage key", args[0]), None)
        return None

    def _op_console_log(self, args):
        _arity("console_log", args, 1)
        self.console.append(render(args[0]))
        return None

    # ---- ref resolution ----

    def _node(self, v) -> DomNode:
        if isinstance(v, HostRef) and v.kind == "node":
            node = self.nodes.get(v.id)
            if node is not None:
                return node
        raise GuestRuntimeError("type-error", f"{render(v)} is not a DOM node")

    def _request(self, v) -> NetRequest:
        if isinstance(v, HostRef) and v.kind == "request":
            req = self.requests.get(v.id)
            if req is not None:
                return req
        raise GuestRuntimeError("type-error", f"{render(v)} is not a network request")

    def _event_target(self, v):
        if isinstance(v, HostRef):
            if v.kind == "node":
                return self._node(v)
            if v.kind == "request":
                return self._request(v)
        raise GuestRuntimeError("type-error", f"{render(v)} cannot receive listeners")

    def _query(self, selector: str) -> DomNode | None:
        if not selector.startswith("#") or len(selector) < 2:
            raise GuestRuntimeError("selector", f"unsupported selector {selector!r}")
        wanted = selector[1:]
        for doc in self.documents.values():
            stack = [self.nodes[doc.root_id]]
            while stack:
                node = stack.pop(0)
                if node.attrs.get("id") == wanted:
                    return node
                stack[:0] = node.children
        return None

    # ---- queue ----

    def _enqueue(self, event: PendingEvent) -> None:
        self.queue.append(event)

    def _new_event(self, kind: str, **fields) -> PendingEvent:
        ev = PendingEvent(seq=self.next_seq, at=self.clock, kind=kind, **fields)
        self.next_seq += 1
        return ev

    def pop_event(self) -> PendingEvent:
        return self.queue.pop(0)

    def prepare_dispatch(self, descriptor: dict) -> list[tuple[Closure, list]]:
        """Resolve listeners for an event descriptor; transitions the timer
        table for timer events. Raises LookupError if the descriptor names
        host state that does not exist."""
        kind = descriptor["kind"]
        if kind == "script":
            if self.toplevel_resolver is None:
                raise LookupError("no script resolver installed")
            return [(self.toplevel_resolver(descriptor["script"]), [])]
        if kind == "timer":
            rec = self.timers.get(descriptor["timer"])
            if rec is None:
                return []  # cleared between due moment and dispatch
            if rec.period is None:
                del self.timers[rec.id]  # one-shot is consumed by its dispatch
            return [(rec.closure, [])]
        if kind == "input":
            index = descriptor["index"]
            if not 0 <= index < len(self.scenario.inputs):
                raise LookupError(f"no scripted input {index}")
            spec = self.scenario.inputs[index]
            node = self._query(spec.target)
            props: dict = {"type": spec.type}
            props["target"] = HostRef("node", node.id) if node is not None else None
            for key, value in spec.payload:
                props[key] = value
            obj = GuestObject(props)
            listeners = [] if node is None else self._listeners(node, spec.type)
            return [(c, [obj]) for c in listeners]
        if kind == "net":
            rid = descriptor["request"]
            req = self.requests.get(rid)
            if req is None:
                raise LookupError(f"no network request {rid}")
            obj = GuestObject({
                "type": "readystatechange",
                "target": HostRef("request", rid),
                "state": descriptor["state"],
            })
            return [(c, [obj]) for c in self._listeners(req, "readystatechange")]
        if kind == "parse":
            doc = self.documents.get(descriptor["document"])
            if doc is None:
                raise LookupError(f"no document {descriptor['document']!r}")
            root = self.nodes[doc.root_id]
            obj = GuestObject({"type": "parse", "target": HostRef("node", root.id),
                               "document": doc.doc_id})
            return [(c, [obj]) for c in self._listeners(root, "parse")]
        if kind == "load":
            nid = descriptor["node"]
            node = self.nodes.get(nid)
            if node is None:
                raise LookupError(f"no node {nid}")
            obj = GuestObject({"type": "load", "target": HostRef("node", nid)})
            return [(c, [obj]) for c in self._listeners(node, "load")]
        raise LookupError(f"unknown event kind {kind!r}")

    @staticmethod
    def _listeners(target, etype: str) -> list[Closure]:
        return [c for (t, c) in target.listeners if t == etype]

    # ---- background advancement (recording only) ----

    def next_background_due(self) -> float | None:
        cands: list[float] = []
        cands.extend(rec.due for rec in self.timers.values())
        cands.extend(plan[0][0] for plan in self._xhr_plans.values() if plan)
        cands.extend(self._doc_feed_at.values())
        cands.extend(self._resource_due.values())
        if self._input_cursor < len(self.scenario.inputs):
            cands.append(self.scenario.inputs[self._input_cursor].at)
        if not cands:
            return None
        t = min(cands)
        if t > self.scenario.duration_ms:
            return None
        return max(t, self.clock)

    def advance_background(self) -> bool:
        """Advance to the next due moment, run everything due there. Returns
        False when nothing is left before the scenario duration cap."""
        assert self.recording and self.sched is not None
        t = self.next_background_due()
        if t is None:
            return False
        self.clock = max(self.clock, t)
        self._animations_catch_up()
        units: list[tuple[str, object]] = []
        for tid, rec in self.timers.items():
            if rec.due <= t:
                units.append(("timer", tid))
        for rid in sorted(self._xhr_plans):
            plan = self._xhr_plans[rid]
            if plan and plan[0][0] <= t:
                units.append(("xhr", rid))
        for doc_id, feed_at in list(self._doc_feed_at.items()):
            if feed_at <= t:
                units.append(("parse", doc_id))
        for nid in sorted(self._resource_due):
            if self._resource_due[nid] <= t:
                units.append(("resource", nid))
        while (self._input_cursor < len(self.scenario.inputs)
               and self.scenario.inputs[self._input_cursor].at <= t):
            units.append(("input", self._input_cursor))
            self._input_cursor += 1
        self._shuffle(units)
        for kind, key in units:
            if kind == "timer":
                rec = self.timers[key]
                if rec.period is not None:
                    self._apply_and_emit(TimerRearm(key, rec.due + rec.period))
                self._enqueue(self._new_event("timer", timer=key))
            elif kind == "xhr":
                self._run_xhr_crossing(key)
            elif kind == "parse":
                self._run_parser_feed(key)
            elif kind == "resource":
                self._run_resource_completion(key)
            else:
                self._enqueue(self._new_event("input", input_index=key))
        return True

    def _shuffle(self, units: list) -> None:
        for i in range(len(units) - 1, 0, -1):
            j = int(self.sched.next_float() * (i + 1))
            units[i], units[j] = units[j], units[i]

    def concurrent_tick(self) -> None:
        """Mid-call background progress: a little clock drift plus any
        animation frames that drift crosses. Recording only; the drift is
        emitted as an update so replay lands on the identical clock."""
        assert self.recording and self.sched is not None
        drift = self.sched.next_float() * 2.0
        if drift > 0.0:
            self._apply_and_emit(ClockAdvance(self.clock + drift))
        self._animations_catch_up()

    def _animations_catch_up(self) -> None:
        for nid in sorted(self.nodes):
            anim = self.nodes[nid].animation
            if anim is None or self.clock < anim.start_ms:
                continue
            frames = int((self.clock - anim.start_ms) // anim.period_ms)
            if frames > anim.frame_count:
                self._apply_and_emit(AnimationAdvance(nid, frames))

    def _delivery_plan(self, req: NetRequest) -> list:
        spec = self.scenario.responses.get(req.url)
        if spec is None:
            return [(self.clock + UNKNOWN_URL_LATENCY_MS, [("DONE", None, 0)])]
        plan = []
        t = self.clock
        last = len(spec.schedule) - 1
        for i, item in enumerate(spec.schedule):
            t += item.after_ms
            transitions: list[tuple[str, int | None, int]] = []
            if i == 0:
                transitions.append(("HEADERS_RECEIVED", spec.status, 0))
            if item.bytes > 0:
                transitions.append(("LOADING", None, item.bytes))
            if i == last:
                transitions.append(("DONE", None, 0))
            plan.append((t, transitions))
        return plan

    def _run_xhr_crossing(self, rid: int) -> None:
        plan = self._xhr_plans[rid]
        _, transitions = plan.pop(0)
        if not plan:
            del self._xhr_plans[rid]
        req = self.requests[rid]
        for state, status, delta in transitions:
            self._apply_and_emit(XhrTransition(rid, state, status, req.received + delta))
            self._enqueue(self._new_event("net", request=rid, net_state=state))

    def _run_parser_feed(self, doc_id: str) -> None:
        doc = self.documents[doc_id]
        spec = self._doc_spec(doc_id)
        nbytes = 1 + int(self.sched.next_float() * PARSER_BYTES_SPREAD)
        consumed = min(len(spec.markup), doc.consumed + nbytes)
        descs = []
        for root_spec in spec.roots[doc.attached_roots:]:
            if root_spec.close_offset <= consumed:
                descs.append(self._describe(root_spec))
            else:
                break
        completed = consumed >= len(spec.markup)
        update = ParseAdvance(doc_id, consumed, tuple(descs), completed)
        new_roots = self._apply_parse(update)
        for root in new_roots:
            self._schedule_resources(root)
        if self.on_update is not None:
            self.on_update(update)
        if completed:
            del self._doc_feed_at[doc_id]
            self._enqueue(self._new_event("parse", document=doc_id))
        else:
            self._doc_feed_at[doc_id] = (self.clock + PARSER_FEED_BASE_MS
                                         + self.sched.next_float() * PARSER_FEED_SPREAD_MS)

    def _doc_spec(self, doc_id: str):
        for spec in self.scenario.documents:
            if spec.id == doc_id:
                return spec
        raise LookupError(f"no document {doc_id!r}")

    def _describe(self, spec: NodeSpec) -> dict:
        # Children close before their parent, so they take ids first.
        children = [self._describe(c) for c in spec.children]
        return {"id": self._alloc_node_id(), "tag": spec.tag,
                "attrs": dict(spec.attrs), "text": spec.text, "children": children}

    def _schedule_resources(self, node: DomNode) -> None:
        if node.resource is not None:
            spec = self.scenario.responses.get(node.resource.url)
            if spec is not None:
                self._resource_due[node.id] = self.clock + max(spec.total_latency(), 1.0)
        for child in node.children:
            self._schedule_resources(child)

    def _run_resource_completion(self, nid: int) -> None:
        del self._resource_due[nid]
        node = self.nodes[nid]
        spec = self.scenario.responses.get(node.resource.url)
        self._apply_and_emit(ResourceLoaded(nid, spec.width or 0, spec.height or 0))
        self._enqueue(self._new_event("load", node=nid))

    # ---- update application (both sides) ----

    def _apply_and_emit(self, update: HostUpdate) -> None:
        self.apply_update(update)
        if self.on_update is not None:
            self.on_update(update)

    def apply_update(self, update: HostUpdate) -> None:
        if isinstance(update, XhrTransition):
            req = self.requests.get(update.request_id)
            if req is None:
                raise LookupError(f"no network request {update.request_id}")
            req.state = update.state
            if update.status is not None:
                req.status = update.status
            req.received = update.received_total
        elif isinstance(update, ResourceLoaded):
            node = self.nodes.get(update.node_id)
            if node is None or node.resource is None:
                raise LookupError(f"node {update.node_id} has no resource")
            node.resource.state = "loaded"
            node.resource.width = update.width
            node.resource.height = update.height
        elif isinstance(update, AnimationAdvance):
            node = self.nodes.get(update.node_id)
            if node is None or node.animation is None:
                raise LookupError(f"node {update.node_id} has no animation")
            node.animation.frame_count = update.frame_count
            node.attrs["frame"] = str(update.frame_count)
        elif isinstance(update, ParseAdvance):
            self._apply_parse(update)
        elif isinstance(update, TimerRearm):
            rec = self.timers.get(update.timer_id)
            if rec is None:
                raise LookupError(f"no timer {update.timer_id}")
            rec.due = update.due
        elif isinstance(update, ClockAdvance):
            self.clock = update.clock
        else:
            raise LookupError(f"unknown update {update!r}")

    def _apply_parse(self, update: ParseAdvance) -> list[DomNode]:
        doc = self.documents.get(update.document_id)
        if doc is None:
            raise LookupError(f"no document {update.document_id!r}")
        root = self.nodes[doc.root_id]
        new_roots = []
        for desc in update.attached:
            node = self._construct(desc)
            node.parent = root
            root.children.append(node)
            new_roots.append(node)
        doc.consumed = update.new_consumed_offset
        doc.attached_roots += len(update.attached)
        doc.complete = update.completed
        return new_roots

    def _construct(self, desc: dict) -> DomNode:
        children = [self._construct(c) for c in desc["children"]]
        nid = desc["id"]
        if nid in self.nodes:
            raise LookupError(f"node id {nid} already in use")
        node = DomNode(nid, desc["tag"], dict(desc["attrs"]), desc.get("text"))
        self.nodes[nid] = node
        self.next_node_id = max(self.next_node_id, nid + 1)
        for child in children:
            child.parent = node
            node.children.append(child)
        if "src" in node.attrs:
            node.resource = ResourceState(node.attrs["src"], "loading")
        if "anim" in node.attrs:
            try:
                period = float(node.attrs["anim"])
            except ValueError:
                period = DEFAULT_ANIMATION_PERIOD
            node.animation = AnimationState(max(period, 1.0), self.clock)
            node.attrs["frame"] = "0"
        return node


def _arity(name: str, args: list, n: int) -> None:
    if len(args) != n:
        raise GuestRuntimeError("arity-mismatch", f"{name} takes {n} argument(s), got {len(args)}")


def _number(what: str, v) -> float:
    if not isinstance(v, float):
        raise GuestRuntimeError("type-error", f"{what} must be a number")
    return v


def _ident_int(what: str, v) -> int:
    if not isinstance(v, float) or v != v or v != int(v):
        raise GuestRuntimeError("type-error", f"{what} must be an integer")
    return int(v)


def _string(what: str, v) -> str:
    if not isinstance(v, str):
        raise GuestRuntimeError("type-error", f"{what} must be a string")
    return v


_OPS = {
    "random": HostWorld._op_random,
    "date_now": HostWorld._op_date_now,
    "set_timeout": HostWorld._op_set_timeout,
    "set_interval": HostWorld._op_set_interval,
    "clear_timer": HostWorld._op_clear_timer,
    "create_element": HostWorld._op_create_element,
    "append_child": HostWorld._op_append_child,
    "remove_child": HostWorld._op_remove_child,
    "set_attribute": HostWorld._op_set_attribute,
    "get_attribute": HostWorld._op_get_attribute,
    "query_node": HostWorld._op_query_node,
    "add_event_listener": HostWorld._op_add_event_listener,
    "remove_event_listener": HostWorld._op_remove_event_listener,
    "xhr_open": HostWorld._op_xhr_open,
    "xhr_send": HostWorld._op_xhr_send,
    "xhr_status": HostWorld._op_xhr_status,
    "xhr_response": HostWorld._op_xhr_response,
    "storage_get": HostWorld._op_storage_get,
    "storage_set": HostWorld._op_storage_set,
    "storage_remove": HostWorld._op_storage_remove,
    "console_log": HostWorld._op_console_log,
}

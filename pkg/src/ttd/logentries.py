"""Log entry and host update vocabulary.

The recording log captures exactly the nondeterministic inputs of a run:

* ``SimpleEntry``: return value of one nondeterministic host call (current
  date, assigned timer id), keyed by the interaction counter.
* ``EventEntry``: one event dispatch, in order, with its queue descriptor.
* ``InterEventEntry``: host background changes applied between the previous
  event and the one at ``before_event_index``.
* ``ConcurrentEntry``: host background changes applied in the middle of a
  synchronous host call, keyed by the interaction counter.

Host updates are the replayable state deltas of the background world:
network state machine transitions, resource load completions, animation
frame advances, and incremental parse progress (with the attached subtree
spelled out, ids included, so replay allocates identical node ids).

Entries and updates round-trip through plain JSON objects; the trace file
stores them framed one JSON document per entry.
"""

from __future__ import annotations

from dataclasses import dataclass


# ---- host updates ----


@dataclass(frozen=True)
class XhrTransition:
    request_id: int
    state: str  # OPENED | HEADERS_RECEIVED | LOADING | DONE
    status: int | None  # set on HEADERS_RECEIVED
    received_total: int

    def to_json(self) -> dict:
        out = {"u": "xhr", "request": self.request_id, "state": self.state,
               "received": self.received_total}
        if self.status is not None:
            out["status"] = self.status
        return out


@dataclass(frozen=True)
class ResourceLoaded:
    node_id: int
    width: int
    height: int

    def to_json(self) -> dict:
        return {"u": "resource", "node": self.node_id,
                "width": self.width, "height": self.height}


@dataclass(frozen=True)
class AnimationAdvance:
    node_id: int
    frame_count: int

    def to_json(self) -> dict:
        return {"u": "anim", "node": self.node_id, "frames": self.frame_count}


@dataclass(frozen=True)
class ParseAdvance:
    document_id: str
    new_consumed_offset: int
    attached: tuple  # node description dicts: {id, tag, attrs, text, children}
    completed: bool

    def to_json(self) -> dict:
        return {"u": "parse", "document": self.document_id,
                "consumed": self.new_consumed_offset,
                "attached": list(self.attached), "completed": self.completed}


@dataclass(frozen=True)
class TimerRearm:
    """Interval timer re-armed when it fires; due is the new absolute due."""

    timer_id: int
    due: float

    def to_json(self) -> dict:
        return {"u": "rearm", "timer": self.timer_id, "due": self.due}


@dataclass(frozen=True)
class ClockAdvance:
    """Virtual clock drift during a synchronous host call. Absolute, so a
    timer registered right after computes the same due time on both sides."""

    clock: float

    def to_json(self) -> dict:
        return {"u": "clock", "clock": self.clock}


HostUpdate = (XhrTransition | ResourceLoaded | AnimationAdvance | ParseAdvance
              | TimerRearm | ClockAdvance)


def update_from_json(data: dict) -> HostUpdate:
    u = data["u"]
    if u == "xhr":
        return XhrTransition(data["request"], data["state"],
                             data.get("status"), data["received"])
    if u == "resource":
        return ResourceLoaded(data["node"], data["width"], data["height"])
    if u == "anim":
        return AnimationAdvance(data["node"], data["frames"])
    if u == "parse":
        return ParseAdvance(data["document"], data["consumed"],
                            tuple(data["attached"]), data["completed"])
    if u == "rearm":
        return TimerRearm(data["timer"], data["due"])
    if u == "clock":
        return ClockAdvance(data["clock"])
    raise ValueError(f"unknown host update kind {u!r}")


# ---- log entries ----


@dataclass(frozen=True)
class SimpleEntry:
    interaction: int
    kind: str  # date_now | set_timeout | set_interval
    value: float

    def to_json(self) -> dict:
        return {"t": "simple", "interaction": self.interaction,
                "kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class EventEntry:
    event_index: int
    seq: int  # enqueue order, for timeline display
    at: float  # virtual ms at dispatch
    descriptor: dict

    def to_json(self) -> dict:
        return {"t": "event", "index": self.event_index, "seq": self.seq,
                "at": self.at, "descriptor": self.descriptor}


@dataclass(frozen=True)
class InterEventEntry:
    before_event_index: int
    updates: tuple  # HostUpdate ...

    def to_json(self) -> dict:
        return {"t": "inter", "before": self.before_event_index,
                "updates": [u.to_json() for u in self.updates]}


@dataclass(frozen=True)
class ConcurrentEntry:
    interaction: int
    updates: tuple  # HostUpdate ...

    def to_json(self) -> dict:
        return {"t": "concurrent", "interaction": self.interaction,
                "updates": [u.to_json() for u in self.updates]}


LogEntry = SimpleEntry | EventEntry | InterEventEntry | ConcurrentEntry


def entry_from_json(data: dict) -> LogEntry:
    t = data["t"]
    if t == "simple":
        return SimpleEntry(data["interaction"], data["kind"], data["value"])
    if t == "event":
        return EventEntry(data["index"], data["seq"], data["at"], data["descriptor"])
    if t == "inter":
        return InterEventEntry(
            data["before"], tuple(update_from_json(u) for u in data["updates"]))
    if t == "concurrent":
        return ConcurrentEntry(
            data["interaction"], tuple(update_from_json(u) for u in data["updates"]))
    raise ValueError(f"unknown log entry kind {t!r}")


# ---- replay audit (stored beside the log, not part of it) ----


@dataclass
class Audit:
    """Cross-checks for replay: per-event statement counts and error
    outcomes, a fingerprint of every host call (interaction counter, kind,
    rendered result), and the final canonical world dump."""

    event_statements: list[int]
    event_errors: list  # str | None per event
    host_calls: list[tuple[int, str, str]]
    final_dump: str

    def to_json(self) -> dict:
        return {"eventStatements": self.event_statements,
                "eventErrors": self.event_errors,
                "hostCalls": [list(c) for c in self.host_calls],
                "finalDump": self.final_dump}

    @staticmethod
    def from_json(data: dict) -> "Audit":
        return Audit([int(n) for n in data["eventStatements"]],
                     list(data["eventErrors"]),
                     [(int(c[0]), c[1], c[2]) for c in data["hostCalls"]],
                     data["finalDump"])

"""Canonical world dump: the comparable surface of a host world.

Two runs are considered equivalent when their dumps match at every
between-events point. The dump covers everything a guest or a user can
observe: document trees (attributes, text, listener registrations in order,
resource and animation state), network requests, storage, the timer table,
console output, and the guest PRNG state.

Deliberately excluded: the virtual clock and the pending event queue. Those
differ between a recording and a replay of the same run (replay takes its
times from the log and dispatches straight from it), and neither is
guest-observable except through host calls that are themselves captured in
the log. Timer due times are included: both sides move them through the
same logged transitions, so they must agree.
"""

from __future__ import annotations

import json

from ttd.host.world import DomNode, HostWorld


def node_dump(node: DomNode) -> dict:
    out: dict = {
        "id": node.id,
        "tag": node.tag,
        "attrs": dict(sorted(node.attrs.items())),
        "text": node.text,
        "listeners": [f"{etype}:fn#{c.fn_id}" for etype, c in node.listeners],
        "children": [node_dump(c) for c in node.children],
    }
    if node.resource is not None:
        out["resource"] = {
            "url": node.resource.url,
            "state": node.resource.state,
            "width": node.resource.width,
            "height": node.resource.height,
        }
    if node.animation is not None:
        out["animation"] = {
            "period": node.animation.period_ms,
            "frames": node.animation.frame_count,
        }
    return out


def world_dump(world: HostWorld) -> dict:
    return {
        "documents": [
            {
                "id": doc.doc_id,
                "complete": doc.complete,
                "consumed": doc.consumed,
                "tree": node_dump(world.nodes[doc.root_id]),
            }
            for doc in world.documents.values()
        ],
        "requests": [
            {
                "id": req.id,
                "method": req.method,
                "url": req.url,
                "state": req.state,
                "status": req.status,
                "received": req.received,
                "listeners": [f"{t}:fn#{c.fn_id}" for t, c in req.listeners],
            }
            for req in (world.requests[k] for k in sorted(world.requests))
        ],
        "storage": dict(sorted(world.storage.items())),
        "timers": [
            {
                "id": rec.id,
                "due": rec.due,
                "period": rec.period,
                "one_shot": rec.period is None,
                "fn": rec.closure.fn_id,
            }
            for rec in (world.timers[k] for k in sorted(world.timers))
        ],
        "console": list(world.console),
        "prng": world.prng.state,
    }


def world_dump_json(world: HostWorld) -> str:
    return json.dumps(world_dump(world), sort_keys=True, separators=(",", ":"))

"""Scenario files: the scripted outside world for a recording.

A scenario bundles everything the host environment needs beyond the guest
scripts themselves: document markup, scripted user inputs, canned network
responses with delivery schedules, the guest PRNG seed, the scheduler seed,
and the duration cap for the virtual clock.

JSON shape (version 1):

    {
      "version": 1,
      "prng_seed": 7,
      "scheduler_seed": 99,
      "duration_ms": 10000,
      "documents": [{"id": "main", "markup": "[div #root]"}],
      "inputs": [{"at": 500, "type": "click", "target": "#root",
                  "payload": {"x": 3}}],
      "responses": {"/api": {"status": 200, "body": "...",
                             "schedule": [{"after_ms": 40, "bytes": 64}],
                             "width": 32, "height": 16}}
    }

width/height only matter for URLs referenced by src attributes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ttd.errors import ScenarioError
from ttd.host.markup import NodeSpec, parse_markup


@dataclass(frozen=True)
class ScheduleItem:
    after_ms: float
    bytes: int


@dataclass(frozen=True)
class ResponseSpec:
    url: str
    status: int
    body: str
    schedule: tuple[ScheduleItem, ...]
    width: int | None = None
    height: int | None = None

    def total_latency(self) -> float:
        return sum(item.after_ms for item in self.schedule)


@dataclass(frozen=True)
class InputSpec:
    at: float
    type: str
    target: str  # "#id" selector
    payload: tuple[tuple[str, object], ...] = ()


@dataclass
class DocumentSpec:
    id: str
    markup: str
    roots: list[NodeSpec]  # full parse, close offsets precomputed


@dataclass
class Scenario:
    prng_seed: int
    scheduler_seed: int
    duration_ms: float
    documents: list[DocumentSpec]
    inputs: list[InputSpec]  # sorted by .at, stable
    responses: dict[str, ResponseSpec]
    raw: dict

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def load_scenario_file(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario {path} is not valid JSON: {e}") from None
    return load_scenario(data)


def load_scenario(data: object) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = data.get("version")
    if version != 1:
        raise ScenarioError(f"unsupported scenario version {version!r}")

    prng_seed = _int_field(data, "prng_seed", default=1)
    scheduler_seed = _int_field(data, "scheduler_seed", default=1)
    duration = _num_field(data, "duration_ms", default=60_000.0)
    if duration <= 0:
        raise ScenarioError("duration_ms must be positive")

    documents = []
    seen_ids = set()
    for i, doc in enumerate(_list_field(data, "documents")):
        if not isinstance(doc, dict):
            raise ScenarioError(f"documents[{i}] must be an object")
        doc_id = doc.get("id")
        markup = doc.get("markup")
        if not isinstance(doc_id, str) or not doc_id:
            raise ScenarioError(f"documents[{i}].id must be a non-empty string")
        if doc_id in seen_ids:
            raise ScenarioError(f"duplicate document id {doc_id!r}")
        seen_ids.add(doc_id)
        if not isinstance(markup, str):
            raise ScenarioError(f"documents[{i}].markup must be a string")
        documents.append(DocumentSpec(doc_id, markup, parse_markup(markup, doc_id)))

    inputs = []
    for i, item in enumerate(_list_field(data, "inputs")):
        if not isinstance(item, dict):
            raise ScenarioError(f"inputs[{i}] must be an object")
        at = item.get("at")
        if not isinstance(at, (int, float)) or isinstance(at, bool) or at < 0:
            raise ScenarioError(f"inputs[{i}].at must be a non-negative number")
        etype = item.get("type")
        if not isinstance(etype, str) or not etype:
            raise ScenarioError(f"inputs[{i}].type must be a non-empty string")
        target = item.get("target")
        if not isinstance(target, str) or not target.startswith("#"):
            raise ScenarioError(f"inputs[{i}].target must be a '#id' selector")
        payload = item.get("payload", {})
        if not isinstance(payload, dict):
            raise ScenarioError(f"inputs[{i}].payload must be an object")
        fields = []
        for key, value in payload.items():
            if key in ("type", "target"):
                raise ScenarioError(f"inputs[{i}].payload may not override {key!r}")
            if isinstance(value, bool) or value is None or isinstance(value, str):
                fields.append((key, value))
            elif isinstance(value, (int, float)):
                fields.append((key, float(value)))
            else:
                raise ScenarioError(f"inputs[{i}].payload.{key} must be scalar")
        inputs.append(InputSpec(float(at), etype, target, tuple(fields)))
    inputs.sort(key=lambda s: s.at)  # stable: ties keep file order

    responses = {}
    resp_data = data.get("responses", {})
    if not isinstance(resp_data, dict):
        raise ScenarioError("responses must be an object keyed by URL")
    for url, spec in resp_data.items():
        if not isinstance(spec, dict):
            raise ScenarioError(f"responses[{url!r}] must be an object")
        status = spec.get("status")
        if not isinstance(status, int) or isinstance(status, bool):
            raise ScenarioError(f"responses[{url!r}].status must be an integer")
        body = spec.get("body", "")
        if not isinstance(body, str):
            raise ScenarioError(f"responses[{url!r}].body must be a string")
        items = []
        schedule = spec.get("schedule", [{"after_ms": 10.0, "bytes": len(body)}])
        if not isinstance(schedule, list) or not schedule:
            raise ScenarioError(f"responses[{url!r}].schedule must be a non-empty list")
        for j, it in enumerate(schedule):
            if not isinstance(it, dict):
                raise ScenarioError(f"responses[{url!r}].schedule[{j}] must be an object")
            after = it.get("after_ms")
            nbytes = it.get("bytes", 0)
            if not isinstance(after, (int, float)) or isinstance(after, bool) or after < 0:
                raise ScenarioError(f"responses[{url!r}].schedule[{j}].after_ms invalid")
            if not isinstance(nbytes, int) or isinstance(nbytes, bool) or nbytes < 0:
                raise ScenarioError(f"responses[{url!r}].schedule[{j}].bytes invalid")
            items.append(ScheduleItem(float(after), nbytes))
        total = sum(it.bytes for it in items)
        if total != len(body):
            raise ScenarioError(
                f"responses[{url!r}]: schedule delivers {total} bytes, body has {len(body)}"
            )
        width = spec.get("width")
        height = spec.get("height")
        for dim, name in ((width, "width"), (height, "height")):
            if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 0):
                raise ScenarioError(f"responses[{url!r}].{name} must be a non-negative integer")
        responses[url] = ResponseSpec(url, status, body, tuple(items), width, height)

    raw = json.loads(json.dumps(data))  # detach from caller
    return Scenario(prng_seed, scheduler_seed, float(duration), documents, inputs, responses, raw)


def _int_field(data: dict, name: str, default: int) -> int:
    v = data.get(name, default)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ScenarioError(f"{name} must be an integer")
    return v


def _num_field(data: dict, name: str, default: float) -> float:
    v = data.get(name, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"{name} must be a number")
    return float(v)


def _list_field(data: dict, name: str) -> list:
    v = data.get(name, [])
    if not isinstance(v, list):
        raise ScenarioError(f"{name} must be a list")
    return v

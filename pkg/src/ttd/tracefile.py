"""Trace container: everything needed to replay a recording, in one file.

Layout (all integers big endian):

    magic "TTDT" | u32 version=1 | u32 flags | 32-byte sha256 of the INPT
    payload | sections | "TAIL" | 8 bytes: sha256 of every preceding byte,
    truncated to 8.

Each section is a 4-byte tag, a u64 payload length, and the payload. The
four sections appear exactly once, in order:

    INPT  inputs: guest script sources, the scenario (canonical JSON), and
          recording metadata. Identifies the recording; hashed in the header.
    NLOG  the nondeterminism log: varint count, then each entry as a
          varint-length-prefixed JSON document. This section alone is the
          recording's log; its size is what log-growth guarantees refer to.
    AUDT  replay cross-checks: per-event statement counts, host call
          fingerprints, final canonical dump. Diagnostic, not part of NLOG.
    CKPT  checkpoints: varint count, then per checkpoint the event index it
          precedes, its virtual time, and a zlib-compressed state image.

Any structural problem (bad magic, short file, checksum mismatch, trailing
bytes) raises TraceIntegrityError.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field

from ttd.errors import TraceIntegrityError
from ttd.host.scenario import Scenario, load_scenario
from ttd.logentries import Audit, LogEntry, entry_from_json

MAGIC = b"TTDT"
VERSION = 1


@dataclass
class Checkpoint:
    event_index: int  # the event this checkpoint precedes
    at: float  # virtual ms when taken
    image: bytes  # decompressed state image


@dataclass
class Trace:
    scripts: list  # [(script_id, source), ...]
    scenario_raw: dict
    entries: list  # LogEntry, in order
    audit: Audit
    checkpoints: list  # Checkpoint, by event_index
    meta: dict = field(default_factory=dict)
    _scenario: Scenario | None = None

    @property
    def scenario(self) -> Scenario:
        if self._scenario is None:
            self._scenario = load_scenario(self.scenario_raw)
        return self._scenario

    def input_payload(self) -> bytes:
        doc = {"scripts": [[sid, src] for sid, src in self.scripts],
               "scenario": self.scenario_raw, "meta": self.meta}
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _w_varint(buf: bytearray, n: int) -> None:
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            buf.append(b | 0x80)
        else:
            buf.append(b)
            return


class _Cursor:
    def __init__(self, data: bytes, base: int = 0):
        self.data = data
        self.pos = 0
        self.base = base  # offset of data[0] in the file, for messages

    def fail(self, msg: str):
        raise TraceIntegrityError(f"trace corrupt at byte {self.base + self.pos}: {msg}")

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            self.fail("truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

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


def trace_to_bytes(trace: Trace) -> bytes:
    inpt = trace.input_payload()

    nlog = bytearray()
    _w_varint(nlog, len(trace.entries))
    for entry in trace.entries:
        doc = json.dumps(entry.to_json(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        _w_varint(nlog, len(doc))
        nlog += doc

    audt = json.dumps(trace.audit.to_json(), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")

    ckpt = bytearray()
    _w_varint(ckpt, len(trace.checkpoints))
    for cp in trace.checkpoints:
        _w_varint(ckpt, cp.event_index)
        ckpt += struct.pack(">d", cp.at)
        packed = zlib.compress(cp.image, 6)
        _w_varint(ckpt, len(packed))
        ckpt += packed

    out = bytearray()
    out += MAGIC
    out += struct.pack(">II", VERSION, 0)
    out += hashlib.sha256(inpt).digest()
    for tag, payload in ((b"INPT", inpt), (b"NLOG", bytes(nlog)),
                         (b"AUDT", audt), (b"CKPT", bytes(ckpt))):
        out += tag
        out += struct.pack(">Q", len(payload))
        out += payload
    out += b"TAIL"
    out += hashlib.sha256(bytes(out)).digest()[:8]
    return bytes(out)


def save_trace(trace: Trace, path: str) -> None:
    data = trace_to_bytes(trace)
    with open(path, "wb") as f:
        f.write(data)


def trace_from_bytes(data: bytes) -> Trace:
    if len(data) < 4 + 8 + 32 + 12:
        raise TraceIntegrityError("trace too short to be valid")
    if data[:4] != MAGIC:
        raise TraceIntegrityError("bad magic: not a trace file")
    version, _flags = struct.unpack(">II", data[4:12])
    if version != VERSION:
        raise TraceIntegrityError(f"unsupported trace version {version}")
    header_hash = data[12:44]

    if data[-12:-8] != b"TAIL":
        raise TraceIntegrityError("trace truncated: missing tail")
    want = hashlib.sha256(data[:-8]).digest()[:8]
    if data[-8:] != want:
        raise TraceIntegrityError("trace checksum mismatch")

    sections: dict[bytes, bytes] = {}
    pos = 44
    body_end = len(data) - 12
    for expect in (b"INPT", b"NLOG", b"AUDT", b"CKPT"):
        if pos + 12 > body_end:
            raise TraceIntegrityError(f"trace corrupt at byte {pos}: missing {expect.decode()} section")
        tag = data[pos : pos + 4]
        if tag != expect:
            raise TraceIntegrityError(
                f"trace corrupt at byte {pos}: expected section {expect.decode()}, found {tag!r}")
        (length,) = struct.unpack(">Q", data[pos + 4 : pos + 12])
        pos += 12
        if pos + length > body_end:
            raise TraceIntegrityError(f"trace corrupt at byte {pos}: section overruns file")
        sections[tag] = data[pos : pos + length]
        pos += length
    if pos != body_end:
        raise TraceIntegrityError(f"trace corrupt at byte {pos}: unexpected bytes before tail")

    inpt = sections[b"INPT"]
    if hashlib.sha256(inpt).digest() != header_hash:
        raise TraceIntegrityError("input section does not match header hash")
    try:
        doc = json.loads(inpt.decode("utf-8"))
        scripts = [(sid, src) for sid, src in doc["scripts"]]
        scenario_raw = doc["scenario"]
        meta = doc.get("meta", {})
    except (ValueError, KeyError, TypeError) as e:
        raise TraceIntegrityError(f"input section malformed: {e}") from None

    cur = _Cursor(sections[b"NLOG"])
    entries: list[LogEntry] = []
    for _ in range(cur.varint()):
        raw = cur.take(cur.varint())
        try:
            entries.append(entry_from_json(json.loads(raw.decode("utf-8"))))
        except (ValueError, KeyError) as e:
            cur.fail(f"bad log entry: {e}")
    if cur.pos != len(cur.data):
        cur.fail("trailing bytes in log section")

    try:
        audit = Audit.from_json(json.loads(sections[b"AUDT"].decode("utf-8")))
    except (ValueError, KeyError, TypeError) as e:
        raise TraceIntegrityError(f"audit section malformed: {e}") from None

    cur = _Cursor(sections[b"CKPT"])
    checkpoints: list[Checkpoint] = []
    for _ in range(cur.varint()):
        event_index = cur.varint()
        (at,) = struct.unpack(">d", cur.take(8))
        packed = cur.take(cur.varint())
        try:
            image = zlib.decompress(packed)
        except zlib.error as e:
            cur.fail(f"checkpoint will not decompress: {e}")
        checkpoints.append(Checkpoint(event_index, at, image))
    if cur.pos != len(cur.data):
        cur.fail("trailing bytes in checkpoint section")

    return Trace(scripts, scenario_raw, entries, audit, checkpoints, meta)


def load_trace(path: str) -> Trace:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise TraceIntegrityError(f"cannot read trace {path}: {e}") from None
    return trace_from_bytes(data)


def trace_debug_json(trace: Trace) -> dict:
    """Loss-tolerant JSON view for inspection; checkpoint images elided."""
    return {
        "scripts": [{"id": sid, "source": src} for sid, src in trace.scripts],
        "scenario": trace.scenario_raw,
        "meta": trace.meta,
        "log": [e.to_json() for e in trace.entries],
        "audit": trace.audit.to_json(),
        "checkpoints": [
            {"eventIndex": cp.event_index, "at": cp.at, "imageBytes": len(cp.image)}
            for cp in trace.checkpoints
        ],
    }

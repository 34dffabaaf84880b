"""Command-line driver: record programs, verify traces, drive scripted debug
sessions, serve the debug protocol, and dump trace internals.

Exit codes are a stable contract: 0 success, 1 verification or divergence
failure, 2 usage or input error. Output is deterministic text; ANSI color
only decorates a tty and is silenced by --no-color or TTD_NO_COLOR. Defaults
can come from a .ttdrc JSON file in the working directory, overridden by
environment, overridden by flags.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from ttd.canon import world_dump
from ttd.debugger import DebugSession
from ttd.errors import TraceIntegrityError, TravelError, TtdError
from ttd.host.scenario import load_scenario
from ttd.logentries import ConcurrentEntry, EventEntry, InterEventEntry, SimpleEntry
from ttd.proto import DEFAULT_PORT, ProtocolServer
from ttd.record import DEFAULT_CHECKPOINT_INTERVAL_MS, RecordingPolicy, record_session
from ttd.replay import ReplayDivergence, ReplaySession, verify_replay
from ttd.tracefile import Trace, load_trace, save_trace

_DOM_AT = re.compile(r"^dom@(\d+|last)$")


class _UsageError(Exception):
    pass


class _Style:
    """ANSI styling, active only on a tty with color not disabled."""

    def __init__(self, enabled: bool):
        self.enabled = enabled

    def _wrap(self, code: str, s: str) -> str:
        return f"\x1b[{code}m{s}\x1b[0m" if self.enabled else s

    def ok(self, s: str) -> str:
        return self._wrap("32", s)

    def fail(self, s: str) -> str:
        return self._wrap("31", s)


# ---- configuration ----


def _load_rc() -> dict:
    path = Path(".ttdrc")
    if not path.is_file():
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError) as e:
        raise _UsageError(f"cannot read .ttdrc: {e}")
    if not isinstance(data, dict):
        raise _UsageError(".ttdrc must contain a JSON object")
    return data


def _pick(flag, rc: dict, key: str, default):
    if flag is not None:
        return flag
    if key in rc:
        return rc[key]
    return default


def _color_enabled(args, rc: dict) -> bool:
    if args.no_color:
        return False
    if os.environ.get("TTD_NO_COLOR"):
        return False
    if rc.get("no_color"):
        return False
    return sys.stdout.isatty()


# ---- argument parsing ----


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-color", action="store_true", default=False,
                        help="disable ANSI color output")

    parser = argparse.ArgumentParser(
        prog="ttd", parents=[common],
        description="Record, replay, and time-travel-debug guest programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser("record", parents=[common],
                         help="run a program against a scenario and save a trace")
    rec.add_argument("program", help="guest source file or directory of .gs files")
    rec.add_argument("scenario", help="scenario JSON file")
    rec.add_argument("--out", required=True, help="trace output path (.ttdt)")
    rec.add_argument("--checkpoint-interval-ms", type=float, default=None,
                     help=f"minimum virtual ms between checkpoints "
                          f"(default {DEFAULT_CHECKPOINT_INTERVAL_MS:g})")
    rec.add_argument("--seed", type=int, default=None,
                     help="override the scenario's scheduler seed")

    ver = sub.add_parser("verify", parents=[common],
                         help="replay a trace and cross-check it")
    ver.add_argument("trace")
    ver.add_argument("--all-checkpoints", action="store_true",
                     help="also replay from every recorded checkpoint")

    dbg = sub.add_parser("debug", parents=[common],
                         help="debug a trace from a command script or over a socket")
    dbg.add_argument("trace")
    dbg.add_argument("--script", help="command script file (one command per line)")
    dbg.add_argument("--serve", action="store_true",
                     help="serve the debug protocol on a local socket and block")
    dbg.add_argument("--port", type=int, default=None,
                     help=f"protocol server port (default {DEFAULT_PORT})")
    dbg.add_argument("--ui", action="store_true",
                     help="also serve the browser frontend over HTTP")

    dmp = sub.add_parser("dump", parents=[common],
                         help="print trace internals")
    dmp.add_argument("trace")
    dmp.add_argument("--what", required=True,
                     help="log | checkpoints | dom@K (K = event index or 'last')")
    return parser


# ---- subcommands ----


def _load_program(path_str: str) -> list:
    path = Path(path_str)
    if path.is_dir():
        files = sorted(path.glob("*.gs"))
        if not files:
            raise _UsageError(f"no .gs files in {path}")
        return [(f.stem, f.read_text()) for f in files]
    if not path.is_file():
        raise _UsageError(f"no such program: {path}")
    return [(path.stem, path.read_text())]


def cmd_record(args, style: _Style, rc: dict) -> int:
    scripts = _load_program(args.program)
    scenario_path = Path(args.scenario)
    if not scenario_path.is_file():
        raise _UsageError(f"no such scenario: {scenario_path}")
    try:
        raw = json.loads(scenario_path.read_text())
    except ValueError as e:
        raise _UsageError(f"scenario is not valid JSON: {e}")
    scenario = load_scenario(raw)

    interval = float(_pick(args.checkpoint_interval_ms, rc,
                           "checkpoint_interval_ms", DEFAULT_CHECKPOINT_INTERVAL_MS))
    policy = RecordingPolicy(checkpoint_interval_ms=interval,
                             scheduler_seed=args.seed)
    trace = record_session(scripts, scenario, policy)
    save_trace(trace, args.out)

    kinds = {EventEntry: 0, SimpleEntry: 0, InterEventEntry: 0, ConcurrentEntry: 0}
    for e in trace.entries:
        kinds[type(e)] += 1
    image_bytes = sum(len(cp.image) for cp in trace.checkpoints)
    cp_events = [cp.event_index for cp in trace.checkpoints]
    print(f"recorded {args.out}")
    print(f"events: {trace.meta['events']}")
    print(f"interactions: {trace.meta['interactions']}")
    print(f"checkpoints: {len(trace.checkpoints)} at events {cp_events}")
    print(f"log entries: {len(trace.entries)}"
          f" (event {kinds[EventEntry]}, simple {kinds[SimpleEntry]},"
          f" inter-event {kinds[InterEventEntry]},"
          f" concurrent {kinds[ConcurrentEntry]})")
    print(f"trace size: {Path(args.out).stat().st_size} bytes"
          f" (checkpoint images {image_bytes} bytes)")
    return 0


def cmd_verify(args, style: _Style, rc: dict) -> int:
    try:
        trace = load_trace(args.trace)
    except TraceIntegrityError as e:
        print(f"{style.fail('FAIL')} integrity: {e}")
        return 1
    results = verify_replay(trace, all_checkpoints=args.all_checkpoints)
    failed = 0
    for label, report in results:
        if report is None:
            print(f"{style.ok('ok')} {label}")
        else:
            failed += 1
            print(f"{style.fail('FAIL')} {label}: {report}")
    print(f"verified {args.trace}: {len(results) - failed}/{len(results)} replays ok")
    return 1 if failed else 0


def cmd_dump(args, style: _Style, rc: dict) -> int:
    trace = load_trace(args.trace)
    if args.what == "log":
        for i, e in enumerate(trace.entries):
            print(f"{i}: {json.dumps(e.to_json(), sort_keys=True)}")
        return 0
    if args.what == "checkpoints":
        for cp in trace.checkpoints:
            print(f"checkpoint event={cp.event_index} at={cp.at:g}"
                  f" image={len(cp.image)} bytes")
        print(f"{len(trace.checkpoints)} checkpoints")
        return 0
    m = _DOM_AT.match(args.what)
    if m is None:
        raise _UsageError(f"unknown --what {args.what!r}"
                          " (expected log, checkpoints, or dom@K)")
    total = int(trace.meta.get("events", 0))
    k = total if m.group(1) == "last" else int(m.group(1))
    if k > total:
        raise _UsageError(f"event {k} out of range (trace has {total} events)")
    rs = ReplaySession(trace)
    for _ in range(k):
        rs.replay_next_event()
    rs.apply_boundary_updates()
    print(json.dumps(world_dump(rs.world)["documents"], indent=2, sort_keys=True))
    return 0


def cmd_debug(args, style: _Style, rc: dict) -> int:
    if args.serve:
        return _debug_serve(args, rc)
    if args.script:
        return _debug_script(args)
    raise _UsageError("debug needs --script FILE or --serve")


def _debug_serve(args, rc: dict) -> int:
    port = int(_pick(args.port, rc, "port", DEFAULT_PORT))
    server = ProtocolServer(port=port, default_trace=args.trace)
    server.start()
    print(f"debug protocol on 127.0.0.1:{server.port}")
    ui_server = None
    if args.ui:
        ui_server = _start_ui_server(server.port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        if ui_server is not None:
            ui_server.shutdown()
    return 0


def _ui_asset_dir() -> Path:
    override = os.environ.get("TTD_UI_DIR")
    if override:
        return Path(override)
    return Path("frontend") / "dist"


def _start_ui_server(proto_port: int):
    import functools
    import http.server
    import threading

    assets = _ui_asset_dir()
    if not (assets / "index.html").is_file():
        raise _UsageError(
            f"no frontend assets at {assets} (build them, or set TTD_UI_DIR)")
    handler = functools.partial(
        http.server.SimpleHTTPRequestHandler, directory=str(assets))
    handler.log_message = lambda *a, **k: None
    httpd = http.server.ThreadingHTTPServer(("127.0.0.1", 0), handler)
    threading.Thread(target=httpd.serve_forever, daemon=True).start()
    print(f"frontend on http://127.0.0.1:{httpd.server_address[1]}/"
          f"?port={proto_port}")
    return httpd


# ---- scripted debug sessions ----


def _pause_line(info) -> str:
    if info.reason == "start":
        return "no-predecessor"
    if info.reason == "no-caller":
        return "no-caller"
    if info.status == "end":
        return "end of recording"
    c, b = info.time
    return (f"paused event={info.event_index} at {info.script}:{info.line}:{info.col}"
            f" time=({c},{b}) depth={info.depth} fn={info.fn} reason={info.reason}")


def _debug_script(args) -> int:
    script_path = Path(args.script)
    if not script_path.is_file():
        raise _UsageError(f"no such command script: {script_path}")
    trace = load_trace(args.trace)
    ds = DebugSession(trace)
    for raw in script_path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        print(f"> {line}")
        try:
            _run_debug_command(ds, line)
        except ReplayDivergence as e:
            print(f"divergence: {e.report}")
            return 1
        except (TravelError, TtdError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    return 0


_STEPS = {
    ("step",): "step_forward",
    ("step", "over"): "step_over",
    ("step", "out"): "step_out",
    ("stepback",): "step_back",
    ("stepback", "over"): "reverse_step_over",
    ("stepback", "out"): "reverse_step_out",
    ("continue",): "continue_",
}

_WORLD_SECTIONS = ("timers", "requests", "storage", "animations", "console")


def _run_debug_command(ds: DebugSession, line: str) -> None:
    words = line.split()
    cmd, rest = words[0], words[1:]
    key = tuple(words[: 2 if len(words) > 1 and cmd in ("step", "stepback") else 1])
    if key in _STEPS:
        print(_pause_line(getattr(ds, _STEPS[key])()))
        return
    if cmd == "bp" and len(rest) in (2, 4):
        time = (int(rest[2]), int(rest[3])) if len(rest) == 4 else None
        bp = ds.set_breakpoint(rest[0], int(rest[1]), time)
        cond = f" time=({bp.time[0]},{bp.time[1]})" if bp.time else ""
        print(f"breakpoint {bp.id} at {bp.script}:{bp.line}{cond}")
        return
    if cmd == "travel" and len(rest) == 1:
        print(_pause_line(ds.travel_to_event(int(rest[0]))))
        return
    if cmd == "travel" and len(rest) == 5:
        info = ds.time_travel_to(int(rest[0]), rest[1], int(rest[2]),
                                 (int(rest[3]), int(rest[4])))
        print(_pause_line(info))
        return
    if cmd == "print" and len(rest) == 1:
        view = ds.inspect_heap_path(rest[0])
        print(f"{rest[0]} = {view['render']}")
        return
    if cmd == "inspect" and rest:
        _run_inspect(ds, rest)
        return
    raise _UsageError(f"unknown debug command: {line!r}")


def _run_inspect(ds: DebugSession, rest: list) -> None:
    what = rest[0]
    if what == "locals":
        out = ds.inspect_locals()
    elif what == "stack":
        out = ds.inspect_stack()
    elif what == "dom" and len(rest) == 2:
        out = ds.inspect_node(int(rest[1]))
    elif what == "dom":
        out = ds.inspect_dom()
    elif what == "heap" and len(rest) == 2:
        out = ds.inspect_heap_path(rest[1])
    elif what == "heap":
        out = ds.inspect_heap()
    elif what in _WORLD_SECTIONS and len(rest) == 1:
        out = ds.inspect_world(what)
    else:
        raise _UsageError(f"unknown inspect target: {' '.join(rest)!r}")
    print(json.dumps(out, indent=2, sort_keys=True))


# ---- entry ----


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        rc = _load_rc()
        style = _Style(_color_enabled(args, rc))
        handler = {"record": cmd_record, "verify": cmd_verify,
                   "debug": cmd_debug, "dump": cmd_dump}[args.command]
        return handler(args, style, rc)
    except _UsageError as e:
        print(f"ttd: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"ttd: {e}", file=sys.stderr)
        return 2
    except TtdError as e:
        print(f"ttd: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

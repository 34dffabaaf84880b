"""Line-delimited JSON debug protocol over a localhost TCP socket.

Each message is one JSON object per line. Requests carry {id, method,
params}; the response echoes the id with {ok: true, result} or {ok: false,
error: {code, message}}. Notifications ({method, params}, no id) flow server
to client at any time and are broadcast to every connection, so one client
can passively observe a session another client is driving. The server opens
every connection with a hello notification naming the protocol version.

Sessions are single-threaded: commands touching one session run under its
mutex. Stepping commands do not wait for the mutex; a second stepper gets a
"busy" error instead. Method shapes are documented in docs/protocol.md.
"""

from __future__ import annotations

import json
import socket
import threading

from ttd.debugger import DebugSession, PauseInfo
from ttd.errors import TravelError, TtdError
from ttd.replay import ReplayDivergence
from ttd.tracefile import load_trace

PROTOCOL_VERSION = 1
DEFAULT_PORT = 9229
# One request line. Anything longer is rejected and the connection dropped.
MAX_LINE_BYTES = 1 << 20

PARSE_ERROR = -32700  # JSON-RPC's code for unparseable input


class ProtoError(Exception):
    """Request-level failure carrying a wire error code."""

    def __init__(self, code, message: str):
        super().__init__(message)
        self.code = code


class _Connection:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.rfile = sock.makefile("rb")
        self.wlock = threading.Lock()
        self.alive = True

    def send(self, obj: dict) -> bool:
        data = (json.dumps(obj, separators=(",", ":")) + "\n").encode()
        with self.wlock:
            if not self.alive:
                return False
            try:
                self.sock.sendall(data)
                return True
            except OSError:
                self.alive = False
                return False

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class _Session:
    def __init__(self, sid: str, ds: DebugSession, owner: _Connection):
        self.sid = sid
        self.ds = ds
        self.owner = owner
        self.mutex = threading.Lock()


class ProtocolServer:
    """Accepts connections and funnels commands onto debug sessions.

    `default_trace` backs session.open requests that name no trace of their
    own, so `ttd debug TRACE --serve` clients need not know the file path.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 default_trace: str | None = None):
        self.host = host
        self._port = port
        self.default_trace = default_trace
        self._sock: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._lock = threading.Lock()
        self._conns: set[_Connection] = set()
        self._sessions: dict[str, _Session] = {}
        self._next_sid = 1
        self._running = False

    # ---- lifecycle ----

    @property
    def port(self) -> int:
        if self._sock is None:
            return self._port
        return self._sock.getsockname()[1]

    def start(self) -> None:
        self._sock = socket.create_server((self.host, self._port))
        # Closing a listening socket does not wake a blocked accept() on
        # Linux; poll so shutdown() can stop the loop promptly.
        self._sock.settimeout(0.25)
        self._running = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="proto-accept", daemon=True)
        self._accept_thread.start()

    def serve_forever(self) -> None:
        if self._accept_thread is not None:
            self._accept_thread.join()

    def shutdown(self) -> None:
        self._running = False
        if self._sock is not None:
            try:
                # Wake the acceptor instead of waiting out its poll tick.
                socket.create_connection((self.host, self.port), timeout=1).close()
            except OSError:
                pass
            try:
                self._sock.close()
            except OSError:
                pass
        with self._lock:
            conns = list(self._conns)
            self._sessions.clear()
        for conn in conns:
            conn.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)

    def _accept_loop(self) -> None:
        while self._running:
            try:
                sock, _addr = self._sock.accept()
            except TimeoutError:
                continue
            except OSError:
                return
            sock.settimeout(None)
            conn = _Connection(sock)
            with self._lock:
                self._conns.add(conn)
            threading.Thread(
                target=self._serve_connection, args=(conn,),
                name="proto-conn", daemon=True).start()

    # ---- per-connection loop ----

    def _serve_connection(self, conn: _Connection) -> None:
        try:
            conn.send({"method": "hello", "params": {"protocol": PROTOCOL_VERSION}})
            while conn.alive:
                try:
                    line = conn.rfile.readline(MAX_LINE_BYTES + 1)
                except OSError:
                    break
                if not line:
                    break
                if len(line) > MAX_LINE_BYTES:
                    conn.send(_error_response(None, PARSE_ERROR, "request line too long"))
                    break
                if not line.strip():
                    continue
                self._dispatch_line(conn, line)
        finally:
            self._drop_connection(conn)

    def _drop_connection(self, conn: _Connection) -> None:
        conn.close()
        with self._lock:
            self._conns.discard(conn)
            orphaned = [sid for sid, s in self._sessions.items() if s.owner is conn]
            for sid in orphaned:
                del self._sessions[sid]
        for sid in orphaned:
            self._notify("sessionEnded", {"session": sid})

    def _dispatch_line(self, conn: _Connection, line: bytes) -> None:
        try:
            msg = json.loads(line.decode("utf-8", errors="strict"))
        except (ValueError, UnicodeDecodeError) as e:
            conn.send(_error_response(None, PARSE_ERROR, f"parse error: {e}"))
            return
        if not isinstance(msg, dict):
            conn.send(_error_response(None, "bad-request", "request must be a JSON object"))
            return
        msg_id = msg.get("id")
        method = msg.get("method")
        params = msg.get("params", {})
        if not isinstance(method, str):
            conn.send(_error_response(msg_id, "bad-request", "missing method"))
            return
        if not isinstance(params, dict):
            conn.send(_error_response(msg_id, "bad-params", "params must be an object"))
            return
        try:
            result = self._dispatch(conn, method, params)
        except ProtoError as e:
            conn.send(_error_response(msg_id, e.code, str(e)))
        except ReplayDivergence as e:
            r = e.report
            self._notify("divergence", {
                "session": params.get("session"),
                "report": {"kind": r.kind, "detail": r.detail,
                           "event": r.event_index, "interaction": r.interaction,
                           "rendered": str(r)},
            })
            conn.send(_error_response(msg_id, "divergence", str(e)))
        except TravelError as e:
            conn.send(_error_response(msg_id, "travel", str(e)))
        except TtdError as e:
            conn.send(_error_response(msg_id, "error", str(e)))
        except Exception as e:  # fuzz safety: a request must never kill the server
            conn.send(_error_response(msg_id, "internal", f"{type(e).__name__}: {e}"))
        else:
            conn.send({"id": msg_id, "ok": True, "result": result})

    # ---- notifications ----

    def _notify(self, method: str, params: dict) -> None:
        with self._lock:
            conns = list(self._conns)
        msg = {"method": method, "params": params}
        for conn in conns:
            conn.send(msg)

    # ---- method dispatch ----

    def _dispatch(self, conn: _Connection, method: str, params: dict) -> dict:
        if method == "session.open":
            return self._session_open(conn, params)
        if method == "session.close":
            return self._session_close(params)
        if method == "timeline.info":
            sess = self._session(params)
            with sess.mutex:
                return sess.ds.timeline()
        if method.startswith("bp."):
            return self._dispatch_bp(method, params)
        if method.startswith("exec."):
            return self._dispatch_exec(method, params)
        if method.startswith("inspect."):
            return self._dispatch_inspect(method, params)
        raise ProtoError("unknown-method", f"unknown method {method!r}")

    def _session(self, params: dict) -> _Session:
        sid = params.get("session")
        with self._lock:
            sess = self._sessions.get(sid)
        if sess is None:
            raise ProtoError("no-session", f"no open session {sid!r}")
        return sess

    def _session_open(self, conn: _Connection, params: dict) -> dict:
        path = params.get("trace", self.default_trace)
        if not isinstance(path, str):
            raise ProtoError("bad-params", "session.open needs a trace path")
        try:
            trace = load_trace(path)
            ds = DebugSession(trace)
        except OSError as e:
            raise ProtoError("bad-trace", f"cannot read trace: {e}")
        except TtdError as e:
            raise ProtoError("bad-trace", f"cannot open trace: {e}")
        with self._lock:
            sid = f"s{self._next_sid}"
            self._next_sid += 1
            self._sessions[sid] = _Session(sid, ds, conn)
        ds.on_checkpoint = lambda k, sid=sid: self._notify(
            "checkpointCreated", {"session": sid, "eventIndex": k})
        return {"session": sid, "events": ds.total_events}

    def _session_close(self, params: dict) -> dict:
        sid = params.get("session")
        with self._lock:
            sess = self._sessions.pop(sid, None)
        if sess is None:
            raise ProtoError("no-session", f"no open session {sid!r}")
        self._notify("sessionEnded", {"session": sid})
        return {"closed": True}

    def _dispatch_bp(self, method: str, params: dict) -> dict:
        sess = self._session(params)
        with sess.mutex:
            if method == "bp.set":
                script = _req_str(params, "script")
                line = _req_int(params, "line")
                time = _opt_time(params)
                bp = sess.ds.set_breakpoint(script, line, time)
                return {"breakpoint": bp.id, "script": bp.script, "line": bp.line,
                        "uid": bp.uid, "time": list(bp.time) if bp.time else None}
            if method == "bp.clear":
                bp_id = _req_int(params, "breakpoint")
                if not sess.ds.clear_breakpoint(bp_id):
                    raise ProtoError("no-breakpoint", f"no breakpoint {bp_id}")
                return {"cleared": bp_id}
            if method == "bp.list":
                return {"breakpoints": sess.ds.list_breakpoints()}
        raise ProtoError("unknown-method", f"unknown method {method!r}")

    _EXEC_FORWARD = {
        "exec.continue": "continue_",
        "exec.stepForward": "step_forward",
        "exec.stepOver": "step_over",
        "exec.stepOut": "step_out",
    }
    _EXEC_REVERSE = {
        "exec.stepBack": "step_back",
        "exec.reverseStepOver": "reverse_step_over",
        "exec.reverseStepOut": "reverse_step_out",
    }

    def _dispatch_exec(self, method: str, params: dict) -> dict:
        sess = self._session(params)
        if not sess.mutex.acquire(blocking=False):
            raise ProtoError("busy", "session is executing another command")
        try:
            if method in self._EXEC_FORWARD:
                info = getattr(sess.ds, self._EXEC_FORWARD[method])()
                reverse = False
            elif method in self._EXEC_REVERSE:
                info = getattr(sess.ds, self._EXEC_REVERSE[method])()
                reverse = True
            elif method == "exec.travelTo":
                info = self._travel(sess.ds, params)
                reverse = False
            else:
                raise ProtoError("unknown-method", f"unknown method {method!r}")
        finally:
            sess.mutex.release()
        if reverse and info.reason == "start":
            raise ProtoError("no-predecessor",
                             "already at the first statement of the recording")
        if info.reason == "no-caller":
            raise ProtoError("no-caller", "no caller frame within this event")
        self._notify("stopped", _stopped_params(sess.sid, info))
        return info.to_json()

    def _travel(self, ds: DebugSession, params: dict) -> PauseInfo:
        event = _req_int(params, "event")
        if "script" in params:
            script = _req_str(params, "script")
            line = _req_int(params, "line")
            time = _opt_time(params)
            if time is None:
                raise ProtoError("bad-params",
                                 "travelTo with script/line needs a [c, b] time")
            return ds.time_travel_to(event, script, line, time)
        return ds.travel_to_event(event)

    def _dispatch_inspect(self, method: str, params: dict) -> dict:
        sess = self._session(params)
        what = method[len("inspect."):]
        with sess.mutex:
            ds = sess.ds
            if what == "locals":
                return {"scopes": ds.inspect_locals()}
            if what == "stack":
                return {"frames": ds.inspect_stack()}
            if what == "dom":
                if "node" in params:
                    return ds.inspect_node(_req_int(params, "node"),
                                           _opt_int(params, "offset", 0),
                                           _opt_int(params, "limit", 256))
                return {"documents": ds.inspect_dom()}
            if what == "heap":
                if "path" in params:
                    return ds.inspect_heap_path(_req_str(params, "path"),
                                                _opt_int(params, "offset", 0),
                                                _opt_int(params, "limit", 256))
                return ds.inspect_heap()
            if what in ("timers", "requests", "storage", "animations", "console"):
                return {what: ds.inspect_world(what)}
        raise ProtoError("unknown-method", f"unknown method {method!r}")


# ---- wire helpers ----


def _error_response(msg_id, code, message: str) -> dict:
    return {"id": msg_id, "ok": False, "error": {"code": code, "message": message}}


def _stopped_params(sid: str, info: PauseInfo) -> dict:
    location = None
    if info.status == "paused":
        location = {"event": info.event_index, "uid": info.uid,
                    "script": info.script, "line": info.line, "col": info.col,
                    "fn": info.fn, "depth": info.depth}
    return {
        "session": sid,
        "reason": info.reason,
        "status": info.status,
        "location": location,
        "logicalTime": list(info.time) if info.time is not None else None,
    }


def _req_str(params: dict, key: str) -> str:
    v = params.get(key)
    if not isinstance(v, str):
        raise ProtoError("bad-params", f"{key!r} must be a string")
    return v


def _req_int(params: dict, key: str) -> int:
    v = params.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ProtoError("bad-params", f"{key!r} must be an integer")
    return v


def _opt_int(params: dict, key: str, default: int) -> int:
    if key not in params:
        return default
    return _req_int(params, key)


def _opt_time(params: dict) -> tuple | None:
    if "time" not in params or params["time"] is None:
        return None
    t = params["time"]
    ok = (isinstance(t, list) and len(t) == 2
          and all(isinstance(x, int) and not isinstance(x, bool) for x in t))
    if not ok:
        raise ProtoError("bad-params", "'time' must be a [c, b] pair of integers")
    return (t[0], t[1])

"""CFG-walking interpreter with statement-level suspension.

Execution is a generator that yields each statement just before it runs, so
callers (recorder, replayer, debugger) can pause at any statement boundary.
Guest calls nest generators via `yield from`; nothing is ever suspended
mid-statement from the caller's point of view.

Performance monitors (enabled only while debugging) maintain, per frame:

* logical time (c, b): c is the per-function call ordinal since monitors were
  enabled (reset at each event start), b counts back-edge traversals in the
  frame;
* a branch-trace slot holding the last recorded control transfer: a branch
  (taken CFG edge with >1 successor, or any back edge), the call edge that
  created the frame, or the most recent return edge into the frame, which
  carries the completed call subtree's final statement and its time;
* a last-return slot remembering during which statement instance that return
  landed, so reverse stepping can descend into completed calls made from
  conditions and argument lists.

With monitors off none of this bookkeeping runs.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from ttd.errors import BudgetExceeded, GuestRuntimeError
from ttd.lang import ast_nodes as A
from ttd.lang.cfg import Goto
from ttd.lang.parser import FunctionDef, Program
from ttd.lang.values import Closure, Env, GuestArray, GuestObject, HostRef, render, truthy

DEFAULT_STATEMENT_BUDGET = 10_000_000
MAX_CALL_DEPTH = 128

# Nested guest calls suspend through a chain of generator frames; deep guest
# recursion needs interpreter stack beyond CPython's default.
if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


@dataclass
class EventCompletion:
    statements: int
    error: str | None = None


class Frame:
    __slots__ = ("fn", "env", "block", "idx", "cur_uid", "c", "b", "bts", "last_return")

    def __init__(self, fn: FunctionDef, env: Env):
        self.fn = fn
        self.env = env
        self.block = fn.cfg.entry
        self.idx = 0
        self.cur_uid: int | None = None
        self.c = 0
        self.b = 0
        # bts: ("branch", source_uid, target_block, is_back)
        #    | ("call", caller_stmt_uid)
        #    | ("return", final_uid, final_c, final_b, cont_block)
        self.bts: tuple | None = None
        # last_return: (at_uid, at_c, at_b, final_uid, final_c, final_b)
        self.last_return: tuple | None = None

    def time(self) -> tuple[int, int]:
        return (self.c, self.b)


class Interp:
    def __init__(self, program: Program, host, budget: int = DEFAULT_STATEMENT_BUDGET):
        self.program = program
        self.host = host
        self.budget = budget
        self.globals = Env(None)
        self.stack: list[Frame] = []
        self.monitors = False
        self.fn_counters: dict[int, int] = {}
        self.stmt_count = 0
        self.error: str | None = None
        self.on_statement = None  # hook(stmt, frame, depth), used by trace passes

    # -- monitor control --

    def enable_monitors(self) -> None:
        self.monitors = True
        self.fn_counters = {}

    def disable_monitors(self) -> None:
        self.monitors = False
        self.fn_counters = {}

    def closure_for(self, fn_id: int) -> Closure:
        """Closure over globals, used for script toplevels."""
        return Closure(fn_id, self.globals)

    # -- event execution --

    def run_event(self, invocations: list[tuple[Closure, list[object]]]) -> EventCompletion:
        gen = self.event_gen(invocations)
        while True:
            try:
                next(gen)
            except StopIteration as stop:
                return stop.value

    def event_gen(self, invocations: list[tuple[Closure, list[object]]]):
        """Yields each statement at its begin; returns an EventCompletion.

        The statement budget spans the whole event (all listener callbacks).
        An uncaught guest error aborts its callback and is recorded once; a
        budget overrun aborts the remainder of the event.
        """
        self.stmt_count = 0
        self.error = None
        if self.monitors:
            self.fn_counters = {}
        for closure, args in invocations:
            assert not self.stack, "event dispatched with a non-empty call stack"
            try:
                yield from self._call(closure, args, None)
            except BudgetExceeded as e:
                self.stack.clear()
                if self.error is None:
                    self.error = f"{e.kind}: {e}"
                break
            except GuestRuntimeError as e:
                self.stack.clear()
                if self.error is None:
                    self.error = f"{e.kind}: {e}"
        return EventCompletion(statements=self.stmt_count, error=self.error)

    # -- frames --

    def _call(self, closure: Closure, args: list[object], caller_stmt_uid: int | None):
        fn = self.program.functions[closure.fn_id]
        if len(args) != len(fn.params):
            raise GuestRuntimeError(
                "arity-mismatch",
                f"{fn.name} expects {len(fn.params)} argument(s), got {len(args)}",
            )
        if len(self.stack) >= MAX_CALL_DEPTH:
            raise GuestRuntimeError("stack-overflow", f"call depth exceeds {MAX_CALL_DEPTH}")
        # Toplevel script bodies bind directly into the global scope, so
        # later scripts and retained callbacks see their declarations.
        env = self.globals if fn.is_toplevel else Env(closure.env)
        for p, a in zip(fn.params, args):
            env.declare(p, a)
        frame = Frame(fn, env)
        if self.monitors:
            c = self.fn_counters.get(fn.fn_id, 0) + 1
            self.fn_counters[fn.fn_id] = c
            frame.c = c
            if caller_stmt_uid is not None:
                frame.bts = ("call", caller_stmt_uid)
        self.stack.append(frame)
        try:
            ret = yield from self._run_frame(frame)
        finally:
            self.stack.pop()
        if self.monitors and self.stack and frame.cur_uid is not None:
            # Return edge: surface the completed subtree's final statement.
            lr = frame.last_return
            if lr is not None and lr[0] == frame.cur_uid and lr[1] == frame.c and lr[2] == frame.b:
                final = (lr[3], lr[4], lr[5])
            else:
                final = (frame.cur_uid, frame.c, frame.b)
            caller = self.stack[-1]
            cont = self._continuation_block(caller)
            caller.bts = ("return", final[0], final[1], final[2], cont)
            caller.last_return = (caller.cur_uid, caller.c, caller.b) + final
        return ret

    @staticmethod
    def _continuation_block(caller: Frame) -> int | None:
        term = caller.fn.cfg.blocks[caller.block].term
        return term.target if isinstance(term, Goto) else None

    def _run_frame(self, frame: Frame):
        cfg = frame.fn.cfg
        blocks = cfg.blocks
        while True:
            block = blocks[frame.block]
            stmts = block.stmts
            n = len(stmts)
            branched = False
            while frame.idx < n:
                stmt = stmts[frame.idx]
                self.stmt_count += 1
                if self.stmt_count > self.budget:
                    raise BudgetExceeded(self.budget)
                frame.cur_uid = stmt.uid
                if self.on_statement is not None:
                    self.on_statement(stmt, frame, len(self.stack))
                yield stmt
                k = type(stmt)
                if k is A.Let:
                    v = yield from self._eval(stmt.expr, frame)
                    frame.env.declare(stmt.name, v)
                elif k is A.Assign:
                    yield from self._exec_assign(stmt, frame)
                elif k is A.ExprStmt:
                    yield from self._eval(stmt.expr, frame)
                elif k is A.FuncDecl:
                    frame.env.declare(stmt.name, Closure(stmt.fn_id, frame.env))
                elif k is A.Return:
                    v = None
                    if stmt.expr is not None:
                        v = yield from self._eval(stmt.expr, frame)
                    return v
                else:  # If / While: the block's terminating branch
                    v = yield from self._eval(stmt.cond, frame)
                    term = block.term
                    target = term.then_target if truthy(v) else term.else_target
                    self._edge(frame, cfg, block.id, stmt.uid, target, recorded=True)
                    branched = True
                    break
                frame.idx += 1
            if branched:
                continue
            term = block.term
            if isinstance(term, Goto):
                last_uid = stmts[-1].uid if stmts else None
                self._edge(frame, cfg, block.id, last_uid, term.target, recorded=False)
            else:
                return None  # ExitTerm: fall off the end

    def _edge(self, frame, cfg, src: int, source_uid: int | None, target: int, recorded: bool) -> None:
        if self.monitors:
            is_back = (src, target) in cfg.back_edges
            if recorded or is_back:
                frame.bts = ("branch", source_uid, target, is_back)
            if is_back:
                frame.b += 1
        frame.block = target
        frame.idx = 0

    # -- statements --

    def _exec_assign(self, stmt: A.Assign, frame: Frame):
        t = stmt.target
        if isinstance(t, A.Name):
            v = yield from self._eval(stmt.expr, frame)
            frame.env.assign(t.ident, v)
            return
        if isinstance(t, A.Member):
            obj = yield from self._eval(t.obj, frame)
            v = yield from self._eval(stmt.expr, frame)
            if isinstance(obj, GuestObject):
                obj.props[t.name] = v
                return
            raise GuestRuntimeError("type-error", f"cannot set property on {render(obj)}")
        assert isinstance(t, A.Index)
        obj = yield from self._eval(t.obj, frame)
        idx = yield from self._eval(t.index, frame)
        v = yield from self._eval(stmt.expr, frame)
        if isinstance(obj, GuestArray):
            i = self._array_index(idx)
            if not 0 <= i < len(obj.items):
                raise GuestRuntimeError("index-range", f"index {i} out of range")
            obj.items[i] = v
            return
        if isinstance(obj, GuestObject):
            if not isinstance(idx, str):
                raise GuestRuntimeError("type-error", "object index must be a string")
            obj.props[idx] = v
            return
        raise GuestRuntimeError("type-error", f"cannot index into {render(obj)}")

    @staticmethod
    def _array_index(idx: object) -> int:
        if not isinstance(idx, float) or idx != idx or idx != int(idx):
            raise GuestRuntimeError("type-error", "array index must be an integer")
        return int(idx)

    # -- expressions --

    def _eval(self, e: A.Expr, frame: Frame):
        k = type(e)
        if k is A.NumberLit:
            return e.value
        if k is A.StringLit:
            return e.value
        if k is A.BoolLit:
            return e.value
        if k is A.NullLit:
            return None
        if k is A.Name:
            return frame.env.lookup(e.ident)
        if k is A.Binary:
            if e.op == "&&":
                left = yield from self._eval(e.left, frame)
                if not truthy(left):
                    return left
                return (yield from self._eval(e.right, frame))
            if e.op == "||":
                left = yield from self._eval(e.left, frame)
                if truthy(left):
                    return left
                return (yield from self._eval(e.right, frame))
            left = yield from self._eval(e.left, frame)
            right = yield from self._eval(e.right, frame)
            return _binop(e.op, left, right)
        if k is A.Unary:
            v = yield from self._eval(e.operand, frame)
            if e.op == "!":
                return not truthy(v)
            if not isinstance(v, float):
                raise GuestRuntimeError("type-error", f"unary - on {render(v)}")
            return -v
        if k is A.Call:
            callee = yield from self._eval(e.callee, frame)
            args = []
            for a in e.args:
                args.append((yield from self._eval(a, frame)))
            if not isinstance(callee, Closure):
                raise GuestRuntimeError("not-callable", f"{render(callee)} is not callable")
            return (yield from self._call(callee, args, frame.cur_uid))
        if k is A.HostCall:
            args = []
            for a in e.args:
                args.append((yield from self._eval(a, frame)))
            return self.host.host_call(e.kind, args)
        if k is A.BuiltinCall:
            args = []
            for a in e.args:
                args.append((yield from self._eval(a, frame)))
            return _builtin(e.name, args)
        if k is A.Member:
            obj = yield from self._eval(e.obj, frame)
            if isinstance(obj, GuestObject):
                return obj.props.get(e.name)
            raise GuestRuntimeError("type-error", f"cannot read property of {render(obj)}")
        if k is A.Index:
            obj = yield from self._eval(e.obj, frame)
            idx = yield from self._eval(e.index, frame)
            if isinstance(obj, GuestArray):
                i = self._array_index(idx)
                if 0 <= i < len(obj.items):
                    return obj.items[i]
                return None
            if isinstance(obj, GuestObject):
                if not isinstance(idx, str):
                    raise GuestRuntimeError("type-error", "object index must be a string")
                return obj.props.get(idx)
            raise GuestRuntimeError("type-error", f"cannot index into {render(obj)}")
        if k is A.ObjectLit:
            props: dict[str, object] = {}
            for name, expr in e.fields:
                props[name] = yield from self._eval(expr, frame)
            return GuestObject(props)
        assert k is A.ArrayLit
        items = []
        for expr in e.items:
            items.append((yield from self._eval(expr, frame)))
        return GuestArray(items)


def _binop(op: str, left: object, right: object) -> object:
    if op == "==":
        return _equals(left, right)
    if op == "!=":
        return not _equals(left, right)
    if op == "+":
        if isinstance(left, float) and isinstance(right, float):
            return left + right
        if isinstance(left, str) and isinstance(right, str):
            return left + right
        raise GuestRuntimeError("type-error", f"cannot add {render(left)} and {render(right)}")
    if op in ("-", "*", "/", "%"):
        if not (isinstance(left, float) and isinstance(right, float)):
            raise GuestRuntimeError("type-error", f"arithmetic on non-numbers")
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0.0:
                if left != left or left == 0.0:
                    return float("nan")
                return float("inf") if left > 0 else float("-inf")
            return left / right
        if right == 0.0:
            return float("nan")
        return math.fmod(left, right)
    # comparisons
    if isinstance(left, float) and isinstance(right, float):
        pass
    elif isinstance(left, str) and isinstance(right, str):
        pass
    else:
        raise GuestRuntimeError("type-error", f"cannot compare {render(left)} and {render(right)}")
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise AssertionError(f"unknown operator {op}")


def _equals(left: object, right: object) -> bool:
    if isinstance(left, float) and isinstance(right, float):
        return left == right
    if type(left) is not type(right):
        # bool/float cross-type equality is always false; None == None handled below
        return left is None and right is None
    if isinstance(left, (str, bool, HostRef)):
        return left == right
    return left is right  # objects, arrays, closures, envs: identity


def _builtin(name: str, args: list[object]) -> object:
    if name == "len":
        if len(args) != 1:
            raise GuestRuntimeError("arity-mismatch", "len takes 1 argument")
        v = args[0]
        if isinstance(v, GuestArray):
            return float(len(v.items))
        if isinstance(v, str):
            return float(len(v))
        if isinstance(v, GuestObject):
            return float(len(v.props))
        raise GuestRuntimeError("type-error", f"len of {render(v)}")
    if name == "push":
        if len(args) != 2 or not isinstance(args[0], GuestArray):
            raise GuestRuntimeError("type-error", "push takes (array, value)")
        args[0].items.append(args[1])
        return float(len(args[0].items))
    if name == "keys":
        if len(args) != 1 or not isinstance(args[0], GuestObject):
            raise GuestRuntimeError("type-error", "keys takes an object")
        return GuestArray([k for k in args[0].props])
    if name == "str":
        if len(args) != 1:
            raise GuestRuntimeError("arity-mismatch", "str takes 1 argument")
        return render(args[0])
    if name == "floor":
        if len(args) != 1 or not isinstance(args[0], float):
            raise GuestRuntimeError("type-error", "floor takes a number")
        v = args[0]
        if v != v or v in (float("inf"), float("-inf")):
            return v
        return float(math.floor(v))
    raise AssertionError(f"unknown builtin {name}")

"""Recursive-descent parser producing a `Program`.

A program is a set of scripts; each script's top level is compiled into an
implicit zero-argument function, so event dispatch and script loading share
one execution path. All functions (including nested declarations) are
compiled to CFGs at parse time by `ttd.lang.cfg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ttd.errors import GuestSyntaxError
from ttd.hostapi import BUILTIN_NAMES, HOST_CALL_KINDS
from ttd.lang import ast_nodes as A
from ttd.lang.cfg import Cfg, build_cfg
from ttd.lang.lexer import Token, tokenize

_PRECEDENCE = [
    {"||"},
    {"&&"},
    {"==", "!="},
    {"<", "<=", ">", ">="},
    {"+", "-"},
    {"*", "/", "%"},
]


@dataclass
class FunctionDef:
    fn_id: int
    name: str
    params: tuple[str, ...]
    script: str
    is_toplevel: bool = False  # toplevel bodies run in the global scope
    cfg: Cfg = None  # type: ignore[assignment]  # filled right after body parse


@dataclass
class StmtInfo:
    """Static placement of a statement: its function, block, and index."""

    stmt: A.Stmt
    fn_id: int
    block_id: int
    index: int


@dataclass
class Program:
    scripts: tuple[tuple[str, str], ...]  # (script id, source) in load order
    functions: dict[int, FunctionDef] = field(default_factory=dict)
    toplevels: list[int] = field(default_factory=list)  # fn ids, one per script
    stmts: dict[int, StmtInfo] = field(default_factory=dict)

    def loc_of(self, uid: int) -> A.SourceLocation:
        return self.stmts[uid].stmt.loc

    def function_of(self, uid: int) -> FunctionDef:
        return self.functions[self.stmts[uid].fn_id]

    def resolve_line(self, script: str, line: int) -> int | None:
        """First statement uid on a line, in uid (= source) order."""
        best = None
        for uid, info in self.stmts.items():
            loc = info.stmt.loc
            if loc.script == script and loc.line == line:
                if best is None or uid < best:
                    best = uid
        return best


class _Parser:
    def __init__(self, tokens: list[Token], script: str, uid_base: int, fn_base: int):
        self.toks = tokens
        self.pos = 0
        self.script = script
        self.next_uid = uid_base
        self.next_fn = fn_base
        self.functions: list[tuple[FunctionDef, list[A.Stmt]]] = []

    # -- token plumbing --

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def check(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def match(self, kind: str, text: str | None = None) -> Token | None:
        if self.check(kind, text):
            return self.advance()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.check(kind, text):
            want = text or kind
            raise GuestSyntaxError(f"expected {want!r}, got {t.text!r}", self.script, t.line, t.col)
        return self.advance()

    def err(self, msg: str) -> GuestSyntaxError:
        t = self.peek()
        return GuestSyntaxError(msg, self.script, t.line, t.col)

    def loc(self, t: Token) -> A.SourceLocation:
        return A.SourceLocation(self.script, t.line, t.col)

    def uid(self) -> int:
        u = self.next_uid
        self.next_uid += 1
        return u

    # -- grammar --

    def parse_toplevel(self) -> list[A.Stmt]:
        body: list[A.Stmt] = []
        while not self.check("eof"):
            body.append(self.statement())
        return body

    def block(self) -> list[A.Stmt]:
        self.expect("punct", "{")
        body: list[A.Stmt] = []
        while not self.check("punct", "}"):
            if self.check("eof"):
                raise self.err("unterminated block")
            body.append(self.statement())
        self.expect("punct", "}")
        return body

    def statement(self) -> A.Stmt:
        t = self.peek()
        if self.match("keyword", "let"):
            name = self.expect("ident").text
            self._reject_reserved(name, t)
            self.expect("punct", "=")
            e = self.expression()
            self.expect("punct", ";")
            return A.Let(self.uid(), self.loc(t), name, e)
        if self.match("keyword", "function"):
            name = self.expect("ident").text
            self._reject_reserved(name, t)
            self.expect("punct", "(")
            params: list[str] = []
            if not self.check("punct", ")"):
                while True:
                    p = self.expect("ident").text
                    self._reject_reserved(p, t)
                    params.append(p)
                    if not self.match("punct", ","):
                        break
            self.expect("punct", ")")
            body = self.block()
            fn = FunctionDef(self.next_fn, name, tuple(params), self.script)
            self.next_fn += 1
            self.functions.append((fn, body))
            return A.FuncDecl(self.uid(), self.loc(t), name, fn.fn_id)
        if self.match("keyword", "if"):
            self.expect("punct", "(")
            cond = self.expression()
            self.expect("punct", ")")
            then_body = self.block()
            else_body: list[A.Stmt] | None = None
            if self.match("keyword", "else"):
                if self.check("keyword", "if"):
                    else_body = [self.statement()]
                else:
                    else_body = self.block()
            return A.If(self.uid(), self.loc(t), cond, then_body, else_body)
        if self.match("keyword", "while"):
            self.expect("punct", "(")
            cond = self.expression()
            self.expect("punct", ")")
            body = self.block()
            return A.While(self.uid(), self.loc(t), cond, body)
        if self.match("keyword", "return"):
            e = None
            if not self.check("punct", ";"):
                e = self.expression()
            self.expect("punct", ";")
            return A.Return(self.uid(), self.loc(t), e)
        # expression statement or assignment
        e = self.expression()
        if self.match("punct", "="):
            if not isinstance(e, (A.Name, A.Member, A.Index)):
                raise GuestSyntaxError("invalid assignment target", self.script, t.line, t.col)
            if isinstance(e, A.Name):
                self._reject_reserved(e.ident, t)
            rhs = self.expression()
            self.expect("punct", ";")
            return A.Assign(self.uid(), self.loc(t), e, rhs)
        self.expect("punct", ";")
        return A.ExprStmt(self.uid(), self.loc(t), e)

    def _reject_reserved(self, name: str, t: Token) -> None:
        if name in HOST_CALL_KINDS or name in BUILTIN_NAMES:
            raise GuestSyntaxError(f"{name!r} is a reserved host name", self.script, t.line, t.col)

    def expression(self) -> A.Expr:
        return self.binary(0)

    def binary(self, level: int) -> A.Expr:
        if level >= len(_PRECEDENCE):
            return self.unary()
        left = self.binary(level + 1)
        while self.peek().kind == "punct" and self.peek().text in _PRECEDENCE[level]:
            op = self.advance().text
            right = self.binary(level + 1)
            left = A.Binary(op, left, right)
        return left

    def unary(self) -> A.Expr:
        if self.check("punct", "!") or self.check("punct", "-"):
            op = self.advance().text
            return A.Unary(op, self.unary())
        return self.postfix()

    def postfix(self) -> A.Expr:
        e = self.primary()
        while True:
            if self.match("punct", "("):
                args: list[A.Expr] = []
                if not self.check("punct", ")"):
                    while True:
                        args.append(self.expression())
                        if not self.match("punct", ","):
                            break
                self.expect("punct", ")")
                if isinstance(e, A.Name) and e.ident in HOST_CALL_KINDS:
                    e = A.HostCall(e.ident, tuple(args))
                elif isinstance(e, A.Name) and e.ident in BUILTIN_NAMES:
                    e = A.BuiltinCall(e.ident, tuple(args))
                else:
                    e = A.Call(e, tuple(args))
                continue
            if self.match("punct", "."):
                name = self.expect("ident").text
                e = A.Member(e, name)
                continue
            if self.match("punct", "["):
                idx = self.expression()
                self.expect("punct", "]")
                e = A.Index(e, idx)
                continue
            return e

    def primary(self) -> A.Expr:
        t = self.peek()
        if t.kind == "number":
            self.advance()
            return A.NumberLit(float(t.text))
        if t.kind == "string":
            self.advance()
            return A.StringLit(t.text)
        if self.match("keyword", "true"):
            return A.BoolLit(True)
        if self.match("keyword", "false"):
            return A.BoolLit(False)
        if self.match("keyword", "null"):
            return A.NullLit()
        if t.kind == "ident":
            self.advance()
            return A.Name(t.text)
        if self.match("punct", "("):
            e = self.expression()
            self.expect("punct", ")")
            return e
        if self.match("punct", "{"):
            fields: list[tuple[str, A.Expr]] = []
            if not self.check("punct", "}"):
                while True:
                    key = self.peek()
                    if key.kind in ("ident", "string"):
                        self.advance()
                    else:
                        raise self.err("expected property name")
                    self.expect("punct", ":")
                    fields.append((key.text, self.expression()))
                    if not self.match("punct", ","):
                        break
            self.expect("punct", "}")
            return A.ObjectLit(tuple(fields))
        if self.match("punct", "["):
            items: list[A.Expr] = []
            if not self.check("punct", "]"):
                while True:
                    items.append(self.expression())
                    if not self.match("punct", ","):
                        break
            self.expect("punct", "]")
            return A.ArrayLit(tuple(items))
        raise self.err(f"unexpected token {t.text!r}")


def parse_program(scripts: list[tuple[str, str]]) -> Program:
    """Parse and compile an ordered list of (script id, source) pairs."""
    program = Program(scripts=tuple(scripts))
    next_uid = 0
    next_fn = 0
    for script_id, source in scripts:
        p = _Parser(tokenize(source, script_id), script_id, next_uid, next_fn)
        p.next_fn += 1  # reserve fn id for this script's toplevel
        top_body = p.parse_toplevel()
        top = FunctionDef(next_fn, f"<toplevel:{script_id}>", (), script_id,
                          is_toplevel=True)
        compiled = [(top, top_body)] + p.functions
        for fn, body in compiled:
            fn.cfg = build_cfg(body)
            program.functions[fn.fn_id] = fn
            for block in fn.cfg.blocks:
                for i, stmt in enumerate(block.stmts):
                    program.stmts[stmt.uid] = StmtInfo(stmt, fn.fn_id, block.id, i)
        program.toplevels.append(top.fn_id)
        next_uid = p.next_uid
        next_fn = p.next_fn
    return program

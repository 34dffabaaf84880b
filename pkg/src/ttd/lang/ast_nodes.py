"""AST for the guest language.

Statements carry a program-unique `uid` and a source location; the `uid` is
the identity used by the CFG, the monitors, and the debugger. Branching
statements (`if`, `while`) are located at their condition, which is the unit
the debugger pauses on.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SourceLocation:
    script: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.script}:{self.line}:{self.col}"


# --- expressions ---


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float


@dataclass(frozen=True)
class StringLit(Expr):
    value: str


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class NullLit(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    callee: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class HostCall(Expr):
    kind: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class BuiltinCall(Expr):
    name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class ObjectLit(Expr):
    fields: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class ArrayLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Member(Expr):
    obj: Expr
    name: str


@dataclass(frozen=True)
class Index(Expr):
    obj: Expr
    index: Expr


# --- statements ---


@dataclass
class Stmt:
    uid: int
    loc: SourceLocation


@dataclass
class Let(Stmt):
    name: str = ""
    expr: Expr = field(default_factory=NullLit)


@dataclass
class Assign(Stmt):
    target: Expr = field(default_factory=NullLit)  # Name | Member | Index
    expr: Expr = field(default_factory=NullLit)


@dataclass
class ExprStmt(Stmt):
    expr: Expr = field(default_factory=NullLit)


@dataclass
class Return(Stmt):
    expr: Expr | None = None


@dataclass
class FuncDecl(Stmt):
    name: str = ""
    fn_id: int = -1


@dataclass
class If(Stmt):
    cond: Expr = field(default_factory=NullLit)
    then_body: list[Stmt] = field(default_factory=list)
    else_body: list[Stmt] | None = None


@dataclass
class While(Stmt):
    cond: Expr = field(default_factory=NullLit)
    body: list[Stmt] = field(default_factory=list)


def expr_contains_guest_call(e: Expr) -> bool:
    """True if evaluating `e` may push a guest call frame."""
    match e:
        case Call():
            return True
        case Unary(_, operand):
            return expr_contains_guest_call(operand)
        case Binary(_, left, right):
            return expr_contains_guest_call(left) or expr_contains_guest_call(right)
        case HostCall(_, args) | BuiltinCall(_, args):
            return any(expr_contains_guest_call(a) for a in args)
        case ObjectLit(fields):
            return any(expr_contains_guest_call(v) for _, v in fields)
        case ArrayLit(items):
            return any(expr_contains_guest_call(a) for a in items)
        case Member(obj, _):
            return expr_contains_guest_call(obj)
        case Index(obj, index):
            return expr_contains_guest_call(obj) or expr_contains_guest_call(index)
        case _:
            return False


def stmt_contains_guest_call(s: Stmt) -> bool:
    match s:
        case Let(expr=e) | ExprStmt(expr=e):
            return expr_contains_guest_call(e)
        case Assign(target=t, expr=e):
            return expr_contains_guest_call(t) or expr_contains_guest_call(e)
        case Return(expr=e):
            return e is not None and expr_contains_guest_call(e)
        case If(cond=c) | While(cond=c):
            return expr_contains_guest_call(c)
        case _:
            return False

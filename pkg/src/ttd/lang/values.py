"""Guest runtime values and environments.

Numbers are IEEE-754 doubles (Python floats). Objects, arrays, and
environment records live on the guest heap and compare by identity;
environments are heap objects so closures captured across events serialize
with everything else at checkpoint time.
"""

from __future__ import annotations

from dataclasses import dataclass

from ttd.errors import GuestRuntimeError


class GuestObject:
    __slots__ = ("props",)

    def __init__(self, props: dict[str, object] | None = None):
        self.props: dict[str, object] = props if props is not None else {}


class GuestArray:
    __slots__ = ("items",)

    def __init__(self, items: list[object] | None = None):
        self.items: list[object] = items if items is not None else []


class Env:
    __slots__ = ("parent", "vars")

    def __init__(self, parent: "Env | None", vars: dict[str, object] | None = None):
        self.parent = parent
        self.vars: dict[str, object] = vars if vars is not None else {}

    def lookup(self, name: str) -> object:
        env: Env | None = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise GuestRuntimeError("undefined-variable", f"undefined variable {name!r}")

    def assign(self, name: str, value: object) -> None:
        env: Env | None = self
        while env is not None:
            if name in env.vars:
                env.vars[name] = value
                return
            env = env.parent
        raise GuestRuntimeError("undefined-variable", f"assignment to undefined variable {name!r}")

    def declare(self, name: str, value: object) -> None:
        self.vars[name] = value


class Closure:
    __slots__ = ("fn_id", "env")

    def __init__(self, fn_id: int, env: Env):
        self.fn_id = fn_id
        self.env = env


@dataclass(frozen=True)
class HostRef:
    """Handle to a host resource. Value equality doubles as identity because
    host ids are never reused within a session."""

    kind: str  # 'node' | 'request'
    id: int


def truthy(v: object) -> bool:
    if v is None or v is False:
        return False
    if v is True:
        return True
    if isinstance(v, float):
        return v != 0.0
    if isinstance(v, str):
        return v != ""
    return True


def render(v: object, _seen: tuple = ()) -> str:
    """Deterministic display form, used by console_log and inspection.
    Cyclic structures render the repeated reference as ``<cycle>``."""
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, float):
        if v != v:
            return "NaN"
        if v in (float("inf"), float("-inf")):
            return "Infinity" if v > 0 else "-Infinity"
        if v == int(v) and abs(v) < 2**53:
            return str(int(v))
        return repr(v)
    if isinstance(v, str):
        return v
    if isinstance(v, GuestArray):
        if any(v is s for s in _seen):
            return "<cycle>"
        inner = _seen + (v,)
        return "[" + ", ".join(render(x, inner) for x in v.items) + "]"
    if isinstance(v, GuestObject):
        if any(v is s for s in _seen):
            return "<cycle>"
        inner = _seen + (v,)
        return "{" + ", ".join(f"{k}: {render(x, inner)}" for k, x in v.props.items()) + "}"
    if isinstance(v, Closure):
        return f"<fn#{v.fn_id}>"
    if isinstance(v, HostRef):
        return f"<{v.kind}#{v.id}>"
    if isinstance(v, Env):
        return "<env>"
    raise AssertionError(f"unrenderable value {v!r}")

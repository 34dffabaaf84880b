"""Bracket markup for scenario documents.

Grammar, whitespace separated:

    node  := "[" tag item* "]"
    item  := "#" ident            sets the id attribute
           | ident "=" value      attribute; value is a bare token or string
           | string               text content (concatenated if repeated)
           | node                 child

Example: [div #root class=wide "hi" [img #logo src=pic.png]]

A document is a sequence of top-level nodes. Parsing is positional: every
node records the offset one past its closing bracket, which is the moment an
incremental reader that has consumed that many characters can construct the
node. Only top-level nodes attach to the document, so attachment points are
the close offsets of the top-level nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ttd.errors import ScenarioError


@dataclass
class NodeSpec:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    text: str | None = None
    children: list[NodeSpec] = field(default_factory=list)
    close_offset: int = 0  # offset just past this node's "]"


def parse_markup(markup: str, document_id: str) -> list[NodeSpec]:
    """Full parse; raises ScenarioError on malformed markup."""
    parser = _Parser(markup, document_id)
    roots = parser.parse_all()
    return roots


class _Parser:
    def __init__(self, text: str, document_id: str):
        self.text = text
        self.pos = 0
        self.doc = document_id

    def fail(self, msg: str):
        raise ScenarioError(f"document {self.doc!r}, offset {self.pos}: {msg}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def parse_all(self) -> list[NodeSpec]:
        roots = []
        self.skip_ws()
        while self.pos < len(self.text):
            if self.text[self.pos] != "[":
                self.fail("expected '['")
            roots.append(self.parse_node())
            self.skip_ws()
        return roots

    def parse_node(self) -> NodeSpec:
        assert self.text[self.pos] == "["
        self.pos += 1
        self.skip_ws()
        tag = self.bare_token()
        if not tag:
            self.fail("expected tag name")
        node = NodeSpec(tag=tag)
        while True:
            self.skip_ws()
            if self.pos >= len(self.text):
                self.fail("unclosed node")
            ch = self.text[self.pos]
            if ch == "]":
                self.pos += 1
                node.close_offset = self.pos
                return node
            if ch == "[":
                node.children.append(self.parse_node())
            elif ch == "#":
                self.pos += 1
                ident = self.bare_token()
                if not ident:
                    self.fail("expected id after '#'")
                node.attrs["id"] = ident
            elif ch == '"':
                piece = self.string_token()
                node.text = piece if node.text is None else node.text + piece
            else:
                name = self.bare_token()
                if not name:
                    self.fail(f"unexpected character {ch!r}")
                if self.pos < len(self.text) and self.text[self.pos] == "=":
                    self.pos += 1
                    if self.pos < len(self.text) and self.text[self.pos] == '"':
                        node.attrs[name] = self.string_token()
                    else:
                        value = self.bare_token()
                        if not value:
                            self.fail(f"missing value for attribute {name!r}")
                        node.attrs[name] = value
                else:
                    node.attrs[name] = ""

    def bare_token(self) -> str:
        start = self.pos
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch.isspace() or ch in '[]#"=':
                break
            self.pos += 1
        return self.text[start : self.pos]

    def string_token(self) -> str:
        assert self.text[self.pos] == '"'
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                self.fail("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.text):
                    self.fail("unterminated escape")
                esc = self.text[self.pos]
                out.append({"n": "\n", "t": "\t"}.get(esc, esc))
            else:
                out.append(ch)
            self.pos += 1

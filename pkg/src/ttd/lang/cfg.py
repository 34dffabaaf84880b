"""Control-flow graphs over guest statements.

Blocks are maximal straight-line statement runs. A block ends at a branch
(`if`/`while` condition, which is the block's last statement), at a `return`
or fall-off-the-end (Exit), or after a statement containing a guest call
(the call-return continuation starts a new block). Back edges are exactly
the loop-repeat edges of `while` statements, known structurally at build
time; a block is a loop header iff it is the target of at least one back
edge, and a `while` condition is always its header's first statement.

Empty fall-through blocks produced during construction are pruned, with
back-edge status composed through the removed path; the only empty block
that may survive is an Exit block (a bare function exit point).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ttd.lang import ast_nodes as A


@dataclass(frozen=True)
class Goto:
    target: int


@dataclass(frozen=True)
class Branch:
    then_target: int
    else_target: int


@dataclass(frozen=True)
class ExitTerm:
    pass


Terminator = Goto | Branch | ExitTerm


@dataclass
class Block:
    id: int
    stmts: list[A.Stmt] = field(default_factory=list)
    term: Terminator | None = None


@dataclass
class Cfg:
    blocks: list[Block]
    entry: int
    back_edges: frozenset[tuple[int, int]]
    loop_headers: frozenset[int]

    def successors(self, block_id: int) -> tuple[int, ...]:
        t = self.blocks[block_id].term
        if isinstance(t, Goto):
            return (t.target,)
        if isinstance(t, Branch):
            return (t.then_target, t.else_target)
        return ()

    def is_back_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self.back_edges


class _Builder:
    def __init__(self) -> None:
        self.blocks: list[Block] = []
        self.closing: set[tuple[int, int]] = set()  # while loop-repeat edges

    def new_block(self) -> Block:
        b = Block(len(self.blocks))
        self.blocks.append(b)
        return b

    def seq(self, stmts: list[A.Stmt], cur: Block) -> Block | None:
        """Lay out `stmts` starting in `cur`; returns the open fall-through
        block, or None if every path returned."""
        for st in stmts:
            if isinstance(st, A.Return):
                cur.stmts.append(st)
                cur.term = ExitTerm()
                return None  # anything after a return is unreachable
            if isinstance(st, A.If):
                cur.stmts.append(st)
                then_b = self.new_block()
                tb_exit = self.seq(st.then_body, then_b)
                eb_exit: Block | None = None
                else_b: Block | None = None
                if st.else_body is not None:
                    else_b = self.new_block()
                    eb_exit = self.seq(st.else_body, else_b)
                join = self.new_block()
                cur.term = Branch(then_b.id, else_b.id if else_b else join.id)
                if tb_exit is not None:
                    tb_exit.term = Goto(join.id)
                if eb_exit is not None:
                    eb_exit.term = Goto(join.id)
                cur = join
                continue
            if isinstance(st, A.While):
                header = self.new_block()
                header.stmts.append(st)
                cur.term = Goto(header.id)
                body_b = self.new_block()
                exit_b = self.new_block()
                header.term = Branch(body_b.id, exit_b.id)
                b_exit = self.seq(st.body, body_b)
                if b_exit is not None:
                    b_exit.term = Goto(header.id)
                    self.closing.add((b_exit.id, header.id))
                cur = exit_b
                continue
            cur.stmts.append(st)
            if A.stmt_contains_guest_call(st):
                nxt = self.new_block()
                cur.term = Goto(nxt.id)
                cur = nxt
        return cur


def build_cfg(body: list[A.Stmt]) -> Cfg:
    b = _Builder()
    entry = b.new_block()
    open_block = b.seq(body, entry)
    if open_block is not None:
        open_block.term = ExitTerm()

    # Prune empty Goto blocks, composing back-edge status through them.
    removed: dict[int, int] = {}
    changed = True
    while changed:
        changed = False
        for blk in b.blocks:
            if blk.id in removed or blk.stmts:
                continue
            if isinstance(blk.term, Goto) and blk.term.target != blk.id:
                removed[blk.id] = blk.term.target
                changed = True

    def follow(target: int) -> tuple[int, bool]:
        crossed_back = False
        while target in removed:
            nxt = removed[target]
            if (target, nxt) in b.closing:
                crossed_back = True
            target = nxt
        return target, crossed_back

    kept = [blk for blk in b.blocks if blk.id not in removed]
    remap = {blk.id: i for i, blk in enumerate(kept)}
    back_edges: set[tuple[int, int]] = set()
    for blk in kept:
        t = blk.term
        if isinstance(t, Goto):
            dst, crossed = follow(t.target)
            if crossed or (blk.id, t.target) in b.closing:
                back_edges.add((remap[blk.id], remap[dst]))
            blk.term = Goto(remap[dst])
        elif isinstance(t, Branch):
            tt, tcross = follow(t.then_target)
            et, ecross = follow(t.else_target)
            if tcross or (blk.id, t.then_target) in b.closing:
                back_edges.add((remap[blk.id], remap[tt]))
            if ecross or (blk.id, t.else_target) in b.closing:
                back_edges.add((remap[blk.id], remap[et]))
            blk.term = Branch(remap[tt], remap[et])
        else:
            assert isinstance(t, ExitTerm)
    entry_id, _ = follow(entry.id)
    for i, blk in enumerate(kept):
        blk.id = i
        assert blk.stmts or isinstance(blk.term, ExitTerm)
        if isinstance(blk.term, Branch):
            assert isinstance(blk.stmts[-1], (A.If, A.While))
    return Cfg(
        blocks=kept,
        entry=remap[entry_id],
        back_edges=frozenset(back_edges),
        loop_headers=frozenset(dst for _, dst in back_edges),
    )

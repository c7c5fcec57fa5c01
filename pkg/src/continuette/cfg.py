"""Control-flow graphs over resolved method bodies.

Edges carry the labels the commitment analysis and witness replay need:
fallthrough, then, else, loop-back, loop-exit, return, throw. `throw`
edges lead to a distinguished abnormal-exit node that the must-analysis
ignores; while-loops get a zero-iteration bypass edge (label loop-exit).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ast_nodes import (
    Assign, Block, CallStmt, Expr, If, MethodDecl, Print, Return, SendStmt,
    Stmt, Throw, VarDecl, While,
)


@dataclass
class BasicBlock:
    bid: int
    stmts: list[Stmt] = field(default_factory=list)
    cond: Optional[Expr] = None  # set on two-way blocks (if / while headers)
    succs: list[tuple[str, "BasicBlock"]] = field(default_factory=list)
    loop_depth: int = 0
    is_exit: bool = False
    is_abnormal: bool = False

    def succ(self, label: str) -> "BasicBlock":
        for lab, blk in self.succs:
            if lab == label:
                return blk
        raise KeyError(label)


@dataclass
class Cfg:
    method: MethodDecl
    blocks: list[BasicBlock]
    entry: BasicBlock
    exit: BasicBlock
    abnormal: BasicBlock

    @property
    def body_blocks(self) -> list[BasicBlock]:
        return [b for b in self.blocks if not (b.is_exit or b.is_abnormal)]


class _Builder:
    def __init__(self, method: MethodDecl):
        self.method = method
        self.blocks: list[BasicBlock] = []
        self.loop_depth = 0

    def new_block(self) -> BasicBlock:
        b = BasicBlock(len(self.blocks), loop_depth=self.loop_depth)
        self.blocks.append(b)
        return b

    def build(self) -> Cfg:
        entry = self.new_block()
        exit_b = BasicBlock(-1, is_exit=True)
        abnormal = BasicBlock(-2, is_abnormal=True)
        end = self.lower_block(self.method.body, entry, exit_b, abnormal)
        if end is not None:
            end.succs.append(("fallthrough", exit_b))
        blocks = _prune_unreachable(entry, self.blocks)
        all_blocks = blocks + [exit_b, abnormal]
        return Cfg(self.method, all_blocks, entry, exit_b, abnormal)

    def lower_block(self, block: Block, cur: Optional[BasicBlock],
                    exit_b: BasicBlock, abnormal: BasicBlock) -> Optional[BasicBlock]:
        for st in block.stmts:
            if cur is None:
                # unreachable code after return/throw; drop it
                return None
            cur = self.lower_stmt(st, cur, exit_b, abnormal)
        return cur

    def lower_stmt(self, st: Stmt, cur: BasicBlock, exit_b: BasicBlock,
                   abnormal: BasicBlock) -> Optional[BasicBlock]:
        if isinstance(st, (VarDecl, Assign, CallStmt, SendStmt, Print)):
            cur.stmts.append(st)
            return cur
        if isinstance(st, Return):
            cur.succs.append(("return", exit_b))
            return None
        if isinstance(st, Throw):
            cur.stmts.append(st)
            cur.succs.append(("throw", abnormal))
            return None
        if isinstance(st, Block):
            return self.lower_block(st, cur, exit_b, abnormal)
        if isinstance(st, If):
            cur.cond = st.cond
            then_b = self.new_block()
            cur.succs.append(("then", then_b))
            then_end = self.lower_block(st.then_block, then_b, exit_b, abnormal)
            join = self.new_block()
            if st.else_block is not None:
                else_b = self.new_block()
                cur.succs.append(("else", else_b))
                else_end = self.lower_block(st.else_block, else_b, exit_b, abnormal)
                if else_end is not None:
                    else_end.succs.append(("fallthrough", join))
            else:
                cur.succs.append(("else", join))
            if then_end is not None:
                then_end.succs.append(("fallthrough", join))
            return join
        if isinstance(st, While):
            header = self.new_block()
            cur.succs.append(("fallthrough", header))
            header.cond = st.cond
            after = self.new_block()
            self.loop_depth += 1
            body = self.new_block()
            header.succs.append(("then", body))
            header.succs.append(("loop-exit", after))
            body_end = self.lower_block(st.body, body, exit_b, abnormal)
            self.loop_depth -= 1
            if body_end is not None:
                body_end.succs.append(("loop-back", header))
            return after
        raise TypeError(f"not a statement node: {st!r}")


def _prune_unreachable(entry: BasicBlock, blocks: list[BasicBlock]) -> list[BasicBlock]:
    seen = {id(entry)}
    work = [entry]
    while work:
        b = work.pop()
        for _, nxt in b.succs:
            if id(nxt) not in seen:
                seen.add(id(nxt))
                work.append(nxt)
    kept = [b for b in blocks if id(b) in seen]
    for i, b in enumerate(kept):
        b.bid = i
    return kept


def build_cfg(method: MethodDecl) -> Cfg:
    """Build the CFG of a resolved method body; total on resolved bodies."""
    return _Builder(method).build()

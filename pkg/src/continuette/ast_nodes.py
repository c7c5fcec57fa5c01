"""AST node definitions.

Nodes are plain mutable dataclasses; semantic analysis annotates them in
place (``ty``, ``binding``, ``target`` and friends default to None until
resolution runs). ``fingerprint`` gives a span- and annotation-free
structural key for equality testing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import Span, SourceText

# Fields ignored by fingerprint(): spans plus everything sema writes.
_NON_STRUCTURAL = {
    "span", "ty", "binding", "target", "pass_through", "resolved_params",
    "owner", "source", "field_owner",
}


@dataclass
class Param:
    name: str
    type_name: str
    is_final: bool
    is_required: bool
    span: Span


@dataclass
class CommitmentSpec:
    """One declared future obligation from a sends-clause."""

    target_name: str
    params: list[Param]
    span: Span
    # sema annotations
    target: Optional["MethodDecl"] = None
    pass_through: Optional[list[int]] = None  # positions into params


# --- expressions ---------------------------------------------------------


@dataclass
class IntLit:
    value: int
    span: Span
    ty: Optional[str] = None


@dataclass
class BoolLit:
    value: bool
    span: Span
    ty: Optional[str] = None


@dataclass
class StrLit:
    value: str
    span: Span
    ty: Optional[str] = None


@dataclass
class NullLit:
    span: Span
    ty: Optional[str] = None


@dataclass
class Ident:
    name: str
    span: Span
    ty: Optional[str] = None
    binding: Optional[object] = None  # Param | VarDecl | FieldDecl


@dataclass
class FieldAccess:
    obj: "Expr"
    name: str
    span: Span
    ty: Optional[str] = None
    field_owner: Optional["ModuleDecl"] = None


@dataclass
class NewExpr:
    module_name: str
    span: Span
    ty: Optional[str] = None
    target: Optional["ModuleDecl"] = None


@dataclass
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Span
    ty: Optional[str] = None


Expr = Union[IntLit, BoolLit, StrLit, NullLit, Ident, FieldAccess, NewExpr, Binary]


# --- statements ----------------------------------------------------------


@dataclass
class Block:
    stmts: list["Stmt"]
    span: Span


@dataclass
class VarDecl:
    type_name: str
    name: str
    init: Expr
    span: Span


@dataclass
class Assign:
    lvalue: Expr  # Ident or FieldAccess
    value: Expr
    span: Span


@dataclass
class If:
    cond: Expr
    then_block: Block
    else_block: Optional[Block]
    span: Span


@dataclass
class While:
    cond: Expr
    body: Block
    span: Span


@dataclass
class CallStmt:
    receiver: Optional[Expr]
    name: str
    args: list[Expr]
    span: Span
    target: Optional["MethodDecl"] = None

    @property
    def full_args(self) -> list[Expr]:
        """Arguments with the receiver prepended (explicit-first-parameter)."""
        return [self.receiver, *self.args] if self.receiver is not None else self.args


@dataclass
class ExpectArm:
    name: str
    params: list[Param]
    body: Block
    span: Span


@dataclass
class SendStmt:
    receiver: Optional[Expr]
    name: str
    args: list[Expr]
    expect: Optional[ExpectArm]
    span: Span
    expect_origin: Optional[str] = None  # set by desugaring, name of lifted event
    target: Optional["MethodDecl"] = None

    @property
    def full_args(self) -> list[Expr]:
        return [self.receiver, *self.args] if self.receiver is not None else self.args


@dataclass
class Return:
    span: Span


@dataclass
class Throw:
    value: Expr
    span: Span


@dataclass
class Print:
    value: Expr
    span: Span


Stmt = Union[VarDecl, Assign, If, While, CallStmt, SendStmt, Return, Throw, Print, Block]


# --- declarations --------------------------------------------------------


@dataclass
class FieldDecl:
    type_name: str
    name: str
    init: Optional[Expr]  # literal or None
    span: Span


@dataclass
class CatchClause:
    binder: str
    body: Block
    span: Span


@dataclass
class MethodDecl:
    kind: str  # "void" | "event"
    name: str
    params: list[Param]
    sends: list[CommitmentSpec]
    body: Block
    catch_clause: Optional[CatchClause]
    span: Span
    owner: Optional["ModuleDecl"] = None


@dataclass
class ModuleDecl:
    name: str
    fields: list[FieldDecl]
    methods: list[MethodDecl]
    span: Span

    def member(self, name: str):
        for f in self.fields:
            if f.name == name:
                return f
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass
class SourceProgram:
    modules: list[ModuleDecl]
    source: SourceText = field(default_factory=lambda: SourceText.single(""))

    def module(self, name: str) -> Optional[ModuleDecl]:
        for m in self.modules:
            if m.name == name:
                return m
        return None


def fingerprint(node) -> object:
    """Structural key for a node tree, ignoring spans and sema annotations."""
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        items = []
        for f in dataclasses.fields(node):
            if f.name in _NON_STRUCTURAL:
                continue
            items.append((f.name, fingerprint(getattr(node, f.name))))
        return (type(node).__name__, tuple(items))
    if isinstance(node, list):
        return tuple(fingerprint(x) for x in node)
    return node

"""Pretty-printer; its output reparses to a structurally identical AST."""

from __future__ import annotations

from .ast_nodes import (
    Assign, Binary, Block, BoolLit, CallStmt, CommitmentSpec, Expr,
    FieldAccess, Ident, If, IntLit, MethodDecl, ModuleDecl, NewExpr, NullLit,
    Param, Print, Return, SendStmt, SourceProgram, Stmt, StrLit, Throw,
    VarDecl, While,
)

_PREC = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_ATOM = 7


def escape_string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"')
    return out.replace("\n", "\\n").replace("\t", "\\t")


def print_expr(e: Expr) -> str:
    return _expr(e, 0)


def _expr(e: Expr, parent_prec: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, StrLit):
        return f'"{escape_string(e.value)}"'
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, NewExpr):
        return f"new {e.module_name}()"
    if isinstance(e, FieldAccess):
        return f"{_expr(e.obj, _ATOM)}.{e.name}"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        text = f"{_expr(e.lhs, prec)} {e.op} {_expr(e.rhs, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"not an expression node: {e!r}")


def _param(p: Param) -> str:
    mods = ("final " if p.is_final else "") + ("required " if p.is_required else "")
    return f"{mods}{p.type_name} {p.name}"


def _commit(c: CommitmentSpec) -> str:
    return f"{c.target_name}({', '.join(_param(p) for p in c.params)})"


def _chain(receiver, name: str) -> str:
    return f"{_expr(receiver, _ATOM)}.{name}" if receiver is not None else name


class _Printer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def emit(self, text: str):
        self.lines.append("    " * self.depth + text)

    def block(self, b: Block, header: str, trailer: str = ""):
        self.emit(header + " {")
        self.depth += 1
        for s in b.stmts:
            self.stmt(s)
        self.depth -= 1
        self.emit("}" + trailer)

    def stmt(self, s: Stmt):
        if isinstance(s, VarDecl):
            self.emit(f"{s.type_name} {s.name} = {print_expr(s.init)};")
        elif isinstance(s, Assign):
            self.emit(f"{print_expr(s.lvalue)} = {print_expr(s.value)};")
        elif isinstance(s, If):
            self.emit(f"if ({print_expr(s.cond)}) {{")
            self.depth += 1
            for sub in s.then_block.stmts:
                self.stmt(sub)
            self.depth -= 1
            if s.else_block is None:
                self.emit("}")
            else:
                self.emit("} else {")
                self.depth += 1
                for sub in s.else_block.stmts:
                    self.stmt(sub)
                self.depth -= 1
                self.emit("}")
        elif isinstance(s, While):
            self.block(s.body, f"while ({print_expr(s.cond)})")
        elif isinstance(s, CallStmt):
            args = ", ".join(print_expr(a) for a in s.args)
            self.emit(f"{_chain(s.receiver, s.name)}({args});")
        elif isinstance(s, SendStmt):
            args = ", ".join(print_expr(a) for a in s.args)
            head = f"send {_chain(s.receiver, s.name)}({args})"
            if s.expect is None:
                self.emit(head + ";")
            else:
                params = ", ".join(_param(p) for p in s.expect.params)
                self.block(s.expect.body, f"{head} expect {s.expect.name}({params})")
        elif isinstance(s, Return):
            self.emit("return;")
        elif isinstance(s, Throw):
            self.emit(f"throw {print_expr(s.value)};")
        elif isinstance(s, Print):
            self.emit(f"print {print_expr(s.value)};")
        elif isinstance(s, Block):
            self.block(s, "")
        else:
            raise TypeError(f"not a statement node: {s!r}")

    def method(self, m: MethodDecl):
        params = ", ".join(_param(p) for p in m.params)
        header = f"{m.kind} {m.name}({params})"
        if m.sends:
            header += " sends " + ", ".join(_commit(c) for c in m.sends)
        self.block(m.body, header)
        if m.catch_clause is not None:
            self.block(m.catch_clause.body,
                       f"catch (ContinuityError {m.catch_clause.binder})")

    def module(self, mod: ModuleDecl):
        self.emit(f"module {mod.name} {{")
        self.depth += 1
        for f in mod.fields:
            init = f" = {print_expr(f.init)}" if f.init is not None else ""
            self.emit(f"{f.type_name} {f.name}{init};")
        for m in mod.methods:
            self.method(m)
        self.depth -= 1
        self.emit("}")


def pretty_print(program: SourceProgram) -> str:
    p = _Printer()
    for mod in program.modules:
        p.module(mod)
    return "\n".join(p.lines) + "\n"

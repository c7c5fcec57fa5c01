"""Name resolution, type checking, event/sends legality, and expect desugaring.

The pipeline is: ``desugar_expect`` (purely syntactic lifting of expect arms
into module-level event methods), then ``resolve_and_typecheck`` (binds every
name, types every expression, enforces the send/call legality rules), then
``check_sends_conformance`` (declaration-level compatibility of sends-clauses
with their targets and with transitive-discharge sites). Every pass collects
errors and keeps going so a single run reports everything it can.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .ast_nodes import (
    Assign, Binary, Block, BoolLit, CallStmt, CatchClause, CommitmentSpec,
    Expr, FieldAccess, FieldDecl, Ident, If, IntLit, MethodDecl, ModuleDecl,
    NewExpr, NullLit, Param, Print, Return, SendStmt, SourceProgram, Stmt,
    StrLit, Throw, VarDecl, While,
)
from .diagnostics import Diagnostic, Span

BUILTIN_TYPES = ("int", "bool", "string", "Object")

E_UNRESOLVED = "E_UNRESOLVED"
E_TYPE = "E_TYPE"
E_EVENT_CALLED = "E_EVENT_CALLED"
E_EXPECT_UNDECLARED = "E_EXPECT_UNDECLARED"
E_EXPECT_CLASH = "E_EXPECT_CLASH"
E_LOCAL_CAPTURE = "E_LOCAL_CAPTURE"
E_REQUIRED_NULL = "E_REQUIRED_NULL"
E_SENDS_CONFORMANCE = "E_SENDS_CONFORMANCE"


@dataclass(frozen=True)
class SemaError:
    code: str
    span: Span
    message: str

    def to_diagnostic(self) -> Diagnostic:
        return Diagnostic(self.code, self.span, self.message)


@dataclass
class ResolvedProgram:
    """A SourceProgram whose nodes carry resolution/type annotations."""

    program: SourceProgram
    modules: dict[str, ModuleDecl]

    def methods(self):
        for mod in self.program.modules:
            for m in mod.methods:
                yield mod, m


@dataclass
class CatchBinder:
    """Binding for the ContinuityError parameter of a catch clause."""

    name: str
    type_name: str = "ContinuityError"


# --- desugaring ----------------------------------------------------------


def desugar_expect(program: SourceProgram) -> tuple[SourceProgram, list[SemaError]]:
    """Rewrite every ``send f(...) expect g(...) {body}`` into a plain send
    plus a lifted module-level event ``g``.

    Mutates the program in place; a program with no expect arms comes back
    structurally unchanged. Lifted bodies are checked for references to the
    enclosing method's locals or parameters (events run in module scope).
    """
    errors: list[SemaError] = []
    for module in program.modules:
        pending = list(module.methods)
        while pending:
            method = pending.pop(0)
            _desugar_body(method.body, [], method, module, pending, errors)
    return program, errors


def _desugar_body(block: Block, scopes: list[set[str]], method: MethodDecl,
                  module: ModuleDecl, pending: list[MethodDecl],
                  errors: list[SemaError]) -> None:
    scopes.append(set())
    for st in block.stmts:
        if isinstance(st, VarDecl):
            scopes[-1].add(st.name)
        elif isinstance(st, If):
            _desugar_body(st.then_block, scopes, method, module, pending, errors)
            if st.else_block is not None:
                _desugar_body(st.else_block, scopes, method, module, pending, errors)
        elif isinstance(st, While):
            _desugar_body(st.body, scopes, method, module, pending, errors)
        elif isinstance(st, Block):
            _desugar_body(st, scopes, method, module, pending, errors)
        elif isinstance(st, SendStmt) and st.expect is not None:
            arm = st.expect
            enclosing = {p.name for p in method.params}
            enclosing.update(*scopes)
            for use in _free_idents(arm.body, {p.name for p in arm.params}):
                if use.name in enclosing:
                    errors.append(SemaError(
                        E_LOCAL_CAPTURE, use.span,
                        f"expect body of {arm.name!r} may not reference "
                        f"{use.name!r} from the enclosing method {method.name!r}; "
                        "event methods run in module scope"))
            if module.member(arm.name) is not None:
                errors.append(SemaError(
                    E_EXPECT_CLASH, arm.span,
                    f"cannot lift expect arm: module {module.name!r} already "
                    f"has a member named {arm.name!r}"))
                st.expect = None
                continue
            lifted = MethodDecl("event", arm.name, arm.params, [], arm.body,
                                None, arm.span)
            module.methods.append(lifted)
            pending.append(lifted)
            st.expect = None
            st.expect_origin = arm.name
    scopes.pop()


def _free_idents(block: Block, bound: set[str]) -> list[Ident]:
    """Identifier uses in a block not bound by `bound` or a preceding local."""
    free: list[Ident] = []

    def uses(e: Optional[Expr], names: set[str]):
        if isinstance(e, Ident):
            if e.name not in names:
                free.append(e)
        elif isinstance(e, FieldAccess):
            uses(e.obj, names)
        elif isinstance(e, Binary):
            uses(e.lhs, names)
            uses(e.rhs, names)

    def walk(b: Block, outer: set[str]):
        names = set(outer)
        for st in b.stmts:
            if isinstance(st, VarDecl):
                uses(st.init, names)
                names.add(st.name)
            elif isinstance(st, Assign):
                uses(st.lvalue, names)
                uses(st.value, names)
            elif isinstance(st, If):
                uses(st.cond, names)
                walk(st.then_block, names)
                if st.else_block is not None:
                    walk(st.else_block, names)
            elif isinstance(st, While):
                uses(st.cond, names)
                walk(st.body, names)
            elif isinstance(st, (CallStmt, SendStmt)):
                uses(st.receiver, names)
                for a in st.args:
                    uses(a, names)
                if isinstance(st, SendStmt) and st.expect is not None:
                    walk(st.expect.body,
                         names | {p.name for p in st.expect.params})
            elif isinstance(st, (Throw, Print)):
                uses(st.value, names)
            elif isinstance(st, Block):
                walk(st, names)

    walk(block, set(bound))
    return free


# --- resolution and type checking ----------------------------------------


def resolve_and_typecheck(program: SourceProgram) -> tuple[ResolvedProgram, list[SemaError]]:
    """Bind names, infer types, and enforce the legality rules.

    Returns the annotated program and all errors found; annotations are only
    trustworthy when the error list is empty.
    """
    return _Resolver(program).run()


def _is_ref_type(t: str) -> bool:
    return t not in ("int", "bool")


class _Resolver:
    def __init__(self, program: SourceProgram):
        self.program = program
        self.modules = {m.name: m for m in program.modules}
        self.errors: list[SemaError] = []

    def error(self, code: str, span: Span, message: str):
        self.errors.append(SemaError(code, span, message))

    def run(self) -> tuple[ResolvedProgram, list[SemaError]]:
        for mod in self.program.modules:
            for f in mod.fields:
                self.check_type(f.type_name, f.span)
                if f.init is not None:
                    it = self.literal_type(f.init)
                    if not self.assignable(f.type_name, it):
                        self.error(E_TYPE, f.span,
                                   f"field {f.name!r} of type {f.type_name!r} "
                                   f"cannot be initialized with {it!r}")
            for m in mod.methods:
                m.owner = mod
                for p in m.params:
                    self.check_type(p.type_name, p.span)
                self.resolve_commitments(mod, m)
        for mod in self.program.modules:
            for m in mod.methods:
                _MethodChecker(self, mod, m).check()
        return ResolvedProgram(self.program, self.modules), self.errors

    def check_type(self, name: str, span: Span) -> bool:
        if name in BUILTIN_TYPES or name in self.modules:
            return True
        self.error(E_UNRESOLVED, span, f"unknown type {name!r}")
        return False

    def literal_type(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, StrLit):
            return "string"
        return "null"

    def assignable(self, dst: str, src: Optional[str]) -> bool:
        if src is None:
            return True  # already reported; avoid cascades
        if src == "null":
            return _is_ref_type(dst)
        if dst == src:
            return True
        if dst == "Object":
            return _is_ref_type(src)
        return False

    def resolve_commitments(self, mod: ModuleDecl, method: MethodDecl):
        param_names = {p.name for p in method.params}
        for c in method.sends:
            for p in c.params:
                self.check_type(p.type_name, p.span)
            member = mod.member(c.target_name)
            if isinstance(member, FieldDecl):
                self.error(E_TYPE, c.span,
                           f"commitment target {c.target_name!r} is a field, "
                           "not a method")
            elif isinstance(member, MethodDecl):
                c.target = member
            else:
                candidates = [m2 for other in self.program.modules
                              for m2 in other.methods
                              if m2.name == c.target_name]
                if len(candidates) == 1:
                    c.target = candidates[0]
                elif not candidates:
                    self.error(E_UNRESOLVED, c.span,
                               f"commitment target {c.target_name!r} does not "
                               "resolve to any method")
                else:
                    self.error(E_UNRESOLVED, c.span,
                               f"commitment target {c.target_name!r} is "
                               "ambiguous across modules")
            c.pass_through = [i for i, p in enumerate(c.params)
                              if p.name in param_names]


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: dict[str, object] = {}

    def lookup(self, name: str):
        scope: Optional[_Scope] = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


_BINDING_TYPE = {
    Param: lambda b: b.type_name,
    VarDecl: lambda b: b.type_name,
    FieldDecl: lambda b: b.type_name,
    CatchBinder: lambda b: b.type_name,
}


class _MethodChecker:
    def __init__(self, resolver: _Resolver, module: ModuleDecl, method: MethodDecl):
        self.r = resolver
        self.module = module
        self.method = method

    def check(self):
        root = _Scope()
        for p in self.method.params:
            root.names[p.name] = p
        self.walk_block(self.method.body, root)
        if self.method.catch_clause is not None:
            catch_scope = _Scope()
            for p in self.method.params:
                catch_scope.names[p.name] = p
            catch_scope.names[self.method.catch_clause.binder] = CatchBinder(
                self.method.catch_clause.binder)
            self.walk_block(self.method.catch_clause.body, catch_scope)

    def walk_block(self, block: Block, scope: _Scope):
        inner = _Scope(scope)
        for st in block.stmts:
            self.walk_stmt(st, inner)

    def walk_stmt(self, st: Stmt, scope: _Scope):
        r = self.r
        if isinstance(st, VarDecl):
            r.check_type(st.type_name, st.span)
            it = self.type_expr(st.init, scope)
            if not r.assignable(st.type_name, it):
                r.error(E_TYPE, st.span,
                        f"cannot initialize {st.type_name!r} variable "
                        f"{st.name!r} from {it!r}")
            scope.names[st.name] = st
        elif isinstance(st, Assign):
            lt = self.type_expr(st.lvalue, scope)
            if isinstance(st.lvalue, Ident):
                b = st.lvalue.binding
                if isinstance(b, Param) and b.is_final:
                    r.error(E_TYPE, st.span,
                            f"cannot assign to final parameter {b.name!r}")
                elif isinstance(b, CatchBinder):
                    r.error(E_TYPE, st.span, "cannot assign to the catch binder")
            vt = self.type_expr(st.value, scope)
            if lt is not None and not r.assignable(lt, vt):
                r.error(E_TYPE, st.span, f"cannot assign {vt!r} to {lt!r}")
        elif isinstance(st, If):
            ct = self.type_expr(st.cond, scope)
            if ct not in (None, "bool"):
                r.error(E_TYPE, st.cond.span, f"if condition must be bool, got {ct!r}")
            self.walk_block(st.then_block, scope)
            if st.else_block is not None:
                self.walk_block(st.else_block, scope)
        elif isinstance(st, While):
            ct = self.type_expr(st.cond, scope)
            if ct not in (None, "bool"):
                r.error(E_TYPE, st.cond.span,
                        f"while condition must be bool, got {ct!r}")
            self.walk_block(st.body, scope)
        elif isinstance(st, CallStmt):
            self.resolve_invocation(st, scope, mode="call")
        elif isinstance(st, SendStmt):
            self.resolve_invocation(st, scope, mode="send")
        elif isinstance(st, Throw):
            vt = self.type_expr(st.value, scope)
            if vt not in (None, "string"):
                r.error(E_TYPE, st.span,
                        f"throw payloads are string diagnostics, got {vt!r}")
        elif isinstance(st, Print):
            self.type_expr(st.value, scope)
        elif isinstance(st, Return):
            pass
        elif isinstance(st, Block):
            self.walk_block(st, scope)

    def resolve_invocation(self, st, scope: _Scope, mode: str):
        r = self.r
        target: Optional[MethodDecl] = None
        if st.receiver is None:
            member = self.module.member(st.name)
            if member is None:
                r.error(E_UNRESOLVED, st.span,
                        f"no method named {st.name!r} in module "
                        f"{self.module.name!r}")
            elif isinstance(member, FieldDecl):
                r.error(E_TYPE, st.span, f"{st.name!r} is a field, not a method")
            else:
                target = member
        else:
            rt = self.type_expr(st.receiver, scope)
            if rt is None:
                pass
            elif rt not in r.modules:
                r.error(E_TYPE, st.span,
                        f"cannot invoke a method through a value of type {rt!r}")
            else:
                member = r.modules[rt].member(st.name)
                if member is None:
                    r.error(E_UNRESOLVED, st.span,
                            f"no method named {st.name!r} in module {rt!r}")
                elif isinstance(member, FieldDecl):
                    r.error(E_TYPE, st.span,
                            f"{st.name!r} is a field, not a method")
                else:
                    target = member
        arg_types = [self.type_expr(a, scope) for a in st.full_args]
        if target is None:
            return
        st.target = target
        if mode == "call" and target.kind == "event":
            r.error(E_EVENT_CALLED, st.span,
                    f"event method {target.name!r} can only be invoked via send")
        origin = getattr(st, "expect_origin", None)
        if origin is not None:
            if not any(c.target_name == origin for c in target.sends):
                r.error(E_EXPECT_UNDECLARED, st.span,
                        f"{target.name!r} declares no commitment to {origin!r}; "
                        "the expect arm presumes one")
        if len(arg_types) != len(target.params):
            r.error(E_TYPE, st.span,
                    f"{target.name!r} takes {len(target.params)} argument(s), "
                    f"got {len(arg_types)}")
            return
        for arg, at, p in zip(st.full_args, arg_types, target.params):
            if not r.assignable(p.type_name, at):
                r.error(E_TYPE, arg.span,
                        f"argument for {p.name!r} must be {p.type_name!r}, "
                        f"got {at!r}")
            if p.is_required and isinstance(arg, NullLit):
                r.error(E_REQUIRED_NULL, arg.span,
                        f"parameter {p.name!r} of {target.name!r} is required "
                        "and may never be null")

    def type_expr(self, e: Expr, scope: _Scope) -> Optional[str]:
        r = self.r
        if isinstance(e, IntLit):
            e.ty = "int"
        elif isinstance(e, BoolLit):
            e.ty = "bool"
        elif isinstance(e, StrLit):
            e.ty = "string"
        elif isinstance(e, NullLit):
            e.ty = "null"
        elif isinstance(e, Ident):
            binding = scope.lookup(e.name)
            if binding is None:
                binding = next((f for f in self.module.fields if f.name == e.name),
                               None)
            if binding is None:
                if any(m.name == e.name for m in self.module.methods):
                    r.error(E_UNRESOLVED, e.span,
                            f"{e.name!r} is a method, not a value")
                elif e.name in r.modules:
                    r.error(E_UNRESOLVED, e.span,
                            f"{e.name!r} is a module name, not a value")
                else:
                    r.error(E_UNRESOLVED, e.span, f"name {e.name!r} is not defined")
                return None
            e.binding = binding
            e.ty = _BINDING_TYPE[type(binding)](binding)
        elif isinstance(e, FieldAccess):
            ot = self.type_expr(e.obj, scope)
            if ot is None:
                return None
            if ot not in r.modules:
                r.error(E_TYPE, e.span,
                        f"value of type {ot!r} has no field {e.name!r}")
                return None
            mod = r.modules[ot]
            fd = next((f for f in mod.fields if f.name == e.name), None)
            if fd is None:
                if isinstance(mod.member(e.name), MethodDecl):
                    r.error(E_TYPE, e.span,
                            f"{e.name!r} is a method of {ot!r}; invocation is "
                            "a statement, not an expression")
                else:
                    r.error(E_UNRESOLVED, e.span,
                            f"module {ot!r} has no field {e.name!r}")
                return None
            e.field_owner = mod
            e.ty = fd.type_name
        elif isinstance(e, NewExpr):
            if e.module_name in r.modules:
                e.target = r.modules[e.module_name]
                e.ty = e.module_name
            elif e.module_name in BUILTIN_TYPES:
                r.error(E_TYPE, e.span,
                        f"cannot instantiate builtin type {e.module_name!r}")
                return None
            else:
                r.error(E_UNRESOLVED, e.span,
                        f"unknown module {e.module_name!r}")
                return None
        elif isinstance(e, Binary):
            lt = self.type_expr(e.lhs, scope)
            rt = self.type_expr(e.rhs, scope)
            e.ty = self.type_binary(e, lt, rt)
        else:
            raise TypeError(f"not an expression node: {e!r}")
        return e.ty

    def type_binary(self, e: Binary, lt: Optional[str], rt: Optional[str]) -> Optional[str]:
        r = self.r
        if lt is None or rt is None:
            return None
        op = e.op
        if op in ("+", "-", "*", "/", "%"):
            if lt == rt == "int":
                return "int"
            r.error(E_TYPE, e.span, f"operator {op!r} needs int operands, "
                                    f"got {lt!r} and {rt!r}")
            return "int"
        if op in ("<", "<=", ">", ">="):
            if lt == rt == "int":
                return "bool"
            r.error(E_TYPE, e.span, f"comparison {op!r} needs int operands, "
                                    f"got {lt!r} and {rt!r}")
            return "bool"
        if op in ("&&", "||"):
            if lt == rt == "bool":
                return "bool"
            r.error(E_TYPE, e.span, f"operator {op!r} needs bool operands, "
                                    f"got {lt!r} and {rt!r}")
            return "bool"
        # equality: both int, both bool, or both reference-like
        if (lt == rt) or (_is_ref_type(lt) and _is_ref_type(rt)):
            return "bool"
        r.error(E_TYPE, e.span, f"cannot compare {lt!r} with {rt!r}")
        return "bool"


# --- sends-clause conformance ---------------------------------------------


def check_sends_conformance(resolved: ResolvedProgram) -> list[SemaError]:
    """Declaration-level compatibility checks for sends-clauses.

    Flags (a) commitments whose parameter signature disagrees with the target
    method, (b) pass-through parameters whose declared type differs from the
    enclosing method's parameter, and (c) invocation sites whose callee
    declares a same-named but type-incompatible commitment, which the commit
    analysis would otherwise silently fail to count as a transitive discharge.
    """
    errors: list[SemaError] = []

    def loc(span: Span) -> str:
        file, line, col = resolved.program.source.locate(span.start)
        return f"{file}:{line}:{col}"

    for mod, method in resolved.methods():
        params_by_name = {p.name: p for p in method.params}
        for c in method.sends:
            if c.target is None:
                continue
            tgt = c.target
            if len(c.params) != len(tgt.params) or any(
                    cp.type_name != tp.type_name
                    for cp, tp in zip(c.params, tgt.params)):
                errors.append(SemaError(
                    E_SENDS_CONFORMANCE, c.span,
                    f"sends-clause {c.target_name!r} of {method.name!r} does "
                    f"not match the declaration of {tgt.name!r} at "
                    f"{loc(tgt.span)}"))
                continue
            for i in c.pass_through or []:
                mp = params_by_name[c.params[i].name]
                if c.params[i].type_name != mp.type_name:
                    errors.append(SemaError(
                        E_SENDS_CONFORMANCE, c.params[i].span,
                        f"pass-through parameter {mp.name!r} is declared "
                        f"{mp.type_name!r} on {method.name!r} at "
                        f"{loc(mp.span)} but {c.params[i].type_name!r} in "
                        "the sends-clause"))
        if method.sends:
            _check_transitive_sites(method, errors, loc)
    return errors


def _check_transitive_sites(method: MethodDecl, errors: list[SemaError], loc):
    sites: list = []
    _collect_invocations(method.body, sites)
    for st in sites:
        callee = st.target
        if callee is None or not callee.sends:
            continue
        for c in method.sends:
            if c.target is None or callee is c.target:
                continue
            for cc in callee.sends:
                if cc.target_name != c.target_name:
                    continue
                if cc.target is not c.target or len(cc.params) != len(c.params) \
                        or any(a.type_name != b.type_name
                               for a, b in zip(cc.params, c.params)):
                    errors.append(SemaError(
                        E_SENDS_CONFORMANCE, st.span,
                        f"{callee.name!r} declares an incompatible commitment "
                        f"to {c.target_name!r} (declared at {loc(cc.span)}); "
                        f"it cannot discharge {method.name!r}'s commitment at "
                        f"{loc(c.span)}"))


def _collect_invocations(block: Block, out: list):
    for st in block.stmts:
        if isinstance(st, (CallStmt, SendStmt)):
            out.append(st)
        elif isinstance(st, If):
            _collect_invocations(st.then_block, out)
            if st.else_block is not None:
                _collect_invocations(st.else_block, out)
        elif isinstance(st, While):
            _collect_invocations(st.body, out)
        elif isinstance(st, Block):
            _collect_invocations(st, out)

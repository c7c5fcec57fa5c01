"""Recursive-descent parser producing a SourceProgram."""

from __future__ import annotations

from typing import Optional

from .ast_nodes import (
    Assign, Binary, Block, BoolLit, CallStmt, CatchClause, CommitmentSpec,
    Expr, ExpectArm, FieldAccess, FieldDecl, Ident, If, IntLit, MethodDecl,
    ModuleDecl, NewExpr, NullLit, Param, Print, Return, SendStmt,
    SourceProgram, Stmt, StrLit, Throw, VarDecl, While,
)
from .diagnostics import ParseError, SourceText, Span
from .tokens import RESERVED_TYPE_NAMES, Token, tokenize

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_STMT_STARTS = ("if", "while", "return", "throw", "print", "send", "{", "ident")


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # --- token helpers ---

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, *kinds: str) -> Token:
        tok = self.peek()
        if tok.kind in kinds:
            return self.advance()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"unexpected {shown!r}", tok.span, expected=kinds)

    def declared_name(self, what: str) -> Token:
        tok = self.expect("ident")
        if tok.text in RESERVED_TYPE_NAMES:
            raise ParseError(f"{tok.text!r} is a reserved type name and cannot name a {what}",
                             tok.span)
        return tok

    # --- grammar ---

    def program(self, source: SourceText) -> SourceProgram:
        modules: list[ModuleDecl] = []
        while not self.at("eof"):
            mod = self.module()
            if any(m.name == mod.name for m in modules):
                raise ParseError(f"duplicate module {mod.name!r}", mod.span)
            modules.append(mod)
        return SourceProgram(modules, source)

    def module(self) -> ModuleDecl:
        start = self.expect("module").span
        name = self.declared_name("module")
        self.expect("{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        seen: dict[str, Span] = {}
        while not self.at("}"):
            if self.peek().kind in ("void", "event"):
                member = self.method()
                methods.append(member)
            else:
                member = self.field()
                fields.append(member)
            if member.name in seen:
                raise ParseError(
                    f"duplicate member {member.name!r} in module {name.text!r}",
                    member.span)
            seen[member.name] = member.span
        end = self.expect("}").span
        return ModuleDecl(name.text, fields, methods, Span(start.start, end.end))

    def field(self) -> FieldDecl:
        ty = self.type_name()
        name = self.declared_name("field")
        init = None
        if self.at("="):
            self.advance()
            init = self.literal()
        end = self.expect(";").span
        return FieldDecl(ty.text, name.text, init, Span(ty.span.start, end.end))

    def method(self) -> MethodDecl:
        kind = self.expect("void", "event")
        name = self.declared_name("method")
        params = self.param_list()
        sends: list[CommitmentSpec] = []
        if self.at("sends"):
            self.advance()
            sends.append(self.commitment())
            while self.at(","):
                self.advance()
                sends.append(self.commitment())
        body = self.block()
        catch = None
        if self.at("catch"):
            catch = self.catch_clause()
            if kind.kind != "event":
                raise ParseError("catch clause is only allowed on an event method",
                                 catch.span)
        end = catch.span if catch else body.span
        return MethodDecl(kind.kind, name.text, params, sends, body, catch,
                          Span(kind.span.start, end.end))

    def commitment(self) -> CommitmentSpec:
        name = self.expect("ident")
        params = self.param_list()
        return CommitmentSpec(name.text, params, name.span)

    def catch_clause(self) -> CatchClause:
        start = self.expect("catch").span
        self.expect("(")
        marker = self.expect("ident")
        if marker.text != "ContinuityError":
            raise ParseError("catch parameter must be of type ContinuityError",
                             marker.span)
        binder = self.declared_name("catch binder")
        self.expect(")")
        body = self.block()
        return CatchClause(binder.text, body, Span(start.start, body.span.end))

    def param_list(self) -> list[Param]:
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            params.append(self.param())
            while self.at(","):
                self.advance()
                params.append(self.param())
        self.expect(")")
        for i, p in enumerate(params):
            if any(q.name == p.name for q in params[:i]):
                raise ParseError(f"duplicate parameter {p.name!r}", p.span)
        return params

    def param(self) -> Param:
        is_final = is_required = False
        start = self.peek().span
        if self.at("final"):
            self.advance()
            is_final = True
        if self.at("required"):
            self.advance()
            is_required = True
        ty = self.type_name()
        name = self.declared_name("parameter")
        return Param(name.text, ty.text, is_final, is_required,
                     Span(start.start, name.span.end))

    def type_name(self) -> Token:
        tok = self.expect("ident")
        if tok.text == "ContinuityError":
            raise ParseError("ContinuityError may only appear in a catch clause",
                             tok.span)
        return tok

    def block(self) -> Block:
        start = self.expect("{").span
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.append(self.stmt())
        end = self.expect("}").span
        return Block(stmts, Span(start.start, end.end))

    def stmt(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "{":
            return self.block()
        if tok.kind == "if":
            return self.if_stmt()
        if tok.kind == "while":
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            body = self.block()
            return While(cond, body, Span(tok.span.start, body.span.end))
        if tok.kind == "return":
            self.advance()
            end = self.expect(";").span
            return Return(Span(tok.span.start, end.end))
        if tok.kind == "throw":
            self.advance()
            value = self.expr()
            end = self.expect(";").span
            return Throw(value, Span(tok.span.start, end.end))
        if tok.kind == "print":
            self.advance()
            value = self.expr()
            end = self.expect(";").span
            return Print(value, Span(tok.span.start, end.end))
        if tok.kind == "send":
            return self.send_stmt()
        if tok.kind == "ident":
            return self.ident_led_stmt()
        raise ParseError(f"unexpected {tok.text!r}", tok.span, expected=_STMT_STARTS)

    def if_stmt(self) -> If:
        start = self.expect("if").span
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then_block = self.block()
        else_block = None
        if self.at("else"):
            self.advance()
            else_block = self.block()
        end = (else_block or then_block).span
        return If(cond, then_block, else_block, Span(start.start, end.end))

    def ident_led_stmt(self) -> Stmt:
        # type IDENT = expr ;   (two idents in a row is a declaration)
        if self.peek(1).kind == "ident":
            ty = self.type_name()
            name = self.declared_name("variable")
            self.expect("=")
            init = self.expr()
            end = self.expect(";").span
            return VarDecl(ty.text, name.text, init, Span(ty.span.start, end.end))
        receiver, name, chain_span = self.name_chain()
        if self.at("("):
            args = self.arg_list()
            end = self.expect(";").span
            return CallStmt(receiver, name, args, Span(chain_span.start, end.end))
        if self.at("="):
            self.advance()
            lvalue: Expr = Ident(name, chain_span) if receiver is None \
                else FieldAccess(receiver, name, chain_span)
            value = self.expr()
            end = self.expect(";").span
            return Assign(lvalue, value, Span(chain_span.start, end.end))
        raise ParseError(f"unexpected {self.peek().text!r} after name",
                         self.peek().span, expected=("(", "="))

    def send_stmt(self) -> SendStmt:
        start = self.expect("send").span
        receiver, name, _ = self.name_chain()
        args = self.arg_list()
        expect_arm = None
        if self.at("expect"):
            self.advance()
            arm_name = self.declared_name("expect target")
            params = self.param_list()
            body = self.block()
            expect_arm = ExpectArm(arm_name.text, params, body,
                                   Span(arm_name.span.start, body.span.end))
            # Fig-1 style: the semicolon is optional after an expect block.
            end = self.advance().span if self.at(";") else body.span
        else:
            end = self.expect(";").span
        return SendStmt(receiver, name, args, expect_arm,
                        Span(start.start, end.end))

    def name_chain(self) -> tuple[Optional[Expr], str, Span]:
        """Parse IDENT ("." IDENT)*, returning (receiver expr, final name, span).

        A bare name has no receiver; `a.b.c` yields receiver `a.b` and name `c`.
        """
        first = self.expect("ident")
        parts: list[Token] = [first]
        while self.at("."):
            self.advance()
            parts.append(self.expect("ident"))
        last = parts[-1]
        if len(parts) == 1:
            return None, last.text, last.span
        recv: Expr = Ident(parts[0].text, parts[0].span)
        for tok in parts[1:-1]:
            recv = FieldAccess(recv, tok.text, Span(parts[0].span.start, tok.span.end))
        return recv, last.text, Span(parts[0].span.start, last.span.end)

    def arg_list(self) -> list[Expr]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.at(","):
                self.advance()
                args.append(self.expr())
        self.expect(")")
        return args

    # --- expressions (precedence climbing) ---

    def expr(self) -> Expr:
        return self.or_expr()

    def _binary_chain(self, sub, ops: tuple[str, ...]) -> Expr:
        lhs = sub()
        while self.peek().kind in ops:
            op = self.advance()
            rhs = sub()
            lhs = Binary(op.kind, lhs, rhs, Span(lhs.span.start, rhs.span.end))
        return lhs

    def or_expr(self) -> Expr:
        return self._binary_chain(self.and_expr, ("||",))

    def and_expr(self) -> Expr:
        return self._binary_chain(self.eq_expr, ("&&",))

    def eq_expr(self) -> Expr:
        return self._binary_chain(self.cmp_expr, ("==", "!="))

    def cmp_expr(self) -> Expr:
        return self._binary_chain(self.add_expr, ("<", "<=", ">", ">="))

    def add_expr(self) -> Expr:
        return self._binary_chain(self.mul_expr, ("+", "-"))

    def mul_expr(self) -> Expr:
        return self._binary_chain(self.postfix_expr, ("*", "/", "%"))

    def postfix_expr(self) -> Expr:
        e = self.primary()
        while self.at("."):
            self.advance()
            name = self.expect("ident")
            if self.at("("):
                raise ParseError("method invocation is a statement, not an expression",
                                 name.span)
            e = FieldAccess(e, name.text, Span(e.span.start, name.span.end))
        return e

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int" or (tok.kind == "-" and self.peek(1).kind == "int"):
            return self.int_literal()
        if tok.kind == "str":
            self.advance()
            return StrLit(tok.text, tok.span)
        if tok.kind in ("true", "false"):
            self.advance()
            return BoolLit(tok.kind == "true", tok.span)
        if tok.kind == "null":
            self.advance()
            return NullLit(tok.span)
        if tok.kind == "new":
            self.advance()
            name = self.type_name()
            self.expect("(")
            end = self.expect(")").span
            return NewExpr(name.text, Span(tok.span.start, end.end))
        if tok.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.advance()
            return Ident(tok.text, tok.span)
        raise ParseError(f"unexpected {tok.text or 'end of input'!r} in expression",
                         tok.span,
                         expected=("int", "str", "true", "false", "null", "new",
                                   "(", "ident"))

    def int_literal(self) -> IntLit:
        neg = None
        if self.at("-"):
            neg = self.advance()
        tok = self.expect("int")
        value = -int(tok.text) if neg else int(tok.text)
        if not (INT_MIN <= value <= INT_MAX):
            span = Span(neg.span.start if neg else tok.span.start, tok.span.end)
            raise ParseError("integer literal out of 64-bit signed range", span)
        start = neg.span.start if neg else tok.span.start
        return IntLit(value, Span(start, tok.span.end))

    def literal(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int" or (tok.kind == "-" and self.peek(1).kind == "int"):
            return self.int_literal()
        if tok.kind == "str":
            self.advance()
            return StrLit(tok.text, tok.span)
        if tok.kind in ("true", "false"):
            self.advance()
            return BoolLit(tok.kind == "true", tok.span)
        if tok.kind == "null":
            self.advance()
            return NullLit(tok.span)
        raise ParseError("field initializer must be a literal", tok.span,
                         expected=("int", "str", "true", "false", "null"))


def parse_program(source: SourceText) -> SourceProgram:
    """Tokenize and parse a SourceText into a SourceProgram."""
    return Parser(tokenize(source.text)).program(source)


def parse_text(text: str, name: str = "<source>") -> SourceProgram:
    return parse_program(SourceText.single(text, name))

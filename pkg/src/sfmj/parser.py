"""Lexer, recursive-descent parser and pretty-printer for ``.sfmj`` files.

A program file is a sequence of class declarations followed by exactly one
expression. Invocations are symmetric: ``m(a, b)`` with no receiver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    Cast,
    ClassDecl,
    ConstructorDecl,
    Expr,
    FieldAccess,
    Invoke,
    MethodBranch,
    New,
    SFMJError,
    Span,
    Var,
    subexprs,
)

KEYWORDS = frozenset({"class", "extends", "new", "return", "super", "this", "void"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}();,.=])
    """,
    re.VERBOSE,
)


class ParseError(SFMJError):
    def __init__(self, kind: str, message: str, span: Span | None = None, path: str | None = None):
        where = f"{span} " if span else ""
        super().__init__(kind, f"{where}{message}", span)
        self.message = message
        self.path = path


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "punct", "eof"
    text: str
    span: Span


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("SyntaxError", f"unexpected character {text[pos]!r}", Span(line, pos - line_start + 1))
        kind = m.lastgroup
        chunk = m.group()
        span = Span(line, pos - line_start + 1)
        if kind == "ident":
            tokens.append(Token("kw" if chunk in KEYWORDS else "ident", chunk, span))
        elif kind == "punct":
            tokens.append(Token("punct", chunk, span))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return tokens


@dataclass(frozen=True)
class SourceProgram:
    text: str
    path: str | None = None


@dataclass(frozen=True)
class ParsedProgram:
    decls: tuple[ClassDecl, ...]
    main: Expr
    path: str | None = field(default=None, compare=False)

    @property
    def spans(self) -> dict[int, Span]:
        """Source span of every located node, keyed by ``id(node)``."""
        out: dict[int, Span] = {}
        nodes: list = list(self.decls)
        for d in self.decls:
            nodes.append(d.ctor)
            for b in d.methods:
                nodes.append(b)
                nodes.extend(subexprs(b.body))
        nodes.extend(subexprs(self.main))
        for n in nodes:
            if n.span is not None:
                out[id(n)] = n.span
        return out


class _Parser:
    def __init__(self, text: str, path: str | None = None):
        self.path = path
        try:
            self.toks = tokenize(text)
        except ParseError as exc:
            exc.path = path
            raise
        self.i = 0

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None, kind: str = "SyntaxError") -> ParseError:
        tok = tok or self.tok
        return ParseError(kind, message, tok.span, self.path)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    # program level

    def program(self) -> ParsedProgram:
        decls = []
        while self.at("class"):
            decls.append(self.class_decl())
        if self.tok.kind == "eof":
            raise self.error("program has no main expression", kind="MissingMainExpression")
        main = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after main expression", kind="TrailingInput")
        return ParsedProgram(tuple(decls), main, self.path)

    def class_decl(self) -> ClassDecl:
        start = self.expect("class")
        name = self.ident("class name").text
        self.expect("extends")
        parent = self.ident("superclass name").text
        self.expect("{")
        fields = []
        # field: T f ;   ctor: C (   method: T m (
        while self.tok.kind == "ident" and self.peek().kind == "ident" and self.peek(2).text == ";":
            t = self.ident().text
            f = self.ident().text
            self.expect(";")
            fields.append((t, f))
        ctor = self.ctor_decl()
        methods = []
        while not self.at("}"):
            methods.append(self.method_decl(name))
        self.expect("}")
        return ClassDecl(name, parent, tuple(fields), ctor, tuple(methods), start.span)

    def params(self) -> tuple[tuple[str, str], ...]:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                t = self.ident("parameter type").text
                x = self.ident("parameter name").text
                out.append((t, x))
                if not self.at(","):
                    break
                self.expect(",")
        self.expect(")")
        return tuple(out)

    def ctor_decl(self) -> ConstructorDecl:
        tok = self.tok
        if tok.kind != "ident" or self.peek().text != "(":
            raise self.error("expected field or constructor declaration")
        self.i += 1
        params = self.params()
        self.expect("{")
        self.expect("super")
        self.expect("(")
        sargs = []
        if not self.at(")"):
            while True:
                sargs.append(self.ident("super argument").text)
                if not self.at(","):
                    break
                self.expect(",")
        self.expect(")")
        self.expect(";")
        inits = []
        while self.at("this"):
            self.expect("this")
            self.expect(".")
            f = self.ident("field name").text
            self.expect("=")
            x = self.ident("constructor parameter").text
            self.expect(";")
            inits.append((f, x))
        self.expect("}")
        return ConstructorDecl(tok.text, params, tuple(sargs), tuple(inits), tok.span)

    def method_decl(self, owner: str) -> MethodBranch:
        start = self.tok
        ret = self.ident("return type").text
        name = self.ident("method name").text
        params_tok = self.tok
        params = self.params()
        if not params:
            raise self.error(f"method {name} must declare at least one parameter", params_tok)
        self.expect("{")
        self.expect("return")
        body = self.expr()
        self.expect(";")
        self.expect("}")
        return MethodBranch(owner, name, params, ret, body, start.span)

    # expressions; casts bind tighter than field access

    def expr(self) -> Expr:
        e = self.unary()
        while self.at("."):
            dot = self.expect(".")
            f = self.ident("field name")
            if self.at("("):
                raise self.error("receiver call syntax e.m(...) is not SFMJ; write m(e, ...)", dot)
            e = FieldAccess(e, f.text, f.span)
        return e

    def _cast_ahead(self) -> bool:
        if not (self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ")"):
            return False
        after = self.peek(3)
        return after.kind == "ident" or after.text in ("new", "(")

    def unary(self) -> Expr:
        tok = self.tok
        if self._cast_ahead():
            self.expect("(")
            cls = self.ident().text
            self.expect(")")
            return Cast(cls, self.unary(), tok.span)
        if self.at("("):
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return e
        if self.at("new"):
            self.expect("new")
            cls = self.ident("class name").text
            return New(cls, self.args(), tok.span)
        if tok.kind == "ident":
            self.i += 1
            if self.at("("):
                args = self.args()
                if not args:
                    raise self.error(f"invocation of {tok.text} needs at least one argument", tok)
                return Invoke(tok.text, args, tok.span)
            return Var(tok.text, tok.span)
        found = tok.text or "end of input"
        raise self.error(f"expected an expression, found {found!r}")

    def args(self) -> tuple[Expr, ...]:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                out.append(self.expr())
                if not self.at(","):
                    break
                self.expect(",")
        self.expect(")")
        return tuple(out)


def parse_program(src: SourceProgram | str, path: str | None = None) -> ParsedProgram:
    if isinstance(src, SourceProgram):
        text, path = src.text, src.path
    else:
        text = src
    return _Parser(text, path).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression", kind="TrailingInput")
    return e


# -- pretty printing -----------------------------------------------------------


def _pretty_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldAccess):
        return f"{_pretty_expr(e.obj)}.{e.name}"
    if isinstance(e, Invoke):
        return f"{e.method}({', '.join(map(_pretty_expr, e.args))})"
    if isinstance(e, New):
        return f"new {e.cls}({', '.join(map(_pretty_expr, e.args))})"
    if isinstance(e, Cast):
        inner = _pretty_expr(e.expr)
        if isinstance(e.expr, FieldAccess):
            inner = f"({inner})"
        return f"({e.cls}) {inner}"
    raise TypeError(f"not an expression: {e!r}")


def _pretty_params(params) -> str:
    return ", ".join(f"{t} {x}" for t, x in params)


def _pretty_class(d: ClassDecl, indent: str = "    ") -> str:
    lines = [f"class {d.name} extends {d.parent} {{"]
    for t, f in d.fields:
        lines.append(f"{indent}{t} {f};")
    k = d.ctor
    body = [f"super({', '.join(k.super_args)});"] + [f"this.{f} = {x};" for f, x in k.inits]
    lines.append(f"{indent}{k.name}({_pretty_params(k.params)}) {{ {' '.join(body)} }}")
    for b in d.methods:
        lines.append(f"{indent}{b.ret} {b.name}({_pretty_params(b.params)}) {{ return {_pretty_expr(b.body)}; }}")
    lines.append("}")
    return "\n".join(lines)


def pretty(node: Expr | ClassDecl | ParsedProgram) -> str:
    if isinstance(node, ParsedProgram):
        parts = [_pretty_class(d) for d in node.decls]
        parts.append(_pretty_expr(node.main))
        return "\n\n".join(parts) + "\n"
    if isinstance(node, ClassDecl):
        return _pretty_class(node)
    return _pretty_expr(node)


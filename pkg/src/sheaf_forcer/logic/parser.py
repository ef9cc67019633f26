"""Recursive-descent parser for the ASCII formula grammar.

Grammar (loosest binding first)::

    formula  := quant | implies
    quant    := ("forall" | "exists") IDENT "." formula
    implies  := or ("->" implies)?
    or       := and ("|" and)*
    and      := unary ("&" unary)*
    unary    := "~" unary | quant | atom | "(" formula ")"
    atom     := IDENT "(" terms ")"        -- relation
              | term "=" term
    term     := IDENT "(" terms ")" | IDENT

Quantifiers extend as far right as possible. Binders that shadow a
variable already bound on the same branch are renamed apart.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And, Apply, ArityError, Const, Eq, Exists, Forall, Formula, Implies,
    LanguageSig, LogicError, Not, Or, Rel, Term, UnknownSymbolError, Var,
)

KEYWORDS = {"forall", "exists"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[().,=&|~])
""", re.VERBOSE)


class FormulaSyntaxError(LogicError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: LanguageSig):
        self.text = text
        self.sig = sig
        self.tokens = tokenize(text)
        self.i = 0
        self.used = {t.value for t in self.tokens if t.kind == "ident"}
        # bound variable (as written) -> name after renaming
        self.scope: dict[str, str] = {}

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise FormulaSyntaxError(message, tok.pos, self.text)

    def eat(self, value: str) -> bool:
        if self.tok.value == value and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.eat(value):
            found = self.tok.value or "end of input"
            self.error(f"expected {value!r}, found {found!r}")

    # formulas

    def formula(self) -> Formula:
        if self.tok.value in KEYWORDS:
            return self.quant()
        return self.implies()

    def quant(self) -> Formula:
        kw = self.tok.value
        self.i += 1
        if self.tok.kind != "ident" or self.tok.value in KEYWORDS:
            self.error("expected a variable after quantifier")
        written = self.tok.value
        if written in self.sig.symbols():
            self.error(f"cannot bind declared symbol {written!r}")
        self.i += 1
        self.expect(".")
        name = self.fresh(written) if written in self.scope else written
        saved = self.scope.get(written)
        self.scope[written] = name
        body = self.formula()
        if saved is None:
            del self.scope[written]
        else:
            self.scope[written] = saved
        return Forall(name, body) if kw == "forall" else Exists(name, body)

    def fresh(self, base: str) -> str:
        k = 1
        while f"{base}{k}" in self.used:
            k += 1
        name = f"{base}{k}"
        self.used.add(name)
        return name

    def implies(self) -> Formula:
        left = self.disj()
        if self.eat("->"):
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.tok.value == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.tok.value == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.tok
        if self.eat("~"):
            return Not(self.unary())
        if tok.value in KEYWORDS:
            return self.quant()
        if tok.value == "(":
            # either a parenthesised formula or a parenthesised term in t = s
            save = self.i
            self.i += 1
            try:
                f = self.formula()
                self.expect(")")
            except FormulaSyntaxError:
                self.i = save
                return self.atom()
            if self.tok.value == "=":
                self.i = save
                return self.atom()
            return f
        return self.atom()

    def atom(self) -> Formula:
        tok = self.tok
        if tok.kind == "ident" and tok.value in self.sig.relations:
            self.i += 1
            args = self.arguments(tok)
            want = self.sig.relations[tok.value]
            if len(args) != want:
                raise ArityError(f"relation {tok.value} expects {want} arguments, "
                                 f"got {len(args)} at position {tok.pos}")
            return Rel(tok.value, args)
        left = self.term()
        if not self.eat("="):
            self.error("expected '=' or a relation")
        return Eq(left, self.term())

    # terms

    def term(self) -> Term:
        tok = self.tok
        if tok.value == "(":
            self.i += 1
            t = self.term()
            self.expect(")")
            return t
        if tok.kind != "ident" or tok.value in KEYWORDS:
            found = tok.value or "end of input"
            self.error(f"expected a term, found {found!r}")
        self.i += 1
        name = tok.value
        if self.tok.value == "(":
            if name in self.sig.relations:
                self.error(f"relation {name!r} used as a term", tok)
            if name not in self.sig.functions:
                raise UnknownSymbolError(f"unknown function {name!r} at position {tok.pos}")
            args = self.arguments(tok)
            want = self.sig.functions[name]
            if len(args) != want:
                raise ArityError(f"function {name} expects {want} arguments, "
                                 f"got {len(args)} at position {tok.pos}")
            return Apply(name, args)
        if name in self.sig.constants:
            return Const(name)
        if name in self.sig.functions or name in self.sig.relations:
            self.error(f"symbol {name!r} needs arguments", tok)
        return Var(self.scope.get(name, name))

    def arguments(self, head: Token) -> tuple[Term, ...]:
        self.expect("(")
        args = [self.term()]
        while self.eat(","):
            args.append(self.term())
        self.expect(")")
        return tuple(args)


def parse_formula(text: str, sig: LanguageSig) -> Formula:
    p = _Parser(text, sig)
    f = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.value!r}")
    return f

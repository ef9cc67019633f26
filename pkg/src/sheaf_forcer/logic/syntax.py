"""Signatures, terms and formulas of finite first-order languages."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping


class LogicError(ValueError):
    pass


class UnknownSymbolError(LogicError):
    pass


class ArityError(LogicError):
    pass


@dataclass(frozen=True)
class LanguageSig:
    functions: Mapping[str, int] = field(default_factory=dict)
    relations: Mapping[str, int] = field(default_factory=dict)
    constants: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "relations", dict(self.relations))
        object.__setattr__(self, "constants", frozenset(self.constants))
        f, r, c = set(self.functions), set(self.relations), set(self.constants)
        clash = (f & r) | (f & c) | (r & c)
        if clash:
            raise LogicError(f"symbol used in two name spaces: {sorted(clash)}")
        for name, arity in [*self.functions.items(), *self.relations.items()]:
            if not isinstance(arity, int) or arity < 1:
                raise LogicError(f"bad arity {arity!r} for {name}")

    def __hash__(self):
        return hash((tuple(sorted(self.functions.items())),
                     tuple(sorted(self.relations.items())),
                     self.constants))

    def __eq__(self, other):
        if not isinstance(other, LanguageSig):
            return NotImplemented
        return (self.functions == other.functions
                and self.relations == other.relations
                and self.constants == other.constants)

    def symbols(self) -> set[str]:
        return set(self.functions) | set(self.relations) | set(self.constants)


class _Node:
    """Caches the structural hash; formulas are used as memo keys."""

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((type(self).__name__, *(getattr(self, f) for f in self.__dataclass_fields__)))
            object.__setattr__(self, "_hash", h)
            return h


# --- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class Var(_Node):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const(_Node):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Apply(_Node):
    func: str
    args: tuple[Term, ...]

    def __str__(self):
        return f"{self.func}({', '.join(map(str, self.args))})"


Term = Var | Const | Apply


# --- formulas --------------------------------------------------------------

@dataclass(frozen=True)
class Eq(_Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel(_Node):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(_Node):
    body: Formula


@dataclass(frozen=True)
class And(_Node):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(_Node):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(_Node):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(_Node):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(_Node):
    var: str
    body: Formula


Formula = Eq | Rel | Not | And | Or | Implies | Forall | Exists
Atom = (Eq, Rel)
Binary = (And, Or, Implies)
Quantifier = (Forall, Exists)


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Apply):
        for a in t.args:
            yield from term_vars(a)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not) or isinstance(phi, Quantifier):
        yield from subformulas(phi.body)
    elif isinstance(phi, Binary):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)


def free_vars(phi: Formula) -> list[str]:
    """Free variables in order of first occurrence (left to right)."""
    return list(_free_vars(phi))


@lru_cache(maxsize=1 << 16)
def _free_vars(phi: Formula) -> tuple[str, ...]:
    out: list[str] = []

    def walk(f: Formula, bound: frozenset[str]):
        if isinstance(f, Eq):
            terms = (f.left, f.right)
        elif isinstance(f, Rel):
            terms = f.args
        elif isinstance(f, Not):
            walk(f.body, bound)
            return
        elif isinstance(f, Binary):
            walk(f.left, bound)
            walk(f.right, bound)
            return
        else:
            walk(f.body, bound | {f.var})
            return
        for t in terms:
            for v in term_vars(t):
                if v not in bound and v not in out:
                    out.append(v)

    walk(phi, frozenset())
    return tuple(out)


def is_positive(phi: Formula) -> bool:
    """No negation, no universal quantifier and no implication."""
    return not any(isinstance(f, (Not, Forall, Implies)) for f in subformulas(phi))


@dataclass(frozen=True)
class FormulaInfo:
    free_vars: list[str]
    is_positive: bool


def analyze_formula(phi: Formula) -> FormulaInfo:
    return FormulaInfo(free_vars(phi), is_positive(phi))


def depth(phi: Formula) -> int:
    """Nesting depth of connectives and quantifiers; atoms have depth 0."""
    if isinstance(phi, Atom):
        return 0
    if isinstance(phi, Binary):
        return 1 + max(depth(phi.left), depth(phi.right))
    return 1 + depth(phi.body)


def check_formula(phi: Formula, sig: LanguageSig) -> None:
    """Raise if a symbol is undeclared or used at the wrong arity."""
    def check_term(t: Term):
        if isinstance(t, Const):
            if t.name not in sig.constants:
                raise UnknownSymbolError(f"unknown constant {t.name!r}")
        elif isinstance(t, Apply):
            if t.func not in sig.functions:
                raise UnknownSymbolError(f"unknown function {t.func!r}")
            if sig.functions[t.func] != len(t.args):
                raise ArityError(f"{t.func} expects {sig.functions[t.func]} "
                                 f"arguments, got {len(t.args)}")
            for a in t.args:
                check_term(a)

    for f in subformulas(phi):
        if isinstance(f, Eq):
            check_term(f.left)
            check_term(f.right)
        elif isinstance(f, Rel):
            if f.name not in sig.relations:
                raise UnknownSymbolError(f"unknown relation {f.name!r}")
            if sig.relations[f.name] != len(f.args):
                raise ArityError(f"{f.name} expects {sig.relations[f.name]} "
                                 f"arguments, got {len(f.args)}")
            for a in f.args:
                check_term(a)


# --- printing --------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}
_OPS = {Implies: "->", Or: "|", And: "&"}


def to_text(phi: Formula) -> str:
    """Render in the ASCII grammar accepted by :func:`parse_formula`."""
    if isinstance(phi, Eq):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, Rel):
        return f"{phi.name}({', '.join(map(str, phi.args))})"
    if isinstance(phi, Quantifier):
        kw = "forall" if isinstance(phi, Forall) else "exists"
        return f"{kw} {phi.var}. {to_text(phi.body)}"
    if isinstance(phi, Not):
        return "~" + _operand(phi.body, 4, strict=False)
    p = _PREC[type(phi)]
    right_assoc = isinstance(phi, Implies)
    left = _operand(phi.left, p, strict=right_assoc)
    right = _operand(phi.right, p, strict=not right_assoc)
    return f"{left} {_OPS[type(phi)]} {right}"


def _operand(phi: Formula, prec: int, strict: bool) -> str:
    text = to_text(phi)
    if isinstance(phi, Quantifier):
        return f"({text})"
    if isinstance(phi, Eq) and prec >= 4:
        return f"({text})"
    own = _PREC.get(type(phi), 5)
    if own < prec or (strict and own == prec):
        return f"({text})"
    return text


for _cls in (Eq, Rel, Not, And, Or, Implies, Forall, Exists):
    _cls.__str__ = to_text  # type: ignore[method-assign]

for _cls in (Var, Const, Apply, Eq, Rel, Not, And, Or, Implies, Forall, Exists):
    _cls.__hash__ = _Node.__hash__  # type: ignore[method-assign]

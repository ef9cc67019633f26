"""Finite first-order structures and Tarski satisfaction."""

from __future__ import annotations

from functools import cached_property
from itertools import product
from typing import Any, Callable, Hashable, Iterable, Mapping

from ..logic import (
    And, Const, Eq, Exists, Forall, Formula, Implies, LanguageSig, Not,
    Or, Rel, Term, Var, free_vars,
)

Elem = Hashable
FunctionInterp = Mapping[tuple, Elem] | Callable[..., Elem]


class StructureError(ValueError):
    pass


class UnassignedVariableError(StructureError):
    pass


def fmt_elem(e: Any) -> str:
    """Compact text form of an element, used for display and lookup by name."""
    if isinstance(e, frozenset):
        try:
            items = sorted(e)
        except TypeError:
            items = sorted(e, key=fmt_elem)
        return "{" + ",".join(fmt_elem(x) for x in items) + "}"
    if isinstance(e, tuple):
        return "(" + ",".join(fmt_elem(x) for x in e) + ")"
    return str(e)


class FinStructure:
    """A structure with a finite nonempty universe.

    Function symbols are interpreted either by a table keyed on argument
    tuples or by a Python callable; callables are used for generated
    structures whose tables would be too large to store.
    """

    def __init__(self, sig: LanguageSig, universe: Iterable[Elem],
                 constants: Mapping[str, Elem] | None = None,
                 functions: Mapping[str, FunctionInterp] | None = None,
                 relations: Mapping[str, Iterable[tuple]] | None = None,
                 name: str = "", check: bool = True):
        self.sig = sig
        self.universe: tuple[Elem, ...] = tuple(dict.fromkeys(universe))
        self.constants = dict(constants or {})
        self.functions = dict(functions or {})
        self.relations = {r: frozenset(tuple(t) for t in ts)
                          for r, ts in (relations or {}).items()}
        for r in sig.relations:
            self.relations.setdefault(r, frozenset())
        self.name = name
        if check:
            self.validate()

    def validate(self) -> None:
        if not self.universe:
            raise StructureError("universe must be nonempty")
        U = self.elements
        missing = (set(self.sig.constants) - set(self.constants)) | \
                  (set(self.sig.functions) - set(self.functions))
        if missing:
            raise StructureError(f"no interpretation for {sorted(missing)}")
        extra = (set(self.constants) - set(self.sig.constants)) | \
                (set(self.functions) - set(self.sig.functions)) | \
                (set(self.relations) - set(self.sig.relations))
        if extra:
            raise StructureError(f"symbols not in signature: {sorted(extra)}")
        for c, v in self.constants.items():
            if v not in U:
                raise StructureError(f"constant {c} interpreted outside universe")
        for f, interp in self.functions.items():
            if isinstance(interp, Mapping):
                n = self.sig.functions[f]
                for args in product(self.universe, repeat=n):
                    if args not in interp:
                        raise StructureError(f"table of {f} undefined at {args}")
                    if interp[args] not in U:
                        raise StructureError(f"{f}{args} lands outside universe")
        for r, ts in self.relations.items():
            n = self.sig.relations[r]
            for t in ts:
                if len(t) != n or not all(x in U for x in t):
                    raise StructureError(f"bad tuple {t} in relation {r}")

    @cached_property
    def elements(self) -> frozenset:
        return frozenset(self.universe)

    def __len__(self):
        return len(self.universe)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FinStructure{label} |M|={len(self)}>"

    def apply(self, f: str, args: tuple) -> Elem:
        interp = self.functions[f]
        if isinstance(interp, Mapping):
            return interp[args]
        return interp(*args)

    def holds(self, r: str, args: tuple) -> bool:
        return tuple(args) in self.relations[r]

    def lookup(self, token: str) -> Elem:
        for e in self.universe:
            if fmt_elem(e) == token:
                return e
        raise StructureError(f"no element named {token!r}")

    def tabulated(self) -> FinStructure:
        """Copy with every function stored as an explicit table."""
        fns = {f: {args: self.apply(f, args)
                   for args in product(self.universe, repeat=n)}
               for f, n in self.sig.functions.items()}
        return FinStructure(self.sig, self.universe, self.constants, fns,
                            self.relations, name=self.name, check=False)

    # semantics

    def eval_term(self, t: Term, asg: Mapping[str, Elem]) -> Elem:
        if isinstance(t, Var):
            try:
                return asg[t.name]
            except KeyError:
                raise UnassignedVariableError(f"variable {t.name} is unassigned") from None
        if isinstance(t, Const):
            return self.constants[t.name]
        return self.apply(t.func, tuple(self.eval_term(a, asg) for a in t.args))

    def satisfies(self, phi: Formula, asg: Mapping[str, Elem] | None = None) -> bool:
        asg = dict(asg or {})
        for v in free_vars(phi):
            if v not in asg:
                raise UnassignedVariableError(f"free variable {v} is unassigned")
        return self._sat(phi, asg)

    def _sat(self, f: Formula, asg: dict) -> bool:
        if isinstance(f, Eq):
            return self.eval_term(f.left, asg) == self.eval_term(f.right, asg)
        if isinstance(f, Rel):
            return tuple(self.eval_term(a, asg) for a in f.args) in self.relations[f.name]
        if isinstance(f, Not):
            return not self._sat(f.body, asg)
        if isinstance(f, And):
            return self._sat(f.left, asg) and self._sat(f.right, asg)
        if isinstance(f, Or):
            return self._sat(f.left, asg) or self._sat(f.right, asg)
        if isinstance(f, Implies):
            return (not self._sat(f.left, asg)) or self._sat(f.right, asg)
        if isinstance(f, Forall):
            return all(self._sat(f.body, {**asg, f.var: e}) for e in self.universe)
        if isinstance(f, Exists):
            return any(self._sat(f.body, {**asg, f.var: e}) for e in self.universe)
        raise TypeError(f"not a formula: {f!r}")


def satisfies(M: FinStructure, phi: Formula, asg: Mapping[str, Elem] | None = None) -> bool:
    return M.satisfies(phi, asg)


def table(fn: Callable[..., Elem], universe: Iterable[Elem], arity: int) -> dict:
    universe = tuple(universe)
    return {args: fn(*args) for args in product(universe, repeat=arity)}


def isomorphic_by(M: FinStructure, N: FinStructure, mapping: Mapping[Elem, Elem]) -> bool:
    """True when ``mapping`` is an isomorphism of structures M -> N."""
    from .morphism import StructMorphism, classify_morphism
    return classify_morphism(StructMorphism(M, N, mapping)).is_iso

"""Double-negation (Goedel) translation."""

from __future__ import annotations

from typing import Callable

from .syntax import And, Eq, Exists, Forall, Formula, Implies, Not, Or, Rel


def homomorphic_implication(left: Formula, right: Formula) -> Formula:
    return Implies(left, right)


def godel_translate(
    phi: Formula,
    implication: Callable[[Formula, Formula], Formula] = homomorphic_implication,
) -> Formula:
    """Translate ``phi`` clause by clause.

    Atoms become ``~~A``; ``&``, ``~`` and ``forall`` are kept; ``|`` and
    ``exists`` are rewritten through ``~`` and ``&``/``forall``. The
    implication clause is pluggable and defaults to ``(A -> B) ~> A' -> B'``.
    """
    def tr(f: Formula) -> Formula:
        if isinstance(f, (Eq, Rel)):
            return Not(Not(f))
        if isinstance(f, And):
            return And(tr(f.left), tr(f.right))
        if isinstance(f, Or):
            return Not(And(Not(tr(f.left)), Not(tr(f.right))))
        if isinstance(f, Not):
            return Not(tr(f.body))
        if isinstance(f, Forall):
            return Forall(f.var, tr(f.body))
        if isinstance(f, Exists):
            return Not(Forall(f.var, Not(tr(f.body))))
        if isinstance(f, Implies):
            return implication(tr(f.left), tr(f.right))
        raise TypeError(f"not a formula: {f!r}")

    return tr(phi)

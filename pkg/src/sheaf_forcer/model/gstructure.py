"""Group actions compatible with a structure, orbit quotients, simplex fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from ..logic import LanguageSig
from .group import FinGroup, GAction, GroupError
from .structure import FinStructure, StructureError, fmt_elem


@dataclass(frozen=True)
class Violation:
    condition: str  # "a", "b", "c" or "strong"
    symbol: str
    witness: str

    def __str__(self):
        return f"({self.condition}) {self.symbol}: {self.witness}"


def check_g_structure(M: FinStructure, act: GAction, strong: bool = False,
                      diagonal_relations: bool = False, first_only: bool = False
                      ) -> list[Violation]:
    """Report every way in which ``act`` fails to commute with M's symbols.

    (a) the set of constants is invariant; (b) each relation is closed under
    acting with independent group elements on each coordinate (or with one
    element on all coordinates when ``diagonal_relations``); (c) functions
    are equivariant for the diagonal action. In strong mode (c) is replaced
    by coordinatewise equivariance.
    """
    G = act.group
    out: list[Violation] = []

    def add(v):
        out.append(v)
        return first_only

    consts = set(M.constants.values())
    for g in G:
        for c in sorted(M.constants):
            if act(g, M.constants[c]) not in consts:
                if add(Violation("a", c, f"g={g} moves {fmt_elem(M.constants[c])} "
                                        "outside the constants")):
                    return out
                break

    for r in sorted(M.relations):
        R = M.relations[r]
        bad = _relation_violation(R, act, diagonal_relations)
        if bad is not None:
            if add(Violation("b", r, bad)):
                return out

    for f, n in sorted(M.sig.functions.items()):
        bad = None
        for args in product(M.universe, repeat=n):
            fx = M.apply(f, args)
            for g in G:
                gfx = act(g, fx)
                if strong:
                    for j in range(n):
                        moved = args[:j] + (act(g, args[j]),) + args[j + 1:]
                        if M.apply(f, moved) != gfx:
                            bad = (f"coordinate {j}, g={g}, args="
                                   f"{fmt_elem(args)}: {fmt_elem(M.apply(f, moved))} "
                                   f"!= {fmt_elem(gfx)}")
                            break
                else:
                    moved = tuple(act(g, a) for a in args)
                    if M.apply(f, moved) != gfx:
                        bad = (f"g={g}, args={fmt_elem(args)}: "
                               f"{fmt_elem(M.apply(f, moved))} != {fmt_elem(gfx)}")
                if bad:
                    break
            if bad:
                break
        if bad:
            if add(Violation("strong" if strong else "c", f, bad)):
                return out
    return out


def _relation_violation(R, act: GAction, diagonal: bool) -> str | None:
    # Closure under one group element on one coordinate at a time is
    # equivalent to closure under independent elements on all coordinates.
    G = act.group
    for t in sorted(R, key=fmt_elem):
        for g in G:
            if diagonal:
                moved = tuple(act(g, a) for a in t)
                if moved not in R:
                    return f"g={g} sends {fmt_elem(t)} to {fmt_elem(moved)}"
            else:
                for j in range(len(t)):
                    moved = t[:j] + (act(g, t[j]),) + t[j + 1:]
                    if moved not in R:
                        gs = [G.identity] * len(t)
                        gs[j] = g
                        return (f"g=({', '.join(map(str, gs))}) sends {fmt_elem(t)} "
                                f"to {fmt_elem(moved)}")
    return None


def relation_invariant_exhaustive(R, act: GAction) -> bool:
    """Oracle for condition (b): try every tuple of independent group elements."""
    G = act.group
    for t in R:
        for gs in product(G.elements, repeat=len(t)):
            if tuple(act(g, a) for g, a in zip(gs, t)) not in R:
                return False
    return True


class QuotientError(StructureError):
    def __init__(self, message: str, witness: str = ""):
        self.witness = witness
        super().__init__(f"{message}: {witness}" if witness else message)


def orbit_quotient(M: FinStructure, act: GAction) -> FinStructure:
    """The structure induced on the orbit set M/G."""
    orbits = act.orbits()
    orbit_of = {x: o for o in orbits for x in o}
    fns = {}
    for f, n in M.sig.functions.items():
        tab: dict = {}
        wit: dict = {}
        for args in product(M.universe, repeat=n):
            key = tuple(orbit_of[a] for a in args)
            val = orbit_of[M.apply(f, args)]
            if key in tab and tab[key] != val:
                raise QuotientError(
                    f"induced {f} is ill-defined",
                    f"{f}{fmt_elem(wit[key])} and {f}{fmt_elem(args)} lie in different orbits")
            tab[key] = val
            wit.setdefault(key, args)
        fns[f] = tab
    problems = check_g_structure(M, act, strong=True, first_only=True)
    if problems:
        raise QuotientError("not a strong G-structure", str(problems[0]))
    rels = {r: {tuple(orbit_of[a] for a in t) for t in ts} for r, ts in M.relations.items()}
    consts = {c: orbit_of[v] for c, v in M.constants.items()}
    return FinStructure(M.sig, orbits, consts, fns, rels, name=f"{M.name}/G")


def admissible_subgroups(M: FinStructure, full_action: GAction, bound: int = 120,
                         strong: bool = False, diagonal_relations: bool = False
                         ) -> list[frozenset]:
    G = full_action.group
    if len(G) > bound:
        raise GroupError(f"group order {len(G)} exceeds bound {bound}")
    out = []
    for H in G.subgroups(bound):
        sub = full_action.restrict(H)
        if not check_g_structure(M, sub, strong=strong,
                                 diagonal_relations=diagonal_relations, first_only=True):
            out.append(H)
    return out


SIMPLEX_SIG = LanguageSig(relations={"lt": 2})


def simplex_fixture(n: int, boundary: bool = False, strict: bool = True
                    ) -> tuple[FinStructure, GAction]:
    """P(n) (or P(n) minus the top face) ordered by inclusion, with S_n acting."""
    if n < 1:
        raise StructureError("n must be positive")
    faces = [frozenset(c) for k in range(n + 1) for c in combinations(range(n), k)]
    if boundary:
        faces = [f for f in faces if len(f) < n]
    lt = {(a, b) for a in faces for b in faces if (a < b if strict else a <= b)}
    name = ("boundary_" if boundary else "") + f"simplex{n}"
    M = FinStructure(SIMPLEX_SIG, faces, relations={"lt": lt}, name=name)
    S = FinGroup.symmetric(n)
    act = GAction(S, faces, lambda p, f: frozenset(p[i] for i in f))
    return M, act

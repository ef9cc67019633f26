"""Presheaves of (G-)structures over finite spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Hashable, Iterable, Mapping

from .logic import LanguageSig
from .model import (
    Colimit, DirectedDiagram, FinGroup, FinStructure, GAction, StructMorphism,
    StructureError, classify_morphism, colimit_diagram, fmt_elem, is_equivariant,
)
from .space import FinTopology, Open, discrete

Elem = Hashable


class PresheafError(StructureError):
    pass


@dataclass(frozen=True)
class SectionTuple:
    open: Open
    elements: tuple

    def __str__(self):
        return "(" + ", ".join(fmt_elem(e) for e in self.elements) + ")"


class Presheaf:
    """Structures M_U on the nonempty opens with restrictions M_U -> M_V for V <= U.

    ``restrictions[V, U]`` is a dict sending elements of M_U to M_V. When an
    action is given for every fiber the presheaf is a presheaf of G-structures.
    """

    def __init__(self, topology: FinTopology, fibers: Mapping[Open, FinStructure],
                 restrictions: Mapping[tuple[Open, Open], Mapping | callable],
                 actions: Mapping[Open, GAction] | None = None, name: str = ""):
        self.topology = topology
        self.fibers = {frozenset(U): M for U, M in fibers.items()}
        self.name = name
        missing = [topology.fmt(U) for U in topology.nonempty_opens if U not in self.fibers]
        if missing:
            raise PresheafError(f"missing fibers over {missing}")
        sigs = {M.sig for M in self.fibers.values()}
        if len(sigs) != 1:
            raise PresheafError("fibers use different signatures")
        self.sig: LanguageSig = sigs.pop()
        self._rho: dict[tuple[Open, Open], dict] = {}
        given = {(frozenset(V), frozenset(U)): m for (V, U), m in restrictions.items()}
        for U in topology.nonempty_opens:
            for V in topology.opens_within(U):
                if (V, U) in given:
                    m = given[V, U]
                    if not isinstance(m, Mapping):
                        m = {x: m(x) for x in self.fibers[U].universe}
                    self._rho[V, U] = dict(m)
                elif V == U:
                    self._rho[U, U] = {x: x for x in self.fibers[U].universe}
                else:
                    raise PresheafError(f"missing restriction {topology.fmt(U)} -> "
                                        f"{topology.fmt(V)}")
        self.actions = {frozenset(U): a for U, a in actions.items()} if actions else None
        if self.actions is not None:
            groups = {a.group.elements for a in self.actions.values()}
            if len(groups) != 1 or set(self.actions) != set(self.fibers):
                raise PresheafError("actions must share one group and cover every fiber")

    def __repr__(self):
        return f"<Presheaf {self.name} over {len(self.topology.points)} points>"

    @property
    def group(self) -> FinGroup | None:
        return next(iter(self.actions.values())).group if self.actions else None

    def fiber(self, U) -> FinStructure:
        return self.fibers[frozenset(U)]

    def rho(self, V, U) -> dict:
        """Restriction map M_U -> M_V."""
        try:
            return self._rho[frozenset(V), frozenset(U)]
        except KeyError:
            raise PresheafError(f"no restriction from {self.topology.fmt(U)} "
                                f"to {self.topology.fmt(V)}") from None

    def restrict(self, a: Elem, U: Open, V: Open) -> Elem:
        return self._rho[V, U][a]

    def restriction_morphism(self, V, U) -> StructMorphism:
        return StructMorphism(self.fiber(U), self.fiber(V), self.rho(V, U))

    def sections(self, U: Open, n: int = 1) -> Iterable[SectionTuple]:
        for t in product(self.fibers[U].universe, repeat=n):
            yield SectionTuple(U, t)


def validate_presheaf(P: Presheaf) -> list[str]:
    T = P.topology
    out = []
    for U in T.nonempty_opens:
        if any(P.rho(U, U)[x] != x for x in P.fibers[U].universe):
            out.append(f"restriction {T.fmt(U)} -> {T.fmt(U)} is not the identity")
    for U in T.nonempty_opens:
        for V in T.opens_within(U):
            for W in T.opens_within(V):
                a, b, c = P.rho(W, V), P.rho(V, U), P.rho(W, U)
                if any(a[b[x]] != c[x] for x in P.fibers[U].universe):
                    out.append(f"not functorial at {T.fmt(W)} <= {T.fmt(V)} <= {T.fmt(U)}")
    for (V, U), m in P._rho.items():
        if V == U:
            continue
        alpha = StructMorphism(P.fibers[U], P.fibers[V], m)
        if not classify_morphism(alpha).is_morphism:
            out.append(f"restriction {T.fmt(U)} -> {T.fmt(V)} is not a morphism")
        if P.actions and not is_equivariant(alpha, P.actions[U], P.actions[V]):
            out.append(f"restriction {T.fmt(U)} -> {T.fmt(V)} is not equivariant")
    return out


def restrict_section(P: Presheaf, a: SectionTuple, V: Iterable) -> SectionTuple:
    V = frozenset(V)
    if not V:
        raise PresheafError("cannot restrict to the empty set")
    if not V <= a.open or not P.topology.is_open(V):
        raise PresheafError(f"{P.topology.fmt(V)} is not an open subset of "
                            f"{P.topology.fmt(a.open)}")
    m = P.rho(V, a.open)
    return SectionTuple(V, tuple(m[x] for x in a.elements))


# --- stalks ----------------------------------------------------------------

def open_diagram(P: Presheaf, index_opens: Iterable[Open], with_actions: bool = True
                 ) -> DirectedDiagram:
    idx = list(index_opens)
    return DirectedDiagram(
        idx, lambda j, i: j <= i,
        {U: P.fibers[U] for U in idx},
        {(V, U): P.rho(V, U) for U in idx for V in idx if V <= U},
        {U: P.actions[U] for U in idx} if (with_actions and P.actions) else None)


@dataclass
class Stalk:
    point: Hashable
    colimit: Colimit

    @property
    def stalk(self) -> FinStructure:
        return self.colimit.structure

    def germ_of(self, a: SectionTuple) -> tuple:
        return tuple(self.colimit.germ_of(a.open, x) for x in a.elements)


def stalk_at(P: Presheaf, x) -> Stalk:
    P.topology.check_point(x)
    return Stalk(x, colimit_diagram(open_diagram(P, P.topology.neighbourhoods(x)), check=False))


def stalk_matches_min_open(P: Presheaf, x) -> bool:
    """The germ map out of M_{U_x} is an isomorphism onto the stalk."""
    st = stalk_at(P, x)
    Ux = P.topology.min_open_nbhd(x)
    return classify_morphism(st.colimit.germ_maps[Ux]).is_iso


# --- gluing ----------------------------------------------------------------

@dataclass
class ExactnessReport:
    exact: bool
    coherent: bool
    witnesses: list[str] = field(default_factory=list)


def antichain_covers(T: FinTopology, U: Open) -> Iterable[tuple[Open, ...]]:
    """Covers of U by proper open subsets, no member inside another.

    A cover with nested members has the same compatible families and the
    same gluings as its maximal members, so these are the only ones to check.
    """
    subs = [V for V in T.opens_within(U) if V != U]
    for k in range(2, len(subs) + 1):
        for C in combinations(subs, k):
            if frozenset().union(*C) != U:
                continue
            if any(a < b for a in C for b in C):
                continue
            yield C


def compatible_families(P: Presheaf, cover: tuple[Open, ...]) -> Iterable[tuple]:
    n = len(cover)
    overlaps = {(i, j): cover[i] & cover[j] for i in range(n) for j in range(i)
                if cover[i] & cover[j]}
    chosen: list = []

    def extend(i):
        if i == n:
            yield tuple(chosen)
            return
        for s in P.fibers[cover[i]].universe:
            ok = True
            for j in range(i):
                W = overlaps.get((i, j))
                if W is not None and P.rho(W, cover[i])[s] != P.rho(W, cover[j])[chosen[j]]:
                    ok = False
                    break
            if ok:
                chosen.append(s)
                yield from extend(i + 1)
                chosen.pop()

    yield from extend(0)


def check_exactness(P: Presheaf, max_witnesses: int = 5) -> ExactnessReport:
    """Gluing existence (exact) and uniqueness (coherent) over every open cover."""
    T = P.topology
    rep = ExactnessReport(True, True)
    for U in T.nonempty_opens:
        for cover in antichain_covers(T, U):
            maps = [P.rho(V, U) for V in cover]
            gluings: dict[tuple, list] = {}
            for s in P.fibers[U].universe:
                gluings.setdefault(tuple(m[s] for m in maps), []).append(s)
            for fam in compatible_families(P, cover):
                found = gluings.get(fam, [])
                where = (f"cover {[T.fmt(V) for V in cover]} of {T.fmt(U)}, "
                         f"family {[fmt_elem(s) for s in fam]}")
                if not found:
                    rep.exact = False
                    if len(rep.witnesses) < max_witnesses:
                        rep.witnesses.append(f"no gluing: {where}")
                elif len(found) > 1:
                    rep.coherent = False
                    if len(rep.witnesses) < max_witnesses:
                        rep.witnesses.append(
                            f"gluing not unique: {where} glues to "
                            f"{fmt_elem(found[0])} and {fmt_elem(found[1])}")
    return rep


# --- example presheaves ----------------------------------------------------

def constant_presheaf(T: FinTopology, M: FinStructure, action: GAction | None = None
                      ) -> Presheaf:
    fibers = {U: M for U in T.nonempty_opens}
    rho = {(V, U): {x: x for x in M.universe}
           for U in T.nonempty_opens for V in T.opens_within(U)}
    acts = {U: action for U in T.nonempty_opens} if action else None
    return Presheaf(T, fibers, rho, acts, name=f"const({M.name})")


def _power_structure(coeff: FinStructure, k: int) -> FinStructure:
    sig = coeff.sig
    universe = list(product(coeff.universe, repeat=k))
    consts = {c: (v,) * k for c, v in coeff.constants.items()}

    def pointwise(f):
        n = sig.functions[f]
        if n == 0:
            return lambda: (coeff.apply(f, ()),) * k
        tab = {a: coeff.apply(f, a) for a in product(coeff.universe, repeat=n)}.__getitem__
        return lambda *args: tuple(map(tab, zip(*args)))
    fns = {f: pointwise(f) for f in sig.functions}
    rels = {}
    for r, ts in coeff.relations.items():
        cols = list(product(sorted(ts, key=fmt_elem), repeat=k))
        rels[r] = {tuple(zip(*c)) for c in cols}
    return FinStructure(sig, universe, consts, fns, rels,
                        name=f"{coeff.name}^{k}", check=False)


def sequence_sheaf(coeff: FinStructure, points: Iterable[Hashable],
                   action: GAction | None = None) -> Presheaf:
    """coeff^U on the discrete space, with pointwise symbols and action.

    A section over U is the tuple of its values at the points of U, taken
    in the order of ``points``.
    """
    T = discrete(points)
    pos = {p: i for i, p in enumerate(T.points)}
    ordered = {U: sorted(U, key=pos.__getitem__) for U in T.nonempty_opens}
    fibers = {U: _power_structure(coeff, len(U)) for U in T.nonempty_opens}
    rho = {}
    for U in T.nonempty_opens:
        for V in T.opens_within(U):
            idx = [ordered[U].index(p) for p in ordered[V]]
            rho[V, U] = {a: tuple(a[i] for i in idx) for a in fibers[U].universe}
    acts = None
    if action is not None:
        acts = {U: GAction(action.group, fibers[U].universe,
                           {(g, a): tuple(action(g, v) for v in a)
                            for g in action.group for a in fibers[U].universe},
                           check=False)
                for U in T.nonempty_opens}
    return Presheaf(T, fibers, rho, acts, name=f"seq({coeff.name})")


EMPTY_SIG = LanguageSig()


def graph_presheaf(n: int) -> Presheaf:
    """Graphs on the vertex set U, restricted by dropping the vertices outside V."""
    if not 1 <= n <= 6:
        raise PresheafError("graph presheaf size must be between 1 and 6")
    T = discrete(range(n))
    fibers = {}
    for U in T.nonempty_opens:
        pairs = [frozenset(e) for e in combinations(sorted(U), 2)]
        graphs = [frozenset(e for e, bit in zip(pairs, bits) if bit)
                  for bits in product((0, 1), repeat=len(pairs))]
        fibers[U] = FinStructure(EMPTY_SIG, graphs, name=f"G{T.fmt(U)}")
    rho = {(V, U): {g: frozenset(e for e in g if e <= V) for g in fibers[U].universe}
           for U in T.nonempty_opens for V in T.opens_within(U)}
    return Presheaf(T, fibers, rho, name=f"graphs({n})")

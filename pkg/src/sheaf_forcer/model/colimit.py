"""Colimits of finite directed systems of structures.

Indices follow the inverse-system convention: ``j <= i`` means j is later,
and the connecting map goes ``rho[j, i]: M_i -> M_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping

from ..logic import Formula, is_positive
from .group import GAction
from .morphism import MorphismError, StructMorphism, classify_morphism
from .structure import Elem, FinStructure, StructureError, fmt_elem

Index = Hashable


class DiagramError(StructureError):
    pass


@dataclass(frozen=True)
class Germ:
    """Class of ``element`` at ``index`` in the colimit; the pair is a canonical representative."""
    index: Hashable
    element: Hashable

    def __str__(self):
        return f"[{fmt_elem(self.element)}]"


class DirectedDiagram:
    def __init__(self, indices: Iterable[Index], le: Callable[[Index, Index], bool],
                 structures: Mapping[Index, FinStructure],
                 maps: Mapping[tuple[Index, Index], Mapping | Callable],
                 actions: Mapping[Index, GAction] | None = None):
        self.indices = tuple(indices)
        self.le = le
        self.structures = dict(structures)
        self.actions = dict(actions) if actions else None
        self._maps = {}
        for j in self.indices:
            for i in self.indices:
                if le(j, i):
                    if (j, i) in maps:
                        m = maps[j, i]
                    elif i == j:
                        m = {x: x for x in self.structures[i].universe}
                    else:
                        raise DiagramError(f"missing connecting map for {j} <= {i}")
                    if not isinstance(m, Mapping):
                        m = {x: m(x) for x in self.structures[i].universe}
                    self._maps[j, i] = m

    def rho(self, j: Index, i: Index) -> Mapping:
        return self._maps[j, i]

    def below(self, i: Index) -> list[Index]:
        return [j for j in self.indices if self.le(j, i)]

    def lower_bound(self, idx: Iterable[Index]) -> Index:
        idx = list(idx)
        for k in self.indices:
            if all(self.le(k, i) for i in idx):
                return k
        raise DiagramError(f"indices {idx} have no common lower bound")

    @property
    def bottom(self) -> Index:
        return self.lower_bound(self.indices)

    def problems(self) -> list[str]:
        out = []
        for i in self.indices:
            if any(self._maps[i, i][x] != x for x in self.structures[i].universe):
                out.append(f"rho[{i},{i}] is not the identity")
        for i in self.indices:
            for j in self.below(i):
                for k in self.below(j):
                    a, b, c = self._maps[k, j], self._maps[j, i], self._maps[k, i]
                    if any(a[b[x]] != c[x] for x in self.structures[i].universe):
                        out.append(f"rho[{k},{j}] o rho[{j},{i}] != rho[{k},{i}]")
        for (j, i), m in self._maps.items():
            try:
                StructMorphism(self.structures[i], self.structures[j], m)
            except MorphismError as e:
                out.append(f"rho[{j},{i}]: {e}")
        return out

    def morphism(self, j: Index, i: Index) -> StructMorphism:
        return StructMorphism(self.structures[i], self.structures[j], self._maps[j, i])


@dataclass
class Colimit:
    structure: FinStructure
    germ_maps: dict[Index, StructMorphism]
    action: GAction | None = None

    def germ_of(self, i: Index, a: Elem) -> Germ:
        return self.germ_maps[i].mapping[a]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def colimit_diagram(D: DirectedDiagram, check: bool = True,
                    table_limit: int = 20000) -> Colimit:
    if check:
        problems = D.problems()
        if problems:
            raise DiagramError("; ".join(problems))
    uf = _UnionFind()
    for i in D.indices:
        for a in D.structures[i].universe:
            uf.find((i, a))
        for j in D.below(i):
            rho = D.rho(j, i)
            for a in D.structures[i].universe:
                uf.union((i, a), (j, rho[a]))

    # later indices (fewer indices below them) give the canonical representative
    depth = {i: len(D.below(i)) for i in D.indices}
    order = sorted(D.indices, key=lambda i: (depth[i], D.indices.index(i)))
    canon: dict = {}
    for i in order:
        for a in D.structures[i].universe:
            canon.setdefault(uf.find((i, a)), Germ(i, a))
    germ = {(i, a): canon[uf.find((i, a))] for i in D.indices
            for a in D.structures[i].universe}
    universe = list(dict.fromkeys(germ[i, a] for i in order
                                  for a in D.structures[i].universe))
    sig = D.structures[D.indices[0]].sig

    def at(k, g: Germ):
        return D.rho(k, g.index)[g.element]

    consts = {}
    for c in sig.constants:
        vals = {germ[i, D.structures[i].constants[c]] for i in D.indices}
        if len(vals) != 1:
            raise DiagramError(f"constant {c} has no single germ")
        consts[c] = vals.pop()

    def make_fn(f):
        @lru_cache(maxsize=None)
        def fn(*args):
            k = D.lower_bound([g.index for g in args]) if args else D.bottom
            return germ[k, D.structures[k].apply(f, tuple(at(k, g) for g in args))]
        return fn

    fns = {}
    for f, n in sig.functions.items():
        fn = make_fn(f)
        fns[f] = ({args: fn(*args) for args in product(universe, repeat=n)}
                  if len(universe) ** n <= table_limit else fn)

    rels = {r: {tuple(germ[i, a] for a in t) for i in D.indices
                for t in D.structures[i].relations[r]} for r in sig.relations}
    M = FinStructure(sig, universe, consts, fns, rels, name="colim", check=False)
    gm = {i: StructMorphism(D.structures[i], M,
                            {a: germ[i, a] for a in D.structures[i].universe})
          for i in D.indices}

    action = None
    if D.actions:
        G = D.actions[D.indices[0]].group
        tab = {}
        for i in D.indices:
            act = D.actions[i]
            for g in G:
                for a in D.structures[i].universe:
                    val = germ[i, act(g, a)]
                    key = (g, germ[i, a])
                    if tab.setdefault(key, val) != val:
                        raise DiagramError(f"limit action ill-defined at {key}")
        action = GAction(G, universe, tab)
    return Colimit(M, gm, action)


def verify_colimit_preservation(D: DirectedDiagram, phi: Formula, i: Index,
                                a: tuple, variables: list[str] | None = None,
                                colimit: Colimit | None = None) -> bool:
    """Check that the colimit satisfies phi([a]) iff some later stage satisfies phi(rho(a))."""
    from ..logic import free_vars
    if not is_positive(phi):
        raise DiagramError("formula is not positive")
    for (j, k), m in D._maps.items():
        if not classify_morphism(D.morphism(j, k)).is_embedding:
            raise DiagramError(f"connecting map rho[{j},{k}] is not an embedding")
    variables = variables or free_vars(phi)
    C = colimit or colimit_diagram(D)
    lhs = C.structure.satisfies(phi, {v: C.germ_of(i, x) for v, x in zip(variables, a)})
    rhs = any(D.structures[j].satisfies(phi, {v: D.rho(j, i)[x] for v, x in zip(variables, a)})
              for j in D.below(i))
    return lhs == rhs

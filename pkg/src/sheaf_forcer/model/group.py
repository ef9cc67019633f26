"""Finite groups and their actions on finite sets."""

from __future__ import annotations

from itertools import permutations, product
from typing import Callable, Hashable, Iterable, Mapping, Sequence


class GroupError(ValueError):
    pass


class FinGroup:
    """A finite group given by its multiplication table.

    The axioms are verified exhaustively on construction.
    """

    def __init__(self, elements: Iterable[Hashable],
                 mul: Mapping[tuple, Hashable] | Callable[[Hashable, Hashable], Hashable],
                 name: str = ""):
        self.elements = tuple(dict.fromkeys(elements))
        if callable(mul) and not isinstance(mul, Mapping):
            mul = {(g, h): mul(g, h) for g in self.elements for h in self.elements}
        self.mul = dict(mul)
        self.name = name
        E = set(self.elements)
        for g, h in product(self.elements, repeat=2):
            if self.mul.get((g, h)) not in E:
                raise GroupError(f"product {g}*{h} missing or outside the group")
        ids = [e for e in self.elements
               if all(self.mul[e, g] == g == self.mul[g, e] for g in self.elements)]
        if not ids:
            raise GroupError("no identity element")
        self.identity = ids[0]
        self.inv = {}
        for g in self.elements:
            inv = [h for h in self.elements if self.mul[g, h] == self.identity]
            if not inv or self.mul[inv[0], g] != self.identity:
                raise GroupError(f"{g} has no inverse")
            self.inv[g] = inv[0]
        for a, b, c in product(self.elements, repeat=3):
            if self.mul[self.mul[a, b], c] != self.mul[a, self.mul[b, c]]:
                raise GroupError(f"not associative at {(a, b, c)}")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"<FinGroup {self.name or ''} order={len(self)}>"

    def op(self, g, h):
        return self.mul[g, h]

    def subgroup(self, elements: Iterable[Hashable], name: str = "") -> FinGroup:
        els = [g for g in self.elements if g in set(elements)]
        S = set(els)
        for g, h in product(els, repeat=2):
            if self.mul[g, h] not in S:
                raise GroupError("subset not closed under multiplication")
        return FinGroup(els, {(g, h): self.mul[g, h] for g in els for h in els}, name)

    def closure(self, gens: Iterable[Hashable]) -> frozenset:
        out = {self.identity}
        frontier = list(out)
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul[x, g]
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(out)

    def subgroups(self, bound: int = 120) -> list[frozenset]:
        """All subgroups, smallest first.

        Every subgroup is reached by adjoining one element at a time to a
        smaller subgroup.
        """
        if len(self) > bound:
            raise GroupError(f"group order {len(self)} exceeds bound {bound}")
        pos = {g: i for i, g in enumerate(self.elements)}
        seen = {frozenset([self.identity])}
        frontier = list(seen)
        while frontier:
            nxt = []
            for H in frontier:
                for g in self.elements:
                    if g in H:
                        continue
                    K = self.closure(list(H) + [g])
                    if K not in seen:
                        seen.add(K)
                        nxt.append(K)
            frontier = nxt
        return sorted(seen, key=lambda H: (len(H), sorted(pos[g] for g in H)))

    # constructors

    @classmethod
    def trivial(cls) -> FinGroup:
        return cls([0], {(0, 0): 0}, "1")

    @classmethod
    def cyclic(cls, n: int) -> FinGroup:
        return cls(range(n), lambda a, b: (a + b) % n, f"Z{n}")

    @classmethod
    def symmetric(cls, n: int) -> FinGroup:
        perms = list(permutations(range(n)))
        return cls(perms, compose_perm, f"S{n}")

    @classmethod
    def from_permutations(cls, gens: Sequence[tuple[int, ...]], name: str = "") -> FinGroup:
        n = len(gens[0]) if gens else 0
        S = FinGroup.symmetric(n) if n else cls.trivial()
        return S.subgroup(S.closure(gens), name)


def compose_perm(p: tuple, q: tuple) -> tuple:
    """(p*q)(i) = p(q(i)), so q acts first."""
    return tuple(p[i] for i in q)


class GAction:
    """A left action of a finite group on a finite set."""

    def __init__(self, group: FinGroup, universe: Iterable[Hashable],
                 act: Mapping[tuple, Hashable] | Callable[[Hashable, Hashable], Hashable],
                 check: bool = True):
        self.group = group
        self.universe = tuple(universe)
        if callable(act) and not isinstance(act, Mapping):
            act = {(g, x): act(g, x) for g in group for x in self.universe}
        self.table = dict(act)
        if check:
            problems = self.problems()
            if problems:
                raise GroupError(problems[0])

    def __call__(self, g, x):
        return self.table[g, x]

    def act(self, g, x):
        return self.table[g, x]

    def problems(self) -> list[str]:
        G, U = self.group, set(self.universe)
        out = []
        for g in G:
            for x in self.universe:
                if self.table.get((g, x)) not in U:
                    out.append(f"{g}.{x} undefined or outside the universe")
        if out:
            return out
        for x in self.universe:
            if self.table[G.identity, x] != x:
                out.append(f"identity moves {x}")
        for g, h in product(G, repeat=2):
            gh = G.mul[g, h]
            for x in self.universe:
                if self.table[g, self.table[h, x]] != self.table[gh, x]:
                    out.append(f"not compatible: {g}.({h}.{x}) != ({gh}).{x}")
                    return out
        return out

    def restrict(self, subgroup: Iterable[Hashable]) -> GAction:
        H = self.group.subgroup(subgroup)
        return GAction(H, self.universe, {(g, x): self.table[g, x]
                                          for g in H for x in self.universe}, check=False)

    def orbit(self, x) -> frozenset:
        return frozenset(self.table[g, x] for g in self.group)

    def orbits(self) -> list[frozenset]:
        seen, out = set(), []
        for x in self.universe:
            if x not in seen:
                o = self.orbit(x)
                seen |= o
                out.append(o)
        return out


def trivial_action(universe: Iterable[Hashable]) -> GAction:
    G = FinGroup.trivial()
    universe = tuple(universe)
    return GAction(G, universe, {(0, x): x for x in universe}, check=False)

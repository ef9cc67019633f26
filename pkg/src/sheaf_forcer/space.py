"""Finite topological spaces, closures and filters of open sets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, permutations, product
from typing import Hashable, Iterable

Point = Hashable
Open = frozenset


class TopologyError(ValueError):
    pass


class FinTopology:
    """A finite point set together with its complete family of open sets.

    Opens are kept in a canonical order: by size, then by the positions of
    their points in ``points``.
    """

    def __init__(self, points: Iterable[Point], opens: Iterable[Iterable[Point]]):
        self.points: tuple[Point, ...] = tuple(dict.fromkeys(points))
        self._pos = {p: i for i, p in enumerate(self.points)}
        family = {frozenset(o) for o in opens}
        X = frozenset(self.points)
        for o in family:
            if not o <= X:
                raise TopologyError(f"open {set(o)} is not a subset of the points")
        if frozenset() not in family or X not in family:
            raise TopologyError("opens must contain the empty set and the whole space")
        for a, b in combinations(family, 2):
            if a | b not in family or a & b not in family:
                raise TopologyError("opens are not closed under union and intersection")
        self.opens: tuple[Open, ...] = tuple(sorted(family, key=self.sort_key))
        self._open_set = family

    def sort_key(self, s: Iterable[Point]):
        idx = sorted(self._pos[p] for p in s)
        return (len(idx), idx)

    def __repr__(self):
        return f"FinTopology({list(self.points)}, {[self.fmt(o) for o in self.opens]})"

    def __eq__(self, other):
        return (isinstance(other, FinTopology) and set(self.points) == set(other.points)
                and self._open_set == other._open_set)

    def __hash__(self):
        return hash((frozenset(self.points), frozenset(self._open_set)))

    @property
    def whole(self) -> Open:
        return frozenset(self.points)

    @cached_property
    def nonempty_opens(self) -> tuple[Open, ...]:
        return tuple(o for o in self.opens if o)

    def is_open(self, s: Iterable[Point]) -> bool:
        return frozenset(s) in self._open_set

    def check_point(self, x: Point) -> None:
        if x not in self._pos:
            raise TopologyError(f"unknown point {x!r}")

    def opens_within(self, U: Open) -> list[Open]:
        return [V for V in self.nonempty_opens if V <= U]

    def neighbourhoods(self, x: Point, within: Open | None = None) -> list[Open]:
        """Open sets V with x in V (and V inside ``within`` when given)."""
        return [V for V in self.nonempty_opens
                if x in V and (within is None or V <= within)]

    @cached_property
    def _min_nbhd(self) -> dict[Point, Open]:
        out = {}
        for x in self.points:
            U = self.whole
            for V in self.nonempty_opens:
                if x in V:
                    U = U & V
            out[x] = U
        return out

    def min_open_nbhd(self, x: Point) -> Open:
        self.check_point(x)
        return self._min_nbhd[x]

    def closure(self, V: Iterable[Point]) -> frozenset:
        V = frozenset(V)
        outside = frozenset().union(*(O for O in self.opens if not (O & V)))
        return self.whole - outside

    def is_dense_in(self, V: Iterable[Point], U: Iterable[Point]) -> bool:
        return frozenset(U) <= self.closure(V)

    @cached_property
    def minimal_opens(self) -> tuple[Open, ...]:
        """Minimal nonempty open sets (atoms of the open lattice)."""
        ne = self.nonempty_opens
        return tuple(O for O in ne if not any(V < O for V in ne))

    def is_discrete(self) -> bool:
        return len(self.opens) == 2 ** len(self.points)

    def fmt(self, s: Iterable[Point]) -> str:
        return "{" + ",".join(str(p) for p in sorted(s, key=self._pos.__getitem__)) + "}"


@dataclass(frozen=True)
class ClosureDensity:
    closure_of_V: frozenset
    is_dense_in_U: bool


def closure_density(T: FinTopology, V: Iterable[Point], U: Iterable[Point]) -> ClosureDensity:
    cl = T.closure(V)
    return ClosureDensity(cl, frozenset(U) <= cl)


def build_topology(points: Iterable[Point], generators: Iterable[Iterable[Point]]) -> FinTopology:
    points = tuple(dict.fromkeys(points))
    X = frozenset(points)
    family = {frozenset(), X}
    for g in generators:
        g = frozenset(g)
        if not g <= X:
            raise TopologyError(f"generator {set(g)} is not a subset of the points")
        family.add(g)
    # close under pairwise intersection, then union
    changed = True
    while changed:
        changed = False
        for a, b in list(combinations(family, 2)):
            for c in (a & b, a | b):
                if c not in family:
                    family.add(c)
                    changed = True
    return FinTopology(points, family)


def min_open_nbhd(T: FinTopology, x: Point) -> Open:
    return T.min_open_nbhd(x)


def discrete(points: Iterable[Point]) -> FinTopology:
    points = list(points)
    return build_topology(points, [[p] for p in points])


def indiscrete(points: Iterable[Point]) -> FinTopology:
    return build_topology(points, [])


def sierpinski() -> FinTopology:
    return build_topology(["a", "b"], [["a"]])


# --- filters ---------------------------------------------------------------

class OpenFilter:
    """A proper filter in the lattice of open sets of a finite space."""

    def __init__(self, topology: FinTopology, members: Iterable[Iterable[Point]]):
        self.topology = topology
        self.members: frozenset[Open] = frozenset(frozenset(m) for m in members)
        problems = filter_problems(topology, self.members)
        if problems:
            raise TopologyError("; ".join(problems))
        self._ordered = tuple(sorted(self.members, key=topology.sort_key))

    @classmethod
    def generated_by(cls, T: FinTopology, family: Iterable[Iterable[Point]]) -> OpenFilter:
        family = [frozenset(f) for f in family]
        for f in family:
            if not T.is_open(f):
                raise TopologyError(f"{T.fmt(f)} is not open")
        core = T.whole
        for f in family:
            core &= f
        return cls(T, [U for U in T.nonempty_opens if core <= U] if core else [])

    def __contains__(self, U) -> bool:
        return frozenset(U) in self.members

    def contains(self, U) -> bool:
        return frozenset(U) in self.members

    def __iter__(self):
        return iter(self._ordered)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return isinstance(other, OpenFilter) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return f"OpenFilter({[self.topology.fmt(m) for m in self]})"

    @property
    def core(self) -> Open:
        """Intersection of all members; a member itself since the filter is finite."""
        out = self.topology.whole
        for m in self.members:
            out &= m
        return out

    @property
    def is_proper(self) -> bool:
        return frozenset() not in self.members

    @property
    def is_maximal(self) -> bool:
        return self.core in self.topology.minimal_opens

    def dense_open_membership_check(self) -> list[tuple[Open, Open]]:
        """Pairs (U, V) with U a member, V open and dense in U, V not a member."""
        T = self.topology
        bad = []
        for U in self:
            for V in T.opens_within(U):
                if T.is_dense_in(V, U) and V not in self.members:
                    bad.append((U, V))
        return bad


def filter_problems(T: FinTopology, members: frozenset[Open]) -> list[str]:
    out = []
    if not members:
        return ["filter is empty"]
    for m in members:
        if not T.is_open(m):
            out.append(f"{T.fmt(m)} is not open")
    if frozenset() in members:
        out.append("filter is not proper")
    if T.whole not in members:
        out.append("whole space missing")
    for a, b in combinations(members, 2):
        if a & b not in members:
            out.append(f"not closed under intersection: {T.fmt(a)}, {T.fmt(b)}")
    for m in members:
        for V in T.nonempty_opens:
            if m <= V and V not in members:
                out.append(f"not upward closed: {T.fmt(m)} <= {T.fmt(V)}")
    return out


@dataclass(frozen=True)
class FilterReport:
    is_proper: bool
    is_maximal: bool
    dense_open_failures: list[tuple[Open, Open]]


def filter_utilities(F: OpenFilter) -> FilterReport:
    return FilterReport(F.is_proper, F.is_maximal,
                        F.dense_open_membership_check() if F.is_maximal else [])


def maximal_open_filters(T: FinTopology) -> list[OpenFilter]:
    """Up-sets of the minimal nonempty opens; these are exactly the maximal proper filters."""
    return [OpenFilter(T, [U for U in T.nonempty_opens if O <= U]) for O in T.minimal_opens]


def all_proper_filters(T: FinTopology) -> list[frozenset[Open]]:
    """Every proper, upward closed, intersection closed family of opens.

    Brute force over all families of nonempty opens; meant as an oracle
    for small spaces only.
    """
    ne = T.nonempty_opens
    if len(ne) > 16:
        raise TopologyError("too many opens for brute-force filter enumeration")
    out = []
    for mask in range(1, 2 ** len(ne)):
        fam = frozenset(ne[i] for i in range(len(ne)) if mask >> i & 1)
        if not filter_problems(T, fam):
            out.append(fam)
    return out


def maximal_filters_by_enumeration(T: FinTopology) -> list[frozenset[Open]]:
    fams = all_proper_filters(T)
    return [f for f in fams if not any(f < g for g in fams)]


# --- enumeration of small spaces ------------------------------------------

def preorder_topologies(n: int, up_to_homeomorphism: bool = True) -> list[FinTopology]:
    """All topologies on the points 0..n-1.

    A topology on a finite set is the same as a preorder; the minimal
    neighbourhoods U_x = {y : y <= x} generate it.
    """
    return list(_preorder_topologies(n, up_to_homeomorphism))


@lru_cache(maxsize=None)
def _preorder_topologies(n: int, up_to_homeomorphism: bool) -> tuple[FinTopology, ...]:
    pts = list(range(n))
    pairs = [(i, j) for i in pts for j in pts if i != j]
    seen = set()
    out = []
    for bits in product((0, 1), repeat=len(pairs)):
        le = {(i, i) for i in pts} | {p for p, b in zip(pairs, bits) if b}
        if any((a, c) not in le for (a, b) in le for (b2, c) in le if b == b2):
            continue
        if up_to_homeomorphism:
            canon = min(tuple(sorted((s[a], s[b]) for a, b in le))
                        for s in permutations(pts))
            if canon in seen:
                continue
            seen.add(canon)
        gens = [[y for y in pts if (y, x) in le] for x in pts]
        out.append(build_topology(pts, gens))
    return tuple(out)

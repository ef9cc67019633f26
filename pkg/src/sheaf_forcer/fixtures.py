"""Generated inputs for property sweeps: small formulas and small presheaves."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

from .logic import (
    And, Apply, Eq, Exists, Forall, Formula, Implies, LanguageSig, Not, Or, Rel, Var,
    free_vars, is_positive,
)
from .model import FinStructure
from .sheaf import Presheaf, check_exactness
from .space import FinTopology, Open, preorder_topologies, sierpinski

SWEEP_SIG = LanguageSig(functions={"f": 1}, relations={"R": 1})
VARIABLES = ("x", "y", "z", "w", "v")


# --- formulas --------------------------------------------------------------

def atoms(sig: LanguageSig, scope: tuple[str, ...]) -> list[Formula]:
    """R(v) for unary R, f(v) = v for unary f, and v = w for v before w."""
    out: list[Formula] = []
    for v in scope:
        for r, n in sorted(sig.relations.items()):
            if n == 1:
                out.append(Rel(r, (Var(v),)))
        for f, n in sorted(sig.functions.items()):
            if n == 1:
                out.append(Eq(Apply(f, (Var(v),)), Var(v)))
    for i, v in enumerate(scope):
        for w in scope[i + 1:]:
            out.append(Eq(Var(v), Var(w)))
    return out


def formula_space(sig: LanguageSig, depth: int, scope: tuple[str, ...] = ("x",),
                  binary: bool = True) -> list[Formula]:
    """Every formula of the bounded grammar with free variables inside ``scope``.

    Level 0 is the atoms. Level d adds the negation of a level d-1 formula,
    a quantifier over a fresh variable in front of a level d-1 formula that
    uses it, and (with ``binary``) the conjunction, disjunction or
    implication of a level d-1 formula with an atom, in either order.
    The list is sorted by size, then text, so sweeps are reproducible.
    """
    if len(scope) + depth > len(VARIABLES):
        raise ValueError("not enough variable names for this depth")
    cache: dict = {}

    def level(d: int, sc: tuple[str, ...]) -> frozenset:
        key = (d, sc)
        if key in cache:
            return cache[key]
        base = atoms(sig, sc)
        if d == 0:
            out = frozenset(base)
        else:
            prev = level(d - 1, sc)
            new = set(prev)
            new.update(Not(p) for p in prev)
            w = next(v for v in VARIABLES if v not in sc)
            inner = [p for p in level(d - 1, sc + (w,)) if w in free_vars(p)]
            for p in inner:
                new.add(Forall(w, p))
                new.add(Exists(w, p))
            if binary:
                for p in prev:
                    for a in base:
                        new.update((And(p, a), Or(p, a), Implies(p, a), Implies(a, p)))
            out = frozenset(new)
        cache[key] = out
        return out

    return sorted(level(depth, tuple(scope)), key=lambda p: (len(str(p)), str(p)))


def positive_part(formulas: list[Formula]) -> list[Formula]:
    return [p for p in formulas if is_positive(p)]


# --- presheaves --------------------------------------------------------------

@dataclass
class Instance:
    """A named presheaf for the sweeps."""
    name: str
    presheaf: Presheaf


def _lower_covers(T: FinTopology, U: Open) -> list[Open]:
    proper = [V for V in T.opens_within(U) if V != U]
    return [V for V in proper if not any(V < W for W in proper)]


def random_presheaf(T: FinTopology, rng: random.Random, sig: LanguageSig = SWEEP_SIG,
                    max_fiber: int = 3, tries: int = 50) -> Presheaf | None:
    """A random presheaf with fibers of at most ``max_fiber`` elements.

    Fibers are built from the smallest opens up. An element over U is fixed
    by its restrictions to the opens just below U, so functoriality holds by
    construction. Opens that are unions of smaller opens receive every
    compatible profile (occasionally twice, which breaks uniqueness of
    gluings); the others get a random handful. Function and relation symbols
    are then chosen among the values that make every restriction a morphism.
    Returns None when no attempt fits the size bound.
    """
    minimal = sorted({T.min_open_nbhd(x) for x in T.points}, key=sorted)
    opens = sorted(T.nonempty_opens, key=len)
    for _ in range(tries):
        # sizes over the minimal opens multiply up to the size over X, so
        # draw them against a shrinking budget, in random order
        sizes, budget = {}, max_fiber
        for O in rng.sample(minimal, len(minimal)):
            sizes[O] = rng.randint(1, max(1, budget))
            budget //= sizes[O]
        fiber: dict[Open, list] = {}
        below: dict[Open, list[Open]] = {}
        rho: dict[tuple[Open, Open], dict] = {}
        ok = True
        for U in opens:
            low = _lower_covers(T, U)
            below[U] = low
            profiles = [p for p in product(*(fiber[V] for V in low))
                        if _compatible(T, rho, low, p)]
            if U in sizes:
                elems = [(i, rng.choice(profiles)) for i in range(sizes[U])]
            else:
                elems = [(0, p) for p in profiles]
                if profiles and len(profiles) < max_fiber and rng.random() < 0.25:
                    elems.append((1, rng.choice(profiles)))
            if not elems or len(elems) > max_fiber:
                ok = False
                break
            fiber[U] = [e for e in range(len(elems))]
            for V in low:
                j = low.index(V)
                rho[V, U] = {e: prof[j] for e, (_, prof) in enumerate(elems)}
        if not ok:
            continue
        full = _compose(T, opens, below, rho, fiber)
        structs = _random_structure(T, opens, below, full, fiber, rng, sig)
        if structs is None:
            continue
        return Presheaf(T, structs, full, name="random")
    return None


def _compatible(T, rho, low, profile) -> bool:
    for i, V in enumerate(low):
        for j in range(i):
            W = V & low[j]
            if not W:
                continue
            if _down(T, rho, W, V, profile[i]) != _down(T, rho, W, low[j], profile[j]):
                return False
    return True


def _down(T, rho, W, V, s):
    """Restrict s from V to W by walking down through lower covers."""
    while V != W:
        nxt = next(Z for (Z, Y) in rho if Y == V and W <= Z)
        s = rho[nxt, V][s]
        V = nxt
    return s


def _compose(T, opens, below, rho, fiber) -> dict:
    full = {}
    for U in opens:
        for V in T.opens_within(U):
            full[V, U] = {s: _down(T, rho, V, U, s) for s in fiber[U]}
    return full


def _random_structure(T, opens, below, full, fiber, rng, sig) -> dict | None:
    structs = {}
    fns: dict[Open, dict] = {}
    rels: dict[Open, set] = {}
    for U in opens:
        low = below[U]
        tab = {}
        for f in sig.functions:
            for s in fiber[U]:
                cands = [t for t in fiber[U]
                         if all(full[V, U][t] == fns[V][f][(full[V, U][s],)] for V in low)]
                if not cands:
                    return None
                tab.setdefault(f, {})[(s,)] = rng.choice(cands)
        fns[U] = tab
        allowed = [s for s in fiber[U] if all(full[V, U][s] in rels[V] for V in low)]
        rels[U] = {s for s in allowed if rng.random() < 0.5}
        structs[U] = FinStructure(
            sig, fiber[U], functions={f: tab[f] for f in sig.functions},
            relations={r: {(s,) for s in rels[U]} for r in sig.relations}, check=False)
    return structs


def sierpinski_counterexample() -> Presheaf:
    """Exact presheaf on the Sierpinski space with M_X = {0} and M_{a} = {0, 1}."""
    T = sierpinski()
    X, A = T.whole, frozenset({"a"})
    sig = SWEEP_SIG

    def struct(univ):
        return FinStructure(sig, univ, functions={"f": {(u,): u for u in univ}},
                            relations={"R": set()})
    return Presheaf(T, {X: struct([0]), A: struct([0, 1])},
                    {(A, X): {0: 0}}, name="sierpinski-counterexample")


def exact_instances(max_points: int = 4, per_topology: int = 2, seed: int = 0,
                    sig: LanguageSig = SWEEP_SIG, max_fiber: int = 3) -> list[Instance]:
    """Exact presheaves over every topology on at most ``max_points`` points.

    Deterministic for a given seed. Non-exact draws are discarded.
    """
    rng = random.Random(seed)
    out = [Instance("sierpinski-counterexample", sierpinski_counterexample())]
    for n in range(1, max_points + 1):
        for t, T in enumerate(preorder_topologies(n)):
            got = 0
            for attempt in range(6 * per_topology):
                P = random_presheaf(T, rng, sig, max_fiber)
                if P is None or not check_exactness(P).exact:
                    continue
                out.append(Instance(f"n{n}-t{t}-p{got}", P))
                got += 1
                if got == per_topology:
                    break
    return out


def embedding_chains(max_length: int = 4, max_fiber: int = 3, count: int = 40,
                     seed: int = 0, sig: LanguageSig = SWEEP_SIG) -> Iterator[list[FinStructure]]:
    """Chains M_0 <= M_1 <= ... of substructures (later stages are bigger).

    Each stage is a relational/functional extension of the previous one, so
    every inclusion is an embedding.
    """
    rng = random.Random(seed)
    for _ in range(count):
        length = rng.randint(2, max_length)
        sizes = sorted(rng.randint(1, max_fiber) for _ in range(length))
        top = sizes[-1]
        univ = list(range(top))
        for _retry in range(50):
            fn = {(u,): rng.randrange(top) for u in univ}
            rel = {(u,) for u in univ if rng.random() < 0.5}
            # stage k must be closed under f
            if all(all(fn[(u,)] < s for u in range(s)) for s in sizes):
                break
        else:
            continue
        chain = []
        for s in sizes:
            sub = list(range(s))
            chain.append(FinStructure(
                sig, sub, functions={"f": {(u,): fn[(u,)] for u in sub}},
                relations={"R": {t for t in rel if t[0] < s}}, check=False))
        yield chain


def all_embedding_chains(max_fiber: int = 3, sig: LanguageSig = SWEEP_SIG
                         ) -> Iterator[list[FinStructure]]:
    """Every chain of proper embeddings with fibers of at most ``max_fiber``
    elements, up to isomorphism, for one unary function and one unary relation.

    Nested universes can be relabelled as initial segments, and repeating a
    stage changes neither the colimit nor any truth value, so strictly
    increasing size sequences cover every chain.
    """
    if set(sig.functions.values()) != {1} or set(sig.relations.values()) != {1}:
        raise ValueError("enumeration is written for unary symbols")
    (f,), (r,) = sig.functions, sig.relations
    for top in range(1, max_fiber + 1):
        for k in range(1, top):
            for lower in combinations(range(1, top), k):
                sizes = list(lower) + [top]
                bound = {u: next(s for s in sizes if u < s) for u in range(top)}
                for img in product(*(range(bound[u]) for u in range(top))):
                    for mask in range(2 ** top):
                        rel = {(u,) for u in range(top) if mask >> u & 1}
                        yield [FinStructure(
                            sig, list(range(s)),
                            functions={f: {(u,): img[u] for u in range(s)}},
                            relations={r: {t for t in rel if t[0] < s}}, check=False)
                            for s in sizes]

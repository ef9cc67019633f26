"""Morphisms of structures: classification and image/quotient factorization."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

from .group import GAction
from .structure import Elem, FinStructure, StructureError


class MorphismError(StructureError):
    pass


class StructMorphism:
    """A map of universes between two structures over one signature.

    Nothing is assumed about the map; use :func:`classify_morphism`.
    """

    def __init__(self, source: FinStructure, target: FinStructure,
                 mapping: Mapping[Elem, Elem] | Callable[[Elem], Elem]):
        if source.sig != target.sig:
            raise MorphismError("source and target have different signatures")
        self.source = source
        self.target = target
        if isinstance(mapping, Mapping):
            self.mapping = dict(mapping)
        else:
            self.mapping = {x: mapping(x) for x in source.universe}
        for x in source.universe:
            if x not in self.mapping:
                raise MorphismError(f"map undefined at {x!r}")
            if self.mapping[x] not in target.elements:
                raise MorphismError(f"{x!r} maps outside the target")

    def __call__(self, x: Elem) -> Elem:
        return self.mapping[x]

    def __repr__(self):
        return f"<StructMorphism {self.source!r} -> {self.target!r}>"

    def then(self, other: StructMorphism) -> StructMorphism:
        """``other`` after ``self``."""
        return StructMorphism(self.source, other.target,
                              {x: other.mapping[self.mapping[x]] for x in self.source.universe})

    def inverse(self) -> StructMorphism:
        inv = {y: x for x, y in self.mapping.items()}
        if len(inv) != len(self.mapping) or len(inv) != len(self.target):
            raise MorphismError("map is not bijective")
        return StructMorphism(self.target, self.source, inv)

    @classmethod
    def identity(cls, M: FinStructure) -> StructMorphism:
        return cls(M, M, {x: x for x in M.universe})


@dataclass(frozen=True)
class MorphismFlags:
    is_morphism: bool
    is_transfitted: bool
    is_embedding: bool
    is_submersion: bool
    is_iso: bool
    is_equivariant: bool | None = None


def preserves_symbols(src: FinStructure, tgt: FinStructure, m: Mapping) -> bool:
    sig = src.sig
    for c in sig.constants:
        if m[src.constants[c]] != tgt.constants[c]:
            return False
    for f, n in sig.functions.items():
        for args in product(src.universe, repeat=n):
            if m[src.apply(f, args)] != tgt.apply(f, tuple(m[a] for a in args)):
                return False
    for r, ts in src.relations.items():
        R = tgt.relations[r]
        for t in ts:
            if tuple(m[a] for a in t) not in R:
                return False
    return True


def reflects_relations(src: FinStructure, tgt: FinStructure, m: Mapping) -> bool:
    """Preimage of every target relation lies inside the source relation."""
    for r, n in src.sig.relations.items():
        R_src, R_tgt = src.relations[r], tgt.relations[r]
        if not R_tgt:
            continue
        for t in product(src.universe, repeat=n):
            if tuple(m[a] for a in t) in R_tgt and t not in R_src:
                return False
    return True


def is_equivariant(alpha: StructMorphism, act_src: GAction, act_tgt: GAction) -> bool:
    if act_src.group.elements != act_tgt.group.elements:
        return False
    m = alpha.mapping
    return all(m[act_src(g, x)] == act_tgt(g, m[x])
               for g in act_src.group for x in alpha.source.universe)


def classify_morphism(alpha: StructMorphism, act_src: GAction | None = None,
                      act_tgt: GAction | None = None) -> MorphismFlags:
    src, tgt, m = alpha.source, alpha.target, alpha.mapping
    morph = preserves_symbols(src, tgt, m)
    trans = morph and reflects_relations(src, tgt, m)
    image = set(m.values())
    injective = len(image) == len(src)
    surjective = len(image) == len(tgt)
    iso = False
    if morph and injective and surjective:
        inv = {y: x for x, y in m.items()}
        iso = preserves_symbols(tgt, src, inv)
    equiv = None
    if act_src is not None and act_tgt is not None:
        equiv = is_equivariant(alpha, act_src, act_tgt)
    return MorphismFlags(morph, trans, trans and injective, trans and surjective, iso, equiv)


@dataclass
class Factorization:
    image: FinStructure
    quotient: FinStructure
    projection: StructMorphism
    induced: StructMorphism
    inclusion: StructMorphism


def image_substructure(alpha: StructMorphism) -> FinStructure:
    tgt, m = alpha.target, alpha.mapping
    img = [y for y in tgt.universe if y in set(m.values())]
    S = set(img)
    fns = {f: {args: tgt.apply(f, args) for args in product(img, repeat=n)}
           for f, n in tgt.sig.functions.items()}
    for f, tab in fns.items():
        if not set(tab.values()) <= S:
            raise MorphismError(f"image not closed under {f}")
    rels = {r: {t for t in ts if all(a in S for a in t)} for r, ts in tgt.relations.items()}
    return FinStructure(tgt.sig, img, tgt.constants, fns, rels, name="Im")


def factorize_morphism(alpha: StructMorphism) -> Factorization:
    """Split a transfitted morphism as submersion, isomorphism, inclusion."""
    flags = classify_morphism(alpha)
    if not flags.is_transfitted:
        raise MorphismError("factorization needs a transfitted morphism")
    src, m = alpha.source, alpha.mapping
    classes: dict[Elem, list] = {}
    for x in src.universe:
        classes.setdefault(m[x], []).append(x)
    cls_of = {x: frozenset(c) for c in classes.values() for x in c}
    qu = list(dict.fromkeys(cls_of[x] for x in src.universe))
    rep = {c: next(iter(sorted(c, key=src.universe.index))) for c in qu}
    fns = {}
    for f, n in src.sig.functions.items():
        fns[f] = {args: cls_of[src.apply(f, tuple(rep[c] for c in args))]
                  for args in product(qu, repeat=n)}
    rels = {r: {tuple(cls_of[a] for a in t) for t in ts} for r, ts in src.relations.items()}
    consts = {c: cls_of[v] for c, v in src.constants.items()}
    Q = FinStructure(src.sig, qu, consts, fns, rels, name="M/~")
    I = image_substructure(alpha)
    proj = StructMorphism(src, Q, cls_of)
    induced = StructMorphism(Q, I, {c: m[rep[c]] for c in qu})
    incl = StructMorphism(I, alpha.target, {y: y for y in I.universe})
    return Factorization(I, Q, proj, induced, incl)

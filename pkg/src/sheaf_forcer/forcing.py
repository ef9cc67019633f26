"""Pointwise and open forcing over a presheaf, generic filters and generic models.

A section tuple lives over an open U; quantifiers introduce new sections over
smaller opens, so the evaluation environment maps each variable to an
(open, element) pair. Parameters are never restricted eagerly: atoms are
evaluated in the fiber over the minimal neighbourhood U_x, which on a finite
space is isomorphic to the stalk at x.

Two readings of the universal clause are available:

``literal``
    exists V with x in V <= U such that every y in V forces psi(a, b) for
    every b in M_V.
``variant``
    exists V with x in V <= U such that every y in V forces psi(a, b) for
    every b in M_W and every open W with y in W <= V.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

from .logic import (
    And, Eq, Exists, Forall, Formula, Implies, Not, Or, Rel, free_vars,
    godel_translate, is_positive,
)
from .model import (
    Colimit, FinStructure, StructMorphism, StructureError, check_g_structure,
    classify_morphism, colimit_diagram, fmt_elem, is_equivariant,
)
from .sheaf import Presheaf, SectionTuple, open_diagram
from .space import Open, OpenFilter

MODES = ("literal", "variant")

Env = tuple  # sorted tuple of (variable, open, element)


class ForcingError(StructureError):
    pass


@lru_cache(maxsize=None)
def _free(phi: Formula) -> frozenset:
    return frozenset(free_vars(phi))


@lru_cache(maxsize=None)
def _positive(phi: Formula) -> bool:
    return is_positive(phi)


class ForcingContext:
    """Memoised forcing relation for one presheaf and one reading of the universal clause.

    The default engine computes whole forcing loci {x in U : x forces phi}
    by set operations, one memo entry per (U, parameters, formula). Setting
    ``pointwise`` runs the clause-by-clause recursion at single points
    instead; the two must agree and tests compare them.

    ``positive_fast_path`` evaluates positive formulas in one step on the
    fiber over U_x instead of recursing through their connectives.
    ``minimal_neighbourhoods`` checks the negation and implication clauses on
    V = U_x only; turning it off enumerates every candidate V.
    """

    def __init__(self, presheaf: Presheaf, mode: str = "literal",
                 positive_fast_path: bool = True, minimal_neighbourhoods: bool = True,
                 pointwise: bool = False):
        if mode not in MODES:
            raise ForcingError(f"unknown mode {mode!r}")
        self.P = presheaf
        self.T = presheaf.topology
        self.mode = mode
        self.positive_fast_path = positive_fast_path
        self.minimal_neighbourhoods = minimal_neighbourhoods
        self.pointwise = pointwise
        self.memo: dict = {}
        self._loci: dict = {}
        self._good_memo: dict = {}
        self._nbhd: dict = {}
        self._within = {U: tuple(self.T.opens_within(U)) for U in self.T.nonempty_opens}

    # environment helpers

    def env_of(self, a: SectionTuple, phi: Formula, variables: list[str] | None = None) -> Env:
        variables = free_vars(phi) if variables is None else list(variables)
        if len(variables) != len(a.elements):
            raise ForcingError(f"formula has {len(variables)} free variables, "
                               f"section has {len(a.elements)} components")
        U = frozenset(a.open)
        if U not in self.P.fibers:
            raise ForcingError(f"{self.T.fmt(U)} is not a nonempty open set")
        M = self.P.fibers[U]
        for e in a.elements:
            if e not in M.elements:
                raise ForcingError(f"{fmt_elem(e)} is not an element over {self.T.fmt(U)}")
        return tuple(sorted((v, U, e) for v, e in zip(variables, a.elements)))

    def nbhds(self, x, U: Open) -> list[Open]:
        key = (x, U)
        if key not in self._nbhd:
            self._nbhd[key] = self.T.neighbourhoods(x, within=U)
        return self._nbhd[key]

    # public API

    def forces_at(self, x, a: SectionTuple, phi: Formula,
                  variables: list[str] | None = None) -> bool:
        self.T.check_point(x)
        if x not in a.open:
            raise ForcingError(f"point {x!r} is not in {self.T.fmt(a.open)}")
        return self.forces(x, frozenset(a.open), self.env_of(a, phi, variables), phi)

    def forcing_locus(self, a: SectionTuple, phi: Formula,
                      variables: list[str] | None = None) -> frozenset:
        return self.locus(frozenset(a.open), self.env_of(a, phi, variables), phi)

    def forces_on(self, a: SectionTuple, phi: Formula, V: Open | None = None,
                  variables: list[str] | None = None) -> bool:
        """Forced at every point of V (default: the section's own open)."""
        env = self.env_of(a, phi, variables)
        U = frozenset(a.open)
        V = U if V is None else frozenset(V)
        if not V <= U:
            raise ForcingError("V must lie inside the section's open")
        return V <= self.locus(U, env, phi)

    def forces(self, x, U: Open, env: Env, phi: Formula) -> bool:
        if self.pointwise:
            return self._point(x, U, env, phi)
        return x in self.locus(U, env, phi)

    def locus(self, U: Open, env: Env, phi: Formula) -> frozenset:
        fv = _free(phi)
        env = tuple(t for t in env if t[0] in fv)
        key = (U, env, phi)
        hit = self._loci.get(key)
        if hit is None:
            if self.pointwise:
                hit = frozenset(x for x in U if self._point(x, U, env, phi))
            else:
                hit = self._locus(U, env, phi)
            self._loci[key] = hit
        return hit

    # set-valued recursion

    def _locus(self, U: Open, env: Env, phi: Formula) -> frozenset:
        if isinstance(phi, (Eq, Rel)) or (self.positive_fast_path and _positive(phi)):
            return frozenset(x for x in U if self.local_truth(x, env, phi))
        if isinstance(phi, And):
            return self.locus(U, env, phi.left) & self.locus(U, env, phi.right)
        if isinstance(phi, Or):
            return self.locus(U, env, phi.left) | self.locus(U, env, phi.right)
        if isinstance(phi, Not):
            L = self.locus(U, env, phi.body)
            return frozenset(x for x in U if any(not (V & L) for V in self._candidates(x, U)))
        if isinstance(phi, Implies):
            ok = (U - self.locus(U, env, phi.left)) | self.locus(U, env, phi.right)
            return frozenset(x for x in U if any(V <= ok for V in self._candidates(x, U)))
        if isinstance(phi, Exists):
            out = set()
            for V in self._within[U]:
                for b in self.P.fibers[V].universe:
                    out |= self.locus(V, _extend(env, phi.var, V, b), phi.body)
            return frozenset(out)
        if isinstance(phi, Forall):
            out = set()
            for V in self._within[U]:
                if not V <= out and self._good(V, env, phi):
                    out |= V
            return frozenset(out)
        raise TypeError(f"not a formula: {phi!r}")

    def _good(self, V: Open, env: Env, phi: Forall) -> bool:
        """V witnesses the universal clause at each of its points."""
        key = (V, env, phi)
        hit = self._good_memo.get(key)
        if hit is None:
            opens = (V,) if self.mode == "literal" else self._within[V]
            hit = all(self.locus(W, _extend(env, phi.var, W, b), phi.body) == W
                      for W in opens for b in self.P.fibers[W].universe)
            self._good_memo[key] = hit
        return hit

    # pointwise recursion, clause by clause

    def _point(self, x, U: Open, env: Env, phi: Formula) -> bool:
        fv = _free(phi)
        env = tuple(t for t in env if t[0] in fv)
        key = (x, U, env, phi)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = self._point_clause(x, U, env, phi)
        return hit

    def _point_clause(self, x, U: Open, env: Env, phi: Formula) -> bool:
        f = self._point
        if isinstance(phi, (Eq, Rel)) or (self.positive_fast_path and _positive(phi)):
            return self.local_truth(x, env, phi)
        if isinstance(phi, And):
            return f(x, U, env, phi.left) and f(x, U, env, phi.right)
        if isinstance(phi, Or):
            return f(x, U, env, phi.left) or f(x, U, env, phi.right)
        if isinstance(phi, Not):
            return any(all(not f(y, U, env, phi.body) for y in V)
                       for V in self._candidates(x, U))
        if isinstance(phi, Implies):
            return any(all(not f(y, U, env, phi.left) or f(y, U, env, phi.right) for y in V)
                       for V in self._candidates(x, U))
        if isinstance(phi, Exists):
            return any(f(x, V, _extend(env, phi.var, V, b), phi.body)
                       for V in self.nbhds(x, U) for b in self.P.fibers[V].universe)
        if isinstance(phi, Forall):
            return any(self._forall_on(V, env, phi) for V in self.nbhds(x, U))
        raise TypeError(f"not a formula: {phi!r}")

    def _candidates(self, x, U: Open) -> list[Open]:
        if self.minimal_neighbourhoods:
            return [self.T.min_open_nbhd(x)]
        return self.nbhds(x, U)

    def _forall_on(self, V: Open, env: Env, phi: Forall) -> bool:
        for y in V:
            opens = (V,) if self.mode == "literal" else self.nbhds(y, V)
            for W in opens:
                for b in self.P.fibers[W].universe:
                    if not self._point(y, W, _extend(env, phi.var, W, b), phi.body):
                        return False
        return True

    def local_truth(self, x, env: Env, phi: Formula) -> bool:
        """Truth of phi in the fiber over U_x, parameters restricted there."""
        Ux = self.T.min_open_nbhd(x)
        asg = {v: self.P.rho(Ux, W)[e] for v, W, e in env}
        return self.P.fibers[Ux].satisfies(phi, asg)


def _extend(env: Env, var: str, V: Open, b) -> Env:
    return tuple(sorted([t for t in env if t[0] != var] + [(var, V, b)]))


def forces_at(ctx: ForcingContext, x, a: SectionTuple, phi: Formula) -> bool:
    return ctx.forces_at(x, a, phi)


def forcing_locus(ctx: ForcingContext, a: SectionTuple, phi: Formula) -> frozenset:
    return ctx.forcing_locus(a, phi)


# --- consequences checked against the engine -------------------------------

@dataclass(frozen=True)
class Witness:
    open: Open
    section: SectionTuple


def maximum_principle_witness(ctx: ForcingContext, a: SectionTuple, phi: Exists,
                              variables: list[str] | None = None) -> Witness | None:
    """An open V dense in U and b over V forcing phi's body on all of V.

    ``phi`` is ``exists w. psi``; the search goes through opens V <= U from the
    largest down.
    """
    if not isinstance(phi, Exists):
        raise ForcingError("formula must be existential")
    T, P = ctx.T, ctx.P
    U = frozenset(a.open)
    env = ctx.env_of(a, phi, variables)
    if ctx.locus(U, env, phi) != U:
        raise ForcingError("the existential is not forced on U")
    for V in sorted(T.opens_within(U), key=T.sort_key, reverse=True):
        if not T.is_dense_in(V, U):
            continue
        for b in P.fibers[V].universe:
            e2 = _extend(env, phi.var, V, b)
            if ctx.locus(V, e2, phi.body) == V:
                return Witness(V, SectionTuple(V, (b,)))
    return None


@dataclass(frozen=True)
class DoubleNegation:
    lhs: bool
    dense_witness: Open | None


def double_negation_dense(ctx: ForcingContext, a: SectionTuple, phi: Formula,
                          variables: list[str] | None = None) -> DoubleNegation:
    if not is_positive(phi):
        raise ForcingError("formula is not positive")
    T = ctx.T
    U = frozenset(a.open)
    variables = free_vars(phi) if variables is None else variables
    lhs = ctx.forces_on(a, Not(Not(phi)), variables=variables)
    env = ctx.env_of(a, phi, variables)
    for V in sorted(T.opens_within(U), key=T.sort_key, reverse=True):
        if T.is_dense_in(V, U) and V <= ctx.locus(U, env, phi):
            return DoubleNegation(lhs, V)
    return DoubleNegation(lhs, None)


# --- generic filters and models --------------------------------------------

@dataclass
class GenericityReport:
    generic: bool
    failing_instance: str | None
    formulas_checked: int
    bounds: dict = field(default_factory=dict)


def _strip_exists(phi: Formula) -> tuple[list[str], Formula]:
    ws = []
    while isinstance(phi, Exists):
        ws.append(phi.var)
        phi = phi.body
    return ws, phi


def is_generic_filter(ctx: ForcingContext, F: OpenFilter, formulas: Iterable[Formula],
                      bounds: dict | None = None) -> GenericityReport:
    """Check both genericity clauses for every formula given, member U and tuple over U."""
    P, T = ctx.P, ctx.T
    members = list(F)
    count = 0
    for phi in formulas:
        count += 1
        vs = free_vars(phi)
        for U in members:
            below = [V for V in members if V <= U]
            for a in P.sections(U, len(vs)):
                env = ctx.env_of(a, phi, vs)
                pos, neg = ctx.locus(U, env, phi), ctx.locus(U, env, Not(phi))
                if not any(V <= pos or V <= neg
                           for V in below):
                    return GenericityReport(
                        False, f"clause 1: {phi} at {T.fmt(U)} with {a}", count, bounds or {})
                ws, body = _strip_exists(phi)
                if ws and ctx.locus(U, env, phi) == U:
                    if not _has_witness(ctx, env, U, ws, body, below):
                        return GenericityReport(
                            False, f"clause 2: {phi} at {T.fmt(U)} with {a}", count,
                            bounds or {})
    return GenericityReport(True, None, count, bounds or {})


def _has_witness(ctx, env, U, ws, body, below) -> bool:
    for V in below:
        for bs in product(ctx.P.fibers[V].universe, repeat=len(ws)):
            e2 = env
            for w, b in zip(ws, bs):
                e2 = _extend(e2, w, V, b)
            if ctx.locus(V, e2, body) == V:
                return True
    return False


@dataclass
class GenericModel:
    filter: OpenFilter
    colimit: Colimit
    _truth: dict = field(default_factory=dict, repr=False)

    @property
    def structure(self) -> FinStructure:
        return self.colimit.structure

    def holds(self, phi: Formula, variables: list[str], germs: tuple) -> bool:
        key = (phi, tuple(variables), germs)
        hit = self._truth.get(key)
        if hit is None:
            hit = self._truth[key] = self.structure.satisfies(phi, dict(zip(variables, germs)))
        return hit

    def germ_of(self, a: SectionTuple) -> tuple:
        return tuple(self.colimit.germ_of(frozenset(a.open), e) for e in a.elements)


def generic_model(ctx_or_presheaf, F: OpenFilter) -> GenericModel:
    P = ctx_or_presheaf.P if isinstance(ctx_or_presheaf, ForcingContext) else ctx_or_presheaf
    if not F.is_proper:
        raise ForcingError("filter must be proper")
    return GenericModel(F, colimit_diagram(open_diagram(P, list(F)), check=False))


def generic_model_is_core_fiber(gm: GenericModel) -> bool:
    """The germ map out of the fiber over the filter's smallest member is an isomorphism."""
    return classify_morphism(gm.colimit.germ_maps[gm.filter.core]).is_iso


def generic_model_g_check(gm: GenericModel) -> list:
    if gm.colimit.action is None:
        return []
    return check_g_structure(gm.structure, gm.colimit.action)


@dataclass(frozen=True)
class GMTResult:
    s1: bool
    s2: bool
    s3: bool

    @property
    def all_equal(self) -> bool:
        return self.s1 == self.s2 == self.s3


def verify_generic_model_theorem(ctx: ForcingContext, F: OpenFilter, phi: Formula,
                                 a: SectionTuple, gm: GenericModel | None = None,
                                 variables: list[str] | None = None,
                                 translated: Formula | None = None) -> GMTResult:
    """Evaluate the three equivalent conditions for phi(a) with a over a member U of F."""
    U = frozenset(a.open)
    if U not in F:
        raise ForcingError(f"{ctx.T.fmt(U)} is not in the filter")
    variables = free_vars(phi) if variables is None else variables
    gm = gm or generic_model(ctx, F)
    s1 = gm.holds(phi, variables, gm.germ_of(a))
    phiG = translated if translated is not None else godel_translate(phi)
    env = ctx.env_of(a, phiG, variables)
    locus = ctx.locus(U, env, phiG)
    s2 = any(V <= locus for V in F if V <= U)
    s3 = locus in F
    return GMTResult(s1, s2, s3)


class NaturalityError(ForcingError):
    pass


def induced_generic_morphism(tau: Mapping[Open, Mapping], P: Presheaf, Q: Presheaf,
                             F: OpenFilter, gm_P: GenericModel | None = None,
                             gm_Q: GenericModel | None = None) -> StructMorphism:
    """Germwise action of a natural family tau_U: P_U -> Q_U on the generic models."""
    T = P.topology
    if Q.topology != T:
        raise ForcingError("presheaves live over different spaces")
    tau = {frozenset(U): m for U, m in tau.items()}
    for U in T.nonempty_opens:
        for V in T.opens_within(U):
            for s in P.fibers[U].universe:
                if tau[V][P.rho(V, U)[s]] != Q.rho(V, U)[tau[U][s]]:
                    raise NaturalityError(
                        f"square {T.fmt(U)} -> {T.fmt(V)} fails at {fmt_elem(s)}")
    gm_P = gm_P or generic_model(P, F)
    gm_Q = gm_Q or generic_model(Q, F)
    m = {}
    for U in F:
        for s in P.fibers[U].universe:
            g = gm_P.colimit.germ_of(U, s)
            val = gm_Q.colimit.germ_of(U, tau[U][s])
            if m.setdefault(g, val) != val:
                raise NaturalityError(f"germ {g} has two images")
    return StructMorphism(gm_P.structure, gm_Q.structure, m)


def induced_is_equivariant(alpha: StructMorphism, gm_P: GenericModel, gm_Q: GenericModel) -> bool:
    if gm_P.colimit.action is None or gm_Q.colimit.action is None:
        return False
    return is_equivariant(alpha, gm_P.colimit.action, gm_Q.colimit.action)


# --- direct statements of the local-semantics properties -------------------
# These do not call the engine; tests compare them with it.

def separation_holds_near(P: Presheaf, x, U: Open) -> bool:
    """Some open V with x in V <= U on which all pairs of sections over opens
    around each y in V are, at y, either equal or different near y."""
    T = P.topology

    def equal_at(y, W, a, b):
        Uy = T.min_open_nbhd(y)
        return P.rho(Uy, W)[a] == P.rho(Uy, W)[b]

    def different_at(y, W, a, b):
        return all(not equal_at(z, W, a, b) for z in T.min_open_nbhd(y))

    for V in T.neighbourhoods(x, within=U):
        if all(equal_at(y, W, a, b) or different_at(y, W, a, b)
               for y in V for W in T.neighbourhoods(y, within=V)
               for a in P.fibers[W].universe for b in P.fibers[W].universe):
            return True
    return False


def classical_truth_at_isolated(P: Presheaf, x, a: SectionTuple, phi: Formula,
                                variables: list[str] | None = None) -> bool:
    """M_{x} |= phi(a restricted to {x})."""
    variables = free_vars(phi) if variables is None else variables
    X = frozenset([x])
    r = P.rho(X, a.open)
    return P.fibers[X].satisfies(phi, {v: r[e] for v, e in zip(variables, a.elements)})

"""Bounded property sweeps over generated presheaves.

Each sweep returns a :class:`SweepOutcome` listing checked instances and
counterexamples, so callers decide whether a failure is fatal.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

from .fixtures import (
    SWEEP_SIG, Instance, embedding_chains, exact_instances, formula_space, positive_part,
)
from .forcing import (
    ForcingContext, classical_truth_at_isolated, double_negation_dense,
    generic_model, is_generic_filter, maximum_principle_witness, separation_holds_near,
    verify_generic_model_theorem,
)
from .logic import (
    Eq, Exists, Forall, Formula, Not, Or, Var, free_vars, godel_translate,
)
from .model import DirectedDiagram, colimit_diagram, verify_colimit_preservation
from .sheaf import SectionTuple, restrict_section
from .space import (
    closure_density, maximal_open_filters, preorder_topologies,
)

DEPTH_ENV = "SHEAF_FORCER_SWEEP_DEPTH"


def default_depth(fallback: int = 3) -> int:
    raw = os.environ.get(DEPTH_ENV)
    if raw is None:
        return fallback
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"{DEPTH_ENV} must be an integer, got {raw!r}") from None
    if not 0 <= val <= 4:
        raise ValueError(f"{DEPTH_ENV} must lie between 0 and 4")
    return val


@dataclass
class SweepOutcome:
    name: str
    mode: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    failed: int = 0  # all failures, including those past the stored messages

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str, limit: int = 20) -> None:
        self.failed += 1
        if len(self.failures) < limit:
            self.failures.append(msg)
        else:
            self.bounds["failures_truncated"] = True

    def summary(self) -> str:
        status = "ok" if self.ok else f"{self.failed} failure(s)"
        return f"{self.name} [{self.mode}]: {self.checked} checks, {status}"


def gmt_sweep(instances: list[Instance], formulas: list[Formula], mode: str = "variant",
              filters: str = "maximal") -> SweepOutcome:
    """The three generic-model conditions on every instance, filter, member, section."""
    out = SweepOutcome("generic-model-theorem", mode,
                       bounds={"formulas": len(formulas), "instances": len(instances)})
    translated = {phi: godel_translate(phi) for phi in formulas}
    for inst in instances:
        P = inst.presheaf
        ctx = ForcingContext(P, mode)
        for F in maximal_open_filters(P.topology):
            gm = generic_model(ctx, F)
            for U in F:
                for phi in formulas:
                    for a in P.sections(U, 1):
                        r = verify_generic_model_theorem(ctx, F, phi, a, gm, ["x"],
                                                         translated[phi])
                        out.checked += 1
                        if not r.all_equal:
                            out.fail(f"{inst.name}: filter core {P.topology.fmt(F.core)}, "
                                     f"U={P.topology.fmt(U)}, a={a}, phi={phi}: {r}")
    return out


def genericity_sweep(instances: list[Instance], formulas: list[Formula],
                     mode: str = "variant") -> SweepOutcome:
    out = SweepOutcome("maximal-filters-generic", mode, bounds={"formulas": len(formulas)})
    for inst in instances:
        ctx = ForcingContext(inst.presheaf, mode)
        for F in maximal_open_filters(inst.presheaf.topology):
            rep = is_generic_filter(ctx, F, formulas)
            out.checked += 1
            if not rep.generic:
                out.fail(f"{inst.name}: {F}: {rep.failing_instance}")
    return out


def maximum_principle_sweep(instances: list[Instance], formulas: list[Formula],
                            mode: str = "variant") -> SweepOutcome:
    out = SweepOutcome("maximum-principle", mode)
    exists = [p for p in formulas if isinstance(p, Exists)]
    out.bounds["existentials"] = len(exists)
    for inst in instances:
        P, T = inst.presheaf, inst.presheaf.topology
        ctx = ForcingContext(P, mode)
        for U in T.nonempty_opens:
            for phi in exists:
                for a in P.sections(U, 1):
                    if not ctx.forces_on(a, phi, variables=["x"]):
                        continue
                    out.checked += 1
                    w = maximum_principle_witness(ctx, a, phi, ["x"])
                    if w is None:
                        out.fail(f"{inst.name}: no witness for {phi} at {T.fmt(U)}, a={a}")
                    elif not closure_density(T, w.open, U).is_dense_in_U:
                        out.fail(f"{inst.name}: witness {T.fmt(w.open)} not dense in {T.fmt(U)}")
    return out


def double_negation_sweep(instances: list[Instance], formulas: list[Formula],
                          mode: str = "variant") -> SweepOutcome:
    out = SweepOutcome("double-negation-dense", mode)
    pos = positive_part(formulas)
    out.bounds["positive_formulas"] = len(pos)
    for inst in instances:
        P, T = inst.presheaf, inst.presheaf.topology
        ctx = ForcingContext(P, mode)
        for U in T.nonempty_opens:
            for phi in pos:
                for a in P.sections(U, 1):
                    r = double_negation_dense(ctx, a, phi, ["x"])
                    out.checked += 1
                    if r.lhs != (r.dense_witness is not None):
                        out.fail(f"{inst.name}: {phi} at {T.fmt(U)}, a={a}: {r}")
    return out


def dense_membership_sweep(max_points: int = 5) -> SweepOutcome:
    out = SweepOutcome("filters-contain-dense-opens", "-", bounds={"max_points": max_points})
    for n in range(1, max_points + 1):
        for T in preorder_topologies(n):
            for F in maximal_open_filters(T):
                out.checked += 1
                missing = F.dense_open_membership_check()
                if missing:
                    V, U = missing[0]
                    out.fail(f"{T}: {F} contains {T.fmt(U)} but not its dense open {T.fmt(V)}")
    return out


def colimit_preservation_sweep(formulas: list[Formula], max_length: int = 4,
                               count: int = 40, seed: int = 0,
                               chains: Iterable[list] | None = None) -> SweepOutcome:
    """Positive formulas true at a stage stay true in the colimit.

    Without ``chains`` a seeded sample of ``count`` random chains is used.
    """
    out = SweepOutcome("colimit-preserves-positive", "-")
    pos = positive_part(formulas)
    if chains is None:
        chains = embedding_chains(max_length, count=count, seed=seed)
        out.bounds.update(max_length=max_length, sampled=count)
    chains = list(chains)
    out.bounds.update(positive_formulas=len(pos), chains=len(chains))
    for k, chain in enumerate(chains):
        idx = list(range(len(chain)))
        # index i <= j means stage i is later; the smallest index is the last stage
        order = list(reversed(idx))
        structs = {i: chain[len(chain) - 1 - i] for i in idx}
        D = DirectedDiagram(idx, lambda j, i: j <= i, structs,
                            {(j, i): {x: x for x in structs[i].universe}
                             for i in idx for j in idx if j <= i})
        C = colimit_diagram(D)
        for phi in pos:
            vs = free_vars(phi)
            for i in order:
                for a in product(structs[i].universe, repeat=len(vs)):
                    out.checked += 1
                    if not verify_colimit_preservation(D, phi, i, a, vs, C):
                        out.fail(f"chain {k}: {phi} at stage {i} with {a}")
    return out


# --- local semantics ----------------------------------------------------------

EXCLUDED_MIDDLE = Forall("u", Forall("v", Or(Eq(Var("u"), Var("v")),
                                             Not(Eq(Var("u"), Var("v"))))))


def local_semantics_sweep(instances: list[Instance], formulas: list[Formula],
                          mode: str = "variant") -> dict[str, SweepOutcome]:
    """Openness of loci, classical collapse on discrete spaces, excluded middle."""
    opened = SweepOutcome("locus-open", mode)
    collapse = SweepOutcome("discrete-classical", mode)
    middle = SweepOutcome("excluded-middle-separation", mode)
    for inst in instances:
        P, T = inst.presheaf, inst.presheaf.topology
        ctx = ForcingContext(P, mode)
        discrete = T.is_discrete()
        for U in T.nonempty_opens:
            for phi in formulas:
                for a in P.sections(U, 1):
                    locus = ctx.forcing_locus(a, phi, ["x"])
                    opened.checked += 1
                    if not T.is_open(locus):
                        opened.fail(f"{inst.name}: locus {T.fmt(locus)} of {phi} "
                                    f"at {T.fmt(U)}, a={a}")
                    if discrete:
                        for x in U:
                            collapse.checked += 1
                            if (x in locus) != classical_truth_at_isolated(P, x, a, phi, ["x"]):
                                collapse.fail(f"{inst.name}: {phi} at {x}, a={a}")
            a0 = SectionTuple(U, ())
            for x in U:
                middle.checked += 1
                lhs = ctx.forces_at(x, a0, EXCLUDED_MIDDLE, [])
                if lhs != separation_holds_near(P, x, U):
                    middle.fail(f"{inst.name}: x={x}, U={T.fmt(U)}, engine says {lhs}")
    return {o.name: o for o in (opened, collapse, middle)}


@dataclass
class RestrictionFinding:
    mode: str
    instances: int
    checks: int
    violations: int
    examples: list[str]


def restriction_invariance(instances: list[Instance], formulas: list[Formula],
                           mode: str, examples: int = 3) -> RestrictionFinding:
    """Count the (x, a, V, phi) where restricting a to V changes forcing at x.

    This is reported rather than asserted: it holds by construction in the
    variant reading and is an open question in the literal one.
    """
    checks = bad = 0
    ex: list[str] = []
    for inst in instances:
        P, T = inst.presheaf, inst.presheaf.topology
        ctx = ForcingContext(P, mode)
        for U in T.nonempty_opens:
            for V in T.opens_within(U):
                if V == U:
                    continue
                for a in P.sections(U, 1):
                    b = restrict_section(P, a, V)
                    for phi in formulas:
                        for x in V:
                            checks += 1
                            if ctx.forces_at(x, a, phi, ["x"]) != ctx.forces_at(x, b, phi, ["x"]):
                                bad += 1
                                if len(ex) < examples:
                                    ex.append(f"{inst.name}: {phi} at {x}, {a} vs {b}")
    return RestrictionFinding(mode, len(instances), checks, bad, ex)


def gmt_mode_comparison(instances: list[Instance], formulas: list[Formula]) -> dict[str, SweepOutcome]:
    return {mode: gmt_sweep(instances, formulas, mode) for mode in ("literal", "variant")}


def standard_instances(max_points: int = 4) -> list[Instance]:
    return exact_instances(max_points=max_points)


def standard_formulas(depth: int | None = None) -> list[Formula]:
    return formula_space(SWEEP_SIG, default_depth() if depth is None else depth)

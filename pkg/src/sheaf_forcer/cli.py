"""Command line entry point: ``sheaf-forcer <command> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 bad input,
3 a search bound was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .cohomology import (
    CohomologyError, amplitude_cohomology, generic_cohomology, ordinary_cohomology,
    validate_differential,
)
from .document import (
    Document, DocumentError, check_document_formulas, format_element, load_document,
    parse_element,
)
from .fixtures import formula_space
from .forcing import (
    MODES, ForcingContext, ForcingError, generic_model, generic_model_g_check,
    is_generic_filter, verify_generic_model_theorem,
)
from .logic import LogicError, check_formula, free_vars, godel_translate, parse_formula
from .model import GroupError, admissible_subgroups, check_g_structure, relation_invariant_exhaustive
from .sheaf import SectionTuple, check_exactness, validate_presheaf
from .space import OpenFilter, TopologyError, maximal_open_filters
from .sweep import default_depth

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3


class BoundExceeded(Exception):
    pass


class Report:
    """Data plus a human rendering; ``--json`` prints the data instead."""

    def __init__(self, command: str):
        self.data: dict[str, Any] = {"command": command}
        self.lines: list[str] = []
        self.status = EXIT_OK

    def add(self, key: str, value: Any, text: str | None = None):
        self.data[key] = value
        if text is not None:
            self.lines.append(text)

    def emit(self, as_json: bool, out=sys.stdout):
        self.data["exit"] = self.status
        if as_json:
            out.write(json.dumps(self.data, indent=2, sort_keys=True, default=str) + "\n")
        else:
            out.write("\n".join(self.lines) + ("\n" if self.lines else ""))


def _prevalidate(doc: Document, rep: Report) -> bool:
    """Structural checks on declared presheaves; fixtures are valid by construction."""
    bad = {}
    for name, P in doc.presheaves.items():
        if name not in doc.fixture_presheaves:
            issues = validate_presheaf(P)
            if issues:
                bad[name] = issues
    for name, issues in bad.items():
        rep.lines.append(f"presheaf {name} is invalid:")
        rep.lines.extend(f"  {p}" for p in issues)
    rep.add("invalid", bad)
    return not bad


# --- commands ------------------------------------------------------------------

def cmd_validate(doc: Document, args, rep: Report):
    problems: dict[str, list[str]] = {}
    for name, P in doc.presheaves.items():
        issues = validate_presheaf(P)
        ex = check_exactness(P)
        rep.add(f"presheaf:{name}:exact", ex.exact)
        rep.add(f"presheaf:{name}:coherent", ex.coherent)
        rep.lines.append(f"presheaf {name}: exact={ex.exact} coherent={ex.coherent}")
        rep.lines.extend(f"  {w}" for w in ex.witnesses)
        if P.actions:
            for U, act in P.actions.items():
                issues.extend(f"G-structure over {P.topology.fmt(U)}: {v}"
                              for v in check_g_structure(P.fibers[U], act))
        problems[f"presheaf {name}"] = issues
    for name, act in doc.actions.items():
        M = doc.structures[doc.action_structure[name]]
        problems[f"action {name}"] = [str(v) for v in check_g_structure(M, act)]
        if len(act.group) <= 120:
            subs = admissible_subgroups(M, act)
            oracle = [H for H in act.group.subgroups()
                      if all(relation_invariant_exhaustive(R, act.restrict(H))
                             for R in M.relations.values())
                      and not check_g_structure(M, act.restrict(H), first_only=True)]
            total = len(act.group.subgroups())
            rep.add(f"action:{name}:admissible_subgroups",
                    [sorted(map(format_element, H)) for H in subs])
            rep.lines.append(f"action {name}: {len(subs)} of {total} subgroups admissible"
                             f" (orders {sorted(map(len, subs))}); oracle agrees: "
                             f"{set(subs) == set(oracle)}")
    for name, dp in doc.differentials.items():
        r = validate_differential(dp)
        problems[f"differential {name}"] = r.violations
        rep.add(f"differential:{name}:order", r.order)
    for where, issues in problems.items():
        rep.lines.append(f"{where}: " + ("ok" if not issues else f"{len(issues)} problem(s)"))
        rep.lines.extend(f"  {p}" for p in issues)
    rep.add("problems", problems)
    if any(problems.values()):
        rep.status = EXIT_VIOLATION


def _formula(doc: Document, text: str, sig):
    if text in doc.formulas:
        text = doc.formulas[text]
    try:
        phi = parse_formula(text, sig)
        check_formula(phi, sig)
    except ValueError as e:
        raise DocumentError(f"formula: {e}", kind="reference") from None
    return phi


def _filter(doc: Document, T, text: str | None) -> OpenFilter:
    if text is None:
        fs = maximal_open_filters(T)
        return fs[0]
    if text in doc.filters:
        return doc.filters[text]
    opens = [parse_element(t) for t in text.split()]
    opens = [o if isinstance(o, frozenset) else frozenset([o]) for o in opens]
    return OpenFilter.generated_by(T, opens)


def cmd_force(doc: Document, args, rep: Report):
    _, P = doc.main_presheaf(args.presheaf)
    T = P.topology
    x = parse_element(args.point)
    T.check_point(x)
    U = T.whole if args.open is None else parse_element(args.open)
    U = U if isinstance(U, frozenset) else frozenset([U])
    if not T.is_open(U) or not U:
        raise DocumentError(f"{args.open} is not a nonempty open set", kind="reference")
    phi = _formula(doc, args.formula, P.sig)
    elems = tuple(parse_element(t) for t in args.section.split(";")) if args.section else ()
    ctx = ForcingContext(P, args.mode)
    a = SectionTuple(U, elems)
    val = ctx.forces_at(x, a, phi)
    locus = ctx.forcing_locus(a, phi)
    rep.add("formula", str(phi))
    rep.add("mode", args.mode)
    rep.add("forces", val, f"{x} forces {phi} at {T.fmt(U)} ({args.mode}): {val}")
    rep.add("locus", sorted(map(format_element, locus)), f"locus: {T.fmt(locus)}")


def _bounded_formulas(doc: Document, sig, depth: int) -> list:
    out = list(check_document_formulas(doc, sig).values())
    out.extend(formula_space(sig, depth))
    return out


def cmd_filters(doc: Document, args, rep: Report):
    _, P = doc.main_presheaf(args.presheaf)
    T = P.topology
    depth = args.depth if args.depth is not None else 2
    formulas = _bounded_formulas(doc, P.sig, depth)
    if len(formulas) > args.max_formulas:
        raise BoundExceeded(f"{len(formulas)} formulas exceed --max-formulas {args.max_formulas}")
    ctx = ForcingContext(P, args.mode)
    bounds = {"depth": depth, "formulas": len(formulas), "mode": args.mode}
    rep.add("bounds", bounds, f"bounds: depth={depth} formulas={len(formulas)} mode={args.mode}")
    found = []
    for F in maximal_open_filters(T):
        g = is_generic_filter(ctx, F, formulas, bounds)
        found.append({"core": T.fmt(F.core), "members": [T.fmt(U) for U in F],
                      "generic": g.generic, "failing_instance": g.failing_instance})
        rep.lines.append(f"filter at {T.fmt(F.core)} [{' '.join(T.fmt(U) for U in F)}]: "
                         f"generic={g.generic}"
                         + (f" ({g.failing_instance})" if g.failing_instance else ""))
        if not g.generic:
            rep.status = EXIT_VIOLATION
    rep.add("filters", found)


def cmd_generic_model(doc: Document, args, rep: Report):
    _, P = doc.main_presheaf(args.presheaf)
    F = _filter(doc, P.topology, args.filter)
    gm = generic_model(P, F)
    M = gm.structure
    rep.add("filter", [P.topology.fmt(U) for U in F], f"filter: {F}")
    universe = [str(g) for g in M.universe]
    rep.add("universe", universe, f"universe: {' '.join(universe)}")
    fns = {}
    tabs = M.tabulated().functions
    for f in sorted(M.sig.functions):
        fns[f] = {" ".join(str(a) for a in k): str(v) for k, v in tabs[f].items()}
        rep.lines.append(f"{f}: " + "; ".join(f"{k} -> {v}" for k, v in fns[f].items()))
    rep.add("functions", fns)
    rels = {r: sorted(" ".join(map(str, t)) for t in M.relations[r]) for r in sorted(M.relations)}
    for r, ts in rels.items():
        rep.lines.append(f"{r}: " + "; ".join(ts))
    rep.add("relations", rels)
    if gm.colimit.action is not None:
        bad = generic_model_g_check(gm)
        rep.add("g_structure", not bad, f"G-structure: {not bad}")
        if bad:
            rep.status = EXIT_VIOLATION


def cmd_gmt(doc: Document, args, rep: Report):
    _, P = doc.main_presheaf(args.presheaf)
    T = P.topology
    F = _filter(doc, T, args.filter)
    depth = args.sweep if args.sweep is not None else default_depth(2)
    formulas = _bounded_formulas(doc, P.sig, depth)
    if len(formulas) > args.max_formulas:
        raise BoundExceeded(f"{len(formulas)} formulas exceed --max-formulas {args.max_formulas}")
    ctx = ForcingContext(P, args.mode)
    gm = generic_model(ctx, F)
    checked, failures = 0, []
    for phi in formulas:
        vs = free_vars(phi)
        phiG = godel_translate(phi)
        for U in F:
            for a in P.sections(U, len(vs)):
                r = verify_generic_model_theorem(ctx, F, phi, a, gm, vs, phiG)
                checked += 1
                if not r.all_equal:
                    failures.append({"formula": str(phi), "open": T.fmt(U), "section": str(a),
                                     "s1": r.s1, "s2": r.s2, "s3": r.s3})
    rep.add("bounds", {"depth": depth, "formulas": len(formulas), "mode": args.mode})
    rep.add("checked", checked)
    rep.add("failures", failures)
    rep.lines.append(f"filter {F}, mode {args.mode}, depth {depth}: {checked} instances, "
                     f"{len(failures)} disagreement(s)")
    for f in failures[:10]:
        rep.lines.append(f"  {f['formula']} at {f['open']} with {f['section']}: "
                         f"s1={f['s1']} s2={f['s2']} s3={f['s3']}")
    if failures:
        rep.status = EXIT_VIOLATION


def cmd_cohomology(doc: Document, args, rep: Report):
    name, dp = doc.main_differential(args.differential)
    report = validate_differential(dp)
    if report.violations:
        rep.add("violations", report.violations, "\n".join(report.violations))
        rep.status = EXIT_VIOLATION
        return
    N = report.order
    amps = [args.amplitude] if args.amplitude is not None else (
        ["ordinary"] if N <= 2 else list(range(1, N)))
    rows = []
    for m in amps:
        label = "H" if m == "ordinary" else f"H_{m}"
        if args.filter is not None:
            F = _filter(doc, dp.presheaf.topology, args.filter)
            dec = generic_cohomology(dp, F, m).decomposition
        elif getattr(dp, "diagonal", None) is not None:
            d = dp.diagonal
            dec = ordinary_cohomology(d) if m == "ordinary" else amplitude_cohomology(d, m)
        else:
            T = dp.presheaf.topology
            dec = generic_cohomology(dp, OpenFilter(T, [T.whole]), m).decomposition
        rows.append({"label": label, "orders": list(dec.orders), "text": str(dec)})
        rep.lines.append(f"{label}: {dec}")
    rep.add("differential", name)
    rep.add("order", N)
    rep.add("table", rows)


def cmd_fixtures(args, out=sys.stdout) -> int:
    from .fixture_docs import render_fixture
    out.write(render_fixture(args.name, args.params))
    return EXIT_OK


# --- plumbing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sheaf-forcer",
                                description="Forcing and generic models over finite presheaves.")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    sub = p.add_subparsers(dest="command", required=True)

    def doc_cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("document")
        s.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return s

    doc_cmd("validate", "run every structural check")
    s = doc_cmd("force", "pointwise forcing and the forcing locus")
    s.add_argument("--point", required=True)
    s.add_argument("--open")
    s.add_argument("--formula", required=True)
    s.add_argument("--section", default="", help="elements separated by ';'")
    s.add_argument("--mode", choices=MODES, default="literal")
    s.add_argument("--presheaf")
    s = doc_cmd("filters", "maximal open filters and their genericity")
    s.add_argument("--depth", type=int)
    s.add_argument("--mode", choices=MODES, default="literal")
    s.add_argument("--max-formulas", type=int, default=20000)
    s.add_argument("--presheaf")
    s = doc_cmd("generic-model", "build the generic model of a filter")
    s.add_argument("--filter")
    s.add_argument("--presheaf")
    s = doc_cmd("gmt", "check the generic model theorem over a bounded formula space")
    s.add_argument("--filter")
    s.add_argument("--sweep", type=int, metavar="DEPTH")
    s.add_argument("--mode", choices=MODES, default="literal")
    s.add_argument("--max-formulas", type=int, default=20000)
    s.add_argument("--presheaf")
    s = doc_cmd("cohomology", "cohomology tables for a differential")
    s.add_argument("--amplitude", type=int)
    s.add_argument("--filter")
    s.add_argument("--differential")
    s = sub.add_parser("fixtures", help="print a generated document")
    s.add_argument("name", choices=("simplex", "boundary", "sequence-sheaf", "graph-presheaf",
                                    "sierpinski"))
    s.add_argument("params", nargs="*")
    return p


COMMANDS = {
    "validate": cmd_validate, "force": cmd_force, "filters": cmd_filters,
    "generic-model": cmd_generic_model, "gmt": cmd_gmt, "cohomology": cmd_cohomology,
}


def main(argv: list[str] | None = None, out=sys.stdout, err=sys.stderr) -> int:
    args = build_parser().parse_args(argv)
    as_json = getattr(args, "json", False)
    if args.command == "fixtures":
        try:
            return cmd_fixtures(args, out)
        except ValueError as e:
            err.write(f"error: {e}\n")
            return EXIT_INPUT
    rep = Report(args.command)
    try:
        doc = load_document(args.document)
        if args.command != "validate" and not _prevalidate(doc, rep):
            rep.status = EXIT_VIOLATION
        else:
            COMMANDS[args.command](doc, args, rep)
    except BoundExceeded as e:
        rep.status = EXIT_BOUND
        rep.add("error", str(e), f"bound exceeded: {e}")
    except (OSError, DocumentError, LogicError, TopologyError, ForcingError,
            CohomologyError, GroupError, ValueError) as e:
        rep.status = EXIT_INPUT
        rep.add("error", str(e), f"error: {e}")
    rep.emit(as_json, out)
    return rep.status


if __name__ == "__main__":
    sys.exit(main())

"""The ``.sfd`` document format.

A document is a sequence of blocks and one-line declarations::

    # comment
    signature S {
      function f 1
      relation R 1
      constant c
    }
    group G { symmetric 3 }
    structure M {
      signature S
      universe 0 1 2
      constant c = 0
      function f: 0 -> 1; 1 -> 1; 2 -> 0
      relation R: 0; 2
    }
    action A {
      group G
      structure M
      rule points            # or: rule faces | rule translate N STEP | map g: x -> y; ...
    }
    topology T {
      points a b
      open {a}
    }
    presheaf P {
      topology T
      fiber {a} = M
      fiber {a,b} = M
      restrict {a,b} -> {a}: 0 -> 0; 1 -> 1; 2 -> 2
      action {a} = A
    }
    presheaf Q { fixture sequence modulus=12 points=0,1 }
    differential d { presheaf Q  diagonal 6 6 }
    formula phi = forall y. x = y
    filter F = {a}

Elements are integers, bare names, tuples ``(a,b)`` or sets ``{a,b}``.
Mapping entries and relation tuples are separated by ``;``. A block may be
written on one line; statements inside it are then split at keywords.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .cohomology import (
    ADD, RING_SIG, DiagonalDifferential, DifferentialPresheaf, matrix_differential,
    sequence_differential, zn_structure,
)
from .fixtures import sierpinski_counterexample
from .logic import Formula, LanguageSig, check_formula, parse_formula
from .model import FinGroup, FinStructure, GAction
from .sheaf import Presheaf, constant_presheaf, graph_presheaf, sequence_sheaf
from .space import FinTopology, OpenFilter, build_topology


class DocumentError(ValueError):
    """Malformed input. ``kind`` is ``syntax`` or ``reference``."""

    def __init__(self, message: str, line: int | None = None, kind: str = "syntax"):
        self.line = line
        self.kind = kind
        super().__init__(f"line {line}: {message}" if line else message)


# --- element syntax ----------------------------------------------------------

_ELEM_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][\w.']*)|([(){},]))")


def parse_element(text: str) -> Any:
    val, rest = _elem(text.strip(), 0)
    if text.strip()[rest:].strip():
        raise DocumentError(f"trailing text in element {text!r}")
    return val


def _elem(s: str, i: int):
    m = _ELEM_TOKEN.match(s, i)
    if not m:
        raise DocumentError(f"bad element syntax in {s!r}")
    num, name, punct = m.groups()
    i = m.end()
    if num is not None:
        return int(num), i
    if name is not None:
        return name, i
    if punct not in "({":
        raise DocumentError(f"unexpected {punct!r} in {s!r}")
    close = ")" if punct == "(" else "}"
    items = []
    while True:
        m2 = re.compile(r"\s*" + re.escape(close)).match(s, i)
        if m2 and not items:
            i = m2.end()
            break
        v, i = _elem(s, i)
        items.append(v)
        m3 = re.compile(r"\s*([,)}])").match(s, i)
        if not m3:
            raise DocumentError(f"expected ',' or {close!r} in {s!r}")
        i = m3.end()
        if m3.group(1) == close:
            break
        if m3.group(1) != ",":
            raise DocumentError(f"mismatched bracket in {s!r}")
    return (tuple(items) if punct == "(" else frozenset(items)), i


def split_top(text: str, sep: str) -> list[str]:
    """Split at ``sep`` outside brackets."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [p.strip() for p in out if p.strip()]


def format_element(e) -> str:
    if isinstance(e, tuple):
        return "(" + ",".join(format_element(x) for x in e) + ")"
    if isinstance(e, frozenset):
        return "{" + ",".join(format_element(x) for x in sorted(e, key=_order)) + "}"
    return str(e)


def _order(e):
    return (0, e, "") if isinstance(e, int) else (1, 0, format_element(e))


def parse_mapping(text: str) -> list[tuple[Any, Any]]:
    out = []
    for entry in split_top(text, ";"):
        if "->" not in entry:
            raise DocumentError(f"mapping entry {entry!r} has no '->'")
        lhs, rhs = entry.rsplit("->", 1)
        out.append((parse_element(lhs), parse_element(rhs)))
    return out


# --- blocks ------------------------------------------------------------------

@dataclass
class Block:
    kind: str
    name: str
    line: int
    statements: list[tuple[int, str]] = field(default_factory=list)


_KEYWORDS = {
    "signature": ("function", "relation", "constant"),
    "group": ("symmetric", "cyclic", "trivial", "generated"),
    "structure": ("signature", "universe", "constant", "function", "relation", "modular"),
    "action": ("group", "structure", "rule", "map"),
    "topology": ("points", "open"),
    "presheaf": ("topology", "fiber", "restrict", "action", "fixture"),
    "differential": ("presheaf", "diagonal", "matrix"),
}
_HEADER = re.compile(r"^(\w+)\s+([\w\-]+)\s*\{(.*)$")


def _split_inline(kind: str, body: str) -> list[str]:
    words = _KEYWORDS[kind]
    pat = re.compile(r"(?:^|\s)(?=(?:" + "|".join(words) + r")\b)")
    return [p.strip() for p in pat.split(body) if p.strip()]


def tokenize_blocks(text: str) -> tuple[list[Block], list[tuple[int, str]]]:
    blocks, singles = [], []
    cur: Block | None = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if cur is None:
            m = _HEADER.match(line)
            if m:
                kind, name, rest = m.groups()
                if kind not in _KEYWORDS:
                    raise DocumentError(f"unknown block kind {kind!r}", no)
                cur = Block(kind, name, no)
                rest = rest.strip()
                closed = rest.count("}") > rest.count("{")
                if closed:
                    rest = rest[:-1].strip()
                if rest:
                    cur.statements.extend((no, s) for s in _split_inline(kind, rest))
                if closed:
                    blocks.append(cur)
                    cur = None
            else:
                singles.append((no, line))
        elif line == "}":
            blocks.append(cur)
            cur = None
        else:
            closed = line.endswith("}") and line.count("{") < line.count("}")
            if closed:
                line = line[:-1].strip()
            if line:
                cur.statements.append((no, line))
            if closed:
                blocks.append(cur)
                cur = None
    if cur is not None:
        raise DocumentError(f"block {cur.kind} {cur.name} is never closed", cur.line)
    return blocks, singles


# --- the document ------------------------------------------------------------

@dataclass
class Document:
    signatures: dict[str, LanguageSig] = field(default_factory=dict)
    groups: dict[str, FinGroup] = field(default_factory=dict)
    structures: dict[str, FinStructure] = field(default_factory=dict)
    actions: dict[str, GAction] = field(default_factory=dict)
    topologies: dict[str, FinTopology] = field(default_factory=dict)
    presheaves: dict[str, Presheaf] = field(default_factory=dict)
    differentials: dict[str, DifferentialPresheaf] = field(default_factory=dict)
    formulas: dict[str, str] = field(default_factory=dict)  # parsed once a signature is known
    filters: dict[str, OpenFilter] = field(default_factory=dict)
    action_structure: dict[str, str] = field(default_factory=dict)
    fixture_presheaves: set[str] = field(default_factory=set)

    def main_presheaf(self, name: str | None = None) -> tuple[str, Presheaf]:
        return _pick(self.presheaves, name, "presheaf")

    def main_differential(self, name: str | None = None) -> tuple[str, DifferentialPresheaf]:
        return _pick(self.differentials, name, "differential")


def _pick(table: dict, name: str | None, what: str):
    if name is not None:
        if name not in table:
            raise DocumentError(f"no {what} named {name!r}", kind="reference")
        return name, table[name]
    if not table:
        raise DocumentError(f"document declares no {what}", kind="reference")
    first = next(iter(table))
    return first, table[first]


def _ref(table: dict, name: str, what: str, line: int):
    if name not in table:
        raise DocumentError(f"unknown {what} {name!r}", line, kind="reference")
    return table[name]


def load_document(path: str) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())


def parse_document(text: str) -> Document:
    blocks, singles = tokenize_blocks(text)
    doc = Document()
    for b in blocks:
        getattr(_Builder, "build_" + b.kind)(doc, b)
    for no, line in singles:
        _single(doc, no, line)
    return doc


def _kv(words: list[str], line: int) -> dict[str, str]:
    out = {}
    for w in words:
        if "=" not in w:
            raise DocumentError(f"expected key=value, got {w!r}", line)
        k, v = w.split("=", 1)
        out[k] = v
    return out


def _open_of(T: FinTopology, text: str, line: int) -> frozenset:
    text = text.strip()
    if text in ("X", "*"):
        return T.whole
    try:
        val = parse_element(text)
    except DocumentError as e:
        raise DocumentError(str(e), line) from None
    if not isinstance(val, frozenset):
        val = frozenset([val])
    if not T.is_open(val) or not val:
        raise DocumentError(f"{text} is not a nonempty open set", line, kind="reference")
    return val


class _Builder:
    @staticmethod
    def build_signature(doc: Document, b: Block):
        fns, rels, consts = {}, {}, []
        for no, st in b.statements:
            w = st.split()
            try:
                if w[0] == "function":
                    fns[w[1]] = int(w[2])
                elif w[0] == "relation":
                    rels[w[1]] = int(w[2])
                elif w[0] == "constant":
                    consts.extend(w[1:])
                else:
                    raise DocumentError(f"unknown statement {w[0]!r}", no)
            except (IndexError, ValueError):
                raise DocumentError(f"malformed statement {st!r}", no) from None
        doc.signatures[b.name] = LanguageSig(fns, rels, tuple(consts))

    @staticmethod
    def build_group(doc: Document, b: Block):
        if len(b.statements) != 1:
            raise DocumentError("a group block holds exactly one statement", b.line)
        no, st = b.statements[0]
        w = st.split(None, 1)
        if w[0] == "symmetric":
            G = FinGroup.symmetric(int(w[1]))
        elif w[0] == "cyclic":
            G = FinGroup.cyclic(int(w[1]))
        elif w[0] == "trivial":
            G = FinGroup.trivial()
        elif w[0] == "generated":
            perms = [parse_element(t) for t in split_top(w[1], " ")]
            G = FinGroup.from_permutations(perms)
        else:
            raise DocumentError(f"unknown group statement {w[0]!r}", no)
        doc.groups[b.name] = G

    @staticmethod
    def build_structure(doc: Document, b: Block):
        sig = None
        universe: list = []
        consts, fns, rels = {}, {}, {}
        for no, st in b.statements:
            head, _, rest = st.partition(" ")
            rest = rest.strip()
            if head == "signature":
                sig = _ref(doc.signatures, rest, "signature", no)
            elif head == "universe":
                universe = [parse_element(t) for t in split_top(rest, " ")]
            elif head == "modular":
                n = int(rest)
                M = zn_structure(n)
                sig, universe = M.sig, list(M.universe)
                fns[ADD] = ([((x, y), (x + y) % n) for x in universe for y in universe], no)
            elif head == "constant":
                name, _, val = rest.partition("=")
                consts[name.strip()] = parse_element(val)
            elif head in ("function", "relation"):
                name, _, body = rest.partition(":")
                name = name.strip()
                if head == "function":
                    fns[name] = (parse_mapping(body), no)
                else:
                    rels[name] = ([parse_element(t) for t in split_top(body, ";")], no)
            else:
                raise DocumentError(f"unknown statement {head!r}", no)
        if sig is None:
            raise DocumentError("structure has no signature", b.line, kind="reference")
        fns = {f: {_args(k, sig.functions.get(f), no): v for k, v in pairs}
               for f, (pairs, no) in fns.items()}
        rels = {r: {_args(t, sig.relations.get(r), no) for t in ts}
                for r, (ts, no) in rels.items()}
        try:
            doc.structures[b.name] = FinStructure(sig, universe, consts, fns, rels, name=b.name)
        except ValueError as e:
            raise DocumentError(str(e), b.line) from None

    @staticmethod
    def build_action(doc: Document, b: Block):
        G = M = rule = None
        table = {}
        for no, st in b.statements:
            head, _, rest = st.partition(" ")
            rest = rest.strip()
            if head == "group":
                G = _ref(doc.groups, rest, "group", no)
            elif head == "structure":
                M = _ref(doc.structures, rest, "structure", no)
            elif head == "rule":
                rule = rest.split()
            elif head == "map":
                g, _, body = rest.partition(":")
                for x, y in parse_mapping(body):
                    table[parse_element(g), x] = y
            else:
                raise DocumentError(f"unknown statement {head!r}", no)
        if G is None or M is None:
            raise DocumentError("action needs a group and a structure", b.line, kind="reference")
        if rule is None:
            act = table
        elif rule[0] == "points":
            def act(p, x): return p[x]
        elif rule[0] == "faces":
            def act(p, f): return frozenset(p[i] for i in f)
        elif rule[0] == "translate":
            n, step = int(rule[1]), int(rule[2]) if len(rule) > 2 else 1
            def act(g, x): return (x + g * step) % n
        elif rule[0] == "trivial":
            def act(g, x): return x
        else:
            raise DocumentError(f"unknown rule {rule[0]!r}", b.line)
        try:
            doc.actions[b.name] = GAction(G, M.universe, act)
        except ValueError as e:
            raise DocumentError(str(e), b.line) from None
        doc.action_structure[b.name] = next(k for k, v in doc.structures.items() if v is M)

    @staticmethod
    def build_topology(doc: Document, b: Block):
        pts, gens = None, []
        for no, st in b.statements:
            head, _, rest = st.partition(" ")
            if head == "points":
                pts = [parse_element(t) for t in split_top(rest.strip(), " ")]
            elif head == "open":
                v = parse_element(rest)
                gens.append(v if isinstance(v, frozenset) else frozenset([v]))
            else:
                raise DocumentError(f"unknown statement {head!r}", no)
        if pts is None:
            raise DocumentError("topology has no points", b.line)
        try:
            doc.topologies[b.name] = build_topology(pts, gens)
        except ValueError as e:
            raise DocumentError(str(e), b.line) from None

    @staticmethod
    def build_presheaf(doc: Document, b: Block):
        first = b.statements[0][1].split() if b.statements else []
        if first and first[0] == "fixture":
            doc.presheaves[b.name] = _fixture_presheaf(doc, first[1:], b.statements[0][0])
            doc.fixture_presheaves.add(b.name)
            return
        T = None
        fibers, rho, acts = {}, {}, {}
        for no, st in b.statements:
            head, _, rest = st.partition(" ")
            rest = rest.strip()
            if head == "topology":
                T = _ref(doc.topologies, rest, "topology", no)
                continue
            if T is None:
                raise DocumentError("declare the topology first", no)
            if head == "fiber":
                U, _, name = rest.partition("=")
                fibers[_open_of(T, U, no)] = _ref(doc.structures, name.strip(), "structure", no)
            elif head == "restrict":
                arrow, _, body = rest.partition(":")
                src, _, dst = arrow.partition("->")
                rho[_open_of(T, dst, no), _open_of(T, src, no)] = dict(parse_mapping(body))
            elif head == "action":
                U, _, name = rest.partition("=")
                acts[_open_of(T, U, no)] = _ref(doc.actions, name.strip(), "action", no)
            else:
                raise DocumentError(f"unknown statement {head!r}", no)
        if T is None:
            raise DocumentError("presheaf has no topology", b.line, kind="reference")
        try:
            doc.presheaves[b.name] = Presheaf(T, fibers, rho, acts or None, name=b.name)
        except ValueError as e:
            raise DocumentError(str(e), b.line) from None

    @staticmethod
    def build_differential(doc: Document, b: Block):
        P = None
        spec = None
        for no, st in b.statements:
            head, _, rest = st.partition(" ")
            rest = rest.strip()
            if head == "presheaf":
                P = _ref(doc.presheaves, rest, "presheaf", no)
            elif head == "diagonal":
                spec = ("diagonal", [int(t) for t in rest.split()], no)
            elif head == "matrix":
                spec = ("matrix", [[int(t) for t in row.split()] for row in rest.split(";")], no)
            else:
                raise DocumentError(f"unknown statement {head!r}", no)
        if P is None or spec is None:
            raise DocumentError("differential needs a presheaf and a map", b.line,
                                kind="reference")
        if P.sig != RING_SIG:
            raise DocumentError("differentials need a sequence presheaf over Z_n", b.line)
        n = _zn_order(P)
        kind, data, no = spec
        try:
            if kind == "diagonal":
                pts = P.topology.points
                if len(data) != len(pts):
                    raise DocumentError(f"expected {len(pts)} eigenvalues", no)
                d = DiagonalDifferential(n, dict(zip(pts, data)))
                dp = sequence_differential(d)
                dp.diagonal = d
            else:
                dp = matrix_differential(P, n, data)
                dp.diagonal = None
        except DocumentError:
            raise
        except ValueError as e:
            raise DocumentError(str(e), no) from None
        doc.differentials[b.name] = dp


def _zn_order(P: Presheaf) -> int:
    x = P.topology.points[0]
    U = frozenset([x])
    if U not in P.fibers:
        raise DocumentError("differentials need a discrete base")
    return len(P.fibers[U].universe)


def _args(k, arity: int | None, line: int) -> tuple:
    """Argument tuple of a table entry: a bare element when the arity is 1."""
    if arity is None:
        raise DocumentError("symbol is not in the signature", line, kind="reference")
    if arity == 1:
        return (k,)
    if not isinstance(k, tuple) or len(k) != arity:
        raise DocumentError(f"expected a {arity}-tuple, got {format_element(k)}", line)
    return k


def _fixture_presheaf(doc: Document, words: list[str], line: int) -> Presheaf:
    if not words:
        raise DocumentError("fixture needs a name", line)
    name, kv = words[0], _kv(words[1:], line)
    try:
        if name == "sequence":
            n = int(kv.get("modulus", "12"))
            pts = [parse_element(t) for t in kv.get("points", "0").split(",")]
            act = None
            if "action" in kv:
                act = _ref(doc.actions, kv["action"], "action", line)
            return sequence_sheaf(zn_structure(n), pts, act)
        if name == "graph":
            return graph_presheaf(int(kv.get("n", "3")))
        if name == "constant":
            T = _ref(doc.topologies, kv["topology"], "topology", line)
            M = _ref(doc.structures, kv["structure"], "structure", line)
            A = _ref(doc.actions, kv["action"], "action", line) if "action" in kv else None
            return constant_presheaf(T, M, A)
        if name == "sierpinski-counterexample":
            return sierpinski_counterexample()
    except KeyError as e:
        raise DocumentError(f"fixture {name} needs parameter {e.args[0]}", line) from None
    raise DocumentError(f"unknown fixture {name!r}", line)


def _single(doc: Document, no: int, line: int | str):
    head, _, rest = line.partition(" ")
    if head == "formula":
        name, _, text = rest.partition("=")
        if not name.strip() or not text.strip():
            raise DocumentError("expected 'formula NAME = TEXT'", no)
        doc.formulas[name.strip()] = text.strip()
    elif head == "filter":
        name, _, text = rest.partition("=")
        name = name.strip()
        topo = None
        if " on " in f" {name} ":
            name, _, topo = name.partition(" on ")
            name, topo = name.strip(), topo.strip()
        T = (_ref(doc.topologies, topo, "topology", no) if topo else _default_topology(doc, no))
        opens = [_open_of(T, t, no) for t in split_top(text.strip(), " ")]
        try:
            doc.filters[name] = OpenFilter.generated_by(T, opens)
        except ValueError as e:
            raise DocumentError(str(e), no) from None
    else:
        raise DocumentError(f"unknown declaration {head!r}", no)


def _default_topology(doc: Document, no: int) -> FinTopology:
    if doc.presheaves:
        return next(iter(doc.presheaves.values())).topology
    if doc.topologies:
        return next(iter(doc.topologies.values()))
    raise DocumentError("filter declared before any topology", no, kind="reference")


def check_document_formulas(doc: Document, sig: LanguageSig) -> dict[str, Formula]:
    """Parse every declared formula against ``sig``."""
    out = {}
    for name, text in doc.formulas.items():
        try:
            out[name] = parse_formula(text, sig)
            check_formula(out[name], sig)
        except ValueError as e:
            raise DocumentError(f"formula {name}: {e}", kind="reference") from None
    return out

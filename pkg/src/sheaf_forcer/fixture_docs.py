"""Render built-in fixtures as ``.sfd`` text."""

from __future__ import annotations

from .document import format_element
from .model import simplex_fixture


def _kv(params: list[str]) -> dict[str, str]:
    out = {}
    for p in params:
        if "=" not in p:
            raise ValueError(f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k] = v
    return out


def simplex_document(n: int, boundary: bool = False, strict: bool = True) -> str:
    M, _ = simplex_fixture(n, boundary, strict)
    faces = " ".join(format_element(f) for f in M.universe)
    lt = "; ".join(f"({format_element(a)},{format_element(b)})"
                   for a, b in sorted(M.relations["lt"], key=lambda t: (len(t[0]), len(t[1]),
                                                                          format_element(t))))
    name = M.name
    return "\n".join([
        f"# faces of the {n}-simplex{' without its top face' if boundary else ''}, "
        f"ordered by {'strict' if strict else 'non-strict'} inclusion, with S_{n} permuting vertices",
        "signature order { relation lt 2 }",
        f"group S{n} {{ symmetric {n} }}",
        f"structure {name} {{",
        "  signature order",
        f"  universe {faces}",
        f"  relation lt: {lt}",
        "}",
        f"action perm {{ group S{n}  structure {name}  rule faces }}",
        "",
    ])


def sequence_document(modulus: int, points: list[str], eigenvalues: list[str] | None) -> str:
    lines = [f"# Z_{modulus}-valued sequences on the discrete space {{{','.join(points)}}}",
             f"presheaf seq {{ fixture sequence modulus={modulus} points={','.join(points)} }}"]
    if eigenvalues:
        lines.append(f"differential d {{ presheaf seq  diagonal {' '.join(eigenvalues)} }}")
    lines.append("")
    return "\n".join(lines)


def render_fixture(name: str, params: list[str]) -> str:
    kv = _kv(params)
    if name in ("simplex", "boundary"):
        strict = kv.get("strict", "true").lower()
        if strict not in ("true", "false"):
            raise ValueError("strict must be true or false")
        return simplex_document(int(kv.get("n", "3")), boundary=(name == "boundary"),
                                strict=strict == "true")
    if name == "sequence-sheaf":
        pts = kv.get("points", "0").split(",")
        eig = kv["eigenvalues"].split(",") if "eigenvalues" in kv else None
        return sequence_document(int(kv.get("modulus", "12")), pts, eig)
    if name == "graph-presheaf":
        n = int(kv.get("n", "3"))
        return f"# graphs on subsets of {n} vertices\npresheaf graphs {{ fixture graph n={n} }}\n"
    if name == "sierpinski":
        return ("# exact presheaf on the Sierpinski space: one element over X, two over {a}\n"
                "presheaf P { fixture sierpinski-counterexample }\n"
                "formula all_equal = forall u. forall v. u = v\n")
    raise ValueError(f"unknown fixture {name!r}")

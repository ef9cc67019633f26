"""Finite structures, groups, morphisms and colimits."""

from .colimit import (
    Colimit, DiagramError, DirectedDiagram, Germ, colimit_diagram,
    verify_colimit_preservation,
)
from .group import FinGroup, GAction, GroupError, compose_perm, trivial_action
from .gstructure import (
    SIMPLEX_SIG, QuotientError, Violation, admissible_subgroups,
    check_g_structure, orbit_quotient, relation_invariant_exhaustive,
    simplex_fixture,
)
from .morphism import (
    Factorization, MorphismError, MorphismFlags, StructMorphism,
    classify_morphism, factorize_morphism, image_substructure, is_equivariant,
)
from .structure import (
    Elem, FinStructure, StructureError, UnassignedVariableError, fmt_elem,
    isomorphic_by, satisfies, table,
)

__all__ = [
    "Colimit",
    "DiagramError",
    "DirectedDiagram",
    "Elem",
    "Factorization",
    "FinGroup",
    "FinStructure",
    "GAction",
    "Germ",
    "GroupError",
    "MorphismError",
    "MorphismFlags",
    "QuotientError",
    "SIMPLEX_SIG",
    "StructMorphism",
    "StructureError",
    "UnassignedVariableError",
    "Violation",
    "admissible_subgroups",
    "check_g_structure",
    "classify_morphism",
    "colimit_diagram",
    "compose_perm",
    "factorize_morphism",
    "fmt_elem",
    "image_substructure",
    "is_equivariant",
    "isomorphic_by",
    "orbit_quotient",
    "relation_invariant_exhaustive",
    "satisfies",
    "simplex_fixture",
    "table",
    "trivial_action",
    "verify_colimit_preservation",
]

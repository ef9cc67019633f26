"""First-order syntax: signatures, formulas, parsing, translation."""

from .godel import godel_translate, homomorphic_implication
from .parser import FormulaSyntaxError, parse_formula, tokenize
from .syntax import (
    And, Apply, ArityError, Const, Eq, Exists, Forall, Formula, FormulaInfo,
    Implies, LanguageSig, LogicError, Not, Or, Rel, Term, UnknownSymbolError,
    Var, analyze_formula, check_formula, depth, free_vars, is_positive,
    subformulas, term_vars, to_text,
)

__all__ = [
    "And", "Apply", "ArityError", "Const", "Eq", "Exists", "Forall", "Formula",
    "FormulaInfo", "FormulaSyntaxError", "Implies", "LanguageSig", "LogicError",
    "Not", "Or", "Rel", "Term", "UnknownSymbolError", "Var", "analyze_formula",
    "check_formula", "depth", "free_vars", "godel_translate",
    "homomorphic_implication", "is_positive", "parse_formula", "subformulas",
    "term_vars", "to_text", "tokenize",
]

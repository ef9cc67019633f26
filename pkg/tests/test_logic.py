import pytest
from hypothesis import given, settings

from sheaf_forcer.logic import (
    And, Apply, ArityError, Eq, Exists, Forall, FormulaSyntaxError, Implies, LanguageSig,
    Not, Or, Rel, UnknownSymbolError, Var, analyze_formula, check_formula, free_vars,
    godel_translate, is_positive, parse_formula, subformulas, to_text,
)

from conftest import SIG, SIG2, formulas

x, y, z, u, v, w = (Var(n) for n in "xyzuvw")


def test_signature_namespaces_must_be_disjoint():
    with pytest.raises(ValueError):
        LanguageSig(functions={"f": 1}, relations={"f": 1})
    with pytest.raises(ValueError):
        LanguageSig(relations={"R": 0})


def test_parse_excluded_middle():
    phi = parse_formula("forall u. forall v. (u = v | ~(u = v))", SIG)
    assert phi == Forall("u", Forall("v", Or(Eq(u, v), Not(Eq(u, v)))))


def test_parse_reflexive_atom():
    assert parse_formula("x = x", SIG) == Eq(x, x)


def test_arity_mismatch():
    with pytest.raises(ArityError):
        parse_formula("R(x, f(x))", SIG)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError):
        parse_formula("Q(x)", LanguageSig(functions={"f": 1}, relations={"R": 1, "S": 2}))


def test_syntax_error_carries_position():
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula("x = ", SIG)
    assert "position 4" in str(e.value)


def test_precedence_and_right_associative_implication():
    phi = parse_formula("~R(x) & R(y) | x = y -> R(x) -> R(y)", SIG)
    assert phi == Implies(Or(And(Not(Rel("R", (x,))), Rel("R", (y,))), Eq(x, y)),
                          Implies(Rel("R", (x,)), Rel("R", (y,))))


def test_quantifier_extends_right():
    phi = parse_formula("exists y. R(y) & x = y", SIG)
    assert phi == Exists("y", And(Rel("R", (y,)), Eq(x, y)))


def test_shadowed_binder_is_renamed():
    phi = parse_formula("forall x. exists x. R(x)", SIG)
    assert isinstance(phi, Forall) and isinstance(phi.body, Exists)
    assert phi.var != phi.body.var
    assert phi.body.body == Rel("R", (Var(phi.body.var),))


def test_analyze_examples():
    em = Forall("u", Forall("v", Or(Eq(u, v), Not(Eq(u, v)))))
    info = analyze_formula(em)
    assert info.free_vars == [] and not info.is_positive
    S = LanguageSig(relations={"R": 2}, functions={"f": 1})
    info = analyze_formula(parse_formula("exists w. R(v, w)", S))
    assert info.free_vars == ["v"] and info.is_positive
    info = analyze_formula(parse_formula("x = y & exists z. f(z) = x", S))
    assert info.free_vars == ["x", "y"] and info.is_positive


def test_implication_is_not_positive():
    assert not is_positive(Implies(Eq(x, x), Eq(x, x)))


def test_godel_examples():
    assert godel_translate(Eq(x, y)) == Not(Not(Eq(x, y)))
    R = Rel("R", (v,))
    assert godel_translate(Exists("v", R)) == Not(Forall("v", Not(Not(Not(R)))))
    assert godel_translate(And(Eq(x, y), Eq(y, z))) == And(Not(Not(Eq(x, y))),
                                                         Not(Not(Eq(y, z))))


def test_godel_remaining_clauses():
    a, b = Eq(x, y), Rel("R", (x,))
    aG, bG = godel_translate(a), godel_translate(b)
    assert godel_translate(Or(a, b)) == Not(And(Not(aG), Not(bG)))
    assert godel_translate(Not(a)) == Not(aG)
    assert godel_translate(Forall("x", a)) == Forall("x", aG)
    assert godel_translate(Implies(a, b)) == Implies(aG, bG)


def _alpha(phi, env=None, counter=None):
    """Rename bound variables to b0, b1, ... in binding order."""
    env = env or {}
    counter = counter if counter is not None else [0]

    def term(t):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Apply):
            return Apply(t.func, tuple(term(a) for a in t.args))
        return t
    if isinstance(phi, Eq):
        return Eq(term(phi.left), term(phi.right))
    if isinstance(phi, Rel):
        return Rel(phi.name, tuple(term(a) for a in phi.args))
    if isinstance(phi, Not):
        return Not(_alpha(phi.body, env, counter))
    if isinstance(phi, (And, Or, Implies)):
        return type(phi)(_alpha(phi.left, env, counter), _alpha(phi.right, env, counter))
    name = f"b{counter[0]}"
    counter[0] += 1
    return type(phi)(name, _alpha(phi.body, {**env, phi.var: name}, counter))


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_round_trip_up_to_renaming(phi):
    assert _alpha(parse_formula(to_text(phi), SIG2)) == _alpha(phi)


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_round_trip_without_shadowing(phi):
    bound = [s.var for s in subformulas(phi) if isinstance(s, (Forall, Exists))]
    free = set(free_vars(phi))
    if len(bound) != len(set(bound)) or free & set(bound):
        return
    assert parse_formula(to_text(phi), SIG2) == phi


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_godel_output_has_no_exists_or_or(phi):
    out = godel_translate(phi)
    assert not any(isinstance(s, (Exists, Or)) for s in subformulas(out))
    check_formula(out, SIG2)
    assert set(free_vars(out)) == set(free_vars(phi))


def _quantifiers(phi):
    return sum(isinstance(s, (Forall, Exists)) for s in subformulas(phi))


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_translating_twice_adds_no_quantifiers(phi):
    once = godel_translate(phi)
    assert _quantifiers(godel_translate(once)) == _quantifiers(once)


def _strip(phi):
    """Erase the rewrites the translation makes on a positive formula."""
    if isinstance(phi, Not) and isinstance(phi.body, Not):
        return _strip(phi.body.body)
    if isinstance(phi, Not) and isinstance(phi.body, And):
        l, r = phi.body.left, phi.body.right
        if isinstance(l, Not) and isinstance(r, Not):
            return Or(_strip(l.body), _strip(r.body))
    if isinstance(phi, Not) and isinstance(phi.body, Forall) and isinstance(phi.body.body, Not):
        return Exists(phi.body.var, _strip(phi.body.body.body))
    if isinstance(phi, And):
        return And(_strip(phi.left), _strip(phi.right))
    return phi


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_positive_translation_differs_only_by_rewrites(phi):
    if is_positive(phi):
        assert _strip(godel_translate(phi)) == phi


def test_check_formula_rejects_apply_arity():
    with pytest.raises(ArityError):
        check_formula(Eq(Apply("f", (x, y)), x), SIG)

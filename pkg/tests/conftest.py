import random

import pytest
from hypothesis import strategies as st

from sheaf_forcer.logic import (
    And, Apply, Eq, Exists, Forall, Implies, LanguageSig, Not, Or, Rel, Var,
)
from sheaf_forcer.model import FinStructure
from sheaf_forcer.sheaf import Presheaf, constant_presheaf
from sheaf_forcer.space import sierpinski

SIG = LanguageSig(functions={"f": 1}, relations={"R": 1})
SIG2 = LanguageSig(functions={"f": 1, "g": 2}, relations={"R": 1, "E": 2}, constants={"c"})

NAMES = ["x", "y", "z"]


def terms(sig=SIG2, depth=2):
    base = st.sampled_from(NAMES).map(Var)
    if sig.constants:
        from sheaf_forcer.logic import Const
        base = base | st.sampled_from(sorted(sig.constants)).map(Const)

    def extend(inner):
        opts = []
        for f, n in sorted(sig.functions.items()):
            opts.append(st.tuples(*[inner] * n).map(lambda args, f=f: Apply(f, args)))
        return st.one_of(opts)
    return st.recursive(base, extend, max_leaves=4)


def formulas(sig=SIG2):
    t = terms(sig)
    atoms = [st.builds(Eq, t, t)]
    for r, n in sorted(sig.relations.items()):
        atoms.append(st.tuples(*[t] * n).map(lambda args, r=r: Rel(r, args)))
    base = st.one_of(atoms)

    def extend(inner):
        v = st.sampled_from(NAMES)
        return st.one_of(
            inner.map(Not),
            st.builds(And, inner, inner), st.builds(Or, inner, inner),
            st.builds(Implies, inner, inner),
            st.builds(Forall, v, inner), st.builds(Exists, v, inner))
    return st.recursive(base, extend, max_leaves=6)


def unary_structure(universe, f, R, sig=SIG, name=""):
    return FinStructure(sig, universe, functions={"f": {(u,): f[u] for u in universe}},
                        relations={"R": {(u,) for u in R}}, name=name)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def sierpinski_same():
    """Sierpinski space with identical fibers and identity restriction."""
    M = unary_structure([0, 1], {0: 1, 1: 0}, {0})
    return constant_presheaf(sierpinski(), M)


def sierpinski_presheaf(M_X, M_a, rho):
    T = sierpinski()
    return Presheaf(T, {T.whole: M_X, frozenset("a"): M_a}, {(frozenset("a"), T.whole): rho})


# lines recorded by the acceptance tests, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

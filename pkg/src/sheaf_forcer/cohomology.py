"""Differentials on Z_n-sequence presheaves and their (generic) cohomology.

All groups here are finite abelian. Closed forms for diagonal differentials
live next to enumeration-based routines that work on any fiber with an
``add`` function; the tests play one against the other.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from math import gcd, log
from typing import Callable, Hashable, Iterable, Mapping

from sympy import factorint, primefactors

from .logic import LanguageSig
from .model import FinStructure, StructMorphism, StructureError, classify_morphism, fmt_elem
from .sheaf import Presheaf, sequence_sheaf
from .space import Open, OpenFilter

ADD = "add"
RING_SIG = LanguageSig(functions={ADD: 2})


class CohomologyError(StructureError):
    pass


# --- cyclic decompositions -------------------------------------------------

@dataclass(frozen=True)
class CyclicDecomposition:
    """A direct sum of cyclic groups, kept as a sorted multiset of orders.

    Two decompositions may describe isomorphic groups without being equal
    (Z_12 versus Z_3 + Z_4); use :meth:`isomorphic` for that question.
    """
    orders: tuple[int, ...] = ()

    def __post_init__(self):
        if any(m < 1 for m in self.orders):
            raise CohomologyError("cyclic orders must be positive")
        object.__setattr__(self, "orders", tuple(sorted(m for m in self.orders if m > 1)))

    @classmethod
    def of(cls, *orders: int) -> CyclicDecomposition:
        return cls(tuple(orders))

    def __add__(self, other: CyclicDecomposition) -> CyclicDecomposition:
        return CyclicDecomposition(self.orders + other.orders)

    @property
    def multiplicities(self) -> dict[int, int]:
        return dict(sorted(Counter(self.orders).items()))

    @property
    def order(self) -> int:
        out = 1
        for m in self.orders:
            out *= m
        return out

    def primary(self) -> tuple[int, ...]:
        """Prime-power orders of the primary decomposition, sorted."""
        out = []
        for m in self.orders:
            out.extend(p ** e for p, e in factorint(m).items())
        return tuple(sorted(out))

    def invariant_factors(self) -> CyclicDecomposition:
        return invariant_factors_from_primary(self.primary())

    def isomorphic(self, other: CyclicDecomposition) -> bool:
        return self.primary() == other.primary()

    def __str__(self):
        if not self.orders:
            return "0"
        return " + ".join(f"Z_{k}" if m == 1 else f"Z_{k}^{m}"
                          for k, m in self.multiplicities.items())


def invariant_factors_from_primary(primary: Iterable[int]) -> CyclicDecomposition:
    by_prime: dict[int, list[int]] = {}
    for q in primary:
        (p, _), = factorint(q).items()
        by_prime.setdefault(p, []).append(q)
    for qs in by_prime.values():
        qs.sort(reverse=True)
    length = max((len(qs) for qs in by_prime.values()), default=0)
    factors = []
    for i in range(length):
        m = 1
        for qs in by_prime.values():
            if i < len(qs):
                m *= qs[i]
        factors.append(m)
    return CyclicDecomposition(tuple(factors))


# --- residues --------------------------------------------------------------

@dataclass(frozen=True)
class NilpotencyProfile:
    nilpotent: bool
    degree: int | None
    prime_criterion: bool


def nilpotency_profile(a: int, n: int) -> NilpotencyProfile:
    if n < 2 or not 0 <= a < n:
        raise CohomologyError("need n >= 2 and 0 <= a < n")
    seen = set()
    power, k = a % n, 1
    degree = None
    while power not in seen:
        if power == 0:
            degree = k
            break
        seen.add(power)
        power, k = power * a % n, k + 1
    crit = all(a % p == 0 for p in primefactors(n))
    return NilpotencyProfile(degree is not None, degree, crit)


def coprime_normalize(a: int, n: int) -> tuple[int, int]:
    """Split 1 <= a as b*q with q coprime to n and every prime of b dividing n.

    Multiplication by the unit q mod n carries the residue b onto a, so the
    two residues have the same nilpotency degree and the same kernel and
    image sizes under multiplication.
    """
    if a <= 0:
        raise CohomologyError("a must be positive")
    b, q = 1, 1
    for p, e in factorint(a).items():
        if n % p == 0:
            b *= p ** e
        else:
            q *= p ** e
    return b, q


@dataclass(frozen=True)
class Subquotient:
    kernel_order: int
    image_order: int
    quotient: CyclicDecomposition


def cyclic_subquotient(a_ker: int, a_im: int, n: int) -> Subquotient:
    """ker(x -> a_ker x) / im(x -> a_im x) inside Z_n."""
    a_ker, a_im = a_ker % n, a_im % n
    if a_ker * a_im % n:
        raise CohomologyError(f"image of {a_im} is not inside the kernel of {a_ker} mod {n}")
    g = gcd(a_ker, n)
    im = n // gcd(a_im, n)
    return Subquotient(g, im, CyclicDecomposition.of(g // im))


def cyclic_subquotient_by_cosets(a_ker: int, a_im: int, n: int) -> Subquotient:
    """Same as :func:`cyclic_subquotient` by listing elements and cosets."""
    ker = [x for x in range(n) if a_ker * x % n == 0]
    im = sorted({a_im * x % n for x in range(n)})
    if not set(im) <= set(ker):
        raise CohomologyError("image not inside kernel")
    cosets = {frozenset((k + i) % n for i in im) for k in ker}
    # a subgroup of a cyclic group is cyclic, so is the quotient
    return Subquotient(len(ker), len(im), CyclicDecomposition.of(len(cosets)))


# --- diagonal differentials ------------------------------------------------

class DiagonalDifferential:
    """Multiplication by a_i on coordinate i of Z_n^I."""

    def __init__(self, n: int, eigenvalues: Mapping[Hashable, int] | Iterable[int]):
        if n < 2:
            raise CohomologyError("modulus must be at least 2")
        if not isinstance(eigenvalues, Mapping):
            eigenvalues = dict(enumerate(eigenvalues))
        self.n = n
        self.eigenvalues = {i: a % n for i, a in eigenvalues.items()}
        self.index = tuple(self.eigenvalues)
        self.degrees = {}
        for i, a in self.eigenvalues.items():
            prof = nilpotency_profile(a, n)
            if not prof.nilpotent:
                raise CohomologyError(f"eigenvalue {a} at {i!r} is not nilpotent mod {n}")
            self.degrees[i] = prof.degree
        self.order = max(self.degrees.values(), default=1)
        if self.index:
            if any(pow(a, self.order, n) for a in self.eigenvalues.values()):
                raise CohomologyError("d^N is not zero")
            if self.order > 1 and not any(pow(a, self.order - 1, n)
                                          for a in self.eigenvalues.values()):
                raise CohomologyError("d^(N-1) is zero")

    def __repr__(self):
        return f"DiagonalDifferential(n={self.n}, {self.eigenvalues})"

    def apply(self, x: tuple, power: int = 1) -> tuple:
        return tuple(pow(a, power, self.n) * v % self.n
                     for a, v in zip(self.eigenvalues.values(), x))

    def restricted(self, indices: Iterable[Hashable]) -> DiagonalDifferential:
        return DiagonalDifferential(self.n, {i: self.eigenvalues[i] for i in indices})


def amplitude_cohomology(d: DiagonalDifferential, m: int) -> CyclicDecomposition:
    """ker d^m / im d^(N-m) as a sum over coordinates."""
    N = d.order
    if not 1 <= m <= N - 1:
        raise CohomologyError(f"amplitude must satisfy 1 <= m <= {N - 1}")
    out = CyclicDecomposition()
    for a in d.eigenvalues.values():
        out = out + cyclic_subquotient(pow(a, m, d.n), pow(a, N - m, d.n), d.n).quotient
    return out


def ordinary_cohomology(d: DiagonalDifferential) -> CyclicDecomposition:
    """ker d / im d; needs d^2 = 0."""
    if d.order > 2:
        raise CohomologyError("d^2 is not zero")
    out = CyclicDecomposition()
    for a in d.eigenvalues.values():
        out = out + cyclic_subquotient(a, a, d.n).quotient
    return out


# --- enumeration on arbitrary finite abelian groups ------------------------

def _times(add, zero, k: int, x):
    out, base = zero, x
    while k:
        if k & 1:
            out = add(out, base)
        base = add(base, base)
        k >>= 1
    return out


def quotient_decomposition(kernel: list, image: set, add: Callable, zero) -> CyclicDecomposition:
    """Invariant factors of kernel/image, from counting p^j-torsion."""
    if not image <= set(kernel):
        raise CohomologyError("image is not inside the kernel")
    size, rem = divmod(len(kernel), len(image))
    if rem:
        raise CohomologyError("image order does not divide kernel order")
    primary = []
    for p in primefactors(size) if size > 1 else []:
        # |G[p^j]| grows until it reaches the full p-part of |G|
        target = _p_part(size, p)
        counts = [1]
        while counts[-1] < target:
            pj = p ** len(counts)
            counts.append(sum(1 for x in kernel if _times(add, zero, pj, x) in image)
                          // len(image))
        # number of cyclic p-factors of order >= p^j
        ge = [round(log(counts[j] // counts[j - 1], p)) for j in range(1, len(counts))]
        for j in range(len(ge)):
            exact = ge[j] - (ge[j + 1] if j + 1 < len(ge) else 0)
            primary.extend([p ** (j + 1)] * exact)
    return invariant_factors_from_primary(primary)


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def zero_of(M: FinStructure):
    for z in M.universe:
        if M.apply(ADD, (z, z)) == z:
            return z
    raise CohomologyError("fiber has no additive identity")


@dataclass
class ChainCohomology:
    """ker(d^m)/im(d^(N-m)) on one finite abelian group, with explicit classes."""
    structure: FinStructure
    kernel: list
    image: set
    decomposition: CyclicDecomposition
    class_of: dict = field(repr=False, default_factory=dict)

    def classes(self) -> set:
        return set(self.class_of.values())


def chain_cohomology(M: FinStructure, d: Callable, m: int = 1, N: int = 2) -> ChainCohomology:
    if ADD not in M.sig.functions:
        raise CohomologyError("fiber is not an abelian group (no 'add')")
    add = lambda x, y: M.apply(ADD, (x, y))  # noqa: E731
    zero = zero_of(M)

    def power(x, k):
        for _ in range(k):
            x = d(x)
        return x

    kernel = [x for x in M.universe if power(x, m) == zero]
    image = {power(x, N - m) for x in M.universe}
    dec = quotient_decomposition(kernel, image, add, zero)
    pos = {x: i for i, x in enumerate(M.universe)}
    class_of = {}
    for x in kernel:
        if x in class_of:
            continue
        coset = [add(x, i) for i in image]
        rep = min(coset, key=pos.__getitem__)
        for y in coset:
            class_of[y] = rep
    return ChainCohomology(M, kernel, image, dec, class_of)


def brute_force_amplitude(d: DiagonalDifferential, m: int) -> CyclicDecomposition:
    """Enumerate Z_n^I to compute ker d^m / im d^(N-m)."""
    n, N = d.n, d.order
    elems = list(product(range(n), repeat=len(d.index)))
    add = lambda x, y: tuple((a + b) % n for a, b in zip(x, y))  # noqa: E731
    zero = (0,) * len(d.index)
    kernel = [x for x in elems if d.apply(x, m) == zero]
    image = {d.apply(x, N - m) for x in elems}
    return quotient_decomposition(kernel, image, add, zero)


# --- differential presheaves ------------------------------------------------

def zn_structure(n: int) -> FinStructure:
    return FinStructure(RING_SIG, range(n),
                        functions={ADD: lambda a, b: (a + b) % n}, name=f"Z{n}")


class DifferentialPresheaf:
    """A presheaf of abelian groups with an endomorphism d_U of each fiber."""

    def __init__(self, presheaf: Presheaf, d: Mapping[Open, Mapping | Callable],
                 name: str = ""):
        self.presheaf = presheaf
        self.d = {}
        for U in presheaf.topology.nonempty_opens:
            if U not in d:
                raise CohomologyError(f"no differential on {presheaf.topology.fmt(U)}")
            f = d[U]
            self.d[U] = f if isinstance(f, Mapping) else {x: f(x) for x in presheaf.fibers[U].universe}
        self.name = name

    def order(self) -> int | None:
        """Least N with d^N = 0 on every fiber (None if there is none)."""
        worst = 1
        for U, dU in self.d.items():
            M = self.presheaf.fibers[U]
            zero = zero_of(M)
            cur = {x: dU[x] for x in M.universe}
            k = 1
            while any(v != zero for v in cur.values()):
                k += 1
                if k > len(M) + 1:
                    return None
                cur = {x: dU[v] for x, v in cur.items()}
            worst = max(worst, k)
        return worst


def sequence_differential(d: DiagonalDifferential, action=None) -> DifferentialPresheaf:
    """The Z_n sequence sheaf on the index set of d with d acting diagonally."""
    P = sequence_sheaf(zn_structure(d.n), d.index, action)
    pos = {i: k for k, i in enumerate(P.topology.points)}
    maps = {}
    for U in P.topology.nonempty_opens:
        idx = sorted(U, key=pos.__getitem__)
        dU = d.restricted(idx)
        maps[U] = lambda x, dU=dU: dU.apply(x)
    return DifferentialPresheaf(P, maps, name=f"seq(Z{d.n}), d={list(d.eigenvalues.values())}")


def matrix_differential(P: Presheaf, n: int, matrix: list[list[int]]) -> DifferentialPresheaf:
    """d_U(x) = (A . x extended by zero) restricted to U, on a Z_n sequence presheaf."""
    pts = P.topology.points
    pos = {p: k for k, p in enumerate(pts)}
    maps = {}
    for U in P.topology.nonempty_opens:
        idx = sorted(U, key=pos.__getitem__)

        def dU(x, idx=idx):
            full = [0] * len(pts)
            for p, v in zip(idx, x):
                full[pos[p]] = v
            y = [sum(matrix[r][c] * full[c] for c in range(len(pts))) % n for r in range(len(pts))]
            return tuple(y[pos[p]] for p in idx)
        maps[U] = dU
    return DifferentialPresheaf(P, maps)


@dataclass
class DifferentialReport:
    violations: list[str]
    order: int | None


def _generators(M: FinStructure, zero) -> list:
    seen, gens = {zero}, []
    for x in M.universe:
        if x in seen:
            continue
        gens.append(x)
        frontier = list(seen)
        while frontier:
            y = M.apply(ADD, (frontier.pop(), x))
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return gens


def endomorphism_problems(M: FinStructure, dU: Mapping) -> list[str]:
    """Why dU fails to be a transfitted endomorphism of the abelian group M.

    Additivity is tested against a generating set only, which suffices in a
    finite group.
    """
    out = []
    extra = set(M.sig.functions) - {ADD}
    if extra or M.sig.constants:
        flags = classify_morphism(StructMorphism(M, M, dU))
        if not flags.is_morphism:
            out.append("not a morphism")
        elif not flags.is_transfitted:
            out.append("not transfitted")
        return out
    for g in _generators(M, zero_of(M)):
        for x in M.universe:
            if dU[M.apply(ADD, (x, g))] != M.apply(ADD, (dU[x], dU[g])):
                return [f"not additive at {fmt_elem(x)} + {fmt_elem(g)}"]
    for r, ts in M.relations.items():
        image = {tuple(dU[a] for a in t) for t in ts}
        if not image <= ts:
            out.append(f"does not preserve {r}")
        elif any(tuple(dU[a] for a in t) in ts and t not in ts
                 for t in product(M.universe, repeat=M.sig.relations[r])):
            out.append(f"not transfitted for {r}")
    return out


def validate_differential(dp: DifferentialPresheaf) -> DifferentialReport:
    P = dp.presheaf
    T = P.topology
    out = []
    for U, dU in dp.d.items():
        out.extend(f"d on {T.fmt(U)}: {msg}" for msg in endomorphism_problems(P.fibers[U], dU))
    for U in T.nonempty_opens:
        for V in T.opens_within(U):
            if V == U:
                continue
            r = P.rho(V, U)
            for x in P.fibers[U].universe:
                if dp.d[V][r[x]] != r[dp.d[U][x]]:
                    out.append(f"naturality fails on {T.fmt(V)} <= {T.fmt(U)} at {fmt_elem(x)}")
                    break
    N = dp.order()
    if N is None:
        out.append("d is not nilpotent")
    return DifferentialReport(out, N)


# --- generic cohomology ----------------------------------------------------

@dataclass
class GenericDifferential:
    model: object  # forcing.GenericModel
    d: dict


def transport_differential(dp: DifferentialPresheaf, F: OpenFilter, gm=None) -> GenericDifferential:
    from .forcing import generic_model
    gm = gm or generic_model(dp.presheaf, F)
    tab = {}
    for U in F:
        for x in dp.presheaf.fibers[U].universe:
            g = gm.colimit.germ_of(U, x)
            val = gm.colimit.germ_of(U, dp.d[U][x])
            if tab.setdefault(g, val) != val:
                raise CohomologyError(f"d does not commute with germs at {g}")
    return GenericDifferential(gm, tab)


def generic_cohomology(dp: DifferentialPresheaf, F: OpenFilter, m: int | str = "ordinary",
                       gm=None) -> ChainCohomology:
    """ker/im of the germwise differential on the generic model."""
    N = dp.order()
    if N is None:
        raise CohomologyError("d is not nilpotent")
    if m == "ordinary":
        if N > 2:
            raise CohomologyError("d^2 is not zero")
        m, N = 1, 2
    elif not 1 <= m <= N - 1:
        raise CohomologyError(f"amplitude must satisfy 1 <= m <= {N - 1}")
    gd = transport_differential(dp, F, gm)
    return chain_cohomology(gd.model.structure, gd.d.__getitem__, m, N)


@dataclass
class GlobalToGeneric:
    chain_map: StructMorphism
    commutes: bool
    global_cohomology: ChainCohomology
    generic_cohomology: ChainCohomology
    cohomology_map: dict
    well_defined: bool

    @property
    def is_iso(self) -> bool:
        vals = list(self.cohomology_map.values())
        return (self.well_defined and len(set(vals)) == len(vals)
                and set(vals) == self.generic_cohomology.classes())

    @property
    def is_surjective(self) -> bool:
        return set(self.cohomology_map.values()) == self.generic_cohomology.classes()


def global_to_generic_map(dp: DifferentialPresheaf, F: OpenFilter) -> GlobalToGeneric:
    from .forcing import generic_model
    P = dp.presheaf
    X = P.topology.whole
    if X not in F:
        raise CohomologyError("the whole space is not in the filter")
    gm = generic_model(P, F)
    gd = transport_differential(dp, F, gm)
    q = gm.colimit.germ_maps[X]
    commutes = all(q(dp.d[X][x]) == gd.d[q(x)] for x in P.fibers[X].universe)
    if not commutes:
        raise CohomologyError("the germ map at X does not commute with d")
    H = chain_cohomology(P.fibers[X], dp.d[X].__getitem__)
    Hg = chain_cohomology(gm.structure, gd.d.__getitem__)
    cmap: dict = {}
    ok = True
    for x in H.kernel:
        c, img = H.class_of[x], Hg.class_of[q(x)]
        if cmap.setdefault(c, img) != img:
            ok = False
    return GlobalToGeneric(q, commutes, H, Hg, cmap, ok)


def format_table(rows: list[tuple[str, CyclicDecomposition]]) -> str:
    return "\n".join(f"{label}: {dec}" for label, dec in rows)

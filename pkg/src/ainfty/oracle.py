"""Brute-force verifiers, seeded generators and the fixture library.

Generators are deterministic from their seed and built on templates that
make the algebraic laws hold for arbitrary random entries (a two-level
square-zero template: level-1 generators, level-2 tops, products and
differentials land in tops, tops annihilate). The verifiers recompute
everything through code paths independent of the engine's.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .ainfinity import (
    AInfMorphism,
    AInfStructure,
    Family,
    Table,
    conjugate_morphism,
    conjugate_structure,
    identity_family,
    strict_from_linear,
)
from .coeff import KIND_FP, Ring, Scalar
from .dga import StrictDga
from .errors import PreconditionViolated
from .formality import TwistData, twist_diagonal
from .graded import GradedMap, GradedModule, vec_add_into


# ---------------------------------------------------------------------------
# independent Stasheff expansion

def brute_force_stasheff(m: AInfStructure) -> Family:
    """Expand the squared coderivation by direct double summation over all
    splittings r + s + t = k on every word of each arity <= K, with the
    Koszul sign recomputed inline. Must agree with coderivation_square."""
    module = m.module
    names = module.names
    sdeg = {n: module.degree[n] + 1 for n in names}
    out: Family = {}
    for k in range(1, m.K + 1):
        table: Table = {}
        for word in itertools.product(names, repeat=k):
            acc: dict[str, Scalar] = {}
            prefix_parity = 0
            for r in range(k):
                if r > 0:
                    prefix_parity = (prefix_parity + sdeg[word[r - 1]]) & 1
                for s in range(1, k - r + 1):
                    inner = m.component(s).get(word[r:r + s])
                    if not inner:
                        continue
                    rest = word[r + s:]
                    outer_arity = r + 1 + len(rest)
                    outer_table = m.component(outer_arity)
                    if not outer_table:
                        continue
                    for mid, cin in inner.items():
                        outer_vec = outer_table.get(word[:r] + (mid,) + rest)
                        if not outer_vec:
                            continue
                        coeff = -cin if prefix_parity else cin
                        for name, cout in outer_vec.items():
                            vec_add_into(acc, name, coeff * cout)
            if acc:
                table[word] = acc
        if table:
            out[k] = table
    return out


# ---------------------------------------------------------------------------
# seeded generators

def _random_coeff(ring: Ring, rng: random.Random) -> Scalar:
    if ring.kind == KIND_FP:
        return ring.from_int(rng.randint(1, ring.p - 1))
    return ring.from_int(rng.choice([1, -1, 2, -2, 3, -3]))


def random_dga(dim: int, degree_window: tuple[int, int], ring: Ring,
               seed: int, density: float = 0.55) -> StrictDga:
    """Deterministic-from-seed strict dga on the two-level template.

    Products pair level-1 generators into level-2 tops and the differential
    sends generators to tops, so d^2 = 0, associativity and the Leibniz rule
    hold for any choice of entries.
    """
    if dim < 0:
        raise PreconditionViolated("dimension must be nonnegative")
    rng = random.Random(seed)
    if dim == 0:
        module = GradedModule(ring, [])
        return StrictDga(module, GradedMap(module, module, -1), {})
    n_top = max(1, dim // 2)
    tops = [f"t{i}" for i in range(n_top)]
    gens = [f"g{i}" for i in range(dim - n_top)]
    lo, hi = degree_window
    degs = {g: rng.randint(lo, hi) for g in gens}
    for t in tops:
        choices = [degs[a] - 1 for a in gens]
        choices += [degs[a] + degs[b] for a in gens for b in gens]
        degs[t] = rng.choice(choices) if choices else rng.randint(lo, hi)
    module = GradedModule(ring, [(n, degs[n]) for n in gens + tops])
    d = GradedMap(module, module, -1)
    for g in gens:
        for t in tops:
            if degs[t] == degs[g] - 1 and rng.random() < density:
                d.set_entry(g, t, _random_coeff(ring, rng))
    products: dict = {}
    for a in gens:
        for b in gens:
            vec = {}
            for t in tops:
                if degs[t] == degs[a] + degs[b] and rng.random() < density:
                    vec[t] = _random_coeff(ring, rng)
            if vec:
                products[(a, b)] = vec
    return StrictDga(module, d, products)


def random_complex(dim: int, degree_window: tuple[int, int], ring: Ring,
                   seed: int, density: float = 0.6):
    """Seeded chain complex on a source/sink template (d(source) lands in
    sinks, d(sink) = 0, so d^2 = 0 for any entries)."""
    rng = random.Random(seed)
    lo, hi = degree_window
    basis = [(f"e{i}", rng.randint(lo, hi)) for i in range(dim)]
    module = GradedModule(ring, basis)
    is_sink = {n: rng.random() < 0.5 for n, _ in basis}
    d = GradedMap(module, module, -1)
    for n, deg in basis:
        if is_sink[n]:
            continue
        for m, mdeg in basis:
            if m != n and mdeg == deg - 1 and is_sink[m] and rng.random() < density:
                d.set_entry(n, m, _random_coeff(ring, rng))
    from .graded import ChainComplex

    return ChainComplex(module, d)


def random_inf_iso_tables(module: GradedModule, K: int, rng: random.Random,
                          arities: list[int], density: float = 0.35,
                          max_entries_per_arity: int = 8) -> Family:
    """Identity linear part plus random degree-homogeneous components at the
    given arities; any such family is invertible."""
    fam: Family = dict(identity_family(module))
    names = module.names
    sdeg = {n: module.degree[n] + 1 for n in names}
    for k in arities:
        if k < 2 or k > K:
            continue
        candidates = []
        for word in itertools.product(names, repeat=k):
            w = sum(sdeg[x] for x in word)
            for out in names:
                if sdeg[out] == w:
                    candidates.append((word, out))
        rng.shuffle(candidates)
        table: Table = {}
        taken = 0
        for word, out in candidates:
            if taken >= max_entries_per_arity:
                break
            if rng.random() < density:
                table.setdefault(word, {})[out] = _random_coeff(module.ring, rng)
                taken += 1
        if table:
            fam[k] = table
    return fam


@dataclass
class ConjugatedInstance:
    """Formal-by-construction twisting input with known ground truth."""

    structure: AInfStructure          # conjugated, formal by construction
    automorphism: AInfMorphism        # conjugated twisting automorphism
    base: AInfStructure               # the strict structure it is isomorphic to
    conjugator: Family                # the component family used to conjugate


def strict_formal_structure(module: GradedModule, K: int, rng: random.Random,
                            density: float = 0.6) -> AInfStructure:
    """Strict associative product on the module (two-level template with a
    zero differential), as a structure truncated at K."""
    names = module.names
    half = max(1, len(names) // 2)
    gens, tops = names[:len(names) - half], names[len(names) - half:]
    mu2: Table = {}
    for a in gens:
        for b in gens:
            vec = {}
            for t in tops:
                if module.degree[t] == module.degree[a] + module.degree[b]:
                    if rng.random() < density:
                        vec[t] = _random_coeff(module.ring, rng)
            if vec:
                mu2[(a, b)] = vec
    return AInfStructure.from_mu(module, K, {2: mu2} if mu2 else {})


def conjugated_formal_instance(module: GradedModule, twist: TwistData, seed: int,
                               K: int, from_index: int = 1,
                               base: AInfStructure | None = None) -> ConjugatedInstance:
    """Conjugate a strict structure and its strict twisting automorphism by a
    random isomorphism supported in arities {1} and [from_index+1, K].

    The output satisfies the twisting-step preconditions at paper index
    from_index and is formal by construction.
    """
    rng = random.Random(seed)
    if base is None:
        base = strict_formal_structure(module, K, rng)
    sigma = twist_diagonal(module, twist.alpha, twist.c)
    s0 = strict_from_linear(sigma, base, base)
    arities = list(range(from_index + 1, K + 1))
    g = random_inf_iso_tables(module, K, rng, arities)
    m = conjugate_structure(g, base)
    s = conjugate_morphism(g, s0, m, m)
    return ConjugatedInstance(structure=m, automorphism=s, base=base, conjugator=g)


# ---------------------------------------------------------------------------
# fixtures

@dataclass
class Fixture:
    name: str
    dga: StrictDga
    twist: TwistData | None = None
    max_arity: int | None = None
    target_n: int | None = None
    expected: dict = field(default_factory=dict)


def fixture(name: str, ring: Ring | None = None) -> Fixture:
    """Named fixture algebras; expected values are recomputed by the tests,
    the dict only records the pinned conventions (e.g. the Massey sign)."""
    if name == "acyclic2":
        ring = ring or Ring.rationals()
        module = GradedModule(ring, [("v", 1), ("u", 0)])
        d = GradedMap(module, module, -1)
        d.set_entry("v", "u", ring.one())
        return Fixture(name, StrictDga(module, d, {}),
                       expected={"homology_ranks": {}})

    if name == "truncpoly":
        ring = ring or Ring.rationals()
        module = GradedModule(ring, [("x", -2), ("x2", -4), ("x3", -6)])
        one = ring.one()
        products = {
            ("x", "x"): {"x2": one},
            ("x", "x2"): {"x3": one},
            ("x2", "x"): {"x3": one},
        }
        dga = StrictDga(module, GradedMap(module, module, -1), products)
        alpha = ring.from_int(2)
        twist = TwistData(alpha, 2, twist_diagonal(module, alpha, 2))
        return Fixture(name, dga, twist, max_arity=4, target_n=3,
                       expected={"homology_ranks": {-2: 1, -4: 1, -6: 1}})

    if name == "massey5":
        ring = ring or Ring.rationals()
        module = GradedModule(
            ring, [("x", -1), ("y", -1), ("s", -1), ("w", -2), ("r", -2)]
        )
        one = ring.one()
        d = GradedMap(module, module, -1)
        d.set_entry("s", "w", one)
        products = {("x", "y"): {"w": one}, ("s", "y"): {"r": one}}
        dga = StrictDga(module, d, products)
        return Fixture(name, dga, max_arity=5,
                       expected={"homology_ranks": {-1: 2, -2: 1},
                                 "massey_sign": 1})

    if name == "cpn_fp":
        ring = ring or Ring.prime_field(5)
        module = GradedModule(ring, [("x", -2), ("x2", -4)])
        products = {("x", "x"): {"x2": ring.one()}}
        dga = StrictDga(module, GradedMap(module, module, -1), products)
        alpha = ring.from_int(2)
        twist = TwistData(alpha, 2, twist_diagonal(module, alpha, 2))
        return Fixture(name, dga, twist, max_arity=9, target_n=99,
                       expected={"homology_ranks": {-2: 1, -4: 1},
                                 "achieved_n": 3})

    raise PreconditionViolated(f"unknown fixture {name!r}")


def fixture_names() -> list[str]:
    return ["acyclic2", "truncpoly", "massey5", "cpn_fp"]

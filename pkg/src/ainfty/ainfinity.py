"""Arity-truncated tensor-coalgebra calculus for A-infinity structures.

Internally every component family is stored in the shifted (bar) picture:
an arity-k structure component is a degree -1 map on k-fold words of
suspended basis elements, and a morphism component is a degree 0 map. In
this picture the only signs anywhere are Koszul signs picked up when a
degree -1 component moves past the inputs to its left, so the Stasheff
identity, the morphism relation, composition and conjugation all carry no
combinatorial sign factors. The classical operations mu_k (degree k-2) and
f_k (degree k-1) are exposed through the suspension dictionary

    b_k(x_1 .. x_k) = (-1)^{sum_i (k-i) |x_i|} mu_k(x_1 .. x_k)

applied entrywise to the sparse tables (the same dictionary is used for
morphism components).

A component family is a dict {arity: {word: {basis: Scalar}}} with words
being tuples of basis names; zero entries are never stored.
"""

from __future__ import annotations

from .coeff import Scalar
from .errors import (
    NonInvertibleLinearPart,
    PreconditionViolated,
    ShapeMismatch,
)
from .graded import GradedMap, GradedModule, vec_accumulate, vec_add_into

Word = tuple
Table = dict          # Word -> {basis: Scalar}
Family = dict         # arity -> Table


# ---------------------------------------------------------------------------
# suspension bookkeeping

def word_parity(module: GradedModule, word: Word) -> int:
    """Parity of the suspended degree of a word (degrees shifted up by 1)."""
    return sum(module.degree[x] + 1 for x in word) & 1


def word_degree(module: GradedModule, word: Word) -> int:
    return sum(module.degree[x] for x in word)


def suspension_sign(module: GradedModule, word: Word) -> int:
    """+1/-1 dictionary sign between mu_k and its shifted form on this word."""
    k = len(word)
    e = 0
    for i, x in enumerate(word):
        e += (k - 1 - i) * module.degree[x]
    return -1 if e & 1 else 1


def convert_table(module: GradedModule, table: Table) -> Table:
    """Apply the suspension dictionary entrywise (it is an involution)."""
    out: Table = {}
    for word, vec in table.items():
        if suspension_sign(module, word) == 1:
            out[word] = dict(vec)
        else:
            out[word] = {name: -c for name, c in vec.items()}
    return out


def prune_table(table: Table) -> Table:
    return {w: dict(v) for w, v in table.items() if v}


def table_equal(a: Table, b: Table) -> bool:
    return prune_table(a) == prune_table(b)


def family_is_zero(fam: Family) -> bool:
    return all(not table for table in fam.values())


def family_sub(a: Family, b: Family) -> Family:
    out: Family = {}
    for k in set(a) | set(b):
        acc: Table = {}
        for word, vec in a.get(k, {}).items():
            for name, c in vec.items():
                vec_add_into(acc.setdefault(word, {}), name, c)
        for word, vec in b.get(k, {}).items():
            for name, c in vec.items():
                vec_add_into(acc.setdefault(word, {}), name, -c)
        acc = {w: v for w, v in acc.items() if v}
        if acc:
            out[k] = acc
    return out


def identity_family(module: GradedModule) -> Family:
    one = module.ring.one()
    return {1: {(name,): {name: one} for name in module.degree}}


def _output_index(family: Family) -> dict:
    """basis name -> list of (arity, word, coefficient) across the family."""
    index: dict = {}
    for k, table in family.items():
        for word, vec in table.items():
            for name, coeff in vec.items():
                index.setdefault(name, []).append((k, word, coeff))
    return index


# ---------------------------------------------------------------------------
# the two composition workhorses

def compose_even(outer: Family, inner: Family, K: int) -> Family:
    """Corestriction of (coalgebra-extended inner) followed by outer.

    (outer o inner)_k = sum over j and i_1+..+i_j = k of
    outer_j o (inner_{i_1} x .. x inner_{i_j}). All maps are even in the
    shifted picture, so there are no signs.
    """
    index = _output_index(inner)
    result: Family = {}
    for j, table in outer.items():
        for word, out_vec in table.items():
            _expand_slots(word, index, None, None, K, out_vec, result, None)
    return {k: prune_table(t) for k, t in result.items() if t}


def compose_single(outer: Family, evens: Family, inserted: Family, K: int,
                   module: GradedModule, inserted_odd: bool) -> Family:
    """Sum over outer entries with exactly one slot fed by `inserted` and the
    rest by `evens`. When `inserted` is odd (a structure-type component) it
    picks up the Koszul sign of the inputs to its left.
    """
    even_index = _output_index(evens)
    ins_index = _output_index(inserted)
    result: Family = {}
    for j, table in outer.items():
        for word, out_vec in table.items():
            for slot in range(len(word)):
                _expand_slots(
                    word, even_index, slot, ins_index, K, out_vec, result,
                    module if inserted_odd else None,
                )
    return {k: prune_table(t) for k, t in result.items() if t}


def _expand_slots(word, even_index, odd_slot, ins_index, K, out_vec, result, parity_module):
    """Depth-first expansion of slot choices for one outer entry."""
    j = len(word)
    # stack entries: (slot position, accumulated word, coeff, parity bit)
    stack = [(0, (), None, 0)]
    while stack:
        pos, acc, coeff, par = stack.pop()
        if pos == j:
            sign_coeff = coeff
            table = result.setdefault(len(acc), {})
            dest = table.setdefault(acc, {})
            for name, c in out_vec.items():
                vec_add_into(dest, name, sign_coeff * c)
            continue
        source = ins_index if pos == odd_slot else even_index
        choices = source.get(word[pos])
        if not choices:
            continue
        remaining = j - pos - 1
        for arity, sub, c in choices:
            new_len = len(acc) + arity
            if new_len + remaining > K:
                continue
            new_coeff = c if coeff is None else coeff * c
            if pos == odd_slot and parity_module is not None and par:
                new_coeff = -new_coeff
            new_par = par
            if parity_module is not None:
                new_par = (par + word_parity(parity_module, sub)) & 1
            stack.append((pos + 1, acc + sub, new_coeff, new_par))
    return result


# ---------------------------------------------------------------------------
# structures and morphisms

def _validate_family(module: GradedModule, K: int, tables: Family, shift: int, what: str):
    for k, table in tables.items():
        if not (1 <= k <= K):
            raise ShapeMismatch(f"{what} arity {k} outside 1..{K}")
        for word, vec in table.items():
            if len(word) != k:
                raise ShapeMismatch(f"{what} arity {k} keyed by a {len(word)}-word")
            for x in word:
                if x not in module.degree:
                    raise ShapeMismatch(f"unknown basis element {x!r} in {what}")
            wdeg = sum(module.degree[x] + 1 for x in word)
            for name, coeff in vec.items():
                if name not in module.degree:
                    raise ShapeMismatch(f"unknown output element {name!r} in {what}")
                if module.degree[name] + 1 != wdeg + shift:
                    raise ShapeMismatch(
                        f"{what} entry {word} -> {name} breaks degree homogeneity"
                    )
                if coeff.ring != module.ring:
                    raise ShapeMismatch("scalar ring differs from module ring")


class AInfStructure:
    """A-infinity structure on a graded module, truncated at arity K.

    `tables` holds the shifted components; use .mu(k) for the classical
    operations and from_mu() to build from them.
    """

    def __init__(self, module: GradedModule, K: int, tables: Family):
        if K < 2:
            raise ShapeMismatch("truncation arity must be at least 2")
        tables = {k: prune_table(t) for k, t in tables.items()}
        tables = {k: t for k, t in tables.items() if t}
        _validate_family(module, K, tables, shift=-1, what="structure component")
        self.module = module
        self.K = K
        self.tables = tables

    @staticmethod
    def from_mu(module: GradedModule, K: int, mu_tables: Family) -> "AInfStructure":
        shifted = {k: convert_table(module, t) for k, t in mu_tables.items()}
        return AInfStructure(module, K, shifted)

    @staticmethod
    def zero(module: GradedModule, K: int) -> "AInfStructure":
        return AInfStructure(module, K, {})

    def component(self, k: int) -> Table:
        return self.tables.get(k, {})

    def mu(self, k: int) -> Table:
        return convert_table(self.module, self.component(k))

    def mu_value(self, k: int, args: list[dict]) -> dict:
        """Evaluate mu_k multilinearly on sparse vectors over the module."""
        table = self.mu(k)
        out: dict = {}
        def rec(pos, word, coeff):
            if pos == k:
                vec = table.get(word)
                if vec:
                    vec_accumulate(out, vec, coeff)
                return
            for name, c in args[pos].items():
                rec(pos + 1, word + (name,), coeff * c)
        rec(0, (), self.module.ring.one())
        return out

    def support(self) -> list[int]:
        return sorted(k for k, t in self.tables.items() if t)

    def replace(self, tables: Family) -> "AInfStructure":
        return AInfStructure(self.module, self.K, tables)

    def __eq__(self, other):
        return (
            isinstance(other, AInfStructure)
            and self.module == other.module
            and self.K == other.K
            and self.tables == other.tables
        )

    def __repr__(self):
        return f"AInfStructure(K={self.K}, arities {self.support()})"


class AInfMorphism:
    """Morphism of truncated A-infinity structures (same ring, same K)."""

    def __init__(self, source: AInfStructure, target: AInfStructure, tables: Family):
        if source.K != target.K:
            raise ShapeMismatch("morphism endpoints have different truncation arities")
        if source.module.ring != target.module.ring:
            raise ShapeMismatch("morphism endpoints live over different rings")
        tables = {k: prune_table(t) for k, t in tables.items()}
        tables = {k: t for k, t in tables.items() if t}
        self.source = source
        self.target = target
        self.K = source.K
        self.tables = tables
        self._validate()

    def _validate(self):
        src, tgt = self.source.module, self.target.module
        for k, table in self.tables.items():
            if not (1 <= k <= self.K):
                raise ShapeMismatch(f"morphism arity {k} outside 1..{self.K}")
            for word, vec in table.items():
                if len(word) != k:
                    raise ShapeMismatch("morphism table keyed by wrong word length")
                wdeg = 0
                for x in word:
                    if x not in src.degree:
                        raise ShapeMismatch(f"unknown source element {x!r}")
                    wdeg += src.degree[x] + 1
                for name, coeff in vec.items():
                    if name not in tgt.degree:
                        raise ShapeMismatch(f"unknown target element {name!r}")
                    if tgt.degree[name] + 1 != wdeg:
                        raise ShapeMismatch(
                            f"morphism entry {word} -> {name} breaks degree homogeneity"
                        )
                    if coeff.ring != src.ring:
                        raise ShapeMismatch("scalar ring differs from module ring")

    @property
    def ring(self):
        return self.source.module.ring

    @staticmethod
    def from_f(source: AInfStructure, target: AInfStructure, f_tables: Family) -> "AInfMorphism":
        shifted = {k: convert_table(source.module, t) for k, t in f_tables.items()}
        return AInfMorphism(source, target, shifted)

    def component(self, k: int) -> Table:
        return self.tables.get(k, {})

    def f_component(self, k: int) -> Table:
        return convert_table(self.source.module, self.component(k))

    def support(self) -> list[int]:
        return sorted(k for k, t in self.tables.items() if t)

    def linear_map(self) -> GradedMap:
        """The arity 1 component as a degree 0 graded map."""
        m = GradedMap(self.source.module, self.target.module, 0)
        for word, vec in self.component(1).items():
            for name, coeff in vec.items():
                m.set_entry(word[0], name, coeff)
        return m

    def is_strict(self) -> bool:
        return all(k == 1 for k in self.support())

    def __eq__(self, other):
        return (
            isinstance(other, AInfMorphism)
            and self.source == other.source
            and self.target == other.target
            and self.tables == other.tables
        )

    def __repr__(self):
        return f"AInfMorphism(K={self.K}, arities {self.support()})"


def identity_morphism(m: AInfStructure) -> AInfMorphism:
    return AInfMorphism(m, m, identity_family(m.module))


def strict_from_linear(phi: GradedMap, m_src: AInfStructure, m_tgt: AInfStructure) -> AInfMorphism:
    """Morphism with linear part phi and no higher components.

    Validity is not assumed; run morphism_defect to check it.
    """
    if phi.degree != 0:
        raise ShapeMismatch("strict morphisms need a degree 0 linear part")
    if phi.source != m_src.module or phi.target != m_tgt.module:
        raise ShapeMismatch("linear part does not match the structures")
    table: Table = {}
    for src, col in phi.entries.items():
        table[(src,)] = dict(col)
    return AInfMorphism(m_src, m_tgt, {1: table})


# ---------------------------------------------------------------------------
# defects

def coderivation_square(m: AInfStructure) -> Family:
    """Arity-indexed Stasheff defect: corestriction of the squared coderivation.

    The zero family (up to K) is equivalent to m being a valid structure.
    """
    fam = m.tables
    raw = compose_single(fam, identity_family(m.module), fam, m.K, m.module,
                         inserted_odd=True)
    return {k: t for k, t in raw.items() if k <= m.K and t}


def morphism_defect(f: AInfMorphism) -> Family:
    """Corestriction of F M_src - M_tgt F per arity; zero iff f is a morphism."""
    lhs = compose_single(f.tables, identity_family(f.source.module),
                         f.source.tables, f.K, f.source.module, inserted_odd=True)
    rhs = compose_even(f.target.tables, f.tables, f.K)
    diff = family_sub(lhs, rhs)
    return {k: t for k, t in diff.items() if k <= f.K and t}


def is_valid_structure(m: AInfStructure) -> bool:
    return family_is_zero(coderivation_square(m))


def is_valid_morphism(f: AInfMorphism) -> bool:
    return family_is_zero(morphism_defect(f))


# ---------------------------------------------------------------------------
# composition, inversion, conjugation

def compose(g: AInfMorphism, f: AInfMorphism) -> AInfMorphism:
    """g after f, truncated at K; pure convolution, no signs in this picture."""
    if f.target != g.source:
        raise ShapeMismatch("compose: target of f differs from source of g")
    tables = compose_even(g.tables, f.tables, f.K)
    return AInfMorphism(f.source, g.target, tables)


def _linear_inverse_table(f_linear: Table, module_src: GradedModule,
                          module_tgt: GradedModule) -> Table:
    phi = GradedMap(module_src, module_tgt, 0)
    for word, vec in f_linear.items():
        for name, coeff in vec.items():
            phi.set_entry(word[0], name, coeff)
    try:
        inv = phi.inverse()
    except NonInvertibleLinearPart:
        raise
    table: Table = {}
    for src, col in inv.entries.items():
        table[(src,)] = dict(col)
    return table


def precompose_linear(table: Table, linear: Table, result: Family):
    """Accumulate table o (linear x .. x linear) into `result` (no signs)."""
    transpose: dict = {}
    for word, vec in linear.items():
        for name, coeff in vec.items():
            transpose.setdefault(name, []).append((word[0], coeff))
    for word, out_vec in table.items():
        k = len(word)
        def rec(pos, acc, coeff):
            if pos == k:
                dest = result.setdefault(k, {}).setdefault(acc, {})
                for name, c in out_vec.items():
                    vec_add_into(dest, name, coeff * c)
                return
            for u, c in transpose.get(word[pos], ()):  # u is a source basis name
                rec(pos + 1, acc + (u,), coeff * c)
        rec(0, (), table_one_coeff(out_vec))
    return result


def table_one_coeff(vec: dict) -> Scalar:
    some = next(iter(vec.values()))
    return some.ring.one()


def _invert_family(f_tables: Family, src: GradedModule, tgt: GradedModule, K: int) -> Family:
    """Solve g o f = id arity by arity; g then has words over tgt."""
    inv_lin = _linear_inverse_table(f_tables.get(1, {}), src, tgt)
    g_tables: Family = {1: inv_lin}
    for k in range(2, K + 1):
        partial = compose_even(g_tables, f_tables, k)
        delta = partial.get(k)
        if not delta:
            continue
        negated = {w: {n: -c for n, c in vec.items()} for w, vec in delta.items()}
        solved: Family = {}
        precompose_linear(negated, inv_lin, solved)
        gk = prune_table(solved.get(k, {}))
        if gk:
            g_tables[k] = gk
    return g_tables


def invert(f: AInfMorphism) -> AInfMorphism:
    """Two-sided inverse up to arity K, solved arity by arity.

    Requires an invertible linear component.
    """
    g_tables = _invert_family(f.tables, f.source.module, f.target.module, f.K)
    return AInfMorphism(f.target, f.source, g_tables)


def conjugate_structure(f_tables: Family, m: AInfStructure) -> AInfStructure:
    """Structure with coderivation F M F^{-1}, computed arity-wise.

    f_tables are shifted morphism components out of m's module into itself
    with invertible linear part; the result is the unique structure m' whose
    coderivation satisfies M' F = F M.
    """
    module = m.module
    g_tables = _invert_family(f_tables, module, module, m.K)
    psi = compose_even(m.tables, g_tables, m.K)
    raw = compose_single(f_tables, g_tables, psi, m.K, module, inserted_odd=True)
    return AInfStructure(module, m.K, raw)


def conjugate_structure_solved(f_tables: Family, m: AInfStructure) -> AInfStructure:
    """Same structure as conjugate_structure, obtained by solving M' F = F M
    arity by arity instead of expanding the sandwich; used as a second path
    in the test suite.
    """
    module = m.module
    rhs = compose_single(f_tables, identity_family(module), m.tables, m.K,
                         module, inserted_odd=True)
    inv_lin = _linear_inverse_table(f_tables.get(1, {}), module, module)
    bprime: Family = {}
    for k in range(1, m.K + 1):
        acc = compose_even(bprime, f_tables, k) if bprime else {}
        delta_table: Table = {}
        for word, vec in rhs.get(k, {}).items():
            delta_table[word] = dict(vec)
        for word, vec in acc.get(k, {}).items():
            for name, c in vec.items():
                vec_add_into(delta_table.setdefault(word, {}), name, -c)
        delta_table = prune_table(delta_table)
        if not delta_table:
            continue
        solved: Family = {}
        precompose_linear(delta_table, inv_lin, solved)
        bk = prune_table(solved.get(k, {}))
        if bk:
            bprime[k] = bk
    return AInfStructure(module, m.K, bprime)


def conjugate_morphism(f_tables: Family, s: AInfMorphism,
                       new_source: AInfStructure, new_target: AInfStructure) -> AInfMorphism:
    """F S F^{-1} as a morphism between the conjugated structures."""
    module = s.source.module
    g_tables = _invert_family(f_tables, module, module, s.K)
    fs = compose_even(f_tables, s.tables, s.K)
    tables = compose_even(fs, g_tables, s.K)
    return AInfMorphism(new_source, new_target, tables)


def conjugate_structure_fast(f_tables: Family, m: AInfStructure, n: int) -> AInfStructure:
    """Components of F M F^{-1} in arities <= n+2 via the linearized insertions.

    Valid when f is the identity in arity 1 and vanishes in arities 2..n
    (components above n+1 are allowed; they cannot reach these arities), and
    either m has no arity 1 component or f has none in arities n+1, n+2.
    Uses f^{-1}_{n+1} = -f_{n+1}, so no full inversion is performed.
    """
    module = m.module
    if not table_equal(f_tables.get(1, {}), identity_family(module)[1]):
        raise PreconditionViolated("fast conjugation needs identity linear part")
    for k in range(2, n + 1):
        if f_tables.get(k):
            raise PreconditionViolated(f"fast conjugation needs f arity {k} zero")
    if m.tables.get(1) and (f_tables.get(n + 1) or f_tables.get(n + 2)):
        raise PreconditionViolated(
            "fast conjugation needs a zero differential when f has active components"
        )
    K_out = min(m.K, n + 2)
    out: Family = {}
    for k in range(1, min(n + 1, K_out) + 1):
        t = m.component(k)
        if t:
            out[k] = prune_table(t)
    if n + 2 <= K_out:
        acc: Table = {w: dict(v) for w, v in m.component(n + 2).items()}
        fn = f_tables.get(n + 1, {})
        if fn:
            b2 = {2: m.component(2)} if m.component(2) else {}
            neg_fn = {w: {a: -c for a, c in vec.items()} for w, vec in fn.items()}
            if b2:
                term1 = compose_single(b2, identity_family(module), {n + 1: neg_fn},
                                       n + 2, module, inserted_odd=False)
                for word, vec in term1.get(n + 2, {}).items():
                    for name, c in vec.items():
                        vec_add_into(acc.setdefault(word, {}), name, c)
                term3 = compose_single({n + 1: fn}, identity_family(module), b2,
                                       n + 2, module, inserted_odd=True)
                for word, vec in term3.get(n + 2, {}).items():
                    for name, c in vec.items():
                        vec_add_into(acc.setdefault(word, {}), name, c)
        acc = prune_table(acc)
        if acc:
            out[n + 2] = acc
    result = AInfStructure(module, K_out, out)
    return result

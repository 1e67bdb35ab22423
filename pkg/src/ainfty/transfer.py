"""Homotopy transfer along a retraction onto homology.

The transferred operations and the inclusion are evaluated as the classical
sum over planar binary trees (binary product at vertices, homotopy on
internal edges, inclusion at leaves, projection or homotopy at the root),
computed by a shared-subtree convolution so the per-arity cost is the
Catalan recursion rather than a per-tree walk. In the shifted picture the
tree sum carries no signs at all. The projection has no such tree sum here;
it is computed from the perturbation series Pi = P + Pi o (delta o H),
where delta is the product part of the coderivation and H the tensor-trick
extension of the homotopy. Correctness of all three is enforced by exact
relation checks (squared coderivation, morphism defects, Pi after Iota =
identity), not by trusting any transcription.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .ainfinity import (
    AInfMorphism,
    AInfStructure,
    Family,
    Table,
    prune_table,
)
from .errors import PreconditionViolated, ShapeMismatch
from .graded import GradedMap, Retraction, compose_map, scale_map, vec_add_into


# ---------------------------------------------------------------------------
# planar binary trees

@dataclass(frozen=True)
class PlanarBinaryTree:
    """Full binary planar tree; leaves carry no data."""

    left: "PlanarBinaryTree | None" = None
    right: "PlanarBinaryTree | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaves + self.right.leaves

    def __repr__(self):
        if self.is_leaf:
            return "*"
        return f"({self.left!r}{self.right!r})"


LEAF = PlanarBinaryTree()


@lru_cache(maxsize=None)
def _trees(k: int) -> tuple:
    if k == 1:
        return (LEAF,)
    out = []
    for a in range(1, k):
        for left in _trees(a):
            for right in _trees(k - a):
                out.append(PlanarBinaryTree(left, right))
    return tuple(out)


def planar_trees(k: int) -> list[PlanarBinaryTree]:
    """All planar binary trees with k >= 2 leaves, in a fixed order
    (left subtree size ascending, recursively)."""
    if k < 2:
        raise PreconditionViolated("planar trees need at least 2 leaves")
    return list(_trees(k))


# ---------------------------------------------------------------------------
# tree-sum evaluation

def _linear_table(m: GradedMap) -> Table:
    return {(src,): dict(col) for src, col in m.entries.items()}


def _series_homotopy(r: Retraction) -> GradedMap:
    """The homotopy as consumed by the transfer recursions.

    The retraction carries dh + hd = id - ip, while the shifted-picture
    perturbation expansions need the opposite orientation; the negation is
    applied here once so every formula below is sign-free per tree.
    """
    return scale_map(r.homotopy, -r.complex.ring.one())


def _apply_linear(gm: GradedMap, table: Table) -> Table:
    out: Table = {}
    for word, vec in table.items():
        applied = gm.apply(vec)
        if applied:
            out[word] = applied
    return out


def _vertex_join(b2: Table, left: Table, right: Table) -> Table:
    """b2 o (left x right) on concatenated words; even factors, no signs."""
    out: Table = {}
    for uw, uv in left.items():
        for vw, vv in right.items():
            word = uw + vw
            for xa, ca in uv.items():
                for xb, cb in vv.items():
                    vec = b2.get((xa, xb))
                    if vec:
                        dest = out.setdefault(word, {})
                        c = ca * cb
                        for name, coeff in vec.items():
                            vec_add_into(dest, name, c * coeff)
    return prune_table(out)


def _check_transfer_input(A: AInfStructure, r: Retraction):
    if A.module != r.complex.module:
        raise ShapeMismatch("structure and retraction live on different modules")
    if any(k >= 3 for k in A.support()):
        raise PreconditionViolated("transfer input must be a strict dga")
    d_table = A.mu(1)
    for word, vec in d_table.items():
        if r.complex.d.column(word[0]) != vec:
            raise PreconditionViolated(
                "structure differential differs from the complex differential"
            )


class _TreeSums:
    """Shared-subtree tables E_k = sum over trees with k leaves of the tree
    operation (homotopy applied on internal edges, inclusion at leaves)."""

    def __init__(self, A: AInfStructure, r: Retraction, K: int):
        self.b2 = A.component(2)
        self.h = _series_homotopy(r)
        self.i_table = _linear_table(r.include)
        self.K = K
        self._E: dict[int, Table] = {1: self.i_table}
        self._wrapped: dict[int, Table] = {1: self.i_table}

    def E(self, k: int) -> Table:
        if k not in self._E:
            acc: Table = {}
            for a in range(1, k):
                joined = _vertex_join(self.b2, self.wrapped(a), self.wrapped(k - a))
                for word, vec in joined.items():
                    dest = acc.setdefault(word, {})
                    for name, c in vec.items():
                        vec_add_into(dest, name, c)
            self._E[k] = prune_table(acc)
        return self._E[k]

    def wrapped(self, k: int) -> Table:
        if k not in self._wrapped:
            self._wrapped[k] = _apply_linear(self.h, self.E(k))
        return self._wrapped[k]


def evaluate_tree(tree: PlanarBinaryTree, A: AInfStructure, r: Retraction) -> Table:
    """Single-tree operation table (leaves: inclusion; internal edges:
    homotopy; no root decoration). Used as the slow per-tree oracle."""
    if tree.is_leaf:
        return _linear_table(r.include)
    h = _series_homotopy(r)
    left = evaluate_tree(tree.left, A, r)
    if not tree.left.is_leaf:
        left = _apply_linear(h, left)
    right = evaluate_tree(tree.right, A, r)
    if not tree.right.is_leaf:
        right = _apply_linear(h, right)
    return _vertex_join(A.component(2), left, right)


def transfer_structure(A: AInfStructure, r: Retraction, K: int) -> AInfStructure:
    """Transferred structure on homology: root-projected tree sums.

    mu^t_1 = 0, mu^t_2 = p mu_2 (i x i), higher arities are the planar tree
    sums; the squared coderivation of the output vanishes up to K.
    """
    _check_transfer_input(A, r)
    sums = _TreeSums(A, r, K)
    tables: Family = {}
    for k in range(2, K + 1):
        t = _apply_linear(r.project, sums.E(k))
        if t:
            tables[k] = t
    return AInfStructure(r.homology, K, tables)


def transfer_inclusion(A: AInfStructure, r: Retraction, K: int,
                       target: AInfStructure | None = None) -> AInfMorphism:
    """Quasi-isomorphism from the transferred structure into A: the tree sum
    with the homotopy at the root edge and the inclusion in arity 1."""
    _check_transfer_input(A, r)
    transferred = target if target is not None else transfer_structure(A, r, K)
    sums = _TreeSums(A, r, K)
    tables: Family = {1: _linear_table(r.include)}
    for k in range(2, K + 1):
        t = sums.wrapped(k)
        if t:
            tables[k] = t
    return AInfMorphism(transferred, A, tables)


def transfer_projection(A: AInfStructure, r: Retraction, K: int,
                        source: AInfStructure | None = None) -> AInfMorphism:
    """Quasi-inverse projection onto the transferred structure.

    Computed by the perturbation series recursion pi_k = pi_{k-1} o (delta o H)
    with entries generated in reverse through output indexes of the product,
    the homotopy and the inclusion-projection composite.
    """
    _check_transfer_input(A, r)
    transferred = source if source is not None else transfer_structure(A, r, K)
    module = A.module
    sdeg = {name: module.degree[name] + 1 for name in module.degree}

    b2 = A.component(2)
    t2: dict = {}
    for pair, vec in b2.items():
        for name, coeff in vec.items():
            t2.setdefault(name, []).append((pair, coeff))
    ip = compose_map(r.include, r.project)
    tip: dict = {}
    for src, col in ip.entries.items():
        for name, coeff in col.items():
            tip.setdefault(name, []).append((src, coeff))
    th: dict = {}
    for src, col in _series_homotopy(r).entries.items():
        for name, coeff in col.items():
            th.setdefault(name, []).append((src, coeff))

    tables: Family = {1: _linear_table(r.project)}
    prev: Table = tables[1]
    for k in range(2, K + 1):
        cur: Table = {}
        for v, val_vec in prev.items():
            for m in range(len(v)):
                par_delta = sum(sdeg[x] for x in v[:m]) & 1
                for (pair, c2) in t2.get(v[m], ()):  # w = pre-delta word
                    w = v[:m] + pair + v[m + 1:]
                    base = -c2 if par_delta else c2
                    for j in range(len(w)):
                        for (uj, ch) in th.get(w[j], ()):  # homotopy slot
                            _expand_ip_prefix(
                                w, j, uj, ch * base, tip, sdeg, val_vec, cur
                            )
        cur = prune_table(cur)
        if cur:
            tables[k] = cur
        prev = cur
    return AInfMorphism(A, transferred, tables)


def _expand_ip_prefix(w, j, uj, coeff, tip, sdeg, val_vec, cur):
    """Enumerate preimages of w under the tensor-trick homotopy term with the
    homotopy at slot j, accumulating coefficient * val_vec at each preimage."""
    suffix = w[j + 1:]
    stack = [(0, (), coeff, 0)]
    while stack:
        pos, acc, c, par = stack.pop()
        if pos == j:
            # sign of the homotopy moving past the first j (suspended) inputs
            if par & 1:
                c = -c
            word = acc + (uj,) + suffix
            dest = cur.setdefault(word, {})
            for name, cv in val_vec.items():
                vec_add_into(dest, name, c * cv)
            continue
        for (u, cip) in tip.get(w[pos], ()):
            stack.append((pos + 1, acc + (u,), c * cip, (par + sdeg[u]) & 1))
    return cur


def transfer_structure_by_trees(A: AInfStructure, r: Retraction, K: int) -> AInfStructure:
    """Literal per-tree evaluation of the transferred structure (slow path,
    kept as the independent oracle for the convolution)."""
    _check_transfer_input(A, r)
    tables: Family = {}
    for k in range(2, K + 1):
        acc: Table = {}
        for tree in planar_trees(k):
            t = _apply_linear(r.project, evaluate_tree(tree, A, r))
            for word, vec in t.items():
                dest = acc.setdefault(word, {})
                for name, c in vec.items():
                    vec_add_into(dest, name, c)
        acc = prune_table(acc)
        if acc:
            tables[k] = acc
    return AInfStructure(r.homology, K, tables)


def default_truncation(module, cap: int = 64) -> int | None:
    """Smallest sound truncation arity forced by the degree support, or None
    when the grading does not force vanishing within the probe cap."""
    degrees = module.degrees_occupied()
    if not degrees:
        return 2
    lo, hi = min(degrees), max(degrees)

    def feasible(k: int) -> bool:
        # an arity-k operation could land in the support: interval test
        return k * lo + k - 2 <= hi and k * hi + k - 2 >= lo

    best = 2
    for k in range(3, cap + 1):
        if feasible(k):
            best = k
    if best == cap or feasible(cap):
        return None
    # the interval endpoints are affine in k; certify the tail stays infeasible
    if lo + 1 > 0 and cap * lo + cap - 2 > hi:
        return best
    if hi + 1 < 0 and cap * hi + cap - 2 < lo:
        return best
    return None

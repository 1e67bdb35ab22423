"""Strict differential graded algebras given by sparse product tables."""

from __future__ import annotations

from .ainfinity import AInfStructure
from .coeff import Scalar
from .errors import ShapeMismatch
from .graded import (
    ChainComplex,
    GradedMap,
    GradedModule,
    compose_map,
    vec_accumulate,
)


class StrictDga:
    """Free graded module with a degree -1 differential and a bilinear product.

    The product is stored sparsely as (left, right) basis pairs mapping to
    output vectors; left/right order is significant. Degree additivity is
    enforced at construction; d^2 = 0, the Leibniz rule and associativity
    are checked by the verifier methods (and by ChainComplex construction).
    """

    def __init__(self, module: GradedModule, d: GradedMap,
                 products: dict[tuple[str, str], dict[str, Scalar]]):
        if d.source != module or d.target != module or d.degree != -1:
            raise ShapeMismatch("differential must be a degree -1 endomorphism")
        self.module = module
        self.d = d
        self.products = {}
        for (a, b), vec in products.items():
            if a not in module.degree or b not in module.degree:
                raise ShapeMismatch(f"product on unknown basis pair ({a!r}, {b!r})")
            vec = {n: c for n, c in vec.items() if not c.is_zero()}
            for n, c in vec.items():
                if n not in module.degree:
                    raise ShapeMismatch(f"product output {n!r} unknown")
                if module.degree[n] != module.degree[a] + module.degree[b]:
                    raise ShapeMismatch(
                        f"product ({a},{b}) -> {n} is not degree-additive"
                    )
            if vec:
                self.products[(a, b)] = vec

    @property
    def ring(self):
        return self.module.ring

    def complex(self) -> ChainComplex:
        return ChainComplex(self.module, self.d)

    def multiply(self, u: dict, v: dict) -> dict:
        """Bilinear extension of the product table to sparse vectors."""
        out: dict = {}
        for a, ca in u.items():
            for b, cb in v.items():
                vec = self.products.get((a, b))
                if vec:
                    vec_accumulate(out, vec, ca * cb)
        return out

    def check_d_squared(self) -> bool:
        return compose_map(self.d, self.d).is_zero()

    def check_associativity(self) -> list[tuple[str, str, str]]:
        """Triples (a, b, c) where (ab)c != a(bc); empty means associative."""
        bad = []
        names = self.module.names
        for a in names:
            for b in names:
                ab = self.products.get((a, b), {})
                for c in names:
                    bc = self.products.get((b, c), {})
                    lhs = self.multiply(ab, {c: self.ring.one()})
                    rhs = self.multiply({a: self.ring.one()}, bc)
                    if lhs != rhs:
                        bad.append((a, b, c))
        return bad

    def check_leibniz(self) -> list[tuple[str, str]]:
        """Pairs where d(ab) != (da)b + (-1)^|a| a(db); empty means it holds."""
        bad = []
        one = self.ring.one()
        for a, adeg in self.module.basis:
            da = self.d.column(a)
            sign = -one if adeg & 1 else one
            for b, _ in self.module.basis:
                db = self.d.column(b)
                lhs = self.d.apply(self.products.get((a, b), {}))
                rhs = self.multiply(da, {b: one})
                for n, c in self.multiply({a: one}, db).items():
                    vec_accumulate(rhs, {n: c}, sign)
                if lhs != rhs:
                    bad.append((a, b))
        return bad

    def check_endomorphism(self, endo: GradedMap) -> dict[str, bool]:
        """Chain-map and multiplicativity checks for a degree 0 endomorphism."""
        chain_ok = compose_map(endo, self.d) == compose_map(self.d, endo)
        mult_ok = True
        for a in self.module.names:
            for b in self.module.names:
                lhs = endo.apply(self.products.get((a, b), {}))
                rhs = self.multiply(endo.column(a), endo.column(b))
                if lhs != rhs:
                    mult_ok = False
                    break
            if not mult_ok:
                break
        return {"chain_map": chain_ok, "multiplicative": mult_ok}

    def to_structure(self, K: int) -> AInfStructure:
        """The dga as an A-infinity structure (components in arities 1 and 2)."""
        d_table = {(src,): dict(col) for src, col in self.d.entries.items()}
        mu2 = {pair: dict(vec) for pair, vec in self.products.items()}
        return AInfStructure.from_mu(self.module, K, {1: d_table, 2: mu2})

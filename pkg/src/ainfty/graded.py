"""Finitely generated free graded modules, chain complexes and retractions.

Grading is homological throughout: the differential has degree -1, cochain
algebras are encoded in nonpositive degrees. The homology splitting follows
the boundary/cycle/complement decomposition A_n = B_n + L_n + C_n, which
makes every retraction side condition hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coeff import KIND_ZLOC, Ring, Scalar
from .errors import NonFreeHomology, NonInvertibleLinearPart, NotAComplex, ShapeMismatch

# ---------------------------------------------------------------------------
# sparse vectors: dict basis-name -> nonzero Scalar


def vec_add_into(acc: dict, key, coeff: Scalar):
    """acc[key] += coeff, dropping the entry when it cancels to zero."""
    cur = acc.get(key)
    if cur is None:
        if not coeff.is_zero():
            acc[key] = coeff
        return
    new = cur + coeff
    if new.is_zero():
        del acc[key]
    else:
        acc[key] = new


def vec_accumulate(acc: dict, vec: dict, coeff: Scalar):
    if coeff.is_zero():
        return
    for key, val in vec.items():
        vec_add_into(acc, key, coeff * val)


def vec_scale(vec: dict, coeff: Scalar) -> dict:
    if coeff.is_zero():
        return {}
    return {k: coeff * v for k, v in vec.items()}


class GradedModule:
    """Free graded module with a finite ordered basis of named generators."""

    def __init__(self, ring: Ring, basis: list[tuple[str, int]]):
        names = [name for name, _ in basis]
        if len(set(names)) != len(names):
            raise ShapeMismatch("basis names must be unique")
        self.ring = ring
        self.basis = tuple((str(n), int(d)) for n, d in basis)
        self.degree = {n: d for n, d in self.basis}
        self.index = {n: i for i, (n, _) in enumerate(self.basis)}
        self._by_degree: dict[int, list[str]] = {}
        for n, d in self.basis:
            self._by_degree.setdefault(d, []).append(n)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.basis]

    def rank(self) -> int:
        return len(self.basis)

    def basis_at(self, degree: int) -> list[str]:
        return list(self._by_degree.get(degree, []))

    def degrees_occupied(self) -> list[int]:
        return sorted(self._by_degree)

    def __eq__(self, other):
        return (
            isinstance(other, GradedModule)
            and self.ring == other.ring
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ring, self.basis))

    def __repr__(self):
        return f"GradedModule({self.ring}, rank {len(self.basis)})"


class GradedMap:
    """Degree-homogeneous linear map, stored column-sparse by source basis name."""

    def __init__(self, source: GradedModule, target: GradedModule, degree: int,
                 entries: dict[str, dict[str, Scalar]] | None = None):
        if source.ring != target.ring:
            raise ShapeMismatch("source and target rings differ")
        self.source = source
        self.target = target
        self.degree = degree
        self.entries: dict[str, dict[str, Scalar]] = {}
        if entries:
            for src, col in entries.items():
                for tgt, coeff in col.items():
                    self.set_entry(src, tgt, coeff)

    def set_entry(self, src: str, tgt: str, coeff: Scalar):
        if src not in self.source.degree:
            raise ShapeMismatch(f"unknown source basis element {src!r}")
        if tgt not in self.target.degree:
            raise ShapeMismatch(f"unknown target basis element {tgt!r}")
        if self.target.degree[tgt] != self.source.degree[src] + self.degree:
            raise ShapeMismatch(
                f"entry {src!r} -> {tgt!r} breaks degree {self.degree} homogeneity"
            )
        if coeff.is_zero():
            self.entries.get(src, {}).pop(tgt, None)
        else:
            self.entries.setdefault(src, {})[tgt] = coeff
        if src in self.entries and not self.entries[src]:
            del self.entries[src]

    def column(self, src: str) -> dict[str, Scalar]:
        return dict(self.entries.get(src, {}))

    def apply(self, vec: dict[str, Scalar]) -> dict[str, Scalar]:
        out: dict[str, Scalar] = {}
        for src, coeff in vec.items():
            col = self.entries.get(src)
            if col:
                vec_accumulate(out, col, coeff)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, GradedMap)
            and self.source == other.source
            and self.target == other.target
            and self.degree == other.degree
            and self.entries == other.entries
        )

    def __repr__(self):
        n = sum(len(c) for c in self.entries.values())
        return f"GradedMap(degree {self.degree}, {n} entries)"

    def matrix_at(self, degree: int) -> list[list[Scalar]]:
        """Dense matrix of the block from source degree n to target degree n+r."""
        zero = self.source.ring.zero()
        rows = self.target.basis_at(degree + self.degree)
        cols = self.source.basis_at(degree)
        mat = [[zero for _ in cols] for _ in rows]
        ridx = {n: i for i, n in enumerate(rows)}
        for j, src in enumerate(cols):
            for tgt, coeff in self.entries.get(src, {}).items():
                mat[ridx[tgt]][j] = coeff
        return mat

    def inverse(self) -> "GradedMap":
        """Exact inverse of a degree 0 map; NonInvertibleLinearPart on failure."""
        if self.degree != 0:
            raise NonInvertibleLinearPart("only degree 0 maps can be inverted")
        inv = GradedMap(self.target, self.source, 0)
        ring = self.source.ring
        degrees = set(self.source.degrees_occupied()) | set(self.target.degrees_occupied())
        for n in sorted(degrees):
            srcs = self.source.basis_at(n)
            tgts = self.target.basis_at(n)
            if len(srcs) != len(tgts):
                raise NonInvertibleLinearPart(f"rank mismatch in degree {n}")
            if not srcs:
                continue
            tidx = {t: k for k, t in enumerate(tgts)}
            cols = []
            for s in srcs:
                cols.append({tidx[t]: c for t, c in self.entries.get(s, {}).items()})
            try:
                red = column_reduce(cols, ring, require_unit_pivots=True)
            except NonFreeHomology:
                raise NonInvertibleLinearPart(f"non-unit pivot in degree {n}")
            if red.rank != len(srcs):
                raise NonInvertibleLinearPart(f"singular block in degree {n}")
            # the fully reduced pivot column j equals e_{row}, so column `row`
            # of the inverse matrix is the tracked source combination
            for (row, _), track in zip(red.pivots, red.pivot_tracks):
                for src_i, coeff in track.items():
                    inv.set_entry(tgts[row], srcs[src_i], coeff)
        return inv


def identity_map(module: GradedModule) -> GradedMap:
    m = GradedMap(module, module, 0)
    one = module.ring.one()
    for name in module.degree:
        m.set_entry(name, name, one)
    return m


def zero_map(source: GradedModule, target: GradedModule, degree: int) -> GradedMap:
    return GradedMap(source, target, degree)


def compose_map(g: GradedMap, f: GradedMap) -> GradedMap:
    """g after f; degrees add."""
    if f.target != g.source:
        raise ShapeMismatch("compose_map: inner target differs from outer source")
    out = GradedMap(f.source, g.target, f.degree + g.degree)
    for src, col in f.entries.items():
        acc: dict[str, Scalar] = {}
        for mid, coeff in col.items():
            gcol = g.entries.get(mid)
            if gcol:
                vec_accumulate(acc, gcol, coeff)
        for tgt, coeff in acc.items():
            out.set_entry(src, tgt, coeff)
    return out


def add_map(f: GradedMap, g: GradedMap) -> GradedMap:
    if f.source != g.source or f.target != g.target or f.degree != g.degree:
        raise ShapeMismatch("add_map: shapes differ")
    out = GradedMap(f.source, f.target, f.degree)
    acc: dict[str, dict[str, Scalar]] = {}
    for m in (f, g):
        for src, col in m.entries.items():
            dst = acc.setdefault(src, {})
            for tgt, coeff in col.items():
                vec_add_into(dst, tgt, coeff)
    for src, col in acc.items():
        for tgt, coeff in col.items():
            out.set_entry(src, tgt, coeff)
    return out


def scale_map(f: GradedMap, coeff: Scalar) -> GradedMap:
    out = GradedMap(f.source, f.target, f.degree)
    if coeff.is_zero():
        return out
    for src, col in f.entries.items():
        for tgt, val in col.items():
            out.set_entry(src, tgt, coeff * val)
    return out


def sub_map(f: GradedMap, g: GradedMap) -> GradedMap:
    ring = f.source.ring
    return add_map(f, scale_map(g, -ring.one()))


# ---------------------------------------------------------------------------
# exact column reduction with valuation pivoting


@dataclass
class ColumnReduction:
    """Result of column-reducing a matrix over Q, F_p or Z_(p).

    pivots: (row, original column) per pivot, in pivot order.
    pivot_columns: fully reduced columns; pivot entry normalized to 1.
    pivot_tracks: the source combination producing each pivot column.
    kernel_tracks: source combinations spanning the kernel.
    """

    pivots: list[tuple[int, int]] = field(default_factory=list)
    pivot_columns: list[dict[int, Scalar]] = field(default_factory=list)
    pivot_tracks: list[dict[int, Scalar]] = field(default_factory=list)
    kernel_tracks: list[dict[int, Scalar]] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _valuation(ring: Ring, coeff: Scalar) -> int:
    if ring.kind == KIND_ZLOC:
        return coeff.valuation()
    return 0


def column_reduce(columns: list[dict[int, Scalar]], ring: Ring,
                  require_unit_pivots: bool = False) -> ColumnReduction:
    """Greedy column reduction pivoting on a minimum-valuation entry.

    Over Z_(p) the pivot realizes the global minimum valuation of the active
    submatrix, so all eliminations stay in the ring and the pivot valuations
    are the invariant factors; a positive-valuation pivot therefore means the
    cokernel has torsion (NonFreeHomology when require_unit_pivots is set).
    Ties are broken by scan order (column, then row), so the reduction is
    deterministic in the basis order.
    """
    cols = [dict(c) for c in columns]
    tracks: list[dict[int, Scalar]] = [{j: ring.one()} for j in range(len(cols))]
    active = list(range(len(cols)))
    res = ColumnReduction()
    while True:
        best = None  # (valuation, position among active, row)
        for pos, j in enumerate(active):
            for row, coeff in cols[j].items():
                key = (_valuation(ring, coeff), pos, row)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        val, pos, row = best
        if require_unit_pivots and val > 0:
            raise NonFreeHomology(
                f"non-unit pivot of valuation {val} (torsion over {ring})"
            )
        j = active.pop(pos)
        inv = cols[j][row].inv() if val == 0 else None
        if inv is not None:
            cols[j] = {r: inv * c for r, c in cols[j].items()}
            tracks[j] = {r: inv * c for r, c in tracks[j].items()}
        pivot = cols[j][row]
        # eliminate the pivot row from every other column, keeping earlier
        # pivot columns fully reduced as well
        targets = [(cols[k], tracks[k]) for k in active]
        targets += list(zip(res.pivot_columns, res.pivot_tracks))
        for ocol, otrack in targets:
            entry = ocol.get(row)
            if entry is None:
                continue
            factor = entry if inv is not None else entry * pivot.inv()
            for r, c in cols[j].items():
                vec_add_into(ocol, r, -(factor * c))
            for r, c in tracks[j].items():
                vec_add_into(otrack, r, -(factor * c))
        res.pivots.append((row, j))
        res.pivot_columns.append(cols[j])
        res.pivot_tracks.append(tracks[j])
    for j in active:
        if cols[j]:
            raise AssertionError("column reduction left a nonzero column")
        res.kernel_tracks.append(tracks[j])
    return res


# ---------------------------------------------------------------------------
# chain complexes and retractions


class ChainComplex:
    """Graded module with a degree -1 differential squaring to zero."""

    def __init__(self, module: GradedModule, d: GradedMap):
        if d.source != module or d.target != module:
            raise ShapeMismatch("differential must be an endomorphism of the module")
        if d.degree != -1:
            raise ShapeMismatch("differential must have degree -1")
        self.module = module
        self.d = d
        if not compose_map(d, d).is_zero():
            raise NotAComplex("d o d != 0")

    @property
    def ring(self) -> Ring:
        return self.module.ring


@dataclass
class Retraction:
    """Splitting of a complex onto its homology: p i = id, dh + hd = id - ip."""

    complex: ChainComplex
    homology: GradedModule
    include: GradedMap   # H -> A, degree 0
    project: GradedMap   # A -> H, degree 0
    homotopy: GradedMap  # A -> A, degree +1


@dataclass
class RetractionReport:
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


def verify_retraction(r: Retraction) -> RetractionReport:
    """Check all five retraction identities exactly; failures are reported, not raised."""
    A = r.complex.module
    H = r.homology
    d, i, p, h = r.complex.d, r.include, r.project, r.homotopy
    checks = {}
    checks["p_after_i_is_identity"] = compose_map(p, i) == identity_map(H)
    lhs = add_map(compose_map(d, h), compose_map(h, d))
    rhs = sub_map(identity_map(A), compose_map(i, p))
    checks["homotopy_identity"] = lhs == rhs
    checks["h_after_i_zero"] = compose_map(h, i).is_zero()
    checks["p_after_h_zero"] = compose_map(p, h).is_zero()
    checks["h_after_h_zero"] = compose_map(h, h).is_zero()
    return RetractionReport(checks)


def homology_name(degree: int, index: int) -> str:
    return f"H{degree}_{index}"


def homology_with_retraction(A: ChainComplex) -> Retraction:
    """Free homology of A with an explicit splitting (i, p, h).

    Per degree, a basis of boundaries is extended to the cycles and then to
    the whole degree; h inverts d from the boundary summand into the chosen
    complement and vanishes elsewhere, which forces all side conditions.
    Raises NonFreeHomology over Z_(p) when a boundary matrix has a non-unit
    invariant factor.
    """
    module = A.module
    ring = module.ring
    degrees = module.degrees_occupied()

    # column-reduce every boundary block d: A_n -> A_{n-1}
    reductions: dict[int, ColumnReduction] = {}
    for n in degrees:
        rows = module.basis_at(n - 1)
        ridx = {name: k for k, name in enumerate(rows)}
        cols = []
        for src in module.basis_at(n):
            col = A.d.entries.get(src, {})
            cols.append({ridx[t]: c for t, c in col.items()})
        reductions[n] = column_reduce(cols, ring, require_unit_pivots=True)

    h_names: list[tuple[str, int]] = []
    include_cols: dict[str, dict[str, Scalar]] = {}
    project_rows: dict[str, dict[str, Scalar]] = {}
    homotopy_cols: dict[str, dict[str, Scalar]] = {}

    for n in degrees:
        names = module.basis_at(n)
        dim = len(names)
        red_next = reductions.get(n + 1)
        red_this = reductions[n]

        pivot_rows: list[int] = []
        pivot_vecs: list[dict[int, Scalar]] = []
        preimages: list[dict[int, Scalar]] = []
        if red_next is not None:
            for (row, _), col, track in zip(
                red_next.pivots, red_next.pivot_columns, red_next.pivot_tracks
            ):
                pivot_rows.append(row)
                pivot_vecs.append(dict(col))
                preimages.append(track)
        n_boundaries = len(pivot_vecs)

        # extend the boundary basis by cycles; a reduced cycle column over
        # Z_(p) can be divisible by p, and its primitive multiple (still a
        # cycle) is used instead
        lifts: list[dict[int, Scalar]] = []
        for track in red_this.kernel_tracks:
            vec = dict(track)
            _reduce_against(pivot_vecs, pivot_rows, vec)
            if not vec:
                continue
            vec = _strip_p_powers(vec, ring)
            row = _leading_unit_row(vec, ring)
            inv = vec[row].inv()
            vec = {r: inv * c for r, c in vec.items()}
            pivot_rows.append(row)
            pivot_vecs.append(vec)
            lifts.append(vec)

        complement = list(red_this.pivot_tracks)
        t_cols = pivot_vecs + complement
        if len(t_cols) != dim:
            raise AssertionError("boundary/cycle/complement ranks do not add up")
        red_T = column_reduce(t_cols, ring, require_unit_pivots=True)
        if red_T.rank != dim:
            raise AssertionError("degreewise change of basis is singular")
        # column `row` of T^{-1} is the tracked combination for pivot `row`
        t_inv: list[dict[int, Scalar]] = [dict() for _ in range(dim)]  # ambient -> T coords
        for (row, _), track in zip(red_T.pivots, red_T.pivot_tracks):
            for k, coeff in track.items():
                t_inv[row][k] = coeff

        for idx, lift in enumerate(lifts):
            hname = homology_name(n, idx)
            h_names.append((hname, n))
            include_cols[hname] = {names[r]: c for r, c in lift.items()}

        up_names = module.basis_at(n + 1)
        for j, name in enumerate(names):
            coords = t_inv[j]
            proj: dict[str, Scalar] = {}
            for idx in range(len(lifts)):
                coeff = coords.get(n_boundaries + idx)
                if coeff:
                    proj[homology_name(n, idx)] = coeff
            if proj:
                project_rows[name] = proj
            hacc: dict[str, Scalar] = {}
            for bidx in range(n_boundaries):
                coeff = coords.get(bidx)
                if coeff:
                    for k, c in preimages[bidx].items():
                        vec_add_into(hacc, up_names[k], coeff * c)
            if hacc:
                homotopy_cols[name] = hacc

    H = GradedModule(ring, h_names)
    include = GradedMap(H, module, 0, include_cols)
    project = GradedMap(module, H, 0, project_rows)
    homotopy = GradedMap(module, module, 1, homotopy_cols)
    return Retraction(A, H, include, project, homotopy)


def _leading_unit_row(vec: dict[int, Scalar], ring: Ring) -> int:
    if ring.kind == KIND_ZLOC:
        row = min(vec, key=lambda r: (vec[r].valuation(), r))
        if vec[row].valuation() > 0:
            raise NonFreeHomology("homology lift has no unit coordinate")
        return row
    return min(vec)


def _reduce_against(pivot_vecs, pivot_rows, vec: dict[int, Scalar]):
    for pvec, prow in zip(pivot_vecs, pivot_rows):
        entry = vec.get(prow)
        if entry is not None:
            factor = entry * pvec[prow].inv()
            for r, c in pvec.items():
                vec_add_into(vec, r, -(factor * c))


def _strip_p_powers(vec: dict[int, Scalar], ring: Ring) -> dict[int, Scalar]:
    if ring.kind != KIND_ZLOC:
        return vec
    v = min(c.valuation() for c in vec.values())
    if v == 0:
        return vec
    scale = ring.from_fraction(1, ring.p**v)
    return {r: scale * c for r, c in vec.items()}

"""Structured subsets of the d-fold dyadic group, membership, and rasters.

Set families (all affine digit conditions, so membership is exact):

* DirichletSet: points where finitely many Walsh values W_{N_i} equal 1;
* PowerDirichletProduct: a power-of-two Dirichlet set on the non-free
  coordinates times the whole group on the free block;
* DiagonalPlane / ShiftedDiagonal: the non-free coordinate streams agree,
  possibly after contraction-style digit shifts;
* CoordinatePlane: the non-free coordinates vanish;
* Coset: any of the above shifted by a group element;
* FiniteUnion: finite unions (an empty union is the empty set, an empty
  DirichletSet is the whole group);
* LukomskiiLayer: one intersection layer of the two-dimensional set built
  from Dirichlet conditions paired with rectangles.  The pairing of Walsh
  indices to rectangles is injectable and the default is a documented
  guess (lexicographic enumeration mapped round-robin onto rectangles);
  renders of this family are illustrative, not ground truth.

Membership takes a `rank` that gates which Walsh conditions are checked
(those with index components below 2^rank); stream conditions on fully
specified points are decided exactly from digits and tails.  A result of
UNDETERMINED is first-class and is never silently coerced.

The same evaluator runs on partially known digit prefixes (the cells of a
raster), where a cell counts as inside iff it provably intersects the
set.  Chains of stream equalities across free digits are decided with a
union-find over digit slots, so shared free digits (three or more equated
coordinates) are handled exactly; a Walsh parity condition that straddles
the cell resolution yields UNDETERMINED.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass

from .group import (
    DyadicElement,
    DyadicPoint,
    Partition,
    add,
    bit_reverse,
    format_point,
    parse_element,
)


class Membership(enum.Enum):
    IN = "in"
    OUT = "out"
    UNDETERMINED = "undetermined"


# -- digit views ----------------------------------------------------------

@dataclass(frozen=True)
class _View:
    """Digit knowledge about one coordinate: `known` explicit digits, then
    either a constant tail or (tail=None) completely free digits."""

    bits: int
    known: int
    tail: int | None

    def digit(self, t: int):
        if t < self.known:
            return (self.bits >> t) & 1
        return self.tail

    def xor_element(self, x: DyadicElement) -> "_View":
        if self.tail is None:
            return _View(self.bits ^ x.materialized_bits(self.known), self.known, None)
        k = max(self.known, x.rank)
        bits = self.bits
        if self.tail:
            bits |= ((1 << k) - 1) ^ ((1 << self.known) - 1)
        return _View(bits ^ x.materialized_bits(k), k, self.tail ^ x.tail)


def _views_of_point(g: DyadicPoint) -> list[_View]:
    return [_View(c.bits, c.rank, c.tail) for c in g.components]


def _view_of_cell(m: int, k: int) -> _View:
    return _View(bit_reverse(m, k), k, None)


class _DSU:
    """Union-find over digit slots plus the two boolean constants."""

    C0 = ("const", 0)
    C1 = ("const", 1)

    def __init__(self):
        self.parent = {self.C0: self.C0, self.C1: self.C1}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    @property
    def consistent(self) -> bool:
        return self.find(self.C0) != self.find(self.C1)


def _chain_satisfiable(pairs, views) -> bool:
    """Whether the conjunction of stream equalities a[t] = b[t+s] holds for
    some completion of the free digits (exact for fully known views)."""
    if not pairs:
        return True
    horizon = max(views[c].known for p in pairs for c in p[:2])
    horizon += max(s for _, _, s in pairs) + 1
    dsu = None
    for t in range(horizon + 1):
        for a, b, s in pairs:
            va = views[a].digit(t)
            vb = views[b].digit(t + s)
            if va is not None and vb is not None:
                if va != vb:
                    return False
                continue
            if dsu is None:
                dsu = _DSU()
            na = (_DSU.C0, _DSU.C1)[va] if va is not None else (a, t)
            nb = (_DSU.C0, _DSU.C1)[vb] if vb is not None else (b, t + s)
            dsu.union(na, nb)
    return dsu is None or dsu.consistent


def _parity_condition(terms, views):
    """Parity of the listed (coord, digit) slots: 0/1, or None if any is free."""
    parity = 0
    for coord, t in terms:
        v = views[coord].digit(t)
        if v is None:
            return None
        parity ^= v
    return parity


# -- set specifications ----------------------------------------------------

@dataclass(frozen=True)
class DirichletSet:
    """Intersection of the level sets W_{N_i} = 1 over a finite index list."""

    d: int
    indices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for Ni in self.indices:
            if len(Ni) != self.d:
                raise ValueError("index dimension mismatch")
            if min(Ni) < 0:
                raise ValueError("indices must be >= 0")


@dataclass(frozen=True)
class PowerDirichletProduct:
    """W_{2^{k_i}} product = 1 on the non-free block, whole group on the rest."""

    partition: Partition
    k_seq: tuple[int, ...]

    @property
    def d(self) -> int:
        return self.partition.d


@dataclass(frozen=True)
class DiagonalPlane:
    """Equal streams on the non-free block; m <= d-2 free coordinates."""

    partition: Partition

    def __post_init__(self):
        if self.partition.m > self.partition.d - 2:
            raise ValueError("diagonal families need at least two equated coordinates")

    @property
    def d(self) -> int:
        return self.partition.d


@dataclass(frozen=True)
class ShiftedDiagonal:
    """Contraction-equal streams on the non-free block with shift vector q."""

    partition: Partition
    shifts: tuple[int, ...]

    def __post_init__(self):
        if self.partition.m > self.partition.d - 2:
            raise ValueError("diagonal families need at least two equated coordinates")
        if len(self.shifts) != len(self.partition.upper):
            raise ValueError("one shift per non-free coordinate")
        if min(self.shifts) < 0:
            raise ValueError("shifts must be >= 0")

    @property
    def d(self) -> int:
        return self.partition.d


@dataclass(frozen=True)
class CoordinatePlane:
    """Zero streams on the non-free block: the embedded copy of the free block."""

    partition: Partition

    @property
    def d(self) -> int:
        return self.partition.d


@dataclass(frozen=True)
class Coset:
    inner: object
    shift: DyadicPoint

    def __post_init__(self):
        if self.inner.d != self.shift.d:
            raise ValueError("dimension mismatch")

    @property
    def d(self) -> int:
        return self.shift.d


@dataclass(frozen=True)
class FiniteUnion:
    d: int
    members: tuple

    def __post_init__(self):
        for s in self.members:
            if s.d != self.d:
                raise ValueError("dimension mismatch")


@dataclass(frozen=True)
class LukomskiiLayer:
    """Layer i of the two-dimensional rectangle-paired Dirichlet construction."""

    i: int
    m_i: int
    pairing: object = None

    def __post_init__(self):
        if self.i < 1 or self.m_i < self.i:
            raise ValueError("need i >= 1 and m_i >= i")

    @property
    def d(self) -> int:
        return 2

    def rectangle_of(self, N: int) -> tuple[int, int]:
        if self.pairing is not None:
            return self.pairing(self.i, self.m_i, N)
        return _default_pairing(self.i, self.m_i, N)

    def n_range(self):
        return range(1 << (self.m_i - self.i), 1 << (2 * self.m_i - self.i))


def _default_pairing(i: int, m_i: int, N: int) -> tuple[int, int]:
    # Round-robin over rectangles in row-major order; a labeled guess, the
    # construction itself does not pin the correspondence down.
    total_k = 1 << (m_i - i + 1)
    total_j = 1 << (i - 1)
    idx = (N - (1 << (m_i - i))) % (total_j * total_k)
    return idx // total_k, idx % total_k


def whole_group(d: int) -> DirichletSet:
    return DirichletSet(d, ())


def empty_set(d: int) -> FiniteUnion:
    return FiniteUnion(d, ())


def fd_placeholder():
    """Placeholder for the externally constructed M-set; not built here."""
    raise NotImplementedError(
        "this set comes from an external construction and is out of scope"
    )


def coset(spec, x: DyadicPoint):
    """The shifted set, with membership(coset(S, x), g) = membership(S, g + x)."""
    if spec.d != x.d:
        raise ValueError("dimension mismatch")
    if isinstance(spec, Coset):
        x = add(spec.shift, x)
        spec = spec.inner
    if all(c.bits == 0 and c.tail == 0 for c in x.components):
        return spec
    return Coset(spec, x)


# -- evaluation ------------------------------------------------------------

def _evaluate(spec, views, rank: int) -> Membership:
    if isinstance(spec, Coset):
        shifted = [v.xor_element(c) for v, c in zip(views, spec.shift.components)]
        return _evaluate(spec.inner, shifted, rank)

    if isinstance(spec, DirichletSet):
        pending = False
        for Ni in spec.indices:
            if max(Ni) >= (1 << rank):
                pending = True
                continue
            terms = [
                (coord, t)
                for coord, nl in enumerate(Ni)
                for t in range(nl.bit_length())
                if (nl >> t) & 1
            ]
            parity = _parity_condition(terms, views)
            if parity is None:
                pending = True
            elif parity:
                return Membership.OUT
        return Membership.UNDETERMINED if pending else Membership.IN

    if isinstance(spec, PowerDirichletProduct):
        pending = False
        upper = spec.partition.upper
        for k_i in spec.k_seq:
            if k_i >= rank:
                pending = True
                continue
            parity = _parity_condition([(j, k_i) for j in upper], views)
            if parity is None:
                pending = True
            elif parity:
                return Membership.OUT
        return Membership.UNDETERMINED if pending else Membership.IN

    if isinstance(spec, DiagonalPlane):
        upper = spec.partition.upper
        pairs = [(upper[l], upper[l + 1], 0) for l in range(len(upper) - 1)]
        return Membership.IN if _chain_satisfiable(pairs, views) else Membership.OUT

    if isinstance(spec, ShiftedDiagonal):
        upper = spec.partition.upper
        pairs = []
        for l in range(len(upper) - 1):
            a, qa = upper[l], spec.shifts[l]
            b, qb = upper[l + 1], spec.shifts[l + 1]
            if qa <= qb:
                pairs.append((a, b, qb - qa))
            else:
                pairs.append((b, a, qa - qb))
        return Membership.IN if _chain_satisfiable(pairs, views) else Membership.OUT

    if isinstance(spec, CoordinatePlane):
        for j in spec.partition.upper:
            v = views[j]
            if v.bits & ((1 << v.known) - 1):
                return Membership.OUT
            if v.tail == 1:
                return Membership.OUT
        return Membership.IN

    if isinstance(spec, FiniteUnion):
        pending = False
        for member in spec.members:
            res = _evaluate(member, views, rank)
            if res is Membership.IN:
                return Membership.IN
            if res is Membership.UNDETERMINED:
                pending = True
        return Membership.UNDETERMINED if pending else Membership.OUT

    if isinstance(spec, LukomskiiLayer):
        pending = False
        gate = 1 << rank
        for N in spec.n_range():
            j, k = spec.rectangle_of(N)
            rect_ok = _prefix_compatible(views[0], spec.i - 1, j) and _prefix_compatible(
                views[1], spec.m_i - spec.i + 1, k
            )
            if not rect_ok:
                continue
            if max(1 << (spec.i - 1), N) >= gate:
                pending = True
                continue
            terms = [(0, spec.i - 1)] + [
                (1, t) for t in range(N.bit_length()) if (N >> t) & 1
            ]
            parity = _parity_condition(terms, views)
            if parity is None:
                pending = True
            elif parity == 0:
                return Membership.IN
        return Membership.UNDETERMINED if pending else Membership.OUT

    raise ValueError(f"unknown set specification {type(spec).__name__}")


def _prefix_compatible(view: _View, rho: int, index: int) -> bool:
    """Whether the view can lie in the rank-rho interval with the given index."""
    for t in range(rho):
        v = view.digit(t)
        if v is not None and v != (index >> (rho - 1 - t)) & 1:
            return False
    return True


def membership(spec, g: DyadicPoint, rank: int) -> Membership:
    """Three-valued membership of an exactly represented point."""
    if spec.d != g.d:
        raise ValueError("dimension mismatch")
    return _evaluate(spec, _views_of_point(g), rank)


# -- relation probes -------------------------------------------------------

def _point_grid(d: int, rank: int):
    """All rank-`rank` digit patterns with every tail combination."""
    for bits in itertools.product(range(1 << rank), repeat=d):
        for tails in itertools.product((0, 1), repeat=d):
            yield DyadicPoint(
                tuple(DyadicElement(rank, b, t) for b, t in zip(bits, tails))
            )


def _point_sample(d: int, rank: int, samples: int, seed: int):
    rng = random.Random(seed)
    for _ in range(samples):
        yield DyadicPoint(
            tuple(
                DyadicElement(rank, rng.getrandbits(rank), rng.getrandbits(1))
                for _ in range(d)
            )
        )


def subset_check(a, b, rank: int, samples: int | None = None, seed: int = 0):
    """Verify a <= b pointwise at the given rank; returns (ok, witness).

    A violation is a point definitely inside `a` and definitely outside
    `b`; undetermined memberships never count as violations.
    """
    if a.d != b.d:
        raise ValueError("dimension mismatch")
    points = (
        _point_grid(a.d, rank) if samples is None else _point_sample(a.d, rank, samples, seed)
    )
    for g in points:
        if membership(a, g, rank) is Membership.IN and membership(b, g, rank) is Membership.OUT:
            return False, g
    return True, None


def pairwise_disjoint(specs, rank: int, samples: int | None = None, seed: int = 0):
    """Group-level disjointness probe; returns (ok, witness point)."""
    d = specs[0].d
    for s in specs:
        if s.d != d:
            raise ValueError("dimension mismatch")
    points = _point_grid(d, rank) if samples is None else _point_sample(d, rank, samples, seed)
    for g in points:
        hits = 0
        for s in specs:
            if membership(s, g, rank) is Membership.IN:
                hits += 1
                if hits >= 2:
                    return False, g
    return True, None


# -- rasterization ---------------------------------------------------------

_PIXEL = {Membership.OUT: 0, Membership.UNDETERMINED: 128, Membership.IN: 255}


def rasterize(spec, k: int, slice_elements: tuple[DyadicElement, ...] = ()):
    """2^k x 2^k tri-state bitmap of the set sliced to its first two coordinates.

    Pixel (row, col): col = interval index of coordinate 0, row is flipped
    so larger coordinate-1 values sit higher (row 0 on top).  A pixel is
    255 when the rank-k cell provably meets the set, 0 when it provably
    does not, 128 when the cell straddles an unresolved condition.
    Coordinates beyond the first two are fixed by `slice_elements`
    (default: the zero element).
    """
    d = spec.d
    if d < 2:
        raise ValueError("rasterization needs dimension >= 2")
    fixed = list(slice_elements) or [DyadicElement(1, 0, 0)] * (d - 2)
    if len(fixed) != d - 2:
        raise ValueError("need one slice element per coordinate beyond the first two")
    n = 1 << k
    fixed_views = [_View(c.bits, c.rank, c.tail) for c in fixed]
    rows = [[0] * n for _ in range(n)]
    for m1 in range(n):
        v1 = _view_of_cell(m1, k)
        for m2 in range(n):
            views = [v1, _view_of_cell(m2, k)] + fixed_views
            rows[n - 1 - m2][m1] = _PIXEL[_evaluate(spec, views, k)]
    return rows


def to_pgm(bitmap) -> bytes:
    """Binary PGM (P5, maxval 255): 0 = out, 255 = in, 128 = undetermined."""
    h = len(bitmap)
    w = len(bitmap[0])
    header = f"P5\n{w} {h}\n255\n".encode()
    return header + bytes(v for row in bitmap for v in row)


# -- interchange -----------------------------------------------------------

def set_to_json(spec) -> dict:
    if isinstance(spec, DirichletSet):
        return {"kind": "dirichlet", "d": spec.d, "indices": [list(n) for n in spec.indices]}
    if isinstance(spec, PowerDirichletProduct):
        return {
            "kind": "power_dirichlet_product",
            "d": spec.d,
            "lower": list(spec.partition.lower),
            "k_seq": list(spec.k_seq),
        }
    if isinstance(spec, DiagonalPlane):
        return {"kind": "diagonal", "d": spec.d, "lower": list(spec.partition.lower)}
    if isinstance(spec, ShiftedDiagonal):
        return {
            "kind": "shifted_diagonal",
            "d": spec.d,
            "lower": list(spec.partition.lower),
            "shifts": list(spec.shifts),
        }
    if isinstance(spec, CoordinatePlane):
        return {"kind": "coordinate_plane", "d": spec.d, "lower": list(spec.partition.lower)}
    if isinstance(spec, Coset):
        return {
            "kind": "coset",
            "shift": format_point(spec.shift).split(";"),
            "inner": set_to_json(spec.inner),
        }
    if isinstance(spec, FiniteUnion):
        return {"kind": "union", "d": spec.d, "members": [set_to_json(s) for s in spec.members]}
    if isinstance(spec, LukomskiiLayer):
        return {"kind": "lukomskii_layer", "i": spec.i, "m_i": spec.m_i}
    raise ValueError(f"unknown set specification {type(spec).__name__}")


def set_from_json(data) -> object:
    if isinstance(data, str):
        data = json.loads(data)
    kind = data["kind"]
    if kind == "dirichlet":
        return DirichletSet(data["d"], tuple(tuple(n) for n in data["indices"]))
    if kind == "power_dirichlet_product":
        part = Partition(data["d"], tuple(data["lower"]))
        return PowerDirichletProduct(part, tuple(data["k_seq"]))
    if kind == "diagonal":
        return DiagonalPlane(Partition(data["d"], tuple(data["lower"])))
    if kind == "shifted_diagonal":
        part = Partition(data["d"], tuple(data["lower"]))
        return ShiftedDiagonal(part, tuple(data["shifts"]))
    if kind == "coordinate_plane":
        return CoordinatePlane(Partition(data["d"], tuple(data["lower"])))
    if kind == "coset":
        shift = DyadicPoint(tuple(parse_element(e) for e in data["shift"]))
        return Coset(set_from_json(data["inner"]), shift)
    if kind == "union":
        return FiniteUnion(data["d"], tuple(set_from_json(s) for s in data["members"]))
    if kind == "lukomskii_layer":
        return LukomskiiLayer(data["i"], data["m_i"])
    raise ValueError(f"unknown set kind {kind!r}")

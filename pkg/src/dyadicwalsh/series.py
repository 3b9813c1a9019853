"""Multiple Walsh series, their partial sums, and the generated quasimeasures.

A quasimeasure is a finitely additive set function on dyadic cubes.  A
series and a quasimeasure determine each other: the canonical map sends
a series to

    tau(rank-k cube) = 2^(-k*d) * S_{2^k}(cube),

and coefficients below 2^K are recoverable from the rank-K table.  The
`Quasimeasure` here stores the full table for every rank up to a working
rank K; construction evaluates the map at every rank independently, so
the additivity law (parent = sum of the 2^d children) is a checked
property, not a construction artifact.

Everything is exact: coefficients are `fractions.Fraction` (floats are
accepted for approximate, plot-scale work but none of the verification
paths use them).
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .group import (
    DyadicBox,
    DyadicCube,
    DyadicElement,
    DyadicPoint,
    Partition,
    bit_reverse,
    box_cubes,
    box_from_cube,
    cube_of,
)
from .walsh import fwht_table, walsh_eval_multi


@dataclass(frozen=True, eq=False)
class SeriesSpec:
    """Coefficient provider for a d-dimensional Walsh series.

    `coeff` must be total and deterministic on multi-indices below
    2^bound_rank * 1; operations that would need coefficients beyond the
    declared bound raise instead of guessing.
    """

    d: int
    bound_rank: int
    _coeff: object
    _items: object = None

    def coeff(self, n: tuple[int, ...]):
        if len(n) != self.d:
            raise ValueError("dimension mismatch")
        return self._coeff(n)

    def items_below(self, N: tuple[int, ...]):
        """Iterate (n, c) over nonzero coefficients with n < N componentwise."""
        if len(N) != self.d:
            raise ValueError("dimension mismatch")
        if self._items is not None:
            yield from self._items(N)
            return
        for n in itertools.product(*(range(Nl) for Nl in N)):
            c = self._coeff(n)
            if c:
                yield n, c

    def check_bound(self, N: tuple[int, ...]) -> None:
        if max(N) > (1 << self.bound_rank):
            raise ValueError(
                f"series coefficients only declared below 2^{self.bound_rank}"
            )


def series_from_coeffs(d: int, coeffs: dict, bound_rank: int) -> SeriesSpec:
    """Dict-backed series; missing entries are zero."""
    table = {tuple(n): c for n, c in coeffs.items() if c}

    def items(N):
        for n, c in sorted(table.items()):
            if all(nl < Nl for nl, Nl in zip(n, N)):
                yield n, c

    return SeriesSpec(d, bound_rank, lambda n: table.get(n, Fraction(0)), items)


def series_from_function(d: int, func, bound_rank: int, items=None) -> SeriesSpec:
    return SeriesSpec(d, bound_rank, func, items)


def constant_series(d: int, c0, bound_rank: int = 12) -> SeriesSpec:
    return series_from_coeffs(d, {(0,) * d: c0}, bound_rank)


# -- partial sums --------------------------------------------------------

def partial_sum_rect(series: SeriesSpec, N: tuple[int, ...], g: DyadicPoint):
    """Rectangular partial sum: sum of c_n W_n(g) over n < N componentwise."""
    if len(N) != series.d or g.d != series.d:
        raise ValueError("dimension mismatch")
    if min(N) < 1:
        raise ValueError("every component of N must be >= 1")
    series.check_bound(N)
    total = Fraction(0)
    for n, c in series.items_below(N):
        total += c * walsh_eval_multi(n, g)
    return total


def partial_sum_cube(series: SeriesSpec, N: int, g: DyadicPoint):
    """Cubic partial sum S_N = S_{N*1}."""
    return partial_sum_rect(series, (N,) * series.d, g)


def cubic_sums_upto(series: SeriesSpec, N_max: int, g: DyadicPoint) -> list:
    """S_1, ..., S_{N_max} at g in one sweep (each term counted once)."""
    if N_max < 1:
        raise ValueError("need N_max >= 1")
    series.check_bound((N_max,) * series.d)
    deltas = [Fraction(0)] * (N_max + 1)
    for n, c in series.items_below((N_max,) * series.d):
        deltas[max(n) + 1] += c * walsh_eval_multi(n, g)
    out = []
    acc = Fraction(0)
    for N in range(1, N_max + 1):
        acc += deltas[N]
        out.append(acc)
    return out


# -- quasimeasures -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quasimeasure:
    """Values on all dyadic cubes of rank <= rank, one dict per rank."""

    d: int
    rank: int
    tables: tuple

    def value(self, cube: DyadicCube):
        if cube.d != self.d:
            raise ValueError("dimension mismatch")
        if cube.rank > self.rank:
            raise ValueError("cube finer than the working rank")
        return self.tables[cube.rank][cube.index]

    def box_value(self, box: DyadicBox):
        """tau extended to dyadic parallelepipeds by finite additivity."""
        r = box.max_rank
        if r > self.rank:
            raise ValueError("box finer than the working rank")
        table = self.tables[r]
        return sum((table[m] for m in box_cubes(box, r)), Fraction(0))

    @property
    def total(self):
        return self.tables[0][(0,) * self.d]


def quasimeasure_from_series(series: SeriesSpec, K: int, method: str = "fast") -> Quasimeasure:
    """The quasimeasure generated by the series, tabulated for ranks 0..K.

    Each rank is computed directly from the canonical map (2^(-kd) times
    the rank-k cubic partial sum on the cube); `method="naive"` evaluates
    the partial sums term by term and exists as the oracle for the fast
    transform path.
    """
    if K > series.bound_rank:
        raise ValueError("insufficient coefficients for the requested rank")
    d = series.d
    tables = []
    for k in range(K + 1):
        if method == "fast":
            sums = fwht_table(series, k)
        elif method == "naive":
            sums = _naive_sum_table(series, k)
        else:
            raise ValueError(f"unknown method {method!r}")
        scale = 1 << (k * d)
        tables.append({m: Fraction(v, scale) for m, v in sums.items()})
    return Quasimeasure(d, K, tuple(tables))


def _naive_sum_table(series: SeriesSpec, k: int) -> dict:
    d = series.d
    table = {}
    for m in itertools.product(range(1 << k), repeat=d):
        gbits = tuple(bit_reverse(mi, k) for mi in m)
        total = Fraction(0)
        for n, c in series.items_below(((1 << k),) * d):
            parity = 0
            for nl, bl in zip(n, gbits):
                parity += (nl & bl).bit_count()
            total += -c if parity & 1 else c
        table[m] = total
    return table


def quasimeasure_from_masses(d: int, K: int, masses: list) -> Quasimeasure:
    """Finite combination of point masses: tau(cube) = sum of masses inside."""
    tables = [dict() for _ in range(K + 1)]
    for k in range(K + 1):
        for m in itertools.product(range(1 << k), repeat=d):
            tables[k][m] = Fraction(0)
    for pt, mass in masses:
        if pt.d != d:
            raise ValueError("dimension mismatch")
        for k in range(K + 1):
            idx = cube_of(pt, k).index
            tables[k][idx] += mass
    return Quasimeasure(d, K, tuple(tables))


def quasimeasure_from_leaves(d: int, K: int, leaves: dict) -> Quasimeasure:
    """Build the full table from rank-K values by summing children upward.

    Coarser values are forced by additivity here, so `check_additivity`
    holds by construction for this constructor (unlike the series route,
    where it is a checked identity).
    """
    tables = [None] * (K + 1)
    full = {m: leaves.get(m, Fraction(0)) for m in itertools.product(range(1 << K), repeat=d)}
    tables[K] = full
    for k in range(K - 1, -1, -1):
        coarse = {}
        for m in itertools.product(range(1 << k), repeat=d):
            total = Fraction(0)
            for sigma in itertools.product((0, 1), repeat=d):
                child = tuple(2 * mi + s for mi, s in zip(m, sigma))
                total += tables[k + 1][child]
            coarse[m] = total
        tables[k] = coarse
    return Quasimeasure(d, K, tuple(tables))


def zero_quasimeasure(d: int, K: int) -> Quasimeasure:
    return quasimeasure_from_leaves(d, K, {})


def check_additivity(tau: Quasimeasure):
    """Exact parent-equals-sum-of-children check; returns (ok, first violation)."""
    for k in range(tau.rank):
        for m, parent in sorted(tau.tables[k].items()):
            total = Fraction(0)
            for sigma in itertools.product((0, 1), repeat=tau.d):
                total += tau.tables[k + 1][tuple(2 * mi + s for mi, s in zip(m, sigma))]
            if total != parent:
                return False, DyadicCube(k, m)
    return True, None


@dataclass(frozen=True)
class SupportMask:
    """Rank-K outer approximation of the support: the cells not yet excluded."""

    rank: int
    cells: frozenset


def support_mask(tau: Quasimeasure) -> SupportMask:
    """Keep a rank-K cell iff tau is nonzero on it (its finest visible value).

    This is the rank-K outer approximation of the support: a cell is
    dropped only when tau vanishes on it and on every visible subcube,
    which at the working rank is the cell's own value.
    """
    cells = frozenset(m for m, v in tau.tables[tau.rank].items() if v != 0)
    return SupportMask(tau.rank, cells)


def integrate_walsh(tau: Quasimeasure, N: tuple[int, ...], box: DyadicBox):
    """Integral of W_N over the box against tau, as a finite signed sum.

    W_N is constant on rank-(k+1) cubes for k = max floor(log2 N_l), so the
    integral is the sum of W_N(cube) * tau(cube) over the rank-(k+1) cubes
    tiling the box (finer if the box itself is finer).
    """
    if len(N) != tau.d or box.d != tau.d:
        raise ValueError("dimension mismatch")
    if min(N) < 0:
        raise ValueError("kernel indices must be >= 0")
    k = max((Nl.bit_length() - 1 for Nl in N if Nl > 0), default=0)
    r = max(k + 1, box.max_rank)
    if r > tau.rank:
        raise ValueError("working rank too small for this integral")
    table = tau.tables[r]
    total = Fraction(0)
    for m in box_cubes(box, r):
        parity = 0
        for Nl, ml in zip(N, m):
            parity += (Nl & bit_reverse(ml, r)).bit_count()
        v = table[m]
        total += -v if parity & 1 else v
    return total


@dataclass(frozen=True)
class LocalizedMass:
    """Output of the greedy mass-localization descent."""

    xi: DyadicPoint
    box: DyadicBox
    value: Fraction
    certified_bound: Fraction


def localize_mass(tau: Quasimeasure, delta: DyadicCube, part: Partition, k: int) -> LocalizedMass:
    """Greedy descent over the free-block coordinates of a cube with mass.

    Starting from a rank-k0 cube with tau(cube) = C != 0, repeatedly split
    the free-block coordinates one rank at a time and keep a child slab of
    maximal |tau| (ties: lexicographically smallest child); the pigeonhole
    guarantees |tau(slab)| >= |C| / 2^(m*(k-k0)) at rank k.
    """
    if part.d != tau.d or delta.d != tau.d:
        raise ValueError("dimension mismatch")
    k0 = delta.rank
    if not k0 <= k <= tau.rank:
        raise ValueError("need delta.rank <= k <= working rank")
    C = tau.value(delta)
    if C == 0:
        raise ValueError("cube carries no mass")
    m = part.m
    if m == 0:
        raise ValueError("free block is empty")
    intervals = list(box_from_cube(delta).intervals)
    for r in range(k0, k):
        best = None
        best_idx = None
        for sigma in itertools.product((0, 1), repeat=m):
            cand = list(intervals)
            for i, s in zip(part.lower, sigma):
                rk, mi = cand[i]
                cand[i] = (rk + 1, 2 * mi + s)
            v = tau.box_value(DyadicBox(tuple(cand)))
            if best is None or abs(v) > abs(best):
                best, best_idx = v, cand
        intervals = best_idx
    box = DyadicBox(tuple(intervals))
    value = tau.box_value(box)
    bound = abs(C) / Fraction(1 << (m * (k - k0)))
    xi_elems = []
    for i in part.lower:
        rk, mi = intervals[i]
        xi_elems.append(DyadicElement(max(rk, 1), bit_reverse(mi, rk), 0))
    xi = DyadicPoint(tuple(xi_elems))
    return LocalizedMass(xi, box, value, bound)


def rademacher_functional(
    tau: Quasimeasure,
    k: int,
    delta_star: DyadicCube,
    xi: DyadicPoint,
    part: Partition,
):
    """2^(m*k) * integral of R_{k*1}(g^*) over delta_star x rank-k-cube(xi).

    R_{k*1}(g^*) reads digit k of every non-free coordinate, so it is
    constant on rank-(k+1) cubes; the integral is a finite signed sum.
    """
    if part.d != tau.d:
        raise ValueError("dimension mismatch")
    upper = part.upper
    if delta_star.d != len(upper) or xi.d != part.m:
        raise ValueError("block shapes do not match the partition")
    r = max(k + 1, delta_star.rank)
    if r > tau.rank:
        raise ValueError("working rank too small")
    intervals = [None] * tau.d
    for j, m_j in zip(upper, delta_star.index):
        intervals[j] = (delta_star.rank, m_j)
    xi_cube = cube_of(xi, k)
    for i, m_i in zip(part.lower, xi_cube.index):
        intervals[i] = (k, m_i)
    box = DyadicBox(tuple(intervals))
    table = tau.tables[r]
    total = Fraction(0)
    for m in box_cubes(box, r):
        parity = 0
        for j in upper:
            parity += (m[j] >> (r - 1 - k)) & 1
        v = table[m]
        total += -v if parity & 1 else v
    return (1 << (part.m * k)) * total


def walsh_functional(tau: Quasimeasure, N_i: int, delta: DyadicCube):
    """Integral of W_{N_i * 1} over the cube against tau."""
    if N_i < 1:
        raise ValueError("need N_i >= 1")
    return integrate_walsh(tau, (N_i,) * tau.d, box_from_cube(delta))


def coefficient_from_quasimeasure(tau: Quasimeasure, n: tuple[int, ...]):
    """Recover c_n (n < 2^K componentwise) from the rank-K table."""
    if len(n) != tau.d:
        raise ValueError("dimension mismatch")
    K = tau.rank
    if max(n) >= (1 << K):
        raise ValueError("index beyond the working rank")
    total = Fraction(0)
    for m, v in tau.tables[K].items():
        parity = 0
        for nl, ml in zip(n, m):
            parity += (nl & bit_reverse(ml, K)).bit_count()
        total += -v if parity & 1 else v
    return total


# -- interchange formats --------------------------------------------------

def _parse_rational(text: str):
    return Fraction(text)


def series_to_json(series: SeriesSpec, N_bound: tuple[int, ...] | None = None) -> str:
    """Serialize the nonzero coefficients below N_bound (default: the declared bound)."""
    if N_bound is None:
        N_bound = ((1 << series.bound_rank),) * series.d
    coeffs = [
        {"n": list(n), "c": str(c)} for n, c in series.items_below(N_bound)
    ]
    return json.dumps(
        {"d": series.d, "coeffs": coeffs, "bound_rank": series.bound_rank},
        sort_keys=True,
    )


def series_from_json(text: str, approx: bool = False) -> SeriesSpec:
    data = json.loads(text)
    coeffs = {}
    for entry in data["coeffs"]:
        c = _parse_rational(entry["c"])
        coeffs[tuple(entry["n"])] = float(c) if approx else c
    return series_from_coeffs(data["d"], coeffs, data["bound_rank"])


def quasimeasure_to_csv(tau: Quasimeasure) -> str:
    """One row per cube: k, m1, ..., md, value (rational literal)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    for k in range(tau.rank + 1):
        for m, v in sorted(tau.tables[k].items()):
            writer.writerow([k, *m, str(v)])
    return buf.getvalue()


def quasimeasure_from_csv(text: str, d: int) -> Quasimeasure:
    tables = {}
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        k = int(row[0])
        m = tuple(int(x) for x in row[1 : 1 + d])
        tables.setdefault(k, {})[m] = _parse_rational(row[1 + d])
    K = max(tables)
    return Quasimeasure(d, K, tuple(tables[k] for k in range(K + 1)))

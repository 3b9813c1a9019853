"""Brute-force, finite-rank verification of the library's exact identities,
plus the exploratory finite-rank falsifier.

Every identity check computes its two sides along independent code paths
(partial sums against quasimeasure integrals) so a shared bug cannot hide
a mismatch, and every randomized sweep takes an explicit seed and records
it, so reports are reproducible bit for bit.

The falsifier builds, over the rank-K cells of a candidate set E, the
exact linear system "tau vanishes outside E, selected functionals of tau
vanish" and reports the dimension of its solution space by rational
elimination.  A zero dimension at rank K is evidence, not proof, of
uniqueness-set behavior, and the report says so verbatim.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .group import (
    DyadicBox,
    DyadicCube,
    DyadicElement,
    DyadicPoint,
    Partition,
    add,
    bit_reverse,
    box_cubes,
    cube_of,
    even_sign_vectors,
    format_point,
    sign_shift_point,
)
from .linalg import nullspace, rref
from .series import (
    Quasimeasure,
    SeriesSpec,
    partial_sum_cube,
    partial_sum_rect,
    quasimeasure_from_leaves,
    quasimeasure_from_series,
    series_from_coeffs,
)
from .sets import Membership, _evaluate, _view_of_cell
from .walsh import lowest_bit, rademacher, walsh_eval_multi, weight


# -- reports ---------------------------------------------------------------

@dataclass
class IdentityReport:
    """Grid of exact-equality checks; mismatch cells carry both values."""

    name: str
    meta: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)

    def record(self, params: dict, lhs, rhs) -> bool:
        ok = lhs == rhs
        cell = {"params": params, "equal": ok}
        if not ok:
            cell["lhs"] = str(lhs)
            cell["rhs"] = str(rhs)
        self.cells.append(cell)
        return ok

    @property
    def total(self) -> int:
        return len(self.cells)

    @property
    def mismatches(self) -> int:
        return sum(1 for c in self.cells if not c["equal"])

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "meta": self.meta,
            "total": self.total,
            "mismatches": self.mismatches,
            "failing_cells": [c for c in self.cells if not c["equal"]][:10],
        }


def random_series(rng: random.Random, d: int, bound_rank: int, nnz: int,
                  numer_range: int = 9, denominators=(1, 2, 3, 4),
                  integral: bool = False) -> SeriesSpec:
    """A random sparse series with exact rational (or integer) coefficients."""
    coeffs = {}
    side = 1 << bound_rank
    while len(coeffs) < nnz:
        n = tuple(rng.randrange(side) for _ in range(d))
        numer = rng.randint(-numer_range, numer_range) or 1
        if integral:
            coeffs[n] = numer
        else:
            coeffs[n] = Fraction(numer, rng.choice(denominators))
    return series_from_coeffs(d, coeffs, bound_rank)


def random_point(rng: random.Random, d: int, rank: int,
                 random_tails: bool = False) -> DyadicPoint:
    return DyadicPoint(
        tuple(
            DyadicElement(rank, rng.getrandbits(rank), rng.getrandbits(1) if random_tails else 0)
            for _ in range(d)
        )
    )


# -- the multilinear difference identity ------------------------------------

def lemma1_sides(series: SeriesSpec, g: DyadicPoint, M1: int, M2: int):
    """Both sides of the shifted-difference identity for cubic partial sums.

    M1 = 2^{k_1} + ... + 2^{k_l} (k_1 > ... > k_l), M2 = M1 + r with
    r < 2^{k_l}.  The left side sums S_{M2+1} - S_{M1} over all tuples of
    even-parity sign shifts at digits k_1, ..., k_l; the right side is
    2^{l(d-1)} times the coefficient sum over the closed box [M1, M2]^d.
    """
    d = series.d
    if M1 < 1:
        raise ValueError("need M1 >= 1")
    ks = [k for k in range(M1.bit_length() - 1, -1, -1) if (M1 >> k) & 1]
    r = M2 - M1
    if r < 0 or r >= (1 << ks[-1]):
        raise ValueError("need M2 = M1 + r with 0 <= r < 2^{k_l}")
    l = len(ks)
    sigmas = even_sign_vectors(d)
    lhs = Fraction(0)
    for combo in itertools.product(sigmas, repeat=l):
        shift = None
        for sigma, k in zip(combo, ks):
            sp = sign_shift_point(sigma, k, d)
            shift = sp if shift is None else add(shift, sp)
        h = add(g, shift)
        lhs += partial_sum_cube(series, M2 + 1, h) - partial_sum_cube(series, M1, h)
    rhs = Fraction(0)
    for n in itertools.product(range(M1, M2 + 1), repeat=d):
        c = series.coeff(n)
        if c:
            rhs += c * walsh_eval_multi(n, g)
    rhs *= 1 << (l * (d - 1))
    return lhs, rhs


def _descending_sums(k1_max: int, l_max: int):
    """All M1 = sums of l <= l_max distinct powers with top exponent <= k1_max."""
    out = []
    for l in range(1, l_max + 1):
        for ks in itertools.combinations(range(k1_max, -1, -1), l):
            out.append((sum(1 << k for k in ks), ks))
    return sorted(out)


def lemma1_grid(d: int, series_count: int, points_each: int, seed: int,
                k1_max: int = 5, l_max: int = 3, r_values=(0, 1),
                nnz: int = 24) -> IdentityReport:
    """Exercise the identity over the full (M1, r) grid.

    The series/point budget is spread round-robin so every grid cell is
    checked by several independent (series, point) samples.
    """
    rng = random.Random(seed)
    rank = k1_max + 2
    report = IdentityReport(
        "lemma1",
        {"d": d, "series": series_count, "points_each": points_each, "seed": seed},
    )
    grid = []
    for M1, ks in _descending_sums(k1_max, l_max):
        for r in r_values:
            if r < (1 << ks[-1]):
                grid.append((M1, M1 + r))
    pairs = []
    for _ in range(series_count):
        sp = random_series(rng, d, k1_max + 1, nnz)
        # plant coefficients inside a few grid boxes so the surviving-term
        # factor is exercised, not only the cancellation to zero
        extra = dict(sp.items_below(((1 << (k1_max + 1)),) * d))
        for _ in range(4):
            M1, M2 = grid[rng.randrange(len(grid))]
            n = tuple(rng.randint(M1, M2) for _ in range(d))
            extra[n] = Fraction(rng.randint(-9, 9) or 1, rng.choice((1, 2, 3, 4)))
        sp = series_from_coeffs(d, extra, k1_max + 1)
        for _ in range(points_each):
            pairs.append((sp, random_point(rng, d, rank)))
    for i, (sp, g) in enumerate(pairs):
        M1, M2 = grid[i % len(grid)]
        lhs, rhs = lemma1_sides(sp, g, M1, M2)
        report.record({"M1": M1, "M2": M2, "i": i}, lhs, rhs)
    report.meta["grid_cells"] = len(grid)
    report.meta["grid_covered"] = len(pairs) >= len(grid)
    return report


# -- the shifted-point search ------------------------------------------------

def lemma2_search(cells: set, K: int, d: int, delta: DyadicCube, ks,
                  samples: int | None = None, seed: int = 0):
    """Search the rank-s cube for a point whose full sign-shift orbit stays in E.

    `cells` is E as a set of rank-K cube index tuples contained in `delta`;
    the shifts flip digit k_i (k_i < K) of the coordinates selected by each
    sign vector, over every tuple of sign vectors.  Returns the point (a
    rank-K cell representative) or None; None is a value, not an error.
    """
    ks = list(ks)
    if any(k >= K for k in ks):
        raise ValueError("shift digits must be below the cell rank")
    shift_bits = [1 << (K - 1 - k) for k in ks]
    combos = list(itertools.product(range(1 << d), repeat=len(ks)))
    span = K - delta.rank
    if samples is None:
        candidates = itertools.product(
            *(range(m << span, (m + 1) << span) for m in delta.index)
        )
    else:
        rng = random.Random(seed)
        candidates = (
            tuple((m << span) | rng.getrandbits(span) for m in delta.index)
            for _ in range(samples)
        )
    for cand in candidates:
        good = True
        for combo in combos:
            shifted = list(cand)
            for mask, bit in zip(combo, shift_bits):
                for j in range(d):
                    if (mask >> j) & 1:
                        shifted[j] ^= bit
            if tuple(shifted) not in cells:
                good = False
                break
        if good:
            return DyadicPoint(
                tuple(DyadicElement(K, bit_reverse(m, K), 0) for m in cand)
            )
    return None


# -- the kernel-product decomposition ----------------------------------------

def tk_sides(series: SeriesSpec, eta: DyadicPoint, xi: DyadicPoint, k: int,
             s: int, part: Partition, tau: Quasimeasure | None = None):
    """Both sides of the kernel-product decomposition at (eta, xi).

    Left: the integral of the product of per-coordinate kernel factors
    (difference kernels on the non-free block, plain kernels on the free
    block), evaluated purely from rectangular partial sums by
    inclusion-exclusion over the non-free coordinates.

    Right: R_{k1}(eta) * sum over subsets J of the free block of
    2^{s(d-(m-q))} R_{k1}(xi^J) Q^J_k with every Q^J_k a finite signed sum
    against the quasimeasure generated by the series.
    """
    d = part.d
    upper, lower = part.upper, part.lower
    m = part.m
    if eta.d != len(upper) or xi.d != m:
        raise ValueError("block shapes do not match the partition")
    if not 1 <= s <= k:
        raise ValueError("need 1 <= s <= k")
    series.check_bound(((1 << k) + (1 << s),) * d)
    if tau is None:
        tau = quasimeasure_from_series(series, k + 1)
    if tau.rank < k + 1:
        raise ValueError("working rank too small")

    full = [None] * d
    for j, c in zip(upper, eta.components):
        full[j] = c
    for i, c in zip(lower, xi.components):
        full[i] = c
    z = DyadicPoint(tuple(full))

    hi, lo = (1 << k) + (1 << s), 1 << k
    lhs = Fraction(0)
    for T in range(1 << len(upper)):
        N = [hi] * d
        for pos, j in enumerate(upper):
            if not (T >> pos) & 1:
                N[j] = lo
        sign = (-1) ** (len(upper) - bin(T).count("1"))
        lhs += sign * partial_sum_rect(series, tuple(N), z)

    eta_cube = cube_of(eta, s)
    xi_s = cube_of(xi, s)
    xi_k = cube_of(xi, k)
    r_eta = 1
    for c in eta.components:
        r_eta *= rademacher(k, c)
    rhs = Fraction(0)
    table = tau.tables[k + 1]
    for q in range(m + 1):
        for J in itertools.combinations(range(m), q):
            Jset = set(J)
            intervals = [None] * d
            for pos, j in enumerate(upper):
                intervals[j] = (s, eta_cube.index[pos])
            for pos, i in enumerate(lower):
                if pos in Jset:
                    intervals[i] = (s, xi_s.index[pos])
                else:
                    intervals[i] = (k, xi_k.index[pos])
            box = DyadicBox(tuple(intervals))
            signed = Fraction(0)
            sign_coords = list(upper) + [lower[pos] for pos in J]
            for mm in box_cubes(box, k + 1):
                parity = 0
                for c in sign_coords:
                    parity += (mm[c] >> ((k + 1) - 1 - k)) & 1
                v = table[mm]
                signed += -v if parity & 1 else v
            qjk = (1 << ((m - q) * k)) * signed
            r_xi = 1
            for pos in J:
                r_xi *= rademacher(k, xi.components[pos])
            rhs += (1 << (s * (d - (m - q)))) * r_xi * qjk
    rhs *= r_eta
    return lhs, rhs


def tk_grid(d: int, series_count: int, seed: int, k_max: int = 4,
            s_max: int = 2, nnz: int = 12) -> IdentityReport:
    rng = random.Random(seed)
    report = IdentityReport(
        "tk_decomposition", {"d": d, "series": series_count, "seed": seed}
    )
    ms = sorted({1, d - 1})
    for _ in range(series_count):
        sp = random_series(rng, d, k_max + 1, nnz, integral=True)
        tau = quasimeasure_from_series(sp, k_max + 1)
        for m in ms:
            part = Partition(d, tuple(rng.sample(range(d), m)))
            for k in range(1, k_max + 1):
                for s in range(1, min(s_max, k) + 1):
                    eta = random_point(rng, d - m, k + 1)
                    xi = random_point(rng, m, k + 1)
                    lhs, rhs = tk_sides(sp, eta, xi, k, s, part, tau)
                    report.record({"m": m, "k": k, "s": s}, lhs, rhs)
    return report


# -- functional trends --------------------------------------------------------

def functional_trend(tau: Quasimeasure, mode: str, *, partition: Partition | None = None,
                     delta_star: DyadicCube | None = None, xi: DyadicPoint | None = None,
                     k_sequence=None, n_sequence=None, cube: DyadicCube | None = None,
                     weight_bound: int | None = None) -> dict:
    """Finite table of a continuity functional; no limit claims are made.

    mode="rademacher": tabulates the scaled alternating-sign functional
    over k in `k_sequence` (default: every admissible k).
    mode="walsh": tabulates the cube-restricted Walsh functional along
    `n_sequence`, after checking the low-bit property (the smallest
    nonzero dyadic coefficient index must be nondecreasing within the
    prefix; a decrease is a definite violation) and the weight bound.
    """
    from .series import rademacher_functional, walsh_functional

    if mode == "rademacher":
        if partition is None or delta_star is None or xi is None:
            raise ValueError("rademacher mode needs partition, delta_star, xi")
        if k_sequence is None:
            k_sequence = range(max(delta_star.rank, 1), tau.rank)
        values = []
        for k in k_sequence:
            v = rademacher_functional(tau, k, delta_star, xi, partition)
            values.append((k, v))
    elif mode == "walsh":
        if n_sequence is None or cube is None:
            raise ValueError("walsh mode needs n_sequence and cube")
        low_bits = [lowest_bit(n) for n in n_sequence]
        if any(b > a for a, b in zip(low_bits[1:], low_bits)):
            raise ValueError("low-bit property violated: indices must sink deeper")
        if weight_bound is not None:
            bad = [n for n in n_sequence if weight(n) > weight_bound]
            if bad:
                raise ValueError(f"weight bound violated at {bad[0]}")
        values = [(n, walsh_functional(tau, n, cube)) for n in n_sequence]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    abs_vals = [abs(v) for _, v in values]
    all_zero_from = None
    for i in range(len(values)):
        if all(v == 0 for v in abs_vals[i:]):
            all_zero_from = i
            break
    nonincreasing = all(a >= b for a, b in zip(abs_vals, abs_vals[1:]))
    return {
        "mode": mode,
        "values": [(idx, str(v)) for idx, v in values],
        "all_zero_from": all_zero_from,
        "abs_nonincreasing": nonincreasing,
        "note": "finite-rank table only; the limit hypothesis is not certified",
    }


# -- the finite-rank falsifier -------------------------------------------------

@dataclass(frozen=True)
class FalsifierConstraints:
    """Which vanishing-equation families to impose besides support containment.

    rademacher_kmax > 0 adds, for every partition with 1 <= |free block|
    <= d-1, every k' in 1..rademacher_kmax (with k' + 1 <= K), every
    non-free cube of rank <= k' and every rank-k' free-block cube, the
    equation "alternating-sign functional = 0".  walsh_indices adds, for
    each listed N_i, one equation per dyadic cube of rank <= K:
    "integral of W_{N_i * 1} over the cube = 0".
    """

    rademacher_kmax: int = 0
    walsh_indices: tuple[int, ...] = ()


@dataclass
class FalsifierProblem:
    spec: object
    rank: int
    constraints: FalsifierConstraints
    dimension: int = -1

    @property
    def certifies_only_zero(self) -> bool:
        return self.dimension == 0


@dataclass
class FalsifierResult:
    problem: FalsifierProblem
    dimension: int
    n_vars: int
    n_equations: int
    mask: tuple
    basis: list
    note: str = (
        "exploratory: dimension 0 at this rank is evidence, not proof, of "
        "uniqueness-set behavior"
    )

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "n_vars": self.n_vars,
            "n_equations": self.n_equations,
            "rank": self.problem.rank,
            "note": self.note,
        }


def set_mask(spec, K: int) -> tuple:
    """Rank-K cells that may meet the set (definite OUT cells excluded)."""
    cells = []
    for m in itertools.product(range(1 << K), repeat=spec.d):
        views = [_view_of_cell(mi, K) for mi in m]
        if _evaluate(spec, views, K) is not Membership.OUT:
            cells.append(m)
    return tuple(cells)


def uset_falsify(spec, K: int, constraints: FalsifierConstraints,
                 basis_limit: int = 16) -> FalsifierResult:
    """Exact solution-space dimension of the vanishing system over rank-K cells.

    Variables are the rank-K cell values of a candidate quasimeasure
    (coarser values are determined by additivity, so additivity needs no
    equations); support containment pins cells outside the set's mask to
    zero, which is applied by simply dropping those variables.  The
    reported dimension is exact; at most `basis_limit` basis quasimeasures
    are materialized.
    """
    d = spec.d
    if (1 << (K * d)) > 4096:
        raise ValueError("rank-K cell grid too large for exact elimination")
    mask = set_mask(spec, K)
    col = {m: i for i, m in enumerate(mask)}
    n_vars = len(mask)
    rows = []

    def add_row(coeffs: dict):
        row = [Fraction(0)] * n_vars
        touched = False
        for m, c in coeffs.items():
            if m in col:
                row[col[m]] = Fraction(c)
                touched = True
        if touched and any(v != 0 for v in row):
            rows.append(row)

    kmax = constraints.rademacher_kmax
    for m_low in range(1, d):
        for lower in itertools.combinations(range(d), m_low):
            part = Partition(d, lower)
            upper = part.upper
            for kp in range(1, min(kmax, K - 1) + 1):
                for s_star in range(kp + 1):
                    for up_idx in itertools.product(range(1 << s_star), repeat=len(upper)):
                        for low_idx in itertools.product(range(1 << kp), repeat=m_low):
                            intervals = [None] * d
                            for j, mj in zip(upper, up_idx):
                                intervals[j] = (s_star, mj)
                            for i, mi in zip(lower, low_idx):
                                intervals[i] = (kp, mi)
                            box = DyadicBox(tuple(intervals))
                            coeffs = {}
                            for mm in box_cubes(box, K):
                                parity = 0
                                for j in upper:
                                    parity += (mm[j] >> (K - 1 - kp)) & 1
                                coeffs[mm] = -1 if parity & 1 else 1
                            add_row(coeffs)

    for N_i in constraints.walsh_indices:
        if N_i < 1:
            raise ValueError("Walsh constraint indices must be >= 1")
        if N_i.bit_length() > K:
            raise ValueError("Walsh constraint index beyond the working rank")
        for rho in range(K + 1):
            for cube_idx in itertools.product(range(1 << rho), repeat=d):
                coeffs = {}
                box = DyadicBox(tuple((rho, mi) for mi in cube_idx))
                for mm in box_cubes(box, K):
                    parity = 0
                    for ml in mm:
                        parity += (N_i & bit_reverse(ml, K)).bit_count()
                    coeffs[mm] = -1 if parity & 1 else 1
                add_row(coeffs)

    n_equations = len(rows)
    if rows:
        basis_vecs = nullspace(rows, n_vars)
        dimension = len(basis_vecs)
    else:
        dimension = n_vars
        basis_vecs = [
            [Fraction(int(i == j)) for j in range(n_vars)]
            for i in range(min(n_vars, basis_limit))
        ]
    basis = []
    for vec in basis_vecs[:basis_limit]:
        leaves = {m: v for m, v in zip(mask, vec) if v != 0}
        basis.append(quasimeasure_from_leaves(d, K, leaves))
    problem = FalsifierProblem(spec, K, constraints, dimension=dimension)
    return FalsifierResult(problem, dimension, n_vars, n_equations, mask, basis)

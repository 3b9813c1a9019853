"""An explicit double Walsh series that converges over squares everywhere
while some diagonal coefficients grow without bound.

The construction takes Walsh indices n_1 < n_2 < ... whose dyadic digits
below m_s are all ones, and weights d_s.  Column beta = n_s of the
coefficient table carries +d_s on the lower half of the alpha-range
[2^floor(log2 n_s), n_s] and -d_s on the upper half, so every column sums
to zero and the square partial sums telescope: each window
n_s < N <= n_{s+1} has a constant value, the sums vanish on the
g^1 = 0 slice, and away from it only finitely many rows contribute.
The diagonal coefficient at n_s is -d_s, so |c_{n_s 1}| / |B_s| can be
made to outgrow any prescribed nonzero sequence B_s.

Verification here is a desk-scale certificate at a finite truncation:
exact window constancy plus the origin identity, never a convergence
proof.  Default instance: n_s = 2^(2s) - 1 (so m_s = 2s), B_s = 1,
d_s = s, the smallest family with the all-ones-low-bits property and
visible growth by s = 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .group import DyadicElement, DyadicPoint, format_element, zero
from .series import SeriesSpec, cubic_sums_upto, series_from_function
from .walsh import lowest_bit, weight


@dataclass(frozen=True)
class IndexSequence:
    """Strictly increasing Walsh indices n_s with all-ones digits below m_s."""

    n_values: tuple[int, ...]
    m_values: tuple[int, ...]

    def __post_init__(self):
        if len(self.n_values) != len(self.m_values) or not self.n_values:
            raise ValueError("need matching nonempty sequences")
        prev_n, prev_m = 0, 0
        for n, m in zip(self.n_values, self.m_values):
            if n <= prev_n:
                raise ValueError("n_s must be strictly increasing")
            if m <= prev_m:
                raise ValueError("m_s must be strictly increasing")
            if m < 1 or (n & ((1 << m) - 1)) != (1 << m) - 1:
                raise ValueError(f"digits of {n} below {m} must all be ones")
            prev_n, prev_m = n, m

    @property
    def depth(self) -> int:
        return len(self.n_values)


@dataclass(frozen=True)
class GrowthSchedule:
    """Nonzero weights d_s against a nonzero reference sequence B_s."""

    B_values: tuple[Fraction, ...]
    d_values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.B_values) != len(self.d_values) or not self.B_values:
            raise ValueError("need matching nonempty sequences")
        if any(b == 0 for b in self.B_values) or any(v == 0 for v in self.d_values):
            raise ValueError("all B_s and d_s must be nonzero")

    def ratio(self, s: int) -> Fraction:
        return abs(self.d_values[s]) / abs(self.B_values[s])


def default_indices(depth: int = 4) -> IndexSequence:
    return IndexSequence(
        tuple((1 << (2 * s)) - 1 for s in range(1, depth + 1)),
        tuple(2 * s for s in range(1, depth + 1)),
    )


def default_schedule(depth: int = 4) -> GrowthSchedule:
    return GrowthSchedule(
        tuple(Fraction(1) for _ in range(depth)),
        tuple(Fraction(s) for s in range(1, depth + 1)),
    )


def _halves(n: int) -> tuple[int, int, int, int]:
    """The two closed alpha-intervals of column n: [L, mid-1] and [mid, n]."""
    L = 1 << (n.bit_length() - 1)
    if (L + n) % 2 == 0:
        raise ValueError("column endpoints must have odd sum")
    mid = (L + n + 1) // 2
    lo_size = mid - L
    hi_size = n - mid + 1
    if lo_size != hi_size or lo_size < 1:
        raise ValueError("column halves must be equal and nonempty")
    return L, mid - 1, mid, n


def build_theorem8_series(idx: IndexSequence, sched: GrowthSchedule) -> SeriesSpec:
    """The two-dimensional coefficient table c_{alpha,beta} of the construction."""
    if idx.depth != len(sched.d_values):
        raise ValueError("index and schedule depths differ")
    rows = {}
    for s, n in enumerate(idx.n_values):
        lo_a, lo_b, hi_a, hi_b = _halves(n)
        rows[n] = (lo_a, lo_b, hi_a, hi_b, sched.d_values[s])

    def coeff(nt):
        alpha, beta = nt
        row = rows.get(beta)
        if row is None:
            return Fraction(0)
        lo_a, lo_b, hi_a, hi_b, d_s = row
        if lo_a <= alpha <= lo_b:
            return d_s
        if hi_a <= alpha <= hi_b:
            return -d_s
        return Fraction(0)

    def items(N):
        Na, Nb = N
        for beta in sorted(rows):
            if beta >= Nb:
                break
            lo_a, lo_b, hi_a, hi_b, d_s = rows[beta]
            for alpha in range(lo_a, min(lo_b, Na - 1) + 1):
                yield (alpha, beta), d_s
            for alpha in range(hi_a, min(hi_b, Na - 1) + 1):
                yield (alpha, beta), -d_s

    bound_rank = idx.n_values[-1].bit_length()
    return series_from_function(2, coeff, bound_rank, items)


def _first_nonzero_digit(g: DyadicElement) -> int | None:
    for t in range(g.rank):
        if (g.bits >> t) & 1:
            return t
    return None if g.tail == 0 else g.rank


def verify_counterexample(
    series: SeriesSpec,
    idx: IndexSequence,
    sched: GrowthSchedule,
    K: int,
    N_max: int,
    g2_rank: int = 8,
    g1_probes: tuple[DyadicElement, ...] = (),
    seed: int = 0,
) -> dict:
    """Desk-scale certificate for the construction at the given truncation.

    (a) S_N(0, g2) = 0 for all N <= N_max over every rank-`g2_rank` g2;
    (b) for probes g1 != 0 with first nonzero digit q-1, the square sums
        are constant in N once every window j >= J = min{j : m_j >= q}
        has opened, with onset no later than n_J + 1;
    (c) the growth ratios |c_{n_s 1}| / |B_s| strictly increase.
    """
    if K < g2_rank:
        raise ValueError("working rank below the probe rank")
    if N_max > (1 << series.bound_rank):
        raise ValueError("truncation too shallow for N_max")
    report: dict = {
        "config": {
            "n_values": list(idx.n_values),
            "m_values": list(idx.m_values),
            "N_max": N_max,
            "K": K,
            "g2_rank": g2_rank,
            "seed": seed,
        },
        "assumption": (
            "finite truncation; window constancy and the origin identity are "
            "certified exactly at this depth, convergence itself is not provable here"
        ),
    }

    origin_failures = []
    g1_zero = zero(K)
    for bits in range(1 << g2_rank):
        g2 = DyadicElement(g2_rank, bits, 0)
        sums = cubic_sums_upto(series, N_max, DyadicPoint((g1_zero, g2)))
        bad = [N for N, v in enumerate(sums, start=1) if v != 0]
        if bad:
            origin_failures.append({"g2": format_element(g2), "first_N": bad[0]})
    report["origin_zero"] = {
        "points_checked": 1 << g2_rank,
        "all_zero": not origin_failures,
        "failures": origin_failures[:5],
    }

    stab = []
    import random

    rng = random.Random(seed)
    g2_samples = [DyadicElement(g2_rank, rng.getrandbits(g2_rank), 0) for _ in range(8)]
    for g1 in g1_probes:
        q0 = _first_nonzero_digit(g1)
        if q0 is None:
            raise ValueError("stabilization probes must be nonzero")
        q = q0 + 1
        J = next(
            (j for j, m in enumerate(idx.m_values, start=1) if m >= q), idx.depth + 1
        )
        onset_bound = idx.n_values[J - 1] + 1 if J <= idx.depth else None
        entry = {
            "g1": format_element(g1),
            "q": q,
            "J": J,
            "onset_bound": onset_bound,
            "constant_after_onset": True,
            "moves_before_onset": False,
        }
        if onset_bound is not None and onset_bound < N_max:
            for g2 in g2_samples:
                sums = cubic_sums_upto(series, N_max, DyadicPoint((g1, g2)))
                tail = sums[onset_bound - 1 :]
                if any(v != tail[0] for v in tail):
                    entry["constant_after_onset"] = False
                if sums[onset_bound - 1] != sums[onset_bound - 2]:
                    entry["moves_before_onset"] = True
        stab.append(entry)
    report["stabilization"] = stab

    ratios = [sched.ratio(s) for s in range(idx.depth)]
    report["growth"] = {
        "table": [
            {
                "s": s + 1,
                "n_s": idx.n_values[s],
                "d_s": str(sched.d_values[s]),
                "ratio": str(ratios[s]),
            }
            for s in range(idx.depth)
        ],
        "strictly_increasing": all(a < b for a, b in zip(ratios, ratios[1:])),
    }
    report["ok"] = (
        report["origin_zero"]["all_zero"]
        and all(e["constant_after_onset"] for e in stab)
        and report["growth"]["strictly_increasing"]
    )
    return report


def cantor_lebesgue_probe(
    series: SeriesSpec,
    probe_indices: tuple[int, ...],
    bound: int | None,
    thresholds: tuple = (),
) -> dict:
    """Tabulate diagonal coefficients |c_{n 1}| along a probe sequence.

    With a finite `bound`, every probe index must have at most `bound`
    nonzero dyadic coefficients (error otherwise); `bound=None` is the
    contrast mode with no restriction.  The report records the assumption
    that the series converges over cubes to a finite sum somewhere of
    positive measure; that hypothesis is not certifiable here.
    """
    for n in probe_indices:
        if n < 0:
            raise ValueError("probe indices must be >= 0")
        if bound is not None and weight(n) > bound:
            raise ValueError(f"probe index {n} has more than {bound} dyadic coefficients")
    d = series.d
    values = [abs(series.coeff((n,) * d)) for n in probe_indices]
    nonincreasing_from = None
    for start in range(len(values)):
        tail = values[start:]
        if all(a >= b for a, b in zip(tail, tail[1:])):
            nonincreasing_from = start
            break
    report = {
        "bound": bound,
        "probes": [
            {"n": n, "weight": weight(n), "abs_c": str(v)}
            for n, v in zip(probe_indices, values)
        ],
        "all_zero": all(v == 0 for v in values),
        "tail_nonincreasing_from": nonincreasing_from,
        "assumption": (
            "the input series is assumed to converge over cubes to a finite sum "
            "on a set of positive measure; this probe only inspects coefficients"
        ),
    }
    if thresholds:
        report["below_thresholds"] = [
            {"threshold": str(t), "holds_from": _first_below(values, t)} for t in thresholds
        ]
    return report


def _first_below(values, t):
    for i in range(len(values)):
        if all(v < t for v in values[i:]):
            return i
    return None

"""Exact arithmetic on the dyadic group and its finite powers.

An element of the group is an infinite 0/1 digit stream g_0, g_1, g_2, ...
added digitwise mod 2 (XOR).  We store the first `rank` digits explicitly
plus a constant `tail` digit for every index >= rank, which is enough to
represent every point this library ever needs exactly: generators e_k,
truncations of arbitrary points, and both preimages (t_-, t_+) of dyadic
rationals under the digit-sum map F to [0, 1].

Digit conventions (important, and easy to get backwards):

* digit index 0 is the *coarsest* digit: F(g) = sum g_k / 2^(k+1);
* the rank-k interval containing g has index m whose binary digits are
  the bit-reversal of g's first k digits: g_t = m_{k-1-t}.  All interval
  and cube indices in this package follow that convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

TAIL_ZEROS = 0
TAIL_ONES = 1


def bit_reverse(x: int, k: int) -> int:
    """Reverse the low k bits of x."""
    r = 0
    for _ in range(k):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@dataclass(frozen=True, eq=False)
class DyadicElement:
    """A point of the dyadic group: `rank` explicit digits plus a constant tail.

    digit(t) = bit t of `bits` for t < rank, else `tail`.  Equality and
    hashing are stream-based: elements of different rank are equal iff
    their digit streams (tails included) agree at every index.
    """

    rank: int
    bits: int
    tail: int = TAIL_ZEROS

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not 0 <= self.bits < (1 << self.rank):
            raise ValueError("bits out of range for rank")
        if self.tail not in (0, 1):
            raise ValueError("tail must be 0 or 1")

    def digit(self, t: int) -> int:
        if t < self.rank:
            return (self.bits >> t) & 1
        return self.tail

    def materialized_bits(self, k: int) -> int:
        """The first k digits as an int mask, tail digits filled in."""
        if k <= self.rank:
            return self.bits & ((1 << k) - 1)
        mask = self.bits
        if self.tail:
            mask |= ((1 << k) - 1) ^ ((1 << self.rank) - 1)
        return mask

    def at_rank(self, k: int) -> "DyadicElement":
        """The same stream re-expressed with k explicit digits (k >= 1)."""
        return DyadicElement(k, self.materialized_bits(k), self.tail)

    def _canonical(self) -> tuple[int, int]:
        # strip explicit top digits that already equal the tail
        bits, tail, k = self.bits, self.tail, self.rank
        while k > 1 and ((bits >> (k - 1)) & 1) == tail:
            k -= 1
            bits &= (1 << k) - 1
        return bits, tail

    def __eq__(self, other):
        if not isinstance(other, DyadicElement):
            return NotImplemented
        k = max(self.rank, other.rank)
        return (
            self.tail == other.tail
            and self.materialized_bits(k) == other.materialized_bits(k)
        )

    def __hash__(self):
        bits, tail = self._canonical()
        return hash((bits, tail))

    def __str__(self):
        return format_element(self)


def from_digits(digits, tail: int = TAIL_ZEROS) -> DyadicElement:
    digits = list(digits)
    if not digits:
        raise ValueError("need at least one digit")
    bits = 0
    for t, g in enumerate(digits):
        if g not in (0, 1):
            raise ValueError("digits must be 0 or 1")
        bits |= g << t
    return DyadicElement(len(digits), bits, tail)


def zero(rank: int = 1) -> DyadicElement:
    return DyadicElement(rank, 0, TAIL_ZEROS)


def all_ones(rank: int = 1) -> DyadicElement:
    return DyadicElement(rank, (1 << rank) - 1, TAIL_ONES)


def generator(k: int) -> DyadicElement:
    """e_k: digit 1 at index k, zero elsewhere."""
    return DyadicElement(k + 1, 1 << k, TAIL_ZEROS)


def dyadic_preimages(t: Fraction) -> tuple[DyadicElement, DyadicElement]:
    """The two group preimages (t_minus, t_plus) of a dyadic rational in (0, 1).

    t_plus carries the terminating expansion (all-zeros tail), t_minus the
    co-terminating one (all-ones tail); F maps both to t.
    """
    if not 0 < t < 1:
        raise ValueError("need a dyadic rational strictly between 0 and 1")
    den = t.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError("not a dyadic rational")
    p = t.numerator
    plus = DyadicElement(k, bit_reverse(p, k), TAIL_ZEROS)
    minus = DyadicElement(k, bit_reverse(p - 1, k), TAIL_ONES)
    return minus, plus


def add_elements(g: DyadicElement, h: DyadicElement) -> DyadicElement:
    """Digitwise XOR, tails included; the group operation is its own inverse."""
    k = max(g.rank, h.rank)
    return DyadicElement(k, g.materialized_bits(k) ^ h.materialized_bits(k), g.tail ^ h.tail)


def to_unit_interval(g: DyadicElement) -> Fraction:
    """F(g) = sum g_k / 2^(k+1), exact; an all-ones tail contributes 2^-rank."""
    total = Fraction(0)
    for t in range(g.rank):
        if (g.bits >> t) & 1:
            total += Fraction(1, 1 << (t + 1))
    if g.tail:
        total += Fraction(1, 1 << g.rank)
    return total


def interval_index(g: DyadicElement, k: int) -> int:
    """Index m of the rank-k interval containing g (bit-reversed digits)."""
    m = 0
    for t in range(k):
        m |= g.digit(t) << (k - 1 - t)
    return m


def stream_shift_eq(g: DyadicElement, h: DyadicElement, s: int) -> bool:
    """Whether g_t = h_{t+s} for every t >= 0, tails included (s >= 0)."""
    if g.tail != h.tail:
        return False
    horizon = max(g.rank, h.rank) + 1
    return all(g.digit(t) == h.digit(t + s) for t in range(horizon))


def contract_eq(g: DyadicElement, q: int, h: DyadicElement, p: int) -> bool:
    """Test the contraction-operator equality C_q(g) = C_p(h).

    For q <= p this holds iff g_t = h_{t+(p-q)} at every index, tails
    included; for q > p the arguments swap roles.
    """
    if q > p:
        g, q, h, p = h, p, g, q
    return stream_shift_eq(g, h, p - q)


@dataclass(frozen=True)
class DyadicPoint:
    """A point of the d-fold group power; components share one rank."""

    components: tuple[DyadicElement, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("dimension must be >= 1")
        k = max(c.rank for c in self.components)
        object.__setattr__(
            self, "components", tuple(c.at_rank(k) for c in self.components)
        )

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def rank(self) -> int:
        return self.components[0].rank

    def __str__(self):
        return ";".join(format_element(c) for c in self.components)


def point(*components: DyadicElement) -> DyadicPoint:
    return DyadicPoint(tuple(components))


def zero_point(d: int, rank: int = 1) -> DyadicPoint:
    return DyadicPoint((zero(rank),) * d)


def add(g: DyadicPoint, h: DyadicPoint) -> DyadicPoint:
    if g.d != h.d:
        raise ValueError("dimension mismatch")
    return DyadicPoint(tuple(add_elements(a, b) for a, b in zip(g.components, h.components)))


@dataclass(frozen=True)
class DyadicCube:
    """Rank-k cube: product of rank-k intervals with index vector m."""

    rank: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be >= 0")
        if not self.index:
            raise ValueError("dimension must be >= 1")
        for m in self.index:
            if not 0 <= m < (1 << self.rank):
                raise ValueError("cube index out of range")

    @property
    def d(self) -> int:
        return len(self.index)


def cube_of(g: DyadicPoint, k: int) -> DyadicCube:
    """The smallest rank-k cube containing g."""
    return DyadicCube(k, tuple(interval_index(c, k) for c in g.components))


def cube_contains(outer: DyadicCube, inner: DyadicCube) -> bool:
    if outer.d != inner.d:
        raise ValueError("dimension mismatch")
    if inner.rank < outer.rank:
        return False
    shift = inner.rank - outer.rank
    return all(mi >> shift == mo for mi, mo in zip(inner.index, outer.index))


def cube_representative(cube: DyadicCube) -> DyadicPoint:
    """The all-zeros-tail point whose first `rank` digits match the cube."""
    k = max(cube.rank, 1)
    return DyadicPoint(
        tuple(DyadicElement(k, bit_reverse(m, cube.rank), TAIL_ZEROS) for m in cube.index)
    )


def measure(cube: DyadicCube) -> Fraction:
    """Normalized Haar measure: 2^(-rank * d)."""
    return Fraction(1, 1 << (cube.rank * cube.d))


def subdivide(cube: DyadicCube) -> list[DyadicCube]:
    """The 2^d rank-(k+1) children, indices 2m + sigma over all sign vectors."""
    out = []
    for sigma in itertools.product((0, 1), repeat=cube.d):
        out.append(
            DyadicCube(cube.rank + 1, tuple(2 * m + s for m, s in zip(cube.index, sigma)))
        )
    return out


@dataclass(frozen=True)
class SignVector:
    """A 0/1 vector sigma with its parity; Sigma^d_2 is the even-parity half."""

    entries: tuple[int, ...]

    def __post_init__(self):
        for s in self.entries:
            if s not in (0, 1):
                raise ValueError("entries must be 0 or 1")

    @property
    def weight(self) -> int:
        return sum(self.entries)

    @property
    def even(self) -> bool:
        return self.weight % 2 == 0


def sign_vectors(d: int) -> list[SignVector]:
    return [SignVector(t) for t in itertools.product((0, 1), repeat=d)]


def even_sign_vectors(d: int) -> list[SignVector]:
    return [s for s in sign_vectors(d) if s.even]


def sign_shift_point(sigma: SignVector, k: int, d: int) -> DyadicPoint:
    """The shift vector (sigma_1 e_k, ..., sigma_d e_k)."""
    if len(sigma.entries) != d:
        raise ValueError("dimension mismatch")
    comps = tuple(generator(k) if s else zero(k + 1) for s in sigma.entries)
    return DyadicPoint(comps)


@dataclass(frozen=True)
class Partition:
    """A split of the coordinate set 0..d-1 into a free block (`lower`, the
    g_* coordinates) and its complement (`upper`, the g^* coordinates)."""

    d: int
    lower: tuple[int, ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if len(set(self.lower)) != len(self.lower):
            raise ValueError("lower coordinates must be distinct")
        for i in self.lower:
            if not 0 <= i < self.d:
                raise ValueError("coordinate out of range")
        if len(self.lower) > self.d - 1:
            raise ValueError("lower block must leave at least one coordinate")

    @property
    def m(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> tuple[int, ...]:
        low = set(self.lower)
        return tuple(j for j in range(self.d) if j not in low)


@dataclass(frozen=True)
class DyadicBox:
    """A dyadic parallelepiped: one (rank, index) interval per coordinate."""

    intervals: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("dimension must be >= 1")
        for k, m in self.intervals:
            if k < 0 or not 0 <= m < (1 << k):
                raise ValueError("bad interval")

    @property
    def d(self) -> int:
        return len(self.intervals)

    @property
    def max_rank(self) -> int:
        return max(k for k, _ in self.intervals)


def box_from_cube(cube: DyadicCube) -> DyadicBox:
    return DyadicBox(tuple((cube.rank, m) for m in cube.index))


def box_cubes(box: DyadicBox, r: int):
    """Iterate the index tuples of all rank-r cubes tiling the box (r >= ranks)."""
    if r < box.max_rank:
        raise ValueError("r below a box side rank")
    ranges = [range(m << (r - k), (m + 1) << (r - k)) for k, m in box.intervals]
    return itertools.product(*ranges)


# -- text forms ---------------------------------------------------------

def format_element(g: DyadicElement) -> str:
    digits = "".join(str((g.bits >> t) & 1) for t in range(g.rank))
    return f"{digits}|{g.tail}"


def parse_element(text: str) -> DyadicElement:
    """Parse the `digits|tailbit` literal, e.g. `0110|0`."""
    try:
        digits, tail = text.split("|")
        return from_digits((int(c) for c in digits), int(tail))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad element literal {text!r}") from exc


def format_point(g: DyadicPoint) -> str:
    return ";".join(format_element(c) for c in g.components)


def parse_point(text: str) -> DyadicPoint:
    """Parse a point literal: element literals joined by `;`."""
    return DyadicPoint(tuple(parse_element(part) for part in text.split(";")))


def format_cube(cube: DyadicCube) -> str:
    return f"{cube.rank}:" + ",".join(str(m) for m in cube.index)


def parse_cube(text: str) -> DyadicCube:
    """Parse the `k:m1,m2,...,md` literal."""
    try:
        k, ms = text.split(":")
        return DyadicCube(int(k), tuple(int(m) for m in ms.split(",")))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"bad cube literal {text!r}") from exc

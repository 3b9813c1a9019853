"""Walsh functions in Paley enumeration and their Dirichlet kernels, exact.

Indices are plain nonnegative Python ints (multi-indices are int tuples);
the dyadic coefficients of an index are its binary digits.  Values of
Walsh functions are the ints +1/-1 and kernel values are exact ints, so
every identity here is testable with bit-exact equality.

The closed-form kernel evaluation follows the binary expansion
N = 2^{k_1} + ... + 2^{k_s} (k_1 > ... > k_s):

    D_N = sum_j R_{k_1} ... R_{k_{j-1}} D_{2^{k_j}},
    D_{2^k}(g) = 2^k if the first k digits of g vanish, else 0,

which also makes the vanishing region explicit: D_N(g) = 0 whenever some
digit of g below k_s is nonzero.  (The literal form of that vanishing
statement elsewhere is off by one; `vanishing_rank` carries the reading
verified by exhaustive summation, see the tests.)
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .group import DyadicElement, DyadicPoint, bit_reverse


def dyadic_coefficient(n: int, k: int) -> int:
    """Digit k of the dyadic expansion of n."""
    return (n >> k) & 1


def weight(n: int) -> int:
    """#n: the number of nonzero dyadic coefficients of n."""
    return n.bit_count()


def lowest_bit(n: int) -> int:
    """Smallest index of a nonzero dyadic coefficient (n >= 1)."""
    if n <= 0:
        raise ValueError("need n >= 1")
    return (n & -n).bit_length() - 1


def bits_descending(n: int) -> list[int]:
    """Exponents k_1 > k_2 > ... of the dyadic expansion of n."""
    return [k for k in range(n.bit_length() - 1, -1, -1) if (n >> k) & 1]


def walsh_eval(n: int, g: DyadicElement) -> int:
    """W_n(g) = prod_k (-1)^(g_k n_k), using tail digits beyond g's rank."""
    if n < 0:
        raise ValueError("index must be >= 0")
    parity = (n & g.bits).bit_count()
    if g.tail:
        parity += (n >> g.rank).bit_count()
    return -1 if parity & 1 else 1


def walsh_eval_multi(n: tuple[int, ...], g: DyadicPoint) -> int:
    """Product of componentwise Walsh values."""
    if len(n) != g.d:
        raise ValueError("dimension mismatch")
    parity = 0
    for nl, c in zip(n, g.components):
        parity += (nl & c.bits).bit_count()
        if c.tail:
            parity += (nl >> c.rank).bit_count()
    return -1 if parity & 1 else 1


def rademacher(k: int, g: DyadicElement) -> int:
    """R_k(g) = (-1)^(g_k), the same function as W_{2^k}."""
    return -1 if g.digit(k) else 1


def in_zero_interval(g: DyadicElement, k: int) -> bool:
    """Whether g lies in the rank-k interval with index 0 (first k digits zero)."""
    return g.materialized_bits(k) == 0


def dirichlet_naive(N: int, g: DyadicElement) -> int:
    """Direct summation of W_0..W_{N-1}; the oracle for the closed form."""
    if N < 1:
        raise ValueError("need N >= 1")
    return sum(walsh_eval(n, g) for n in range(N))


def dirichlet_closed(N: int, g: DyadicElement) -> int:
    """Closed-form kernel value from the binary expansion of N."""
    if N < 1:
        raise ValueError("need N >= 1")
    total = 0
    sign = 1
    for k in bits_descending(N):
        if in_zero_interval(g, k):
            total += sign << k
        if g.digit(k):
            sign = -sign
    return total


def dirichlet_multi(N: tuple[int, ...], g: DyadicPoint) -> int:
    """Product of one-dimensional kernels over the components."""
    if len(N) != g.d:
        raise ValueError("dimension mismatch")
    out = 1
    for Nl, c in zip(N, g.components):
        if Nl < 1:
            raise ValueError("every kernel index must be >= 1")
        out *= dirichlet_closed(Nl, c)
        if out == 0:
            return 0
    return out


def vanishing_rank(N: int) -> int:
    """k_s such that D_N(g) = 0 for every g outside the zero interval of rank k_s.

    k_s is the lowest set bit of N; every summand of the closed form
    vanishes as soon as some digit of g below k_s is 1.
    """
    return lowest_bit(N)


# -- fast partial-sum tables --------------------------------------------

def _fwht_inplace(vals: list, k: int, d: int) -> None:
    """In-place Walsh-Hadamard butterflies along every axis of a 2^k^d grid.

    Flat layout: index = sum_j n_j * 2^(k*(d-1-j)).  Afterwards
    vals[flat(j)] = sum_n c_n * (-1)^(sum_l popcount(n_l & j_l)).
    """
    n = 1 << k
    size = n ** d
    for axis in range(d):
        stride = n ** (d - 1 - axis)
        block = stride * n
        for b in range(k):
            half = stride << b
            step = half << 1
            for base in range(0, size, block):
                for start in range(base, base + stride):
                    for lo in range(start, base + block, step):
                        for i in range(lo, lo + half, stride):
                            j = i + half
                            x, y = vals[i], vals[j]
                            vals[i] = x + y
                            vals[j] = x - y


def fwht_table(series, k: int) -> dict[tuple[int, ...], object]:
    """Rank-k cubic partial sums S_{2^k}(cube) on every rank-k cube.

    Cost O(d * k * 2^(k*d)); agrees entry by entry with naive evaluation
    (the tests cross-check).  Coefficients are read for all n < 2^k * 1.
    """
    d = series.d
    if k > series.bound_rank:
        raise ValueError("coefficients not declared up to 2^k")
    n = 1 << k
    size = n ** d
    vals = [0] * size
    for idx, nt in enumerate(_flat_indices(n, d)):
        vals[idx] = series.coeff(nt)
    # the transform is linear: clear rational denominators, run on ints,
    # and divide back out (a large speedup for exact coefficients)
    scale = 1
    if any(isinstance(v, Fraction) for v in vals):
        from math import lcm

        scale = lcm(*(v.denominator for v in vals if isinstance(v, Fraction)))
        vals = [
            int(v * scale) if isinstance(v, Fraction) else v * scale for v in vals
        ]
    _fwht_inplace(vals, k, d)
    if scale != 1:
        vals = [Fraction(v, scale) for v in vals]
    table = {}
    for m in _flat_indices(n, d):
        j = tuple(bit_reverse(mi, k) for mi in m)
        flat = 0
        for jl in j:
            flat = flat * n + jl
        table[m] = vals[flat]
    return table


def _flat_indices(n: int, d: int):
    return itertools.product(range(n), repeat=d)

"""Exact elimination: known solutions, determinism, nullspace correctness."""

import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from dyadicwalsh.linalg import nullspace, rref


def F(x):
    return Fraction(x)


class TestRref:
    def test_identity_like(self):
        rows = [[F(2), F(0)], [F(0), F(3)]]
        pivots = rref(rows, 2)
        assert pivots == [0, 1]
        assert rows[0] == [F(1), F(0)] and rows[1] == [F(0), F(1)]

    def test_dependent_rows(self):
        rows = [[F(1), F(2), F(3)], [F(2), F(4), F(6)], [F(0), F(1), F(1)]]
        pivots = rref(rows, 3)
        assert len(pivots) == 2

    def test_deterministic(self):
        base = [[F(3), F(1)], [F(2), F(5)], [F(6), F(2)]]
        a = [list(r) for r in base]
        b = [list(r) for r in base]
        rref(a, 2)
        rref(b, 2)
        assert a == b


class TestNullspace:
    def test_zero_map_full_space(self):
        basis = nullspace([[F(0), F(0)]], 2)
        assert len(basis) == 2

    def test_known_kernel(self):
        # x + y + z = 0, y - z = 0  ->  kernel spanned by (-2, 1, 1)
        rows = [[F(1), F(1), F(1)], [F(0), F(1), F(-1)]]
        basis = nullspace(rows, 3)
        assert len(basis) == 1
        v = basis[0]
        assert v[0] + v[1] + v[2] == 0 and v[1] == v[2] and v != [0, 0, 0]

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_basis_vectors_annihilate(self, seed):
        rng = random.Random(seed)
        nrows, ncols = rng.randint(1, 5), rng.randint(1, 6)
        rows = [
            [Fraction(rng.randint(-4, 4), rng.choice((1, 2, 3))) for _ in range(ncols)]
            for _ in range(nrows)
        ]
        basis = nullspace([list(r) for r in rows], ncols)
        for v in basis:
            for row in rows:
                assert sum(a * b for a, b in zip(row, v)) == 0
        work = [list(r) for r in rows]
        rank = len(rref(work, ncols))
        assert len(basis) == ncols - rank

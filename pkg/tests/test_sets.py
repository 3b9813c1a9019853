"""Membership, cosets, relation probes, and the rasterizer."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadicwalsh import group as G
from dyadicwalsh import sets as X
from dyadicwalsh import walsh as W

IN, OUT, UND = X.Membership.IN, X.Membership.OUT, X.Membership.UNDETERMINED


def rand_point(rng, d, rank=8, tails=True):
    return G.DyadicPoint(
        tuple(
            G.DyadicElement(rank, rng.getrandbits(rank), rng.getrandbits(1) if tails else 0)
            for _ in range(d)
        )
    )


def family_zoo(d=2):
    part0 = G.Partition(d, ())
    return [
        X.DiagonalPlane(part0),
        X.ShiftedDiagonal(part0, (0, 1) + (0,) * (d - 2)),
        X.CoordinatePlane(G.Partition(d, (d - 1,))),
        X.DirichletSet(d, ((1,) * d, (2,) * d)),
        X.PowerDirichletProduct(G.Partition(d, (d - 1,)), (0, 2)),
        X.FiniteUnion(d, (X.DiagonalPlane(part0), X.CoordinatePlane(G.Partition(d, (d - 1,))))),
    ]


class TestMembershipExamples:
    def test_diagonal(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        e0, e1 = G.generator(0), G.generator(1)
        assert X.membership(d0, G.point(e0, e0), 8) is IN
        assert X.membership(d0, G.point(e0, e1), 8) is OUT

    def test_coordinate_plane(self):
        p1 = X.CoordinatePlane(G.Partition(2, (1,)))
        assert X.membership(p1, G.point(G.zero(1), G.generator(3)), 8) is IN
        assert X.membership(p1, G.point(G.generator(0), G.zero(1)), 8) is OUT

    def test_shifted_diagonal_alignment(self):
        q01 = X.ShiftedDiagonal(G.Partition(2, ()), (0, 1))
        g1 = G.from_digits([1, 0, 1, 1])
        g2 = G.from_digits([0, 1, 0, 1, 1])  # g2_{k+1} = g1_k
        assert X.membership(q01, G.point(g1, g2), 8) is IN
        assert X.membership(q01, G.point(g1, g1), 8) is OUT

    def test_dirichlet_gate(self):
        spec = X.DirichletSet(2, ((1, 1), (16, 16)))
        g = G.point(G.generator(1), G.generator(1))
        # at rank 3 the second condition is out of reach
        assert X.membership(spec, g, 3) is UND
        assert X.membership(spec, g, 5) is IN
        bad = G.point(G.generator(0), G.zero(1))
        assert X.membership(spec, bad, 3) is OUT  # first condition already fails

    def test_whole_and_empty(self):
        rng = random.Random(0)
        g = rand_point(rng, 2)
        assert X.membership(X.whole_group(2), g, 4) is IN
        assert X.membership(X.empty_set(2), g, 4) is OUT

    def test_union(self):
        u = X.FiniteUnion(
            2,
            (
                X.CoordinatePlane(G.Partition(2, (1,))),
                X.CoordinatePlane(G.Partition(2, (0,))),
            ),
        )
        assert X.membership(u, G.point(G.zero(1), G.generator(2)), 8) is IN
        assert X.membership(u, G.point(G.generator(2), G.zero(1)), 8) is IN
        assert X.membership(u, G.point(G.generator(2), G.generator(2)), 8) is OUT

    def test_fd_placeholder_errors(self):
        with pytest.raises(NotImplementedError):
            X.fd_placeholder()


class TestCoset:
    def test_zero_shift_collapses(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        assert X.coset(d0, G.zero_point(2)) is d0

    def test_double_shift_is_identity(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        x = G.point(G.generator(1), G.all_ones())
        assert X.coset(X.coset(d0, x), x) is d0

    def test_anti_diagonal(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        anti = X.coset(d0, G.point(G.zero(1), G.all_ones()))
        g = G.from_digits([1, 0, 0, 1])
        assert X.membership(anti, G.point(g, G.add_elements(g, G.all_ones())), 8) is IN
        assert X.membership(anti, G.point(g, g), 8) is OUT

    def test_coset_law_randomized(self):
        rng = random.Random(1)
        for spec in family_zoo():
            for _ in range(40):
                x = rand_point(rng, 2)
                g = rand_point(rng, 2)
                lhs = X.membership(X.coset(spec, x), g, 6)
                rhs = X.membership(spec, G.add(g, x), 6)
                assert lhs is rhs


class TestRankMonotonicity:
    def test_in_out_stable_undetermined_resolves(self):
        rng = random.Random(2)
        specs = family_zoo() + [
            X.coset(s, rand_point(rng, 2, rank=4)) for s in family_zoo()
        ]
        for spec in specs:
            for _ in range(30):
                g = rand_point(rng, 2)
                results = [X.membership(spec, g, r) for r in range(1, 9)]
                for earlier, later in zip(results, results[1:]):
                    if earlier is not UND:
                        assert later is earlier


class TestSubgroupStructure:
    def test_dirichlet_sets_are_subgroups(self):
        # closure under the group operation and containing zero, rank-4 grid
        spec = X.DirichletSet(2, ((3, 1), (4, 4)))
        assert X.membership(spec, G.zero_point(2), 4) is IN
        members = [
            G.DyadicPoint(
                (G.DyadicElement(4, b1, 0), G.DyadicElement(4, b2, 0))
            )
            for b1 in range(16)
            for b2 in range(16)
            if X.membership(
                spec,
                G.DyadicPoint((G.DyadicElement(4, b1, 0), G.DyadicElement(4, b2, 0))),
                4,
            )
            is IN
        ]
        assert members
        for g in members[:12]:
            for h in members[-12:]:
                assert X.membership(spec, G.add(g, h), 4) is IN


class TestSubsetChecks:
    def test_diagonals_nest(self):
        # the full diagonal lies inside every partial diagonal (d = 3)
        d0 = X.DiagonalPlane(G.Partition(3, ()))
        for lower in ((0,), (1,), (2,)):
            dm = X.DiagonalPlane(G.Partition(3, lower))
            ok, witness = X.subset_check(d0, dm, 3)
            assert ok, witness

    def test_diagonal_inside_power_dirichlet(self):
        d1 = X.DiagonalPlane(G.Partition(3, (2,)))
        wd = X.PowerDirichletProduct(G.Partition(3, (2,)), tuple(range(4)))
        ok, witness = X.subset_check(d1, wd, 4)
        assert ok, witness

    def test_violation_reports_witness(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        p1 = X.CoordinatePlane(G.Partition(2, (1,)))
        ok, witness = X.subset_check(d0, p1, 3)
        assert not ok and witness is not None
        assert X.membership(d0, witness, 3) is IN
        assert X.membership(p1, witness, 3) is OUT

    def test_sampled_mode(self):
        d0 = X.DiagonalPlane(G.Partition(3, ()))
        dm = X.DiagonalPlane(G.Partition(3, (0,)))
        ok, _ = X.subset_check(d0, dm, 16, samples=2000, seed=5)
        assert ok

    def test_corollary_equivalence_digit_level(self):
        # dual route: Rademacher products against the contraction test
        for q in (1, 2, 3):
            for b1 in range(16):
                for b2 in range(16):
                    g1 = G.DyadicElement(4, b1, 0)
                    g2 = G.DyadicElement(4 + q, b2 << q, 0)
                    lhs = all(
                        W.rademacher(i - 1, g1) * W.rademacher(i - 1 + q, g2) == 1
                        for i in range(1, 5)
                    )
                    rhs = all(g1.digit(k) == g2.digit(k + q) for k in range(4))
                    assert lhs == rhs

    def test_wd_sequence_matches_shifted_diagonal(self):
        # WD^2 over N_i = (2^{i-1}, 2^{i-1+q}) against the shifted diagonal
        rank, q = 6, 2
        wd = X.DirichletSet(
            2, tuple((1 << (i - 1), 1 << (i - 1 + q)) for i in range(1, rank - q + 1))
        )
        q0q = X.ShiftedDiagonal(G.Partition(2, ()), (0, q))
        ok, witness = X.subset_check(q0q, wd, rank)
        assert ok, witness
        # points aligned through the full window are in both
        rng = random.Random(6)
        for _ in range(50):
            bits = rng.getrandbits(rank)
            g1 = G.DyadicElement(rank, bits, 0)
            g2 = G.DyadicElement(rank + q, (bits << q) | rng.getrandbits(q), 0)
            g = G.point(g1, g2)
            assert X.membership(q0q, g, rank) is IN
            assert X.membership(wd, g, rank) is IN


class TestDisjointness:
    def test_diagonal_vs_anti_diagonal(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        anti = X.coset(d0, G.point(G.zero(1), G.all_ones()))
        for rank in (2, 3, 4):
            ok, _ = X.pairwise_disjoint([d0, anti], rank)
            assert ok

    def test_set_with_itself(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        ok, witness = X.pairwise_disjoint([d0, d0], 2)
        assert not ok and witness is not None

    def test_cross_intersects(self):
        eta, xi = G.generator(0), G.generator(1)
        line1 = X.coset(X.CoordinatePlane(G.Partition(2, (1,))), G.point(eta, G.zero(1)))
        line2 = X.coset(X.CoordinatePlane(G.Partition(2, (0,))), G.point(G.zero(1), xi))
        ok, witness = X.pairwise_disjoint([line1, line2], 4)
        assert not ok
        assert X.membership(line1, witness, 4) is IN
        assert X.membership(line2, witness, 4) is IN


class TestRasterize:
    def test_diagonal_cells_oracle(self):
        # a rank-3 cell meets the diagonal iff its two interval indices agree
        # (digits below 3 must match; beyond 3 both coordinates are free)
        bm = X.rasterize(X.DiagonalPlane(G.Partition(2, ())), 3)
        got = {(c, 7 - r) for r in range(8) for c in range(8) if bm[r][c] == 255}
        assert got == {(m, m) for m in range(8)}
        assert all(v in (0, 255) for row in bm for v in row)

    def test_coordinate_plane_coset_column(self):
        _, tp = G.dyadic_preimages(Fraction(1, 2))
        p1 = X.CoordinatePlane(G.Partition(2, (1,)))
        spec = X.coset(p1, G.point(tp, G.zero(1)))
        bm = X.rasterize(spec, 3)
        on = {(c, 7 - r) for r in range(8) for c in range(8) if bm[r][c] == 255}
        assert on == {(4, m) for m in range(8)}

    def test_whole_group_all_set(self):
        bm = X.rasterize(X.whole_group(2), 3)
        assert all(v == 255 for row in bm for v in row)

    def test_empty_all_clear(self):
        bm = X.rasterize(X.empty_set(2), 3)
        assert all(v == 0 for row in bm for v in row)

    def test_straddling_condition_renders_undetermined(self):
        spec = X.DirichletSet(2, ((8, 8),))
        bm = X.rasterize(spec, 2)
        assert all(v == 128 for row in bm for v in row)

    def test_determinism(self):
        spec = X.ShiftedDiagonal(G.Partition(2, ()), (0, 1))
        a = X.to_pgm(X.rasterize(spec, 5))
        b = X.to_pgm(X.rasterize(spec, 5))
        assert a == b

    def test_pgm_header(self):
        data = X.to_pgm(X.rasterize(X.whole_group(2), 2))
        assert data.startswith(b"P5\n4 4\n255\n")
        assert len(data) == len(b"P5\n4 4\n255\n") + 16

    def test_slice_defaults_to_zero(self):
        # with the third coordinate pinned to 0, the d = 3 diagonal slice is
        # the zero cell row/column intersection: only cell (0, 0) survives
        d0 = X.DiagonalPlane(G.Partition(3, ()))
        bm = X.rasterize(d0, 2)
        on = {(c, 3 - r) for r in range(4) for c in range(4) if bm[r][c] == 255}
        assert on == {(0, 0)}

    def test_chain_conflict_through_free_digits(self):
        # all four coordinates equal, two fixed at conflicting values: no cell
        # can meet the set even though the varying digits are free
        d0 = X.DiagonalPlane(G.Partition(4, ()))
        zero, ones = G.DyadicElement(1, 0, 0), G.all_ones()
        bm = X.rasterize(d0, 2, (zero, ones))
        assert all(v == 0 for row in bm for v in row)
        bm2 = X.rasterize(d0, 2, (zero, zero))
        on = {(c, 3 - r) for r in range(4) for c in range(4) if bm2[r][c] == 255}
        assert on == {(0, 0)}


class TestLukomskii:
    def test_layer_membership_smoke(self):
        layer = X.LukomskiiLayer(1, 2)
        # i=1: first factor condition reads digit 0; N ranges over [2, 8)
        g = G.point(G.zero(4), G.zero(4))
        res = X.membership(layer, g, 4)
        assert res in (IN, OUT, UND)

    def test_default_pairing_round_robin(self):
        layer = X.LukomskiiLayer(2, 4)
        pairs = [layer.rectangle_of(N) for N in layer.n_range()]
        js = {j for j, _ in pairs}
        ks = {k for _, k in pairs}
        assert js <= set(range(2)) and ks <= set(range(8))

    def test_custom_pairing_injectable(self):
        layer = X.LukomskiiLayer(1, 2, pairing=lambda i, m, N: (0, 0))
        assert layer.rectangle_of(5) == (0, 0)

    def test_raster_runs(self):
        bm = X.rasterize(X.LukomskiiLayer(1, 2), 4)
        values = {v for row in bm for v in row}
        assert values <= {0, 128, 255}


class TestJson:
    def test_round_trips(self):
        rng = random.Random(7)
        specs = family_zoo() + [
            X.coset(X.DiagonalPlane(G.Partition(2, ())), rand_point(rng, 2, 4)),
            X.LukomskiiLayer(2, 4),
            X.empty_set(2),
        ]
        for spec in specs:
            blob = X.set_to_json(spec)
            again = X.set_from_json(blob)
            assert X.set_to_json(again) == blob
            g = rand_point(rng, 2)
            assert X.membership(again, g, 5) is X.membership(spec, g, 5)

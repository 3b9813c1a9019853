"""Identity harness: grids, the shifted-point search, trends, the falsifier."""

import itertools
import random
from fractions import Fraction

import pytest

from dyadicwalsh import group as G
from dyadicwalsh import series as S
from dyadicwalsh import sets as X
from dyadicwalsh import verify as V


class TestLemma1:
    def test_zero_series(self):
        sp = S.series_from_coeffs(2, {}, 6)
        lhs, rhs = V.lemma1_sides(sp, G.zero_point(2), 6, 7)
        assert lhs == rhs == 0

    def test_base_case_reads_single_coefficient(self):
        # M1 = M2 = 2: the right side is 2^(d-1) c_{(2,2)} W_{(2,2)}(g)
        c = Fraction(-5, 2)
        sp = S.series_from_coeffs(2, {(2, 2): c, (1, 3): Fraction(7)}, 3)
        rng = random.Random(0)
        for _ in range(20):
            g = V.random_point(rng, 2, 5, random_tails=True)
            lhs, rhs = V.lemma1_sides(sp, g, 2, 2)
            assert lhs == rhs
            from dyadicwalsh.walsh import walsh_eval_multi

            assert rhs == 2 * c * walsh_eval_multi((2, 2), g)

    def test_two_level_case(self):
        rng = random.Random(1)
        coeffs = {
            (a, b): Fraction(rng.randint(-9, 9), rng.choice((1, 2, 3)))
            for a in range(9)
            for b in range(9)
        }
        sp = S.series_from_coeffs(2, coeffs, 4)
        for _ in range(10):
            g = V.random_point(rng, 2, 6, random_tails=True)
            lhs, rhs = V.lemma1_sides(sp, g, 6, 7)
            assert lhs == rhs

    def test_malformed_window_rejected(self):
        sp = S.series_from_coeffs(2, {}, 6)
        with pytest.raises(ValueError):
            V.lemma1_sides(sp, G.zero_point(2), 6, 9)  # r = 3 >= 2^{k_l} = 2

    def test_grid_small(self):
        report = V.lemma1_grid(2, series_count=4, points_each=3, seed=2, k1_max=3, l_max=2)
        assert report.ok and report.total == 12

    def test_grid_detects_broken_identity(self):
        # corrupt one cell by hand: the report must carry both values
        report = V.IdentityReport("demo")
        assert not report.record({"cell": 1}, Fraction(1), Fraction(2))
        assert report.mismatches == 1
        assert report.cells[0]["lhs"] == "1" and report.cells[0]["rhs"] == "2"


class TestLemma2Search:
    def test_full_cube_any_point(self):
        K, d = 5, 2
        delta = G.DyadicCube(1, (0, 0))
        cells = {
            (a, b) for a in range(16) for b in range(16)
        }
        pt = V.lemma2_search(cells, K, d, delta, [3])
        assert pt is not None

    def test_dented_cube_finds_point(self):
        # E = the cube minus one rank-K cell; density far above the threshold
        K, d = 6, 2
        delta = G.DyadicCube(1, (0, 0))
        span = K - 1
        cells = {(a, b) for a in range(1 << span) for b in range(1 << span)}
        cells.discard((3, 7))
        pt = V.lemma2_search(cells, K, d, delta, [4])
        assert pt is not None
        # certify the returned point's full orbit
        m = G.cube_of(pt, K).index
        for mask in range(4):
            shifted = list(m)
            for j in range(2):
                if (mask >> j) & 1:
                    shifted[j] ^= 1 << (K - 1 - 4)
            assert tuple(shifted) in cells

    def test_sparse_cell_not_found_is_a_value(self):
        K, d = 5, 2
        delta = G.DyadicCube(1, (0, 0))
        pt = V.lemma2_search({(0, 0)}, K, d, delta, [3])
        assert pt is None

    def test_two_level_orbit(self):
        K, d = 6, 2
        delta = G.DyadicCube(0, (0, 0))
        cells = {(a, b) for a in range(1 << K) for b in range(1 << K)}
        cells.discard((1, 1))
        pt = V.lemma2_search(cells, K, d, delta, [5, 3])
        assert pt is not None

    def test_shift_digit_guard(self):
        with pytest.raises(ValueError):
            V.lemma2_search({(0, 0)}, 4, 2, G.DyadicCube(0, (0, 0)), [4])


class TestTkDecomposition:
    def test_zero_series(self):
        sp = S.series_from_coeffs(2, {}, 5)
        part = G.Partition(2, (1,))
        lhs, rhs = V.tk_sides(sp, G.zero_point(1), G.zero_point(1), 3, 1, part)
        assert lhs == rhs == 0

    def test_dense_random_d2(self):
        rng = random.Random(3)
        coeffs = {
            (a, b): rng.randint(-4, 4) for a in range(10) for b in range(10)
        }
        sp = S.series_from_coeffs(2, coeffs, 5)
        part = G.Partition(2, (0,))
        tau = S.quasimeasure_from_series(sp, 5)
        seen_nonzero = False
        for k in (1, 2, 3, 4):
            for s in (1, 2):
                if s > k:
                    continue
                eta = V.random_point(rng, 1, k + 1)
                xi = V.random_point(rng, 1, k + 1)
                lhs, rhs = V.tk_sides(sp, eta, xi, k, s, part, tau)
                assert lhs == rhs
                seen_nonzero = seen_nonzero or lhs != 0
        assert seen_nonzero

    def test_d3_both_blocks(self):
        rng = random.Random(4)
        sp = V.random_series(rng, 3, 4, 20, integral=True)
        tau = S.quasimeasure_from_series(sp, 4)
        for m in (1, 2):
            part = G.Partition(3, tuple(range(m)))
            eta = V.random_point(rng, 3 - m, 4)
            xi = V.random_point(rng, m, 4)
            lhs, rhs = V.tk_sides(sp, eta, xi, 3, 1, part, tau)
            assert lhs == rhs

    def test_rank_guards(self):
        sp = S.series_from_coeffs(2, {}, 3)
        part = G.Partition(2, (1,))
        with pytest.raises(ValueError):
            V.tk_sides(sp, G.zero_point(1), G.zero_point(1), 2, 3, part)
        with pytest.raises(ValueError):
            V.tk_sides(sp, G.zero_point(1), G.zero_point(1), 4, 1, part)

    def test_grid(self):
        report = V.tk_grid(2, series_count=3, seed=5, k_max=3)
        assert report.ok and report.total == 3 * 5


class TestFunctionalTrend:
    def test_haar_rademacher_zero(self):
        tau = S.quasimeasure_from_series(S.constant_series(2, Fraction(1)), 5)
        out = V.functional_trend(
            tau,
            "rademacher",
            partition=G.Partition(2, (1,)),
            delta_star=G.DyadicCube(1, (0,)),
            xi=G.zero_point(1),
        )
        assert out["all_zero_from"] == 0

    def test_point_mass_reproduces_contradiction_bound(self):
        pt = G.point(G.generator(0), G.from_digits([1, 1, 0]))
        tau = S.quasimeasure_from_masses(2, 6, [(pt, Fraction(3))])
        out = V.functional_trend(
            tau,
            "rademacher",
            partition=G.Partition(2, (1,)),
            delta_star=G.DyadicCube(0, (0,)),
            xi=G.point(G.from_digits([1, 1, 0])),
        )
        values = [abs(Fraction(v)) for _, v in out["values"]]
        assert values == [(1 << k) * 3 for k, _ in out["values"]]

    def test_finite_series_walsh_vanishes_beyond_support(self):
        sp = S.series_from_coeffs(2, {(1, 1): Fraction(2)}, 5)
        tau = S.quasimeasure_from_series(sp, 5)
        out = V.functional_trend(
            tau, "walsh", n_sequence=(2, 4, 8, 16), cube=G.DyadicCube(0, (0, 0)),
            weight_bound=1,
        )
        assert out["all_zero_from"] == 0

    def test_subsequence_parameter(self):
        tau = S.quasimeasure_from_series(S.constant_series(2, Fraction(1)), 6)
        out = V.functional_trend(
            tau,
            "rademacher",
            partition=G.Partition(2, (1,)),
            delta_star=G.DyadicCube(1, (0,)),
            xi=G.zero_point(1),
            k_sequence=(2, 4),
        )
        assert [k for k, _ in out["values"]] == [2, 4]

    def test_low_bit_property_enforced(self):
        tau = S.quasimeasure_from_series(S.constant_series(2, Fraction(1)), 5)
        with pytest.raises(ValueError):
            V.functional_trend(
                tau, "walsh", n_sequence=(8, 2), cube=G.DyadicCube(0, (0, 0))
            )

    def test_weight_bound_enforced(self):
        tau = S.quasimeasure_from_series(S.constant_series(2, Fraction(1)), 5)
        with pytest.raises(ValueError):
            V.functional_trend(
                tau, "walsh", n_sequence=(3, 7), cube=G.DyadicCube(0, (0, 0)),
                weight_bound=1,
            )


class TestFalsifier:
    def test_empty_set_dimension_zero(self):
        res = V.uset_falsify(X.empty_set(2), 3, V.FalsifierConstraints())
        assert res.dimension == 0 and res.n_vars == 0

    def test_whole_group_unconstrained(self):
        res = V.uset_falsify(X.whole_group(2), 3, V.FalsifierConstraints())
        assert res.dimension == 64 == res.n_vars

    def test_diagonal_regression_dims(self):
        # frozen regression values for the diagonal at K = 3
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        dims = [
            V.uset_falsify(d0, 3, V.FalsifierConstraints(rademacher_kmax=kmax)).dimension
            for kmax in (0, 1, 2)
        ]
        assert dims == [8, 6, 2]

    def test_monotone_under_constraints(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        prev = None
        for kmax in range(4):
            res = V.uset_falsify(d0, 4, V.FalsifierConstraints(rademacher_kmax=kmax))
            if prev is not None:
                assert res.dimension <= prev
            prev = res.dimension

    def test_basis_elements_verified_independently(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        res = V.uset_falsify(d0, 3, V.FalsifierConstraints(rademacher_kmax=1))
        assert res.basis
        for tau in res.basis:
            ok, violation = S.check_additivity(tau)
            assert ok, violation
            assert S.support_mask(tau).cells <= set(res.mask)

    def test_walsh_constraints(self):
        d0 = X.DiagonalPlane(G.Partition(2, ()))
        res = V.uset_falsify(d0, 3, V.FalsifierConstraints(walsh_indices=(3,)))
        assert res.dimension == 0

    def test_size_guard(self):
        with pytest.raises(ValueError):
            V.uset_falsify(X.whole_group(2), 7, V.FalsifierConstraints())

    def test_report_notes_exploratory(self):
        res = V.uset_falsify(X.empty_set(2), 2, V.FalsifierConstraints())
        assert "evidence, not proof" in res.note
        assert res.to_dict()["dimension"] == 0

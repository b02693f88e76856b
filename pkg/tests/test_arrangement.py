import math

import numpy as np
import pytest

from pathcvx import (
    Dataset,
    enumerate_patterns,
    exact_region_count,
    pattern_bound,
    witness,
)
from pathcvx.arrangement import _enum_signs, _enum_signs_lp, _rowspace
from pathcvx.errors import BudgetExceeded, DegenerateRow, DomainError


def sampled_mask_oracle(X, budget, seed):
    """Independent saturated-sampling oracle: dedup masks of random witnesses."""
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((budget, X.shape[1]))
    masks = (W @ X.T) >= 0.0
    return {m.tobytes() for m in np.unique(masks, axis=0)}


def mask_set(ps):
    return {p.mask.tobytes() for p in ps.patterns}


class TestEnumerateExamples:
    def test_identity_matrix_all_four_patterns(self):
        data = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        ps = enumerate_patterns(data, "exact", 100, 0)
        assert sorted(p.mask_string() for p in ps.patterns) == ["00", "01", "10", "11"]
        # the stated oracle: dedup over 1e5 random Gaussian witnesses
        assert mask_set(ps) == sampled_mask_oracle(data.X, 100_000, 0)

    def test_collinear_rows_share_sign(self):
        data = Dataset(np.array([[1.0], [2.0]]), np.zeros(2))
        ps = enumerate_patterns(data, "exact", 100, 0)
        assert sorted(p.mask_string() for p in ps.patterns) == ["00", "11"]

    def test_generic_n50_d3_region_count(self):
        rng = np.random.default_rng(7)
        data = Dataset(rng.standard_normal((50, 3)), np.zeros(50))
        ps = enumerate_patterns(data, "exact", 10_000, 0)
        expected = 2 * (math.comb(49, 0) + math.comb(49, 1) + math.comb(49, 2))
        assert expected == 2452
        assert len(ps) == expected
        # saturated sampling only ever finds patterns the exact set contains
        assert sampled_mask_oracle(data.X, 100_000, 1) <= mask_set(ps)


class TestPatternBound:
    def test_arithmetic_values(self):
        assert pattern_bound(2, 2) == pytest.approx(7.3890560989306495, rel=1e-12)
        assert pattern_bound(2, 1) == pytest.approx(5.43656365691809, rel=1e-12)
        assert pattern_bound(50, 3) == pytest.approx(525120.7407724678, rel=1e-10)

    def test_observed_counts_below_bound(self):
        assert 4 <= pattern_bound(2, 2)
        assert 2 <= pattern_bound(2, 1)
        assert 2452 <= pattern_bound(50, 3)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            pattern_bound(1, 1)
        with pytest.raises(DomainError):
            pattern_bound(10, 0)


class TestWitness:
    def test_both_rows_active(self):
        data = Dataset(np.array([[1.0], [2.0]]), np.zeros(2))
        w = witness(np.array([True, True]), data)
        assert w is not None and w[0] > 0

    def test_infeasible_split_of_collinear_rows(self):
        data = Dataset(np.array([[1.0], [2.0]]), np.zeros(2))
        assert witness(np.array([True, False]), data) is None

    def test_identity_split(self):
        data = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        w = witness(np.array([True, False]), data)
        np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-9)


class TestInvariants:
    def test_witness_validity(self):
        rng = np.random.default_rng(3)
        data = Dataset(rng.standard_normal((12, 3)), np.zeros(12))
        ps = enumerate_patterns(data, "exact", 10_000, 0)
        for p in ps.patterns:
            margins = data.X @ p.witness
            live = np.abs(margins) > 1e-12
            assert np.all((margins[live] >= 0) == p.mask[live])
            assert live.all()  # exact-mode witnesses are strict everywhere

    def test_monotone_saturation(self):
        rng = np.random.default_rng(5)
        data = Dataset(rng.standard_normal((8, 3)), np.zeros(8))
        exact = len(enumerate_patterns(data, "exact", 10_000, 0))
        counts = [len(enumerate_patterns(data, "sampled", b, 11))
                  for b in (10, 100, 1_000, 10_000, 100_000)]
        assert counts == sorted(counts)
        assert counts[-1] == exact

    def test_bound_compliance(self):
        rng = np.random.default_rng(9)
        for n, d in [(6, 2), (10, 3), (15, 2)]:
            data = Dataset(rng.standard_normal((n, d)), np.zeros(n))
            ps = enumerate_patterns(data, "exact", 100_000, 0)
            assert len(ps) <= exact_region_count(n, ps.rank_r)
            assert len(ps) <= pattern_bound(n, ps.rank_r)

    def test_determinism(self):
        rng = np.random.default_rng(13)
        data = Dataset(rng.standard_normal((9, 3)), np.zeros(9))
        for mode, budget in (("exact", 10_000), ("sampled", 5_000)):
            a = enumerate_patterns(data, mode, budget, 42)
            b = enumerate_patterns(data, mode, budget, 42)
            assert [p.mask_string() for p in a.patterns] == \
                [p.mask_string() for p in b.patterns]
            np.testing.assert_array_equal(a.witnesses(), b.witnesses())

    def test_canonical_lexicographic_order(self):
        rng = np.random.default_rng(1)
        data = Dataset(rng.standard_normal((7, 2)), np.zeros(7))
        for mode in ("exact", "sampled"):
            ps = enumerate_patterns(data, mode, 10_000, 0)
            strings = [p.mask_string() for p in ps.patterns]
            assert strings == sorted(strings)
            assert len(set(strings)) == len(strings)


class TestErrors:
    def test_budget_exceeded(self):
        rng = np.random.default_rng(2)
        data = Dataset(rng.standard_normal((30, 3)), np.zeros(30))
        with pytest.raises(BudgetExceeded):
            enumerate_patterns(data, "exact", 10, 0)

    def test_zero_row_exact_mode(self):
        data = Dataset(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros(2))
        with pytest.raises(DegenerateRow):
            enumerate_patterns(data, "exact", 100, 0)

    def test_zero_row_sampled_mode_flagged(self):
        data = Dataset(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros(2))
        ps = enumerate_patterns(data, "sampled", 1000, 0)
        assert len(ps) >= 1
        assert all(p.degenerate for p in ps.patterns)
        assert all(p.mask[1] for p in ps.patterns)  # zero row reads >= 0

    def test_bad_mode_and_budget(self):
        data = Dataset(np.array([[1.0]]), np.zeros(1))
        with pytest.raises(DomainError):
            enumerate_patterns(data, "best", 10, 0)
        with pytest.raises(DomainError):
            enumerate_patterns(data, "exact", 0, 0)


class TestEnumeratorRoutes:
    def test_fast_path_matches_lp_certified_path(self):
        rng = np.random.default_rng(21)
        for n, d in [(6, 2), (5, 3), (9, 2), (7, 3)]:
            X = rng.standard_normal((n, d))
            rows, _, _ = _rowspace(X)
            fast, _ = _enum_signs(rows)
            slow, _ = _enum_signs_lp(rows)
            assert sorted(s.tobytes() for s in fast) == \
                sorted(s.tobytes() for s in slow)

    def test_rank_deficient_data(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal((8, 2))
        lift = rng.standard_normal((2, 5))
        data = Dataset(base @ lift, np.zeros(8))  # rank 2 in 5 columns
        ps = enumerate_patterns(data, "exact", 10_000, 0)
        assert ps.rank_r == 2
        assert len(ps) <= exact_region_count(8, 2)
        assert mask_set(ps) >= sampled_mask_oracle(data.X, 50_000, 3)

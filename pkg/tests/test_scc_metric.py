"""
Tests for the stratum-adjusted correlation coefficient and d_SCC.

Core claims:
    - strata are the upper-triangle diagonals k = 1 .. n-1 with n - k entries each
    - SCC equals a card-times-sqrt(Var Var) weighted average of per-stratum Pearson correlations
    - SCC is identical under the upper-triangle and both-orders stratum conventions
    - SCC(X, X) = 1 exactly, SCC(X, -X) = -1, symmetric, invariant to positive affine maps
    - pairwise_distances matches a sequential double loop for any worker count
"""

import math

import numpy as np
import pytest
from pytest import approx

from hicmapper.core.errors import DegenerateInputError, DimensionError
from hicmapper.models.contact_models import ContactMap
from hicmapper.services.scc_metric import (
    d_scc,
    pairwise_distances,
    pairwise_similarities,
    scc,
    scc_matrices,
    strata,
)

from synthetic import random_contact_map, random_symmetric_counts


# -- Oracles -----------------------------------------------------------------

def _pearson_oracle(x, y, cap=None):
    """Weighted mean of per-stratum Pearson correlations, upper triangle."""
    n = x.shape[0]
    weighted = weights = 0.0
    for k in range(1, n):
        if cap is not None and k > cap:
            break
        a = np.array([x[i, i + k] for i in range(n - k)], dtype=float)
        b = np.array([y[i, i + k] for i in range(n - k)], dtype=float)
        if len(a) < 2 or a.std() == 0 or b.std() == 0:
            continue
        weight = len(a) * a.std() * b.std()
        weighted += weight * np.corrcoef(a, b)[0, 1]
        weights += weight
    return weighted / weights


def _both_orders_oracle(x, y):
    """Eq. with N_k = {(i, j) : |j - i| = k} over both orders."""
    n = x.shape[0]
    numerator = denominator = 0.0
    for k in range(1, n):
        pairs = [(i, j) for i in range(n) for j in range(n) if abs(j - i) == k]
        a = np.array([x[i, j] for i, j in pairs], dtype=float)
        b = np.array([y[i, j] for i, j in pairs], dtype=float)
        if len(a) < 2 or np.ptp(a) == 0 or np.ptp(b) == 0:
            continue
        cov = np.mean((a - a.mean()) * (b - b.mean()))
        numerator += len(a) * cov
        denominator += len(a) * a.std() * b.std()
    return numerator / denominator


def _map(dense):
    dense = np.asarray(dense, dtype=np.float64)
    return ContactMap(n_bins=dense.shape[0], bin_size=500000, counts=dense)


# == 1. strata ================================================================

class TestStrata:
    def test_three_bins(self, rng):
        x = random_contact_map(3, rng)
        result = strata(x, x)
        assert [s.k for s in result] == [1, 2]
        assert [s.card for s in result] == [2, 1]
        dense = x.dense()
        assert list(result[0].entries_x) == [dense[0, 1], dense[1, 2]]

    def test_single_bin(self, rng):
        x = random_contact_map(1, rng)
        assert strata(x, x) == []

    def test_cardinalities_match_enumeration(self, rng):
        x, y = random_contact_map(6, rng), random_contact_map(6, rng)
        for stratum in strata(x, y):
            expected = [(i, j) for i in range(6) for j in range(6) if j - i == stratum.k]
            assert stratum.card == len(expected) == 6 - stratum.k
            assert list(stratum.entries_y) == [y.dense()[i, j] for i, j in expected]

    def test_cap(self, rng):
        x = random_contact_map(6, rng)
        assert [s.k for s in strata(x, x, max_separation=2)] == [1, 2]

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionError):
            strata(random_contact_map(4, rng), random_contact_map(5, rng))


# == 2. scc ===================================================================

class TestScc:
    def test_self_is_one(self, rng):
        x = random_contact_map(10, rng)
        assert scc(x, x) == 1.0

    def test_negation_is_minus_one(self, rng):
        x = random_symmetric_counts(10, rng).astype(float)
        assert scc_matrices(x, -x) == approx(-1.0, abs=1e-12)

    def test_single_stratum(self):
        x = np.array([[0, 1, 5], [1, 0, 3], [5, 3, 0]], dtype=float)
        y = np.array([[0, 2, 7], [2, 0, 4], [7, 4, 0]], dtype=float)
        assert scc(_map(x), _map(y)) == approx(1.0, abs=1e-12)

    def test_matches_pearson_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(10, 31))
            x = random_symmetric_counts(n, rng)
            y = random_symmetric_counts(n, rng)
            assert scc(_map(x), _map(y)) == approx(_pearson_oracle(x, y), abs=1e-10)

    def test_cap_matches_oracle(self, rng):
        x = random_symmetric_counts(12, rng)
        y = random_symmetric_counts(12, rng)
        assert scc(_map(x), _map(y), max_separation=4) == approx(_pearson_oracle(x, y, cap=4), abs=1e-10)

    def test_both_orders_convention(self, rng):
        for _ in range(50):
            x = random_symmetric_counts(9, rng)
            y = random_symmetric_counts(9, rng)
            assert scc(_map(x), _map(y)) == approx(_both_orders_oracle(x, y), abs=1e-12)

    def test_symmetric_exactly(self, rng):
        x, y = random_contact_map(11, rng), random_contact_map(11, rng)
        assert scc(x, y) == scc(y, x)

    def test_affine_invariance(self, rng):
        x = random_symmetric_counts(10, rng).astype(float)
        y = random_symmetric_counts(10, rng).astype(float)
        assert scc_matrices(3.5 * x + 2.0, 3.5 * y + 2.0) == approx(scc_matrices(x, y), abs=1e-10)

    def test_all_degenerate(self):
        x = np.ones((4, 4))
        with pytest.raises(DegenerateInputError):
            scc(_map(x), _map(x))

    def test_range(self, rng):
        for _ in range(20):
            value = scc(random_contact_map(7, rng, high=3), random_contact_map(7, rng, high=3))
            assert -1.0 <= value <= 1.0


# == 3. d_scc and pairwise matrices ===========================================

class TestDistances:
    def test_self_distance_zero(self, rng):
        x = random_contact_map(9, rng)
        assert d_scc(x, x) == 0.0

    def test_random_pair(self, rng):
        x, y = random_contact_map(9, rng), random_contact_map(9, rng)
        expected = math.sqrt(2 - 2 * _pearson_oracle(x.dense(), y.dense()))
        assert d_scc(x, y) == approx(expected, abs=1e-10)

    def test_duplicates(self, rng):
        x = random_contact_map(8, rng)
        assert np.array_equal(pairwise_distances([x, x]).values, np.zeros((2, 2)))

    def test_duplicate_rows(self, rng):
        x, y = random_contact_map(8, rng), random_contact_map(8, rng)
        values = pairwise_distances([x, y, x]).values
        assert values[0, 2] == 0.0
        assert np.array_equal(values[0], values[2])

    def test_matches_double_loop(self, rng):
        samples = [random_contact_map(8, rng) for _ in range(5)]
        values = pairwise_distances(samples).values
        for a in range(5):
            for b in range(5):
                expected = 0.0 if a == b else d_scc(samples[a], samples[b])
                assert values[a, b] == approx(expected, abs=1e-12)

    def test_worker_count_does_not_matter(self, rng):
        samples = [random_contact_map(10, rng) for _ in range(4)]
        sequential = pairwise_distances(samples, workers=1).values
        parallel = pairwise_distances(samples, workers=2).values
        assert np.array_equal(sequential, parallel)

    def test_similarity_diagonal(self, rng):
        samples = [random_contact_map(6, rng) for _ in range(3)]
        similarities = pairwise_similarities(samples, ["a", "b", "c"])
        assert np.all(np.diag(similarities.values) == 1.0)
        assert similarities.sample_ids == ["a", "b", "c"]

    def test_one_sample(self, rng):
        with pytest.raises(DegenerateInputError):
            pairwise_distances([random_contact_map(5, rng)])

    def test_degenerate_pair_named(self, rng):
        flat = _map(np.ones((5, 5)))
        with pytest.raises(DegenerateInputError) as info:
            pairwise_distances([random_contact_map(5, rng), flat], ["good", "flat"])
        assert "'good'" in str(info.value) and "'flat'" in str(info.value)


# == 4. Batched pairwise kernel ===============================================

class TestPairwiseKernel:
    def test_every_pair_matches_pearson_oracle(self, rng):
        dense = [random_symmetric_counts(30, rng) for _ in range(12)]
        similarities = pairwise_similarities([_map(x) for x in dense]).values
        for a in range(12):
            for b in range(a + 1, 12):
                assert similarities[a, b] == approx(_pearson_oracle(dense[a], dense[b]), abs=1e-10)
                assert similarities[a, b] == similarities[b, a]

    def test_capped_pairs_match_oracle(self, rng):
        dense = [random_symmetric_counts(15, rng) for _ in range(4)]
        similarities = pairwise_similarities([_map(x) for x in dense], max_separation=3).values
        assert similarities[0, 3] == approx(_pearson_oracle(dense[0], dense[3], cap=3), abs=1e-10)

    def test_partly_degenerate_strata_are_skipped(self, rng):
        x = random_symmetric_counts(10, rng).astype(float)
        y = random_symmetric_counts(10, rng).astype(float)
        for k in (2, 5):
            idx = np.arange(10 - k)
            y[idx, idx + k] = y[idx + k, idx] = 4.0
        similarities = pairwise_similarities([_map(x), _map(y)]).values
        assert similarities[0, 1] == approx(_pearson_oracle(x, y), abs=1e-10)

    def test_shifted_copy_is_exactly_one(self, rng):
        x = random_symmetric_counts(9, rng).astype(float)
        other = random_symmetric_counts(9, rng).astype(float)
        values = pairwise_distances([_map(x), _map(other), _map(x + 3.0)]).values
        assert values[0, 2] == 0.0
        assert np.array_equal(values[0], values[2])

    def test_degenerate_pair_found_among_many(self, rng):
        samples = [random_contact_map(6, rng) for _ in range(3)] + [_map(np.zeros((6, 6)))]
        with pytest.raises(DegenerateInputError) as info:
            pairwise_similarities(samples, ["a", "b", "c", "empty"])
        assert "'a'" in str(info.value) and "'empty'" in str(info.value)

    def test_more_samples_than_one_block(self, rng):
        samples = [random_contact_map(6, rng) for _ in range(70)]
        sequential = pairwise_similarities(samples, workers=1).values
        parallel = pairwise_similarities(samples, workers=3).values
        assert np.array_equal(sequential, parallel)
        assert sequential[3, 68] == approx(scc(samples[3], samples[68]), abs=1e-12)

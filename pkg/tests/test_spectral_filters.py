"""
Tests for classical-MDS filters.

Core claims:
    - double_center gives B = -1/2 J D^2 J with zero row sums
    - mds_filters reproduces Euclidean distances of rank <= p inputs
    - columns are ordered by eigenvalue, have zero mean, are orthogonal, and have a fixed sign
    - too few positive eigenvalues raise RankDeficiencyError carrying the spectrum
"""

import numpy as np
import pytest
from pytest import approx
from scipy.spatial.distance import pdist, squareform

from hicmapper.core.errors import ParameterRangeError, RankDeficiencyError
from hicmapper.models.contact_models import DistanceMatrix
from hicmapper.services.spectral_filters import double_center, mds_filters, orient


def _distances(points, ids=None):
    points = np.asarray(points, dtype=float)
    ids = ids or [f"p{i}" for i in range(points.shape[0])]
    return DistanceMatrix(sample_ids=ids, values=squareform(pdist(points)))


# == 1. double_center =========================================================

class TestDoubleCenter:
    def test_zero_matrix(self):
        assert np.array_equal(double_center(np.zeros((4, 4))), np.zeros((4, 4)))

    def test_two_points(self):
        d = np.array([[0.0, 2.0], [2.0, 0.0]])
        assert double_center(d) == approx(np.array([[1.0, -1.0], [-1.0, 1.0]]), abs=1e-12)

    def test_matches_matrix_product(self, rng):
        d = squareform(pdist(rng.normal(size=(5, 3))))
        j = np.eye(5) - np.ones((5, 5)) / 5
        expected = -0.5 * j @ (d ** 2) @ j
        gram = double_center(d)
        assert gram == approx(expected, abs=1e-9)
        assert np.abs(gram.sum(axis=1)).max() < 1e-9
        assert np.array_equal(gram, gram.T)


# == 2. mds_filters ===========================================================

class TestMdsFilters:
    def test_two_points(self):
        filters = mds_filters(_distances([[0.0], [2.0]]), 1)
        assert filters.values[:, 0] == approx([1.0, -1.0], abs=1e-12)
        assert filters.eigenvalues == approx([2.0], abs=1e-12)

    def test_unit_square_reconstruction(self):
        square = [[0, 0], [1, 0], [1, 1], [0, 1]]
        d = _distances(square)
        filters = mds_filters(d, 2)
        assert squareform(pdist(filters.values)) == approx(d.values, abs=1e-9)

    def test_euclidean_reconstruction(self, rng):
        d = _distances(rng.normal(size=(30, 3)))
        filters = mds_filters(d, 3)
        assert squareform(pdist(filters.values)) == approx(d.values, abs=1e-7)

    def test_columns(self, rng):
        filters = mds_filters(_distances(rng.normal(size=(25, 4))), 3)
        assert list(filters.eigenvalues) == sorted(filters.eigenvalues, reverse=True)
        assert np.abs(filters.values.mean(axis=0)).max() < 1e-9
        gram = filters.values.T @ filters.values
        assert np.abs(gram - np.diag(np.diag(gram))).max() < 1e-8

    def test_sign_convention(self, rng):
        filters = mds_filters(_distances(rng.normal(size=(15, 2))), 2)
        for s in range(2):
            column = filters.values[:, s]
            assert column[np.argmax(np.abs(column))] > 0

    def test_orient_tie_uses_lowest_index(self):
        assert list(orient(np.array([-0.5, 0.5]))) == [0.5, -0.5]
        assert list(orient(np.array([0.5, -0.5]))) == [0.5, -0.5]

    def test_duplicate_samples(self, rng):
        points = rng.normal(size=(10, 2))
        points[7] = points[2]
        filters = mds_filters(_distances(points), 2)
        assert filters.values[7] == approx(filters.values[2], abs=1e-9)

    def test_deterministic(self, rng):
        d = _distances(rng.normal(size=(20, 3)))
        assert np.array_equal(mds_filters(d, 2).values, mds_filters(d, 2).values)

    def test_unscaled(self, rng):
        d = _distances(rng.normal(size=(12, 2)))
        filters = mds_filters(d, 2, scale_by_sqrt_eigenvalue=False)
        assert np.linalg.norm(filters.values, axis=0) == approx([1.0, 1.0], abs=1e-9)

    def test_sample_ids_kept(self):
        d = _distances([[0.0], [1.0], [3.0]], ids=["a", "b", "c"])
        assert mds_filters(d, 1).sample_ids == ["a", "b", "c"]

    def test_rank_deficiency(self):
        collinear = _distances([[0.0], [1.0], [2.0], [5.0]])
        with pytest.raises(RankDeficiencyError) as info:
            mds_filters(collinear, 2)
        assert len(info.value.spectrum) == 4
        assert info.value.spectrum[0] > 0

    def test_p_out_of_range(self):
        with pytest.raises(ParameterRangeError):
            mds_filters(_distances([[0.0], [1.0]]), 3)

"""
Tests for the bootstrap confidence computation.

Core claims:
    - resampling draws n indices with replacement, reproducibly per seed
    - the identity resample reproduces the base diagrams (d = 0)
    - d_c is the ceil(c N)-th order statistic; confidence is the empirical CDF at the point size
    - runs are reproducible and independent of the worker count
"""

import math

import numpy as np
import pytest
from pytest import approx
from scipy import stats

from hicmapper.core.errors import DegenerateInputError
from hicmapper.models.mapper_models import HypercubeCover
from hicmapper.models.topology_models import BootstrapConfig, DiagramPoint, ExtendedDiagram, PointKind
from hicmapper.services.bootstrap_stats import (
    bootstrap_distances,
    bootstrap_iteration,
    confidence_at_size,
    confidence_report,
    quantile,
    resample,
    run_bootstrap,
)
from hicmapper.services.extended_persistence import extended_diagrams
from hicmapper.services.mapper_core import auto_cover, build_mapper, select_delta

from synthetic import coordinate_filters, dataset


# -- Helpers -----------------------------------------------------------------

def _base(points, columns=None, seed=0):
    data = dataset(points)
    filters = coordinate_filters(points, columns)
    delta = select_delta(data, 0.05, 10, seed)
    cover = auto_cover(filters, delta, data, [0.4] * filters.p)
    graph = build_mapper(data, filters, cover, delta)
    return data, filters, cover, delta, extended_diagrams(graph)


def _diagram(*points):
    return ExtendedDiagram(
        filter_coordinate=0,
        points=[DiagramPoint(kind=kind, birth=b, death=d) for kind, b, d in points],
    )


# == 1. Resampling ============================================================

class TestResample:
    def test_single_point(self, rng):
        assert set(resample(1, rng)) == {0}

    def test_seeded(self):
        first = resample(50, np.random.default_rng(9))
        second = resample(50, np.random.default_rng(9))
        assert np.array_equal(first, second)

    def test_range_and_length(self, rng):
        indices = resample(40, rng)
        assert indices.shape == (40,)
        assert indices.min() >= 0 and indices.max() < 40

    def test_distinct_fraction(self, rng):
        # expected distinct fraction is 1 - (1 - 1/n)^n ~ 0.632
        distinct = np.unique(resample(2000, rng)).size / 2000
        assert 0.60 < distinct < 0.66

    def test_multiplicities_within_six_sigma(self, rng):
        # exact Binomial(1000, 1/1000) quantiles at the two-sided six-sigma tail mass
        tail = 2 * stats.norm.sf(6.0)
        low = stats.binom.ppf(tail / 2, 1000, 1e-3)
        high = stats.binom.isf(tail / 2, 1000, 1e-3)
        counts = np.bincount(resample(1000, rng), minlength=1000)
        assert counts.sum() == 1000
        assert low <= counts.min() and counts.max() <= high
        assert 0.75 < counts.var() < 1.25

    def test_empty(self, rng):
        with pytest.raises(DegenerateInputError):
            resample(0, rng)


# == 2. Iterations ============================================================

class TestIterations:
    def test_identity_resample_is_zero(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        result = bootstrap_iteration(data, filters, cover, delta, base, np.arange(data.n))
        assert result.distance == 0.0
        assert result.coordinate_distances == [0.0, 0.0]
        assert not result.empty

    def test_duplicates_collapse(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        doubled = np.concatenate([np.arange(data.n), np.arange(data.n)])
        assert bootstrap_iteration(data, filters, cover, delta, base, doubled).distance == 0.0

    def test_empty_mapper_is_infinite(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        shifted = HypercubeCover(
            starts=[s + 100.0 for s in cover.starts],
            resolutions=cover.resolutions, gains=cover.gains, counts=cover.counts,
        )
        result = bootstrap_iteration(data, filters, shifted, delta, base, np.arange(data.n))
        assert result.empty
        assert math.isinf(result.distance)

    def test_two_clusters_stay_close(self, cluster_points):
        data = dataset(cluster_points)
        filters = coordinate_filters(cluster_points, [0])
        low = float(cluster_points[:, 0].min())
        cover = HypercubeCover(starts=[low], resolutions=[5.0], gains=[0.4], counts=[8])
        base = extended_diagrams(build_mapper(data, filters, cover, 2.0))
        config = BootstrapConfig(n_iterations=20, seed=5)
        distances = bootstrap_distances(data, filters, cover, 2.0, base, config)
        assert len(distances) == 20
        assert max(distances) < 1.0
        assert distances == bootstrap_distances(data, filters, cover, 2.0, base, config)

    def test_worker_count_does_not_matter(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        config = BootstrapConfig(n_iterations=4, seed=21)
        sequential = bootstrap_distances(data, filters, cover, delta, base, config, workers=1)
        parallel = bootstrap_distances(data, filters, cover, delta, base, config, workers=2)
        assert sequential == parallel


# == 3. Quantiles and confidence ==============================================

class TestConfidence:
    def test_quantile_order_statistic(self):
        distances = [0.1 * k for k in range(10, 0, -1)]
        assert quantile(distances, 0.9) == approx(0.9)
        assert quantile(distances, 0.95) == approx(1.0)
        assert quantile(distances, 0.01) == approx(0.1)

    def test_quantile_rounding_slack(self):
        # 0.07 * 100 evaluates just above 7
        assert quantile(list(range(1, 101)), 0.07) == 7.0

    def test_quantile_with_infinity(self):
        assert quantile([1.0, math.inf, 2.0, 3.0], 0.5) == 2.0
        assert math.isinf(quantile([1.0, math.inf], 0.9))

    def test_confidence_at_size(self):
        distances = [1.0, 2.0, 3.0, 4.0]
        assert confidence_at_size(distances, 0.0) == 0.0
        assert confidence_at_size(distances, 2.0) == 0.5
        assert confidence_at_size(distances, 5.0) == 1.0

    def test_confidence_monotone(self, rng):
        distances = list(rng.exponential(size=50))
        sizes = np.linspace(0, 5, 40)
        confidences = [confidence_at_size(distances, s) for s in sizes]
        assert confidences == sorted(confidences)

    def test_empty_distances(self):
        with pytest.raises(DegenerateInputError):
            quantile([], 0.9)

    def test_report(self):
        diagram = _diagram((PointKind.EXT0, 0.0, 4.0), (PointKind.EXT1, 2.0, 1.5))
        config = BootstrapConfig(n_iterations=4, seed=0, confidence_level=0.75)
        report = confidence_report([diagram], [0.5, 0.1, 0.4, 3.0], config)
        assert report.distances == [0.1, 0.4, 0.5, 3.0]
        assert report.d_c == 0.5
        big, small = report.per_point
        assert big.significant and big.confidence == 0.75
        assert not small.significant and small.confidence == 0.25
        assert report.n_significant == 1
        assert report.best(PointKind.EXT1).point.birth == 2.0
        assert report.best(PointKind.REL1) is None
        assert report.confidence_of(0, PointKind.EXT0) == [0.75]

    def test_report_counts_empty_iterations(self):
        config = BootstrapConfig(n_iterations=3, seed=0)
        report = confidence_report([_diagram()], [math.inf, 0.2, 0.3], config)
        assert report.empty_iterations == 1


# == 4. Full runs =============================================================

class TestRunBootstrap:
    def test_reproducible(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        config = BootstrapConfig(n_iterations=5, seed=3)
        first = run_bootstrap(data, filters, cover, delta, base, config)
        second = run_bootstrap(data, filters, cover, delta, base, config)
        assert first.distances == second.distances
        assert first.d_c == second.d_c
        assert len(first.coordinate_distances) == 2
        assert all(len(column) == 5 for column in first.coordinate_distances)
        assert len(first.coordinate_d_c) == 2

    def test_loop_cycle_significant(self, loop_points):
        data, filters, cover, delta, base = _base(loop_points)
        report = run_bootstrap(data, filters, cover, delta, base, BootstrapConfig(n_iterations=30, seed=1))
        best = report.best(PointKind.EXT1)
        assert best is not None
        assert best.significant

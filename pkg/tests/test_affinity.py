"""Exemplar clustering vs brute-force subset search and fixed geometries."""

from __future__ import annotations

import math
import random
import statistics
import time

import pytest

from imagecensus.affinity import ClusteringResult, affinity_propagation, similarity_matrix
from imagecensus.errors import NonFiniteCoordinate, TooFewPoints

from .oracles import exhaustive_best_clustering


def close(a, b):
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def assert_nearest_exemplar(points, result):
    """Every point sits with its most similar exemplar, ties to the lower index."""
    S = similarity_matrix(points)
    exemplars = result.exemplars
    for i, e in enumerate(result.assignment):
        assert e in exemplars
        if i in exemplars:
            assert e == i
            continue
        best = max(S[i, k] for k in exemplars)
        assert S[i, e] == best
        assert e == min(k for k in exemplars if S[i, k] == best)


class TestSimilarity:
    def test_one_dimensional_scalars(self):
        S = similarity_matrix([(0.0,), (3.0,)])
        assert S[0, 1] == -9.0
        assert S[1, 0] == -9.0
        assert S[0, 0] == 0.0

    def test_two_dimensional(self):
        S = similarity_matrix([(0.0, 0.0), (3.0, 4.0)])
        assert S[0, 1] == -25.0

    def test_flat_sequence_treated_as_column(self):
        S = similarity_matrix([0.0, 2.0])
        assert S[0, 1] == -4.0

    def test_nan_coordinate_rejected(self):
        with pytest.raises(NonFiniteCoordinate):
            similarity_matrix([(0.0, 0.0), (float("nan"), 1.0)])

    def test_inf_coordinate_rejected(self):
        with pytest.raises(NonFiniteCoordinate):
            similarity_matrix([(0.0,), (float("inf"),)])


class TestFixedGeometries:
    def test_two_near_one_far_splits_in_two(self):
        result = affinity_propagation([(0.0,), (0.0,), (10.0,)], preference=-50.0)
        assert result.n_clusters == 2
        assert close(result.net_similarity, -100.0)
        # the isolated point is its own exemplar
        assert 2 in result.exemplars
        assert result.assignment[0] == result.assignment[1]

    def test_identical_points_collapse_to_one_cluster(self):
        result = affinity_propagation([(1.0, 1.0)] * 3, preference=-1.0)
        assert result.n_clusters == 1
        assert close(result.net_similarity, -1.0)
        assert result.assignment == (result.exemplars[0],) * 3

    def test_two_points_with_generous_preference(self):
        # preference above the mutual similarity makes both self-exemplars
        result = affinity_propagation([(0.0,), (10.0,)], preference=-1.0)
        assert result.exemplars == (0, 1)
        assert close(result.net_similarity, -2.0)

    def test_members_partitions_points(self):
        points = [(0.0,), (0.1,), (5.0,), (5.1,)]
        result = affinity_propagation(points, preference=-10.0)
        seen = []
        for e in result.exemplars:
            seen.extend(result.members(e))
        assert sorted(seen) == [0, 1, 2, 3]

    def test_median_preference_matches_explicit_value(self):
        points = [(0.0,), (1.0,), (4.0,), (9.0,)]
        S = similarity_matrix(points)
        off_diag = [S[i, j] for i in range(4) for j in range(4) if i != j]
        med = statistics.median(off_diag)
        by_name = affinity_propagation(points, preference="median")
        by_value = affinity_propagation(points, preference=med)
        assert by_name == by_value


class TestValidation:
    def test_single_point_rejected(self):
        with pytest.raises(TooFewPoints):
            affinity_propagation([(0.0,)])

    def test_empty_rejected(self):
        with pytest.raises(TooFewPoints):
            affinity_propagation([])

    @pytest.mark.parametrize("damping", [0.49, 1.0, 1.5, -0.2])
    def test_damping_outside_half_open_interval(self, damping):
        with pytest.raises(ValueError):
            affinity_propagation([(0.0,), (1.0,)], damping=damping)

    @pytest.mark.parametrize("damping", [0.5, 0.75, 0.99])
    def test_damping_inside_interval_accepted(self, damping):
        result = affinity_propagation([(0.0,), (0.1,), (8.0,)], preference=-30.0, damping=damping)
        assert isinstance(result, ClusteringResult)
        assert result.n_clusters == 2


class TestDeterminism:
    def test_repeated_runs_identical(self):
        rng = random.Random(7)
        points = [(rng.uniform(0, 10), rng.uniform(0, 10)) for _ in range(12)]
        first = affinity_propagation(points)
        second = affinity_propagation(points)
        assert first == second

    def test_result_is_self_consistent(self):
        rng = random.Random(11)
        points = [(rng.uniform(0, 5),) for _ in range(9)]
        result = affinity_propagation(points, preference=-4.0)
        assert_nearest_exemplar(points, result)
        assert result.exemplars == tuple(sorted(result.exemplars))

    def test_permutation_equivariance(self):
        """Permuting the points permutes the clustering.

        The equivariant objects are the partition and the objective value.
        Exemplar identity inside a symmetric two-member cluster is an exact
        objective tie broken by index, so it may legitimately flip under
        relabeling.
        """
        rng = random.Random(13)
        points = [(rng.uniform(0, 10), rng.uniform(0, 10)) for _ in range(10)]
        perm = list(range(10))
        rng.shuffle(perm)
        base = affinity_propagation(points, preference=-20.0)
        permuted = affinity_propagation([points[p] for p in perm], preference=-20.0)

        def partition(result, relabel):
            clusters: dict[int, set[int]] = {}
            for i, e in enumerate(result.assignment):
                clusters.setdefault(e, set()).add(relabel(i))
            return {frozenset(members) for members in clusters.values()}

        assert partition(base, lambda i: i) == partition(permuted, lambda i: perm[i])
        assert math.isclose(
            base.net_similarity, permuted.net_similarity, rel_tol=1e-9, abs_tol=1e-9
        )


class TestExhaustiveOptimality:
    """Small instances land on the global optimum of the net-similarity objective."""

    def test_50_random_configurations(self):
        rng = random.Random(20260815)
        start = time.monotonic()
        for trial in range(50):
            n = rng.randint(2, 8)
            dim = rng.choice([1, 2])
            points = [tuple(rng.uniform(0, 10) for _ in range(dim)) for _ in range(n)]
            preference = -rng.uniform(0.5, 60.0)
            result = affinity_propagation(points, preference=preference)
            S = similarity_matrix(points)
            best_net, _ = exhaustive_best_clustering(S.tolist(), preference)
            assert close(result.net_similarity, best_net), (
                f"trial {trial}: net {result.net_similarity} vs optimum {best_net}"
            )
            assert_nearest_exemplar(points, result)
        assert time.monotonic() - start < 30.0

    def test_median_preference_also_optimal(self):
        rng = random.Random(3)
        for _ in range(10):
            n = rng.randint(3, 7)
            points = [(rng.uniform(0, 4), rng.uniform(0, 4)) for _ in range(n)]
            result = affinity_propagation(points, preference="median")
            S = similarity_matrix(points)
            off_diag = [S[i, j] for i in range(n) for j in range(n) if i != j]
            best_net, _ = exhaustive_best_clustering(S.tolist(), statistics.median(off_diag))
            assert close(result.net_similarity, best_net)

    def test_clustered_blobs_recovered(self):
        rng = random.Random(5)
        centers = [(0.0, 0.0), (20.0, 0.0), (0.0, 20.0)]
        points = []
        for cx, cy in centers:
            points.extend(
                (cx + rng.uniform(-0.5, 0.5), cy + rng.uniform(-0.5, 0.5)) for _ in range(5)
            )
        result = affinity_propagation(points, preference=-100.0)
        assert result.n_clusters == 3
        for blob in range(3):
            block = result.assignment[blob * 5 : blob * 5 + 5]
            assert len(set(block)) == 1

import math
from itertools import combinations

import numpy as np
import pytest

from conftest import exact_simplex_distance, random_interior_simplex, regular_simplex

from approxconvex.core import NormSpec, Vector
from approxconvex.hulls import SampledSet, dist_to_hull
from approxconvex.simplexgeo import alpha, best_subset, face_chain, near_face


class TestAlpha:
    def test_facet_case(self):
        for n in range(1, 8):
            assert alpha(n, n - 1) == pytest.approx(1.0 / n, abs=1e-15)

    def test_vertex_case(self):
        for n in range(1, 8):
            assert alpha(n, 0) == pytest.approx(1.0, abs=1e-15)

    def test_n3_k1(self):
        assert alpha(3, 1) == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-15)

    def test_strictly_decreasing_in_k(self):
        for n in range(2, 9):
            vals = [alpha(n, k) for k in range(n)]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_range_validation(self):
        with pytest.raises(ValueError):
            alpha(3, 3)
        with pytest.raises(ValueError):
            alpha(3, -1)
        with pytest.raises(ValueError):
            alpha(0, 0)


class TestNearFace:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_regular_equality(self, n):
        V = regular_simplex(n)
        for k in range(n):
            res = near_face(V, k)
            assert res.distance == pytest.approx(alpha(n, k), abs=1e-9)
            assert len(res.vertex_index_set) == k + 1

    def test_random_bound_and_invariant(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 7))
            V = random_interior_simplex(rng, n)
            chain = face_chain(V)
            for k, res in enumerate(chain):
                assert res.distance <= alpha(n, k) + 1e-9
                # FaceResult invariant: distance is reproduced by the
                # generic hull-distance machinery on the chosen vertices.
                A = SampledSet(
                    points=tuple(
                        Vector(dict(enumerate(V[i]))) for i in res.vertex_index_set
                    )
                )
                check = dist_to_hull(Vector(), A, NormSpec.lp(2), tol=1e-11)
                assert check == pytest.approx(res.distance, abs=1e-9)

    def test_recursion_consistency(self, rng):
        # d(0, F_k)^2 <= d^2 + (1 - d^2) alpha(n-1, k)^2 with d the
        # nearest-facet distance.
        for _ in range(40):
            n = int(rng.integers(3, 7))
            V = random_interior_simplex(rng, n)
            chain = face_chain(V)
            d = chain[n - 1].distance
            for k in range(n - 1):
                assert chain[k].distance ** 2 <= d * d + (1 - d * d) * alpha(
                    n - 1, k
                ) ** 2 + 1e-9

    def test_facet_vs_enumeration_oracle(self, rng):
        # k = n-1: the nearest facet is within 1/n, checked against an
        # exhaustive facet enumeration with an independent solver.
        for _ in range(25):
            n = int(rng.integers(2, 6))
            V = random_interior_simplex(rng, n)
            res = near_face(V, n - 1)
            oracle = min(
                exact_simplex_distance(V[list(sub)])
                for sub in combinations(range(n + 1), n)
            )
            assert res.distance == pytest.approx(oracle, abs=1e-9)
            assert res.distance <= 1.0 / n + 1e-9

    def test_two_point_case(self):
        res = near_face(np.array([[1.0, 0.0], [-1.0, 0.0]]), 0)
        assert res.distance == pytest.approx(1.0, abs=1e-12)
        assert len(res.vertex_index_set) == 1

    def test_rejects_origin_outside(self):
        V = np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
        with pytest.raises(ValueError):
            near_face(V, 1)

    def test_rejects_off_sphere(self):
        V = np.array([[2.0, 0.0], [-1.0, 0.0]])
        with pytest.raises(ValueError, match="unit sphere"):
            near_face(V, 0)

    def test_rejects_degenerate(self):
        V = np.array([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            near_face(V, 1)

    def test_k_range(self):
        V = regular_simplex(3)
        with pytest.raises(ValueError):
            near_face(V, 3)

    def test_boundary_jitter_path(self):
        # Origin exactly on a facet of the square's inscribed triangle:
        # the deterministic jitter must keep the call usable.
        V = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        res = near_face(V, 0)
        assert res.distance <= 1.0 + 1e-9

    def test_vector_input(self):
        V = regular_simplex(2)
        vecs = [Vector(dict(enumerate(row))) for row in V]
        res = near_face(vecs, 1)
        assert res.distance == pytest.approx(alpha(2, 1), abs=1e-9)

    def test_tie_break_is_lexicographic(self):
        # On the regular simplex all facets tie, so the descent must pick
        # the lexicographically smallest vertex set at every level.
        for n in (3, 5):
            chain = face_chain(regular_simplex(n))
            for k, res in enumerate(chain):
                assert res.vertex_index_set == tuple(range(k + 1))


class TestBestSubset:
    def test_single_point_within_ball(self, rng):
        V = random_interior_simplex(rng, 3)
        res = best_subset(V, 1)
        assert res.distance <= 1.0 + 1e-9

    def test_regular_full_subset(self):
        n = 4
        res = best_subset(regular_simplex(n), n)
        assert res.distance <= 1.0 / n + 1e-9

    def test_random_bound_and_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            P = random_interior_simplex(rng, n) * rng.uniform(0.4, 1.0, size=(n + 1, 1))
            for j in range(1, n + 1):
                res = best_subset(P, j)
                bound = math.sqrt((n + 1 - j) / (n * j))
                assert res.distance <= bound + 1e-9
                # Exhaustive enumeration oracle: optimal subset distance.
                best = min(
                    exact_simplex_distance(P[list(sub)])
                    for sub in combinations(range(n + 1), j)
                )
                assert res.distance >= best - 1e-9

    def test_rejects_zero_vector(self):
        P = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="zero vector"):
            best_subset(P, 1)

    def test_rejects_points_outside_ball(self):
        P = np.array([[2.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="unit ball"):
            best_subset(P, 1)

    def test_rejects_origin_outside_hull(self):
        P = np.array([[1.0, 0.0], [0.8, 0.1], [0.9, -0.1]])
        with pytest.raises(ValueError, match="hull"):
            best_subset(P, 1)

    def test_j_range(self, rng):
        V = random_interior_simplex(rng, 3)
        with pytest.raises(ValueError):
            best_subset(V, 0)
        with pytest.raises(ValueError):
            best_subset(V, 4)

import numpy as np
import pytest

import pdhg_lp as pl
from pdhg_lp import PagerankSpec, barabasi_albert_edges, generate_pagerank


class TestGraph:
    def test_edge_count(self):
        # every vertex after the d seeds brings exactly d edges
        for n, d in ((10, 3), (25, 2), (50, 5)):
            edges = barabasi_albert_edges(n, d, seed=0)
            assert len(edges) == d * (n - d)

    def test_first_newcomer_connects_to_all_seeds(self):
        edges = barabasi_albert_edges(10, 3, seed=4)
        first = [t for (s, t) in edges if s == 3]
        assert sorted(first) == [0, 1, 2]

    def test_targets_distinct_and_existing(self):
        edges = barabasi_albert_edges(40, 3, seed=7)
        by_source = {}
        for s, t in edges:
            by_source.setdefault(s, []).append(t)
            assert t < s  # attaches only to already-present vertices
        for s, targets in by_source.items():
            assert len(targets) == len(set(targets)) == 3

    def test_deterministic(self):
        a = barabasi_albert_edges(30, 3, seed=12)
        b = barabasi_albert_edges(30, 3, seed=12)
        assert a == b
        c = barabasi_albert_edges(30, 3, seed=13)
        assert a != c


class TestPagerankProblem:
    def test_nonzero_count_formula(self):
        # rows I - lambda*S' contribute n + 2*3*(n-3) entries, the sum row n:
        # 8n - 18 in total for attachment degree 3
        for n in (10, 50, 100):
            problem = generate_pagerank(PagerankSpec(num_nodes=n))
            assert problem.nnz == 8 * n - 18
        assert generate_pagerank(PagerankSpec(num_nodes=10)).nnz == 62

    def test_structure(self):
        spec = PagerankSpec(num_nodes=12, seed=3)
        problem = generate_pagerank(spec)
        n = spec.num_nodes
        assert problem.num_inequalities == n
        assert problem.num_equalities == 1
        np.testing.assert_allclose(problem.ineq_rhs, (1 - 0.85) / n)
        np.testing.assert_array_equal(problem.eq_matrix.toarray(), np.ones((1, n)))
        np.testing.assert_array_equal(problem.eq_rhs, [1.0])
        np.testing.assert_array_equal(problem.lower, np.zeros(n))
        assert np.all(np.isinf(problem.upper))
        np.testing.assert_array_equal(problem.c, np.zeros(n))
        assert problem.name == "pagerank_n12_d3_seed3"

    def test_row_matrix_encodes_column_stochastic_walk(self):
        spec = PagerankSpec(num_nodes=20, seed=5)
        problem = generate_pagerank(spec)
        g = problem.ineq_matrix.toarray()
        s = (np.eye(20) - g) / spec.damping
        np.testing.assert_allclose(s.sum(axis=0), np.ones(20), atol=1e-12)
        assert np.all(s >= 0)
        np.testing.assert_allclose(np.diag(g), np.ones(20))

    def test_bit_identical_regeneration(self):
        a = generate_pagerank(PagerankSpec(num_nodes=64, seed=9))
        b = generate_pagerank(PagerankSpec(num_nodes=64, seed=9))
        np.testing.assert_array_equal(a.ineq_matrix.toarray(), b.ineq_matrix.toarray())
        np.testing.assert_array_equal(a.ineq_rhs, b.ineq_rhs)

    def test_solution_matches_dense_stationary_vector(self):
        # the feasible set is the single PageRank vector: compare the LP
        # solution against a dense linear solve of (I - lambda*S') r = rhs
        spec = PagerankSpec(num_nodes=50, seed=1)
        problem = generate_pagerank(spec)
        g = problem.ineq_matrix.toarray()
        reference = np.linalg.solve(g, problem.ineq_rhs)
        assert reference.sum() == pytest.approx(1.0, abs=1e-12)  # oracle sanity
        report = pl.solve(problem)
        assert report.status == pl.STATUS_OPTIMAL
        np.testing.assert_allclose(report.x, reference, atol=1e-6)

    def test_spec_validation(self):
        with pytest.raises(pl.InvalidGeneratorSpec):
            PagerankSpec(num_nodes=1).validate()
        with pytest.raises(pl.InvalidGeneratorSpec):
            PagerankSpec(num_nodes=10, attach_degree=0).validate()
        with pytest.raises(pl.InvalidGeneratorSpec):
            PagerankSpec(num_nodes=5, attach_degree=5).validate()
        with pytest.raises(pl.InvalidGeneratorSpec):
            PagerankSpec(num_nodes=10, damping=1.0).validate()
        with pytest.raises(pl.InvalidGeneratorSpec):
            PagerankSpec(num_nodes=10, damping=0.0).validate()


class TestToyProblems:
    def test_bilinear_toy(self):
        p = pl.generate_bilinear_toy()
        pl.validate(p)
        np.testing.assert_array_equal(p.c, [0.0])
        np.testing.assert_array_equal(p.eq_rhs, [3.0])
        assert p.num_inequalities == 0

    def test_primal_infeasible_toy_is_infeasible(self):
        p = pl.generate_primal_infeasible_toy()
        # x = -1 cannot meet x >= 0
        assert p.eq_rhs[0] < p.lower[0]

    def test_dual_infeasible_toy_is_unbounded(self):
        p = pl.generate_dual_infeasible_toy()
        assert p.c[0] < 0
        assert np.isinf(p.upper[0])

import numpy as np
import pytest

from mbpkit import qubo, solvers
from mbpkit.graph import generate_er, make_graph


def two_triangles_with_bridge():
    return make_graph(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)])


def two_components(k):
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    return make_graph(2 * k, edges)


class TestSolveMultilevel:
    def test_path_graph(self, path4):
        r = solvers.solve_multilevel(path4, seed=0)
        assert r.inter_edges == 1
        assert r.balanced

    def test_clusters_split_along_bridge(self):
        g = two_triangles_with_bridge()
        r = solvers.solve_multilevel(g, seed=0)
        assert r.inter_edges == 1

    def test_disconnected_components_fit_halves(self):
        for k in (4, 8, 20):
            g = two_components(k)
            r = solvers.solve_multilevel(g, seed=1)
            assert r.inter_edges == 0
            assert r.balanced

    def test_always_exactly_balanced(self):
        for seed in range(20):
            g = generate_er(60, 0.2, seed=seed)
            r = solvers.solve_multilevel(g, seed=seed)
            assert r.balanced
            assert int(r.assignment.sum()) == 30

    def test_odd_rejected(self):
        with pytest.raises(ValueError):
            solvers.solve_multilevel(make_graph(3, [(0, 1)]))

    def test_deterministic(self):
        g = generate_er(80, 0.3, seed=2)
        a = solvers.solve_multilevel(g, seed=7)
        b = solvers.solve_multilevel(g, seed=7)
        assert np.array_equal(a.assignment, b.assignment)

    def test_never_beats_oracle(self):
        for seed in range(30):
            g = generate_er(14, 0.5, seed=seed)
            oracle = solvers.solve_exact_bisection(g).inter_edges
            assert solvers.solve_multilevel(g, seed=seed).inter_edges >= oracle

    def test_pre_repair_extras_present(self):
        g = generate_er(50, 0.4, seed=3)
        r = solvers.solve_multilevel(g, seed=0)
        assert "pre_repair_cut" in r.extras
        assert isinstance(r.extras["pre_repair_balanced"], bool)

    def test_scales_past_coarsening_threshold(self):
        g = generate_er(300, 0.1, seed=4)
        r = solvers.solve_multilevel(g, seed=0)
        assert r.balanced
        assert r.inter_edges == qubo.e_cut(g, r.assignment)

    def test_result_fields_consistent(self):
        g = generate_er(40, 0.4, seed=5)
        r = solvers.solve_multilevel(g, seed=2)
        assert r.inter_edges == qubo.e_cut(g, r.assignment)
        assert r.energy == float(r.inter_edges)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbpkit import qubo
from mbpkit.graph import generate_er, make_graph


class TestBuildMatrix:
    def test_single_edge_all_coefficients_cancel(self):
        g = make_graph(2, [(0, 1)])
        q = qubo.build_mbp_qubo(g, 1.0)
        assert q.get(0, 0) == 0.0
        assert q.get(1, 1) == 0.0
        assert q.get(0, 1) == 0.0
        assert q.offset == 1.0

    def test_path_graph_hand_values(self, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        assert [q.get(i, i) for i in range(4)] == [-2.0, -1.0, -1.0, -2.0]
        assert q.get(0, 1) == q.get(1, 2) == q.get(2, 3) == 0.0
        assert q.get(0, 2) == q.get(0, 3) == q.get(1, 3) == 2.0
        assert q.offset == 4.0

    def test_empty_graph_balance_terms_only(self, empty4):
        q = qubo.build_mbp_qubo(empty4, 2.0)
        for i in range(4):
            assert q.get(i, i) == -6.0
            for j in range(i + 1, 4):
                assert q.get(i, j) == 4.0
        assert q.offset == 8.0

    def test_rejects_odd_node_count(self):
        g = make_graph(3, [(0, 1)])
        with pytest.raises(ValueError):
            qubo.build_mbp_qubo(g, 1.0)

    def test_rejects_nonpositive_lambda(self, path4):
        with pytest.raises(ValueError):
            qubo.build_mbp_qubo(path4, 0.0)
        with pytest.raises(ValueError):
            qubo.build_mbp_qubo(path4, -2.0)

    def test_lower_triangle_access_rejected(self, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        with pytest.raises(IndexError):
            q.get(1, 0)


class TestEnergyFunctions:
    def test_energy_all_zero_assignment(self, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        assert qubo.energy(q, [0, 0, 0, 0]) == 0.0

    def test_energy_path_hand_value(self, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        assert qubo.energy(q, [1, 1, 0, 0]) == -3.0

    def test_energy_single_edge_zero_matrix(self):
        g = make_graph(2, [(0, 1)])
        q = qubo.build_mbp_qubo(g, 1.0)
        assert qubo.energy(q, [1, 0]) == 0.0

    def test_energy_length_mismatch(self, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        with pytest.raises(ValueError):
            qubo.energy(q, [1, 0])

    def test_e_cut_k4_balanced(self, k4):
        assert qubo.e_cut(k4, [1, 1, 0, 0]) == 4

    def test_e_cut_uniform_assignment_is_zero(self, k4, path4):
        assert qubo.e_cut(k4, [1, 1, 1, 1]) == 0
        assert qubo.e_cut(path4, [0, 0, 0, 0]) == 0

    def test_e_cut_alternating_path(self, path4):
        assert qubo.e_cut(path4, [1, 0, 1, 0]) == 3

    def test_e_balance_values(self):
        assert qubo.e_balance(4, 3.0, [1, 1, 0, 0]) == 0.0
        assert qubo.e_balance(4, 3.0, [1, 1, 1, 0]) == 3.0
        assert qubo.e_balance(4, 3.0, [1, 1, 1, 1]) == 12.0

    def test_e_mbp_path_values(self, path4):
        assert qubo.e_mbp(path4, 1.0, [1, 1, 0, 0]) == 1.0
        assert qubo.e_mbp(path4, 1.0, [1, 0, 1, 0]) == 3.0

    def test_e_mbp_all_ones_is_offset(self):
        for seed in range(3):
            g = generate_er(8, 0.5, seed=seed)
            lam = 1.5
            assert qubo.e_mbp(g, lam, np.ones(8)) == lam * 8 * 8 / 4


class TestOffsetIdentity:
    @settings(max_examples=60, deadline=None)
    @given(n=st.sampled_from([2, 4, 6, 10, 16]), p=st.floats(0, 1),
           lam=st.floats(0.01, 50), seed=st.integers(0, 2**31), bits=st.integers(0, 2**16))
    def test_energy_plus_offset_equals_objective(self, n, p, lam, seed, bits):
        g = generate_er(n, p, seed)
        q = qubo.build_mbp_qubo(g, lam)
        x = np.array([(bits >> i) & 1 for i in range(n)], dtype=np.int8)
        lhs = qubo.energy(q, x) + q.offset
        rhs = qubo.e_mbp(g, lam, x)
        assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))

    @settings(max_examples=40, deadline=None)
    @given(n=st.sampled_from([4, 8, 12]), p=st.floats(0, 1), lam=st.floats(0.01, 20),
           seed=st.integers(0, 2**31), bits=st.integers(0, 2**12))
    def test_complement_symmetry(self, n, p, lam, seed, bits):
        g = generate_er(n, p, seed)
        x = np.array([(bits >> i) & 1 for i in range(n)], dtype=np.int8)
        assert qubo.e_mbp(g, lam, x) == pytest.approx(qubo.e_mbp(g, lam, 1 - x), rel=1e-12)

    def test_balanced_assignment_has_no_penalty(self):
        g = generate_er(10, 0.6, seed=1)
        x = np.array([1] * 5 + [0] * 5)
        assert qubo.e_mbp(g, 7.0, x) == qubo.e_cut(g, x)

    def test_cut_is_integer_in_range(self):
        g = generate_er(12, 0.5, seed=2)
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.integers(0, 2, size=12)
            c = qubo.e_cut(g, x)
            assert isinstance(c, int)
            assert 0 <= c <= g.edge_count


class TestIsing:
    def test_zero_matrix(self):
        q = qubo.QuboMatrix(order=3, coeffs=np.zeros(6), offset=0.0)
        ising = qubo.to_ising(q)
        assert not ising.h.any()
        assert not ising.j.any()
        assert ising.constant == 0.0

    def test_single_variable_diagonal(self):
        q = qubo.QuboMatrix(order=1, coeffs=np.array([3.0]), offset=0.0)
        ising = qubo.to_ising(q)
        assert ising.h[0] == 1.5
        assert ising.constant == 1.5

    def test_random_matrix_identity_exhaustive(self):
        rng = np.random.default_rng(11)
        n = 6
        coeffs = rng.normal(size=n * (n + 1) // 2)
        q = qubo.QuboMatrix(order=n, coeffs=coeffs, offset=0.0)
        ising = qubo.to_ising(q)
        for code in range(1 << n):
            x = np.array([(code >> i) & 1 for i in range(n)], dtype=np.float64)
            s = 2 * x - 1
            assert abs(ising.spin_energy(s) + ising.constant - qubo.energy(q, x)) < 1e-12

    def test_mbp_matrix_identity_exhaustive(self):
        g = generate_er(8, 0.5, seed=4)
        q = qubo.build_mbp_qubo(g, 2.5)
        ising = qubo.to_ising(q)
        for code in range(1 << 8):
            x = np.array([(code >> i) & 1 for i in range(8)], dtype=np.float64)
            s = 2 * x - 1
            assert abs(ising.spin_energy(s) + ising.constant - qubo.energy(q, x)) < 1e-12


class TestDumpFormat:
    def test_round_trip(self, tmp_path, path4):
        q = qubo.build_mbp_qubo(path4, 1.25)
        path = tmp_path / "m.qubo"
        qubo.dump_qubo(q, path)
        q2 = qubo.parse_qubo(path)
        assert q2.order == q.order
        assert q2.offset == q.offset
        assert np.array_equal(q2.coeffs, q.coeffs)

    def test_header_shape(self, tmp_path, path4):
        q = qubo.build_mbp_qubo(path4, 1.0)
        path = tmp_path / "m.qubo"
        qubo.dump_qubo(q, path)
        head = path.read_text().splitlines()[0].split()
        assert head[0] == "qubo"
        assert int(head[1]) == 4

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgospa import enumerate_assignment, solve_assignment


class TestExamples:
    def test_one_by_one(self):
        res = solve_assignment([[3.0]])
        assert res.pairs == ((0, 0),)
        assert res.total_cost == 3.0

    def test_two_by_two(self):
        res = solve_assignment([[1.0, 2.0], [2.0, 1.0]])
        assert res.pairs == ((0, 0), (1, 1))
        assert res.total_cost == 2.0

    def test_rectangular(self):
        res = solve_assignment([[5.0, 1.0, 9.0], [2.0, 8.0, 3.0]])
        assert res.pairs == ((0, 1), (1, 0))
        assert res.total_cost == 3.0

    def test_empty(self):
        assert solve_assignment(np.zeros((0, 4))).pairs == ()
        assert enumerate_assignment(np.zeros((0, 4))).total_cost == 0.0
        assert solve_assignment(np.zeros((3, 0))).pairs == ()

    def test_identical_entries_lexicographic(self):
        res = solve_assignment(np.ones((3, 5)))
        assert res.pairs == ((0, 0), (1, 1), (2, 2))
        res = solve_assignment(np.ones((5, 3)))
        assert res.pairs == ((0, 0), (1, 1), (2, 2))
        res = enumerate_assignment(np.ones((4, 2)))
        assert res.pairs == ((0, 0), (1, 1))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            solve_assignment([[1.0, float("nan")]])
        with pytest.raises(ValueError, match="finite"):
            enumerate_assignment([[float("inf")]])

    def test_enumeration_size_bound(self):
        with pytest.raises(ValueError, match="<= 8"):
            enumerate_assignment(np.zeros((9, 2)))


class TestOracleAgreement:
    def test_random_float_matrices(self):
        rng = np.random.default_rng(101)
        for _ in range(1000):
            m, n = rng.integers(1, 8, size=2)
            C = rng.uniform(-10.0, 10.0, size=(m, n))
            got = solve_assignment(C)
            want = enumerate_assignment(C)
            assert abs(got.total_cost - want.total_cost) <= 1e-12
            assert got.pairs == want.pairs

    def test_integer_matrices_with_ties(self):
        rng = np.random.default_rng(202)
        for _ in range(800):
            m, n = rng.integers(1, 7, size=2)
            C = rng.integers(0, 4, size=(m, n)).astype(float)
            got = solve_assignment(C)
            want = enumerate_assignment(C)
            assert got.total_cost == want.total_cost
            assert got.pairs == want.pairs

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(1, 5),
        st.integers(1, 5),
        st.integers(0, 2**31 - 1),
        st.booleans(),
    )
    def test_hypothesis_matrices(self, m, n, seed, integral):
        rng = np.random.default_rng(seed)
        if integral:
            C = rng.integers(-3, 4, size=(m, n)).astype(float)
        else:
            C = rng.normal(0.0, 5.0, size=(m, n))
        got = solve_assignment(C)
        want = enumerate_assignment(C)
        assert abs(got.total_cost - want.total_cost) <= 1e-12
        assert got.pairs == want.pairs


class TestStructure:
    def test_row_constant_shift(self):
        # rows-complete case: every matching uses the shifted row, so the
        # optimum moves by exactly the constant and the pair set is stable
        rng = np.random.default_rng(7)
        for _ in range(100):
            m = int(rng.integers(2, 7))
            n = int(rng.integers(m, 8))
            C = rng.uniform(0.0, 5.0, size=(m, n))
            base = solve_assignment(C)
            row = int(rng.integers(0, m))
            shift = float(rng.uniform(0.5, 3.0))
            shifted = C.copy()
            shifted[row] += shift
            res = solve_assignment(shifted)
            assert res.pairs == base.pairs
            assert res.total_cost == pytest.approx(base.total_cost + shift, abs=1e-9)

    def test_pairs_are_a_matching(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            m, n = rng.integers(1, 9, size=2)
            res = solve_assignment(rng.uniform(-1, 1, size=(m, n)))
            rows = [i for i, _ in res.pairs]
            cols = [j for _, j in res.pairs]
            assert len(res.pairs) == min(m, n)
            assert len(set(rows)) == len(rows)
            assert len(set(cols)) == len(cols)

    def test_total_matches_pair_sum(self):
        rng = np.random.default_rng(9)
        C = rng.uniform(-5, 5, size=(6, 4))
        res = solve_assignment(C)
        assert res.total_cost == pytest.approx(sum(C[i, j] for i, j in res.pairs), abs=1e-12)


def test_large_instance_under_a_second():
    rng = np.random.default_rng(55)
    C = rng.uniform(0.0, 1.0, size=(500, 500))
    start = time.perf_counter()
    res = solve_assignment(C)
    elapsed = time.perf_counter() - start
    assert len(res.pairs) == 500
    assert elapsed < 1.0

"""Exact sparse linear algebra tests."""

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from clawkit.linalg import nullspace, rref


def F(n, d=1):
    return Fraction(n, d)


class TestRref:
    def test_identity(self):
        pivots = rref([{0: F(1)}, {1: F(2)}])
        assert set(pivots) == {0, 1}
        assert pivots[1] == {1: F(1)}

    def test_dependent_rows_collapse(self):
        pivots = rref([{0: F(1), 1: F(2)}, {0: F(2), 1: F(4)}])
        assert len(pivots) == 1

    def test_back_substitution(self):
        # x + y = 0 and y + z = 0 -> fully reduced rows
        pivots = rref([{0: F(1), 1: F(1)}, {1: F(1), 2: F(1)}])
        assert pivots[0] == {0: F(1), 2: F(-1)}
        assert pivots[1] == {1: F(1), 2: F(1)}


class TestNullspace:
    def test_full_rank(self):
        assert nullspace([{0: F(1)}, {1: F(1)}], 2) == []

    def test_single_relation(self):
        # c0 + 3 c1 = 0 over 2 unknowns
        basis = nullspace([{0: F(1), 1: F(3)}], 2)
        assert len(basis) == 1
        vec = basis[0]
        assert vec[0] + 3 * vec[1] == 0

    def test_zero_system(self):
        basis = nullspace([], 3)
        assert len(basis) == 3

    @settings(max_examples=60, deadline=None)
    @given(st.lists(
        st.lists(st.integers(min_value=-4, max_value=4), min_size=4, max_size=4),
        min_size=1, max_size=5))
    def test_nullspace_property(self, dense_rows):
        rows = [{j: F(v) for j, v in enumerate(r) if v} for r in dense_rows]
        rows = [r for r in rows if r]
        basis = nullspace(rows, 4)
        # Every basis vector solves every equation.
        for vec in basis:
            for row in rows:
                assert sum(row[c] * vec.get(c, 0) for c in row) == 0
        # rank-nullity
        assert len(basis) == 4 - len(rref(rows))

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import random_standard_system
from exactblp.lp import enumerate_vertices
from exactblp.rational import (
    Matrix,
    det,
    factorial,
    format_rational,
    lcm_denominators,
    max_abs,
    parse_rational,
    rat,
    solve_square,
    vec,
    vertex_bound,
)


def leibniz_det(M):
    n = M.rows
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Fraction(-1 if inversions % 2 else 1)
        for i in range(n):
            term *= Fraction(int(M[i, perm[i]].numerator), int(M[i, perm[i]].denominator))
        total += term
    return total


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def square_matrices(n):
    return st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n).map(
        lambda rows: Matrix(rows, n)
    )


class TestRat:
    def test_lowest_terms(self):
        x = rat(Fraction(6, -4))
        assert (x.numerator, x.denominator) == (-3, 2)
        assert rat(0) == 0 and rat(0).denominator == 1

    @pytest.mark.parametrize("text,expected", [("-3/4", Fraction(-3, 4)), ("7", 7), ("+2/6", Fraction(1, 3))])
    def test_parse(self, text, expected):
        assert parse_rational(text) == expected

    @pytest.mark.parametrize("bad", ["1.5", "1e3", "3/0", "1/-2", "abc", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_rational(bad)

    def test_floats_refused(self):
        with pytest.raises(TypeError):
            rat(0.5)

    def test_format(self):
        assert format_rational(rat("-6/4")) == "-3/2"
        assert format_rational(5) == "5"

    @given(rationals, rationals)
    def test_exact_field_ops(self, a, b):
        a, b = rat(a), rat(b)
        assert (a + b) - b == a
        if b != 0:
            assert (a * b) / b == a


class TestDet:
    def test_examples(self):
        assert det(Matrix.identity(3)) == 1
        assert det(Matrix([[2, 0], [0, 3]])) == 6
        assert det(Matrix([[1, 2], [2, 4]])) == 0

    def test_empty_is_one(self):
        assert det(Matrix([], 0)) == 1

    def test_non_square(self):
        with pytest.raises(ValueError):
            det(Matrix([[1, 2]]))

    @settings(max_examples=60)
    @given(st.integers(1, 4).flatmap(square_matrices))
    def test_matches_leibniz(self, M):
        assert det(M) == leibniz_det(M)

    @settings(max_examples=60)
    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(square_matrices(n), square_matrices(n))))
    def test_multiplicative(self, pair):
        M, N = pair
        assert det(M @ N) == det(M) * det(N)


class TestSolveSquare:
    def test_examples(self):
        assert solve_square(Matrix.identity(2), vec([3, 5])) == (3, 5)
        assert solve_square(Matrix([[2, 0], [0, 4]]), vec([1, 1])) == (Fraction(1, 2), Fraction(1, 4))
        assert solve_square(Matrix([[1, 1], [2, 2]]), vec([1, 2])) is None

    @settings(max_examples=80)
    @given(st.integers(1, 4).flatmap(lambda n: st.tuples(square_matrices(n), st.lists(rationals, min_size=n, max_size=n))))
    def test_residual_is_zero(self, case):
        M, b = case
        x = solve_square(M, vec(b))
        if det(M) == 0:
            assert x is None
        else:
            assert M @ x == vec(b)


class TestBounds:
    def test_max_abs(self):
        assert max_abs(Matrix([[-3, 2]])) == 3
        assert max_abs(Matrix.zeros(2, 2)) == 0
        assert max_abs(Matrix([], 4)) == 0
        assert max_abs(()) == 0
        assert max_abs(Matrix([[1, 1]])) == 1

    @pytest.mark.parametrize("m,value", [(0, 1), (5, 120), (10, 3628800)])
    def test_factorial(self, m, value):
        assert factorial(m) == value

    @pytest.mark.parametrize("m", range(1, 40))
    def test_factorial_encoding_length(self, m):
        assert factorial(m).bit_length() <= m * (math.ceil(math.log2(m + 1)) + 1)

    def test_vertex_bound_examples(self):
        assert vertex_bound(2, 5, 1) == 10
        assert vertex_bound(1, 7, 3) == 7
        assert vertex_bound(3, 2, 2) == 48
        assert vertex_bound(0, 4, 9) == 4

    def test_vertex_bound_identity_polyhedron(self):
        (v,) = enumerate_vertices(Matrix.identity(2), vec([3, 5]))
        assert max(v) <= vertex_bound(2, 5, 1)

    def test_vertex_bound_3x5_entries_2(self):
        rng = random.Random(48)
        for _ in range(100):
            A = Matrix([[rng.randint(-2, 2) for _ in range(5)] for _ in range(3)], 5)
            b = vec(rng.randint(-2, 2) for _ in range(3))
            for v in enumerate_vertices(A, b):
                assert max(v) <= vertex_bound(3, max_abs(b), max_abs(A)) <= 48

    def test_vertex_bound_dominates(self):
        rng = random.Random(7)
        checked = 0
        for _ in range(200):
            A, b = random_standard_system(rng)
            bound = vertex_bound(A.rows, max_abs(b), max_abs(A))
            for v in enumerate_vertices(A, b):
                checked += 1
                assert all(x <= bound for x in v)
        assert checked > 50

    @pytest.mark.parametrize("values,expected", [((Fraction(1, 2), Fraction(1, 3)), 6), ((2, 5), 1),
                                                 ((Fraction(3, 4), Fraction(1, 6)), 12), ((), 1)])
    def test_lcm_denominators(self, values, expected):
        assert lcm_denominators(vec(values)) == expected


class TestMatrix:
    def test_empty_shapes(self):
        M = Matrix([], 3)
        assert M.shape == (0, 3)
        assert M.T.shape == (3, 0)
        assert M @ vec([1, 2, 3]) == ()
        assert Matrix([[], []], 0) @ () == (0, 0)

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            Matrix([[1, 2], [3]])

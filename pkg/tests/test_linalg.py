from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_coupling import linalg

entries = st.fractions(-4, 4, max_denominator=5)


@st.composite
def matrices(draw, max_rows=5, max_cols=5):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    rows = [[draw(entries) for _ in range(c)] for _ in range(r)]
    # duplicate a combination now and then so rank deficiency is common
    if r > 1 and draw(st.booleans()):
        k = draw(entries)
        rows[-1] = [a + k * b for a, b in zip(rows[0], rows[1 % r])]
    return rows


def sym(rows):
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in rows])


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_matches_sympy(rows):
    r = sym(rows).rank()
    assert linalg.rank(rows) == r
    assert linalg.float_rank(rows) == r
    assert len(linalg.span_basis(rows)) == r


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_nullspace_is_complementary(rows):
    basis = linalg.nullspace(rows)
    ncols = len(rows[0])
    assert len(basis) == ncols - linalg.rank(rows)
    for v in basis:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)
    if basis:
        assert linalg.rank(basis) == len(basis)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_left_kernel(rows):
    cols = list(range(0, len(rows[0]), 2))
    for xi in linalg.left_kernel(rows, cols):
        comb = linalg.combine(xi, rows)
        assert all(comb[c] == 0 for c in cols)


@settings(max_examples=60, deadline=None)
@given(matrices(max_rows=4, max_cols=4), st.lists(entries, min_size=4, max_size=4))
def test_solve_square(rows, b):
    n = min(len(rows), len(rows[0]))
    a = [row[:n] for row in rows[:n]]
    b = b[:n]
    x = linalg.solve_square(a, b)
    if sym(a).det() == 0:
        assert x is None
    else:
        assert [sum(p * q for p, q in zip(row, x)) for row in a] == b


def test_row_space_and_membership():
    a = [[1, 0, 2], [0, 1, 1]]
    b = [[1, 1, 3], [2, -1, 3]]
    assert linalg.same_row_space(a, b)
    assert linalg.contains(a, [3, -2, 4])
    assert not linalg.contains(a, [0, 0, 1])


def test_empty_and_degenerate():
    assert linalg.rank([]) == 0
    assert linalg.rank([[0, 0], [0, 0]]) == 0
    assert linalg.nullspace([], 2) == [[1, 0], [0, 1]]
    assert linalg.float_rank([[1.0, 1e-14], [1.0, 0.0]]) == 1


def test_any_rank_dispatch():
    assert linalg.any_rank([[Fraction(1, 3), 1], [1, 3]]) == 1
    assert linalg.any_rank([[0.5, 1.0], [1.0, 3.0]]) == 2

"""Exact rational linear algebra for pointwise subspace computations.

Rank uses fraction-free (Bareiss) elimination on an integer copy of the
matrix; reduced echelon forms and null spaces work over Fractions.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

Matrix = list[list[Fraction]]


def _integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    out = []
    for row in rows:
        row = [Fraction(v) for v in row]
        m = lcm(*(v.denominator for v in row)) if row else 1
        out.append([int(v * m) for v in row])
    return out


def rank(rows: Sequence[Sequence]) -> int:
    """Rank by Bareiss elimination; every intermediate division is exact."""
    a = _integer_rows(rows)
    if not a or not a[0]:
        return 0
    nrows, ncols = len(a), len(a[0])
    r, prev = 0, 1
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][c]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                a[i][j] = (p * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form with zero rows dropped, plus pivot columns."""
    a = [[Fraction(v) for v in row] for row in rows]
    if not a:
        return [], []
    ncols = len(a[0])
    pivots, r = [], 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][c]
        a[r] = [v / p for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    """Basis of {x : rows @ x = 0}."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def left_kernel(rows: Sequence[Sequence], cols: Sequence[int]) -> Matrix:
    """Coefficient vectors xi with sum_i xi_i * rows[i][c] = 0 for c in cols."""
    n = len(rows)
    if not cols:
        return nullspace([], n)
    transposed = [[Fraction(rows[i][c]) for i in range(n)] for c in cols]
    return nullspace(transposed, n)


def combine(coeffs: Sequence[Fraction], rows: Sequence[Sequence]) -> list[Fraction]:
    width = len(rows[0])
    return [sum((Fraction(c) * Fraction(r[j]) for c, r in zip(coeffs, rows)), Fraction(0)) for j in range(width)]


def span_basis(rows: Sequence[Sequence]) -> Matrix:
    return rref(rows)[0]


def same_row_space(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    ra, rb = rref(a)[0], rref(b)[0]
    return ra == rb


def contains(rows: Sequence[Sequence], v: Sequence) -> bool:
    return rank(list(rows) + [list(v)]) == rank(rows)


def solve_square(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve a @ x = b for square nonsingular a; None when singular."""
    n = len(a)
    aug = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(a, b)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def float_rank(rows: Sequence[Sequence], tol: float = 1e-9) -> int:
    """Numerical rank by partial-pivot elimination, pivots below ``tol`` times
    the largest entry count as zero."""
    a = [[float(v) for v in row] for row in rows]
    if not a or not a[0]:
        return 0
    scale = max((abs(v) for row in a for v in row), default=0.0)
    if scale == 0.0:
        return 0
    nrows, ncols = len(a), len(a[0])
    r = 0
    for c in range(ncols):
        pivot = max(range(r, nrows), key=lambda i: abs(a[i][c]))
        if abs(a[pivot][c]) <= tol * scale:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(r + 1, nrows):
            f = a[i][c] / a[r][c]
            for j in range(c, ncols):
                a[i][j] -= f * a[r][j]
        r += 1
        if r == nrows:
            break
    return r


def any_rank(rows: Sequence[Sequence], tol: float = 1e-9) -> int:
    if any(isinstance(v, float) for row in rows for v in row):
        return float_rank(rows, tol)
    return rank(rows)

"""Exact rational scalars, vectors and dense matrices.

Scalars are ``gmpy2.mpq`` values (always in lowest terms, positive
denominator).  Vectors are plain tuples of scalars.  ``Matrix`` is an
immutable row-major container that keeps its column count even when it
has no rows, which the bilevel data model needs (``n = 0`` or ``k = 0``
blocks are common).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

Rat = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def rat(value) -> Rat:
    """Convert int, str, Fraction or mpq to an exact rational.

    Floats are refused: the toolkit never touches binary floating point.
    """
    if isinstance(value, Rat):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use an int, str or Fraction")
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def parse_rational(token: str) -> Rat:
    """Parse ``[+-]digits[/digits]``; no decimals, no exponents."""
    if not _RATIONAL_RE.match(token):
        raise ValueError(f"not a rational literal: {token!r}")
    if "/" in token:
        num, den = token.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {token!r}")
        return mpq(int(num), int(den))
    return mpq(int(token))


def format_rational(value) -> str:
    value = rat(value)
    if value.denominator == 1:
        return str(int(value.numerator))
    return f"{int(value.numerator)}/{int(value.denominator)}"


def vec(values: Iterable) -> tuple:
    return tuple(rat(v) for v in values)


def dot(u: Sequence, v: Sequence) -> Rat:
    if len(u) != len(v):
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    total = ZERO
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total


class Matrix:
    """Immutable dense matrix of exact rationals."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Iterable] = (), cols: int | None = None):
        rows = tuple(vec(r) for r in data)
        if cols is None:
            if not rows:
                raise ValueError("column count required for a matrix without rows")
            cols = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != cols:
                raise ValueError(f"row {i} has {len(r)} entries, expected {cols}")
        self.rows = len(rows)
        self.cols = cols
        self._data = rows

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls([[ZERO] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int) -> "Matrix":
        return cls([[col[i] for col in columns] for i in range(rows)], len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index):
        i, j = index
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def __iter__(self):
        return iter(self._data)

    def tolist(self) -> list[list]:
        return [list(r) for r in self._data]

    @property
    def T(self) -> "Matrix":
        return Matrix([self.col(j) for j in range(self.cols)], self.rows)

    def select_columns(self, indices: Sequence[int]) -> "Matrix":
        return Matrix([[r[j] for j in indices] for r in self._data], len(indices))

    def select_rows(self, indices: Sequence[int]) -> "Matrix":
        return Matrix([self._data[i] for i in indices], self.cols)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row count mismatch in hstack")
        return Matrix([a + b for a, b in zip(self._data, other._data)], self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch in vstack")
        return Matrix(self._data + other._data, self.cols)

    def scale_rows(self, factors: Sequence) -> "Matrix":
        return Matrix([[f * v for v in r] for f, r in zip(factors, self._data)], self.cols)

    def __neg__(self) -> "Matrix":
        return Matrix([[-v for v in r] for r in self._data], self.cols)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
            cols = [other.col(j) for j in range(other.cols)]
            return Matrix([[dot(r, c) for c in cols] for r in self._data], other.cols)
        if len(other) != self.cols:
            raise ValueError(f"shape mismatch: {self.shape} @ vector of length {len(other)}")
        return tuple(dot(r, other) for r in self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(v) for v in r) for r in self._data)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


def vec_add(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def det(M: Matrix) -> Rat:
    """Determinant by fraction-free (Bareiss) elimination.

    Rational input is first scaled row-wise to integers; the integer
    elimination keeps every intermediate exact and bounded.
    """
    if M.rows != M.cols:
        raise ValueError(f"determinant of non-square {M.rows}x{M.cols} matrix")
    n = M.rows
    if n == 0:
        return ONE
    scale = ONE
    a = []
    for r in M:
        f = lcm_denominators(r)
        scale *= f
        a.append([int((v * f).numerator) for v in r])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return ZERO
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return mpq(sign * a[n - 1][n - 1]) / scale


def solve_square(M: Matrix, b: Sequence) -> tuple | None:
    """Exact solution of ``M x = b``; ``None`` when ``M`` is singular."""
    if M.rows != M.cols:
        raise ValueError(f"solve_square needs a square matrix, got {M.rows}x{M.cols}")
    if len(b) != M.rows:
        raise ValueError("right-hand side length does not match matrix")
    n = M.rows
    aug = [list(r) + [rat(v)] for r, v in zip(M, b)]
    for k in range(n):
        piv = next((i for i in range(k, n) if aug[i][k]), None)
        if piv is None:
            return None
        if piv != k:
            aug[k], aug[piv] = aug[piv], aug[k]
        row_k = aug[k]
        p = row_k[k]
        if p != 1:
            row_k = aug[k] = [v / p for v in row_k]
        for i in range(n):
            if i != k:
                f = aug[i][k]
                if f:
                    row_i = aug[i]
                    for j in range(k, n + 1):
                        if row_k[j]:
                            row_i[j] -= f * row_k[j]
    return tuple(r[n] for r in aug)


def inverse(M: Matrix) -> Matrix | None:
    """Exact inverse by Gauss-Jordan; ``None`` when singular."""
    if M.rows != M.cols:
        raise ValueError("inverse of a non-square matrix")
    n = M.rows
    aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(M)]
    for k in range(n):
        piv = next((i for i in range(k, n) if aug[i][k]), None)
        if piv is None:
            return None
        aug[k], aug[piv] = aug[piv], aug[k]
        p = aug[k][k]
        row_k = aug[k] = [v / p for v in aug[k]]
        for i in range(n):
            if i != k and aug[i][k]:
                f = aug[i][k]
                aug[i] = [a - f * b for a, b in zip(aug[i], row_k)]
    return Matrix([r[n:] for r in aug], n)


def independent_rows(M: Matrix) -> tuple[int, ...]:
    """Indices of the greedily chosen (first) maximal set of independent rows."""
    pivots: list[tuple[int, list]] = []  # (pivot column, reduced row)
    kept = []
    for i, r in enumerate(M):
        row = list(r)
        for col, prow in pivots:
            f = row[col]
            if f:
                row = [a - f * b for a, b in zip(row, prow)]
        lead = next((j for j, v in enumerate(row) if v), None)
        if lead is None:
            continue
        p = row[lead]
        pivots.append((lead, [v / p for v in row]))
        kept.append(i)
    return tuple(kept)


def rank(M: Matrix) -> int:
    return len(independent_rows(M))


def max_abs(data) -> Rat:
    """Largest absolute entry of a matrix or vector; 0 for empty data."""
    if isinstance(data, Matrix):
        values = [v for r in data for v in r]
    else:
        values = list(data)
    return max((abs(rat(v)) for v in values), default=ZERO)


def factorial(m: int) -> int:
    if m < 0:
        raise ValueError("factorial of a negative number")
    return math.factorial(m)


def vertex_bound(m: int, max_b, max_A) -> Rat:
    """Upper bound ``m! * max_b * max_A**(m-1)`` on vertex coordinates.

    Valid for ``{x : A x = b, x >= 0}`` with integer ``A`` (``m`` rows)
    and integer ``b``.  ``m = 0`` returns ``max_b`` (only vertex is 0).
    """
    max_b, max_A = rat(max_b), rat(max_A)
    if m == 0:
        return max_b
    return factorial(m) * max_b * max_A ** (m - 1)


def lcm_denominators(values: Iterable) -> int:
    return math.lcm(1, *(int(rat(v).denominator) for v in values))


def combine_rows(weights: Sequence, M: Matrix) -> tuple:
    """``sum_i weights[i] * M[i]`` as a row vector."""
    out = [ZERO] * M.cols
    for w, row in zip(weights, M):
        if w:
            for j, v in enumerate(row):
                if v:
                    out[j] += w * v
    return tuple(out)

"""Exact two-phase primal simplex and basis/vertex enumeration.

Everything works over ``mpq``; there are no tolerances.  Bland's rule is
used in both phases so degenerate pivots (frequent with exact data)
cannot cycle.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .rational import (
    ONE,
    ZERO,
    Matrix,
    Rat,
    det,
    dot,
    independent_rows,
    inverse,
    rat,
    solve_square,
    vec,
)


class SingularBasisError(ValueError):
    """The indexed basis submatrix is not invertible."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StandardLp:
    """``min c x  s.t.  A x = b, x >= 0``."""

    A: Matrix
    b: tuple
    c: tuple

    def __post_init__(self):
        if len(self.b) != self.A.rows or len(self.c) != self.A.cols:
            raise ValueError(
                f"inconsistent LP: A is {self.A.rows}x{self.A.cols}, "
                f"len(b)={len(self.b)}, len(c)={len(self.c)}"
            )


@dataclass(frozen=True)
class LpResult:
    status: Status
    basis: tuple | None = None
    x: tuple | None = None
    value: Rat | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class LinearSystem:
    """Mixed equality/inequality system over ``nvars`` variables.

    ``nonneg[j]`` is False for a free variable.
    """

    eq_lhs: Matrix
    eq_rhs: tuple
    le_lhs: Matrix
    le_rhs: tuple
    ge_lhs: Matrix
    ge_rhs: tuple
    nonneg: tuple

    def __post_init__(self):
        n = len(self.nonneg)
        for name in ("eq", "le", "ge"):
            lhs, rhs = getattr(self, f"{name}_lhs"), getattr(self, f"{name}_rhs")
            if lhs.cols != n or lhs.rows != len(rhs):
                raise ValueError(f"{name} block has shape {lhs.shape} with {len(rhs)} right-hand sides")

    @property
    def nvars(self) -> int:
        return len(self.nonneg)

    @classmethod
    def from_rows(cls, nvars: int, eq=(), le=(), ge=(), free: Iterable[int] = ()) -> "LinearSystem":
        """Build from ``(coefficients, rhs)`` pairs per block."""
        free = set(free)

        def block(rows):
            rows = list(rows)
            return Matrix([r for r, _ in rows], nvars), vec(v for _, v in rows)

        eq_lhs, eq_rhs = block(eq)
        le_lhs, le_rhs = block(le)
        ge_lhs, ge_rhs = block(ge)
        nonneg = tuple(j not in free for j in range(nvars))
        return cls(eq_lhs, eq_rhs, le_lhs, le_rhs, ge_lhs, ge_rhs, nonneg)

    def satisfied_by(self, x: Sequence) -> bool:
        if len(x) != self.nvars:
            return False
        if any(nn and v < 0 for nn, v in zip(self.nonneg, x)):
            return False
        return (
            all(dot(r, x) == v for r, v in zip(self.eq_lhs, self.eq_rhs))
            and all(dot(r, x) <= v for r, v in zip(self.le_lhs, self.le_rhs))
            and all(dot(r, x) >= v for r, v in zip(self.ge_lhs, self.ge_rhs))
        )


# -- simplex core ---------------------------------------------------------


def _pivot(t, b, d, state, r, j):
    prow = t[r]
    p = prow[j]
    if p != 1:
        prow = t[r] = [v / p for v in prow]
        b[r] = b[r] / p
    br = b[r]
    nz = [k for k, v in enumerate(prow) if v]
    for i, row in enumerate(t):
        if i != r:
            f = row[j]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
                if br:
                    b[i] -= f * br
    f = d[j]
    if f:
        for k in nz:
            d[k] -= f * prow[k]
        state[0] += f * br


def _bland(t, b, d, state, basis, ncols):
    """Run pivots until optimal or unbounded; returns True when optimal."""
    m = len(t)
    while True:
        j = next((k for k in range(ncols) if d[k] < 0), None)
        if j is None:
            return True
        best = None
        for i in range(m):
            a = t[i][j]
            if a > 0:
                ratio = b[i] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        r = best[1]
        _pivot(t, b, d, state, r, j)
        basis[r] = j


def _simplex(rows: list, rhs: list, cost: Sequence, ncols: int) -> LpResult:
    t, b = [], []
    for r, v in zip(rows, rhs):
        if v < 0:
            t.append([-a for a in r])
            b.append(-v)
        else:
            t.append(list(r))
            b.append(v)
    m = len(t)
    basis = [None] * m

    # unit columns with a positive entry give a free starting basis
    for j in range(ncols):
        hit = None
        for i in range(m):
            if t[i][j]:
                if hit is not None:
                    hit = None
                    break
                hit = i
        else:
            if hit is not None and basis[hit] is None and t[hit][j] > 0:
                p = t[hit][j]
                if p != 1:
                    t[hit] = [v / p for v in t[hit]]
                    b[hit] = b[hit] / p
                basis[hit] = j

    art_rows = [i for i in range(m) if basis[i] is None]
    if art_rows:
        width = ncols + len(art_rows)
        for i in range(m):
            t[i].extend([ZERO] * len(art_rows))
        for a, i in enumerate(art_rows):
            t[i][ncols + a] = ONE
            basis[i] = ncols + a
        d = [ZERO] * width
        state = [ZERO]
        for i in art_rows:
            row = t[i]
            for j in range(ncols):
                if row[j]:
                    d[j] -= row[j]
            state[0] += b[i]
        _bland(t, b, d, state, basis, width)
        if state[0] != 0:
            return LpResult(Status.INFEASIBLE)
        redundant = []
        for i in range(m):
            if basis[i] >= ncols:
                j = next((k for k in range(ncols) if t[i][k]), None)
                if j is None:
                    redundant.append(i)
                else:
                    _pivot(t, b, d, state, i, j)
                    basis[i] = j
        if redundant:
            keep = [i for i in range(m) if i not in redundant]
            t = [t[i] for i in keep]
            b = [b[i] for i in keep]
            basis = [basis[i] for i in keep]
        t = [row[:ncols] for row in t]

    cost = list(cost)
    d = list(cost)
    state = [ZERO]
    for i, j in enumerate(basis):
        cj = cost[j]
        if cj:
            row = t[i]
            for k in range(ncols):
                if row[k]:
                    d[k] -= cj * row[k]
            state[0] += cj * b[i]
    if not _bland(t, b, d, state, basis, ncols):
        return LpResult(Status.UNBOUNDED)
    x = [ZERO] * ncols
    for i, j in enumerate(basis):
        x[j] = b[i]
    return LpResult(Status.OPTIMAL, tuple(sorted(basis)), tuple(x), state[0])


def solve(lp: StandardLp) -> LpResult:
    """Solve a standard-form LP exactly.

    On OPTIMAL the basis has size ``rank(A)`` (redundant rows dropped),
    ``x`` is its basic solution and ``value == c x``.
    """
    return _simplex([list(r) for r in lp.A], list(lp.b), lp.c, lp.A.cols)


def _standard_rows(system: LinearSystem):
    """Convert to standard-form rows; returns (rows, rhs, ncols, recover)."""
    cols_of = []
    ncols = 0
    for nn in system.nonneg:
        if nn:
            cols_of.append((ncols,))
            ncols += 1
        else:
            cols_of.append((ncols, ncols + 1))
            ncols += 2
    nslack = system.le_lhs.rows + system.ge_lhs.rows
    width = ncols + nslack
    rows, rhs = [], []
    s = ncols

    def expand(r):
        out = [ZERO] * width
        for j, v in enumerate(r):
            if v:
                cj = cols_of[j]
                out[cj[0]] = v
                if len(cj) == 2:
                    out[cj[1]] = -v
        return out

    for r, v in zip(system.eq_lhs, system.eq_rhs):
        rows.append(expand(r))
        rhs.append(v)
    for sign, lhs, rhsv in ((ONE, system.le_lhs, system.le_rhs), (-ONE, system.ge_lhs, system.ge_rhs)):
        for r, v in zip(lhs, rhsv):
            row = expand(r)
            row[s] = sign
            s += 1
            rows.append(row)
            rhs.append(v)

    def recover(z):
        return tuple(z[c[0]] - z[c[1]] if len(c) == 2 else z[c[0]] for c in cols_of)

    def cost(objective):
        c = [ZERO] * width
        for j, v in enumerate(objective):
            if v:
                cj = cols_of[j]
                c[cj[0]] = v
                if len(cj) == 2:
                    c[cj[1]] = -v
        return c

    return rows, rhs, width, recover, cost


def minimize(system: LinearSystem, objective: Sequence) -> LpResult:
    """Minimize ``objective . x`` over a ``LinearSystem``.

    The returned ``x`` is in the original variables; ``basis`` refers to
    the internal standard form and is informational only.
    """
    objective = vec(objective)
    if len(objective) != system.nvars:
        raise ValueError("objective length does not match the system")
    rows, rhs, width, recover, cost = _standard_rows(system)
    res = _simplex(rows, rhs, cost(objective), width)
    if not res.optimal:
        return res
    return LpResult(Status.OPTIMAL, res.basis, recover(res.x), res.value)


def maximize(system: LinearSystem, objective: Sequence) -> LpResult:
    res = minimize(system, [-rat(v) for v in objective])
    if not res.optimal:
        return res
    return LpResult(Status.OPTIMAL, res.basis, res.x, -res.value)


def check_feasible(system: LinearSystem) -> tuple | None:
    """Return an exact point satisfying every constraint, or ``None``."""
    res = minimize(system, [ZERO] * system.nvars)
    return res.x if res.optimal else None


def to_standard_form(system: LinearSystem) -> StandardLp:
    rows, rhs, width, _, _ = _standard_rows(system)
    return StandardLp(Matrix(rows, width), vec(rhs), (ZERO,) * width)


# -- bases ----------------------------------------------------------------


class BasisFactor:
    """Inverse of ``M[R, basis]`` for the first maximal independent row set ``R``.

    For full-row-rank ``M`` this is the ordinary basis inverse.  Rows
    outside ``R`` are linear combinations of ``R``; ``dependency[i]``
    holds the multipliers ``mu`` with ``M[i] = mu . M[R]``.
    """

    def __init__(self, M: Matrix, basis: Sequence[int]):
        basis = tuple(basis)
        if len(set(basis)) != len(basis) or any(not 0 <= j < M.cols for j in basis):
            raise SingularBasisError(f"invalid column indices {basis}")
        self.rows = independent_rows(M)
        if len(basis) != len(self.rows):
            raise SingularBasisError(
                f"basis has {len(basis)} columns but the matrix has rank {len(self.rows)}"
            )
        inv = inverse(M.select_rows(self.rows).select_columns(basis))
        if inv is None:
            raise SingularBasisError(f"columns {basis} do not form a basis")
        self.matrix = M
        self.basis = basis
        self.inverse = inv
        inv_t = inv.T
        self.dependency = {
            i: inv_t @ [M[i, j] for j in basis] for i in range(M.rows) if i not in self.rows
        }

    def apply(self, v: Sequence) -> tuple:
        """``M_B^{-1} v`` using the entries of ``v`` on the independent rows."""
        return self.inverse @ [v[i] for i in self.rows]

    def apply_matrix(self, X: Matrix) -> Matrix:
        return self.inverse @ X.select_rows(self.rows)

    def duals(self, c: Sequence) -> tuple:
        """Solution ``lam`` (indexed by independent rows) of ``M_B^T lam = c_B``."""
        return self.inverse.T @ [c[j] for j in self.basis]

    def reduced_costs(self, c: Sequence) -> tuple:
        lam = self.duals(c)
        basic = set(self.basis)
        M = self.matrix
        return tuple(
            c[j] - dot(lam, [M[i, j] for i in self.rows]) for j in range(M.cols) if j not in basic
        )


def reduced_costs(A: Matrix, c: Sequence, basis: Sequence[int]) -> tuple:
    """``c_j - c_B^T A_B^{-1} A_j`` for every nonbasic ``j`` in increasing order.

    Raises ``SingularBasisError`` when ``A_B`` is not invertible.
    """
    return BasisFactor(A, basis).reduced_costs(vec(c))


def _components(M: Matrix):
    """Connected components of the row/column nonzero pattern.

    Returns ``(blocks, empty_columns)``; each block is ``(rows, cols)``.
    """
    m, n = M.shape
    parent = list(range(m + n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i in range(m):
        for j in range(n):
            if M[i, j]:
                ru, rv = find(i), find(m + j)
                if ru != rv:
                    parent[ru] = rv
    groups: dict[int, tuple[list, list]] = {}
    for i in range(m):
        groups.setdefault(find(i), ([], []))[0].append(i)
    empty = []
    for j in range(n):
        root = find(m + j)
        if root in groups:
            groups[root][1].append(j)
        else:
            empty.append(j)
    return list(groups.values()), empty


def _block_bases(M: Matrix, conditions) -> list[tuple[int, ...]]:
    blocks, empty = _components(M)
    for c, test in conditions:
        if not all(test(c[j]) for j in empty):
            return []
    per_block = []
    for rows, cols in blocks:
        if len(cols) < len(rows):
            return []
        sub = M.select_rows(rows)
        found = []
        for S in itertools.combinations(cols, len(rows)):
            square = sub.select_columns(S)
            if conditions:
                inv = inverse(square)
                if inv is None:
                    continue
                ok = True
                for c, test in conditions:
                    lam = inv.T @ [c[j] for j in S]
                    for j in cols:
                        if j not in S and not test(c[j] - dot(lam, [sub[i, j] for i in range(len(rows))])):
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    found.append(S)
            elif det(square) != 0:
                found.append(S)
        if not found:
            return []
        per_block.append(found)
    out = [tuple(sorted(itertools.chain.from_iterable(p))) for p in itertools.product(*per_block)]
    out.sort()
    return out


def enumerate_bases(M: Matrix) -> list[tuple[int, ...]]:
    """All column sets of size ``M.rows`` with invertible submatrix, lexicographically.

    The nonzero pattern is split into independent blocks first, so
    block-structured matrices are enumerated as a product of small
    per-block searches.
    """
    return _block_bases(M, ())


def bases_with_reduced_costs(
    M: Matrix, conditions: Sequence[tuple[Sequence, Callable[[Rat], bool]]]
) -> list[tuple[int, ...]]:
    """Bases of ``M`` (over its first maximal independent row set) whose
    reduced costs w.r.t. each ``(cost, test)`` pair pass ``test``.

    Sorted lexicographically.
    """
    rows = independent_rows(M)
    conditions = [(vec(c), test) for c, test in conditions]
    return _block_bases(M.select_rows(rows), conditions)


def enumerate_vertices(A: Matrix, b: Sequence) -> list[tuple]:
    """All basic feasible solutions of ``{x : A x = b, x >= 0}``, deduplicated."""
    b = vec(b)
    rows = independent_rows(A)
    m, n = A.shape
    Ar = A.select_rows(rows)
    br = [b[i] for i in rows]
    others = [i for i in range(m) if i not in rows]
    seen = set()
    out = []
    for S in itertools.combinations(range(n), len(rows)):
        xs = solve_square(Ar.select_columns(S), br)
        if xs is None or any(v < 0 for v in xs):
            continue
        x = [ZERO] * n
        for j, v in zip(S, xs):
            x[j] = v
        x = tuple(x)
        if any(dot(A.row(i), x) != b[i] for i in others):
            continue
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out

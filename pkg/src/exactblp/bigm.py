"""Bilevel-correct big-M constants for the KKT reformulation.

All bounds are evaluated on integer-scaled data.  ``|X|`` below is the
largest absolute entry of ``X``.

    Md = |q| (1 + r! r |W|^r)
    Mp = l! Mf ML^(l-1),  l = k + r + 1 + m
    ML = max(|A|, |B|, |T|, |W|, |q|, 1, r! |W|^(r-1) |T|, r! r |q| |W|^(r-1) |T|)
    Mf = max(|a|, |h|, r! |W|^(r-1) |h|, r! r |q| |W|^(r-1) |h|)

``l`` counts more equations than the vertex system actually has, which
only makes ``Mp`` larger.
"""

from __future__ import annotations

from dataclasses import dataclass

from .enumeration import lower_level_bases
from .lp import BasisFactor, enumerate_vertices
from .model import BlpInstance, ScaledInstance
from .rational import ONE, ZERO, Matrix, Rat, combine_rows, dot, factorial, max_abs, rat


@dataclass(frozen=True)
class BigMResult:
    Mp: Rat
    Md: Rat
    ell: int
    ML_bound: Rat
    Mf_bound: Rat
    scaling: ScaledInstance | None = None


def _require_integer(inst: BlpInstance):
    blocks = (inst.q, inst.a, inst.h) + tuple(v for M in (inst.A, inst.B, inst.T, inst.W) for v in M)
    for block in blocks:
        if any(rat(v).denominator != 1 for v in block):
            raise ValueError("big-M formulas need integer-scaled data; call scale_to_integers first")


def compute_md(scaled: ScaledInstance) -> Rat:
    inst = scaled.instance
    _require_integer(inst)
    mq, mw, r = max_abs(inst.q), max_abs(inst.W), inst.r
    if r == 0:
        return mq
    return mq * (1 + factorial(r) * r * mw ** r)


def compute_mp(scaled: ScaledInstance) -> BigMResult:
    inst = scaled.instance
    _require_integer(inst)
    n, m, k, r = inst.dims
    mA, mB, mT, mW = (max_abs(M) for M in (inst.A, inst.B, inst.T, inst.W))
    mq, ma, mh = max_abs(inst.q), max_abs(inst.a), max_abs(inst.h)
    ML = max(mA, mB, mT, mW, mq, ONE)
    Mf = max(ma, mh)
    if r > 0:
        cramer = factorial(r) * mW ** (r - 1)
        ML = max(ML, cramer * mT, cramer * r * mq * mT)
        Mf = max(Mf, cramer * mh, cramer * r * mq * mh)
    ell = k + r + 1 + m
    Mp = factorial(ell) * Mf * ML ** (ell - 1)
    return BigMResult(Mp, compute_md(scaled), ell, ML, Mf, scaled)


def vertex_system(inst: BlpInstance, basis) -> tuple[Matrix, tuple]:
    """Equality system in ``(x, y, z) >= 0`` whose optimal vertex gives a bounded KKT solution.

    Rows: ``A x + B y = a``, ``T x + W y = h``,
    ``q_B W_B^{-1} T x + q y = q_B W_B^{-1} h`` and ``W_B^{-1} T x + z = W_B^{-1} h``.
    """
    n, m = inst.n, inst.m
    F = BasisFactor(inst.W, basis)
    winv_T = F.apply_matrix(inst.T)
    winv_h = F.apply(inst.h)
    rho = len(F.basis)
    q_B = [inst.q[j] for j in F.basis]
    zero_z = (ZERO,) * rho
    rows, rhs = [], []
    for i in range(inst.k):
        rows.append(inst.A.row(i) + inst.B.row(i) + zero_z)
        rhs.append(inst.a[i])
    for i in range(inst.r):
        rows.append(inst.T.row(i) + inst.W.row(i) + zero_z)
        rhs.append(inst.h[i])
    rows.append(combine_rows(q_B, winv_T) + inst.q + zero_z)
    rhs.append(dot(q_B, winv_h))
    for i in range(rho):
        unit = tuple(ONE if j == i else ZERO for j in range(rho))
        rows.append(winv_T.row(i) + (ZERO,) * m + unit)
        rhs.append(winv_h[i])
    return Matrix(rows, n + m + rho), tuple(rhs)


def tight_bounds_by_enumeration(inst: BlpInstance) -> tuple[Rat, Rat]:
    """Largest reduced cost and largest vertex ``y`` entry over all optimal-capable bases.

    Returns ``(Mp_star, Md_star)``; ``(0, 0)`` when no basis qualifies.
    """
    n, m = inst.n, inst.m
    mp_star = md_star = ZERO
    for basis in lower_level_bases(inst):
        rc = BasisFactor(inst.W, basis).reduced_costs(inst.q)
        md_star = max(md_star, max(rc, default=ZERO))
        A8, b8 = vertex_system(inst, basis)
        for v in enumerate_vertices(A8, b8):
            mp_star = max(mp_star, max(v[n:n + m], default=ZERO))
    return mp_star, md_star

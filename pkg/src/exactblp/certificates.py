"""Basis certificates for the optimistic and pessimistic decision problems.

Optimistic: a lower-level basis ``B`` with nonnegative reduced costs
w.r.t. ``q`` for which the linear system in ``(x, y)``

    c x + d y <= alpha
    A x + B y = a,  x >= 0
    T x + W y = h,  y >= 0
    q y = q_B W_B^{-1} (h - T x)
    W_B^{-1} (h - T x) >= 0

is feasible.

Pessimistic: additionally a basis ``Bhat`` of ``What = [W; q]`` with
nonpositive reduced costs w.r.t. ``d`` and zero reduced costs w.r.t.
every coupling row of ``B``; the resulting conditions involve ``x`` only.

Bases are 0-based column tuples in code and 1-based in certificate files.
When ``W`` (or ``What``) lacks full row rank, ``W_B`` means the submatrix
on its first maximal set of independent rows, and consistency rows for
the dependent rows are added.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .lp import (
    BasisFactor,
    LinearSystem,
    SingularBasisError,
    check_feasible,
    maximize,
    minimize,
    solve,
)
from .model import BlpInstance, DecisionInstance, lower_level_at
from .rational import ZERO, Matrix, combine_rows, dot, rat, vec, vec_sub


class FailedCondition(enum.Enum):
    REDUCED_COST_SIGN = "ReducedCostSign"
    SYSTEM_INFEASIBLE = "SystemInfeasible"
    SINGULAR_BASIS = "SingularBasis"


@dataclass(frozen=True)
class OptCert:
    basis: tuple


@dataclass(frozen=True)
class PessCert:
    basis: tuple
    basis_hat: tuple


@dataclass(frozen=True)
class CheckReport:
    accepted: bool
    failed_condition: FailedCondition | None = None
    witness: tuple | None = None

    def __str__(self):
        if self.accepted:
            return "ACCEPTED"
        return f"REJECTED {self.failed_condition.value}"


def opt_system(inst: BlpInstance, alpha, basis, *, with_objective: bool = True) -> LinearSystem:
    """Linear system in ``(x, y)`` certifying the optimistic decision for ``basis``.

    Raises ``SingularBasisError`` when ``W_B`` is not invertible.  With
    ``with_objective=False`` the ``c x + d y <= alpha`` row is omitted
    (used by the solver, which minimizes that expression instead).
    """
    n, m = inst.n, inst.m
    F = BasisFactor(inst.W, basis)
    winv_T = F.apply_matrix(inst.T)
    winv_h = F.apply(inst.h)
    q_B = [inst.q[j] for j in F.basis]
    zeros_y = (ZERO,) * m

    eq = [(inst.A.row(i) + inst.B.row(i), inst.a[i]) for i in range(inst.k)]
    eq += [(inst.T.row(i) + inst.W.row(i), inst.h[i]) for i in range(inst.r)]
    eq.append((combine_rows(q_B, winv_T) + inst.q, dot(q_B, winv_h)))
    le = []
    if with_objective:
        le.append((inst.c + inst.d, rat(alpha)))
    le += [(winv_T.row(i) + zeros_y, winv_h[i]) for i in range(winv_T.rows)]
    return LinearSystem.from_rows(n + m, eq=eq, le=le)


def check_opt_cert(dec: DecisionInstance, basis) -> CheckReport:
    inst = dec.instance
    try:
        F = BasisFactor(inst.W, basis)
    except SingularBasisError:
        return CheckReport(False, FailedCondition.SINGULAR_BASIS)
    if any(v < 0 for v in F.reduced_costs(inst.q)):
        return CheckReport(False, FailedCondition.REDUCED_COST_SIGN)
    witness = check_feasible(opt_system(inst, dec.alpha, F.basis))
    if witness is None:
        return CheckReport(False, FailedCondition.SYSTEM_INFEASIBLE)
    return CheckReport(True, None, witness)


def split_witness(inst: BlpInstance, witness) -> tuple[tuple, tuple]:
    return tuple(witness[: inst.n]), tuple(witness[inst.n:])


def q_hat_matrix(inst: BlpInstance) -> Matrix:
    """``[W; q]``: the follower's constraints plus its objective row."""
    return inst.W.vstack(Matrix([inst.q], inst.m))


def pess_systems(inst: BlpInstance, alpha, basis, basis_hat) -> LinearSystem:
    """Linear system in ``x >= 0`` for the pessimistic certificate ``(basis, basis_hat)``."""
    alpha = rat(alpha)
    n = inst.n
    F = BasisFactor(inst.W, basis)
    Fh = BasisFactor(q_hat_matrix(inst), basis_hat)
    winv_T = F.apply_matrix(inst.T)
    winv_h = F.apply(inst.h)
    q_B = [inst.q[j] for j in F.basis]

    le, eq = [], []
    # lower level has an optimal basic solution at x
    le += [(winv_T.row(i), winv_h[i]) for i in range(winv_T.rows)]
    for i, mu in F.dependency.items():
        eq.append((
            vec_sub(inst.T.row(i), combine_rows(mu, inst.T.select_rows(F.rows))),
            inst.h[i] - dot(mu, [inst.h[j] for j in F.rows]),
        ))

    # stacked right-hand side g(x) = g0 - G x of the optimal-face system
    g0 = inst.h + (dot(q_B, winv_h),)
    G = inst.T.vstack(Matrix([combine_rows(q_B, winv_T)], n))
    u0 = Fh.apply(g0)
    U = Fh.apply_matrix(G)
    d_B = [inst.d[j] for j in Fh.basis]

    le.append((vec_sub(inst.c, combine_rows(d_B, U)), alpha - dot(d_B, u0)))
    le += [(U.row(i), u0[i]) for i in range(U.rows)]
    for i in range(inst.k):
        b_B = [inst.B[i, j] for j in Fh.basis]
        eq.append((vec_sub(inst.A.row(i), combine_rows(b_B, U)), inst.a[i] - dot(b_B, u0)))
    G_R = G.select_rows(Fh.rows)
    g0_R = [g0[j] for j in Fh.rows]
    for i, mu in Fh.dependency.items():
        eq.append((vec_sub(combine_rows(mu, G_R), G.row(i)), dot(mu, g0_R) - g0[i]))
    return LinearSystem.from_rows(n, eq=eq, le=le)


def check_pess_cert(dec: DecisionInstance, cert: PessCert) -> CheckReport:
    inst = dec.instance
    try:
        F = BasisFactor(inst.W, cert.basis)
        Fh = BasisFactor(q_hat_matrix(inst), cert.basis_hat)
    except SingularBasisError:
        return CheckReport(False, FailedCondition.SINGULAR_BASIS)
    if any(v < 0 for v in F.reduced_costs(inst.q)):
        return CheckReport(False, FailedCondition.REDUCED_COST_SIGN)
    if any(v > 0 for v in Fh.reduced_costs(inst.d)):
        return CheckReport(False, FailedCondition.REDUCED_COST_SIGN)
    for i in range(inst.k):
        if any(v != 0 for v in Fh.reduced_costs(inst.B.row(i))):
            return CheckReport(False, FailedCondition.REDUCED_COST_SIGN)
    witness = check_feasible(pess_systems(inst, dec.alpha, cert.basis, cert.basis_hat))
    if witness is None:
        return CheckReport(False, FailedCondition.SYSTEM_INFEASIBLE)
    return CheckReport(True, None, witness)


def pessimistic_holds_at(inst: BlpInstance, alpha, xbar) -> bool:
    """Check the pessimistic conditions at a fixed ``xbar`` by direct LP solves.

    The follower must have an optimum, and over the whole optimal face the
    maximum of ``d y`` must respect the threshold while every coupling row
    has equal minimum and maximum matching ``a_i - A_i xbar``.
    """
    xbar = vec(xbar)
    if any(v < 0 for v in xbar):
        return False
    ll = solve(lower_level_at(inst, xbar))
    if not ll.optimal:
        return False
    rhs = vec_sub(inst.h, inst.T @ xbar)
    face = LinearSystem.from_rows(
        inst.m,
        eq=[(inst.W.row(i), rhs[i]) for i in range(inst.r)] + [(inst.q, ll.value)],
    )
    worst = maximize(face, inst.d)
    if not worst.optimal or worst.value > rat(alpha) - dot(inst.c, xbar):
        return False
    for i in range(inst.k):
        target = inst.a[i] - dot(inst.A.row(i), xbar)
        lo, hi = minimize(face, inst.B.row(i)), maximize(face, inst.B.row(i))
        if not (lo.optimal and hi.optimal and lo.value == target == hi.value):
            return False
    return True


# -- certificate files ----------------------------------------------------------


class CertificateFormatError(ValueError):
    pass


def format_certificate(cert: OptCert | PessCert) -> str:
    def idx(basis):
        return " ".join(str(j + 1) for j in basis)

    if isinstance(cert, OptCert):
        return f"OPT-CERT {idx(cert.basis)}".rstrip() + "\n"
    return f"PESS-CERT {idx(cert.basis)} ; {idx(cert.basis_hat)}".replace("  ", " ") + "\n"


def parse_certificate(text: str) -> OptCert | PessCert:
    tokens = text.split()
    if not tokens:
        raise CertificateFormatError("empty certificate")

    def indices(toks):
        try:
            out = tuple(int(t) - 1 for t in toks)
        except ValueError:
            raise CertificateFormatError(f"non-integer index in {toks}") from None
        if any(j < 0 for j in out):
            raise CertificateFormatError("indices are 1-based")
        return out

    kind, rest = tokens[0], tokens[1:]
    if kind == "OPT-CERT":
        return OptCert(indices(rest))
    if kind == "PESS-CERT":
        if rest.count(";") != 1:
            raise CertificateFormatError("PESS-CERT needs exactly one ';' separator")
        cut = rest.index(";")
        return PessCert(indices(rest[:cut]), indices(rest[cut + 1:]))
    raise CertificateFormatError(f"unknown certificate kind {kind!r}")

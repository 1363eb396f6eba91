"""Exact bilevel solving by enumerating lower-level bases.

Each lower-level basis with nonnegative reduced costs describes, through
the certificate system, the set of leader decisions for which it is
optimal together with the follower's optimal face.  Minimizing the
leader objective over each such system and taking the best result gives
the optimistic optimum; this is the repository's ground-truth oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .certificates import (
    CheckReport,
    OptCert,
    PessCert,
    check_opt_cert,
    check_pess_cert,
    opt_system,
    q_hat_matrix,
    split_witness,
)
from .lp import Status, bases_with_reduced_costs, minimize
from .model import BlpInstance, DecisionInstance
from .rational import Rat


@dataclass(frozen=True)
class BilevelOutcome:
    status: Status
    x: tuple | None = None
    y: tuple | None = None
    value: Rat | None = None
    certificate: OptCert | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class Decision(NamedTuple):
    yes: bool
    certificate: OptCert | PessCert | None = None
    report: CheckReport | None = None


def lower_level_bases(inst: BlpInstance) -> list[tuple[int, ...]]:
    """Bases of ``W`` with nonnegative reduced costs w.r.t. ``q``, lexicographically."""
    return bases_with_reduced_costs(inst.W, [(inst.q, lambda v: v >= 0)])


def solve_optimistic(inst: BlpInstance) -> BilevelOutcome:
    objective = inst.c + inst.d
    best = None
    for basis in lower_level_bases(inst):
        res = minimize(opt_system(inst, None, basis, with_objective=False), objective)
        if res.status is Status.UNBOUNDED:
            return BilevelOutcome(Status.UNBOUNDED, certificate=OptCert(basis))
        if res.optimal and (best is None or res.value < best[0].value):
            best = (res, basis)
    if best is None:
        return BilevelOutcome(Status.INFEASIBLE)
    res, basis = best
    x, y = split_witness(inst, res.x)
    return BilevelOutcome(Status.OPTIMAL, x, y, res.value, OptCert(basis))


def decide_optimistic(dec: DecisionInstance) -> Decision:
    """First basis (lexicographic order) whose certificate is accepted."""
    for basis in lower_level_bases(dec.instance):
        report = check_opt_cert(dec, basis)
        if report.accepted:
            return Decision(True, OptCert(basis), report)
    return Decision(False)


def pessimistic_hat_bases(inst: BlpInstance) -> list[tuple[int, ...]]:
    """Bases of ``[W; q]`` passing the sign filters of the pessimistic certificate."""
    conditions = [(inst.d, lambda v: v <= 0)]
    conditions += [(inst.B.row(i), lambda v: v == 0) for i in range(inst.k)]
    return bases_with_reduced_costs(q_hat_matrix(inst), conditions)


def decide_pessimistic(dec: DecisionInstance) -> Decision:
    """First pair ``(B, Bhat)`` (lexicographic order) whose certificate is accepted."""
    inst = dec.instance
    hats = pessimistic_hat_bases(inst)
    if not hats:
        return Decision(False)
    for basis in lower_level_bases(inst):
        for basis_hat in hats:
            cert = PessCert(basis, basis_hat)
            report = check_pess_cert(dec, cert)
            if report.accepted:
                return Decision(True, cert, report)
    return Decision(False)

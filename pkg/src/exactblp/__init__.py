"""Exact-rational toolkit for bilevel linear programs."""

from .bigm import BigMResult, compute_md, compute_mp, tight_bounds_by_enumeration
from .certificates import (
    CheckReport,
    FailedCondition,
    OptCert,
    PessCert,
    check_opt_cert,
    check_pess_cert,
    opt_system,
    pess_systems,
)
from .enumeration import BilevelOutcome, decide_optimistic, decide_pessimistic, solve_optimistic
from .kkt import MilpModel, build_milp, solve_by_z_enumeration, write_lp_format
from .lp import LinearSystem, LpResult, StandardLp, Status, check_feasible, solve
from .model import (
    BinaryProgram,
    BlpInstance,
    DecisionInstance,
    ScaledInstance,
    gen_binary_gadget,
    is_bilevel_feasible,
    load_fixture,
    parse_instance,
    scale_to_integers,
)
from .rational import Matrix, rat

__version__ = "0.1.0"

from fractions import Fraction
from pathlib import Path

import pytest

from corpus import corpus
from exactblp.bigm import compute_mp
from exactblp.enumeration import solve_optimistic
from exactblp.kkt import Constraint, MilpModel, Variable, build_milp, solve_by_z_enumeration, write_lp_format
from exactblp.lp import Status
from exactblp.model import BlpInstance, is_bilevel_feasible, load_fixture, scale_to_integers
from exactblp.rational import ZERO, dot, rat

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def path():
    return load_fixture("path")


@pytest.fixture(scope="module")
def solved_corpus():
    out = []
    for inst in corpus():
        s = scale_to_integers(inst)
        bm = compute_mp(s)
        out.append((inst, s.instance, bm, solve_optimistic(inst)))
    return out


def constraint(model, name):
    return next(c for c in model.constraints if c.name == name)


class TestBuild:
    def test_path_rows(self, path):
        model = build_milp(path, 240, 0)
        assert [v.name for v in model.variables] == ["y1", "y2", "l1", "z1", "z2"]
        assert [v.kind for v in model.variables] == ["nonneg", "nonneg", "free", "binary", "binary"]
        assert constraint(model, "cpl1").coeffs == (1, 0, 0, 0, 0)
        assert constraint(model, "ll1").coeffs == (1, 1, 0, 0, 0)
        assert constraint(model, "dual1").coeffs == (0, 0, 1, 0, 0) and constraint(model, "dual1").rhs == 0
        mp1 = constraint(model, "mp1")
        assert mp1.coeffs == (1, 0, 0, 240, 0) and mp1.rhs == 240
        md2 = constraint(model, "md2")
        assert md2.coeffs == (0, 0, -1, 0, 0) and md2.sense == "<=" and md2.rhs == 0

    def test_no_coupling(self):
        inst = load_fixture("uniq")
        model = build_milp(inst, 10, 10)
        assert not [c for c in model.constraints if c.name.startswith("cpl")]

    def test_no_lower_rows(self):
        inst = BlpInstance.build([], [1, 1], [2, -1], [[]], [[1, 1]], [1], [], [], [])
        model = build_milp(inst, 5, 3)
        assert not [v for v in model.variables if v.kind == "free"]
        md1 = constraint(model, "md1")
        # (q - W^T lam)_1 <= Md z_1 with an empty W^T lam term
        assert md1.coeffs == (0, 0, -3, 0) and md1.rhs == -2

    def test_objective(self, path):
        assert build_milp(path, 240, 0).objective == (1, 0, 0, 0, 0)


class TestLpFormat:
    def test_golden_path(self, path):
        text = write_lp_format(build_milp(path, 240, 0))
        assert text == (GOLDEN / "path.lp").read_text()

    def test_empty_objective(self):
        model = MilpModel((Variable("x1", "nonneg"),), (ZERO,), ())
        assert write_lp_format(model).startswith("Minimize\n obj: 0 x1\n")

    def test_third_scales_row(self):
        model = MilpModel(
            (Variable("x1", "nonneg"), Variable("x2", "nonneg")), (rat(1), rat(0)),
            (Constraint("c1", (rat(Fraction(1, 3)), rat(1)), "<=", rat(2)),),
        )
        assert " c1: 1 x1 + 3 x2 <= 6\n" in write_lp_format(model)

    def test_decimals(self):
        model = MilpModel(
            (Variable("x1", "nonneg"), Variable("x2", "nonneg")), (rat(Fraction(-1, 4)), rat(0)),
            (Constraint("c1", (rat(Fraction(1, 2)), rat(Fraction(-3, 20))), ">=", rat(Fraction(-7, 8))),),
        )
        text = write_lp_format(model)
        assert " obj: -0.25 x1\n" in text
        assert " c1: 0.5 x1 - 0.15 x2 >= -0.875\n" in text

    def test_long_rows_wrap(self):
        names = tuple(Variable(f"x{j + 1}", "nonneg") for j in range(10))
        model = MilpModel(names, tuple(rat(1) for _ in names), ())
        obj = write_lp_format(model).split("Subject To")[0]
        assert obj.count("\n   + ") == 1

    def test_comments(self, path):
        text = write_lp_format(build_milp(path, 240, 0, comments=("Mp = 240",)))
        assert text.startswith("\\ Mp = 240\nMinimize\n")

    def test_deterministic(self, solved_corpus):
        for _, inst, bm, _ in solved_corpus[:40]:
            a = write_lp_format(build_milp(inst, bm.Mp, bm.Md))
            b = write_lp_format(build_milp(inst, bm.Mp, bm.Md))
            assert a == b


class TestZEnumeration:
    def test_path(self, path):
        res = solve_by_z_enumeration(build_milp(path, 240, 0))
        assert res.optimal and res.value == 1
        assert res.values[:2] == (1, 1)

    def test_path_sabotaged(self, path):
        res = solve_by_z_enumeration(build_milp(path, Fraction(1, 2), 0))
        assert res.status is Status.INFEASIBLE or res.value > 1

    def test_infeasible_instance(self):
        inst = BlpInstance.build([], [0], [0], [[]], [[0]], [1], [], [], [])
        assert solve_by_z_enumeration(build_milp(inst, 1, 1)).status is Status.INFEASIBLE

    def test_unbounded_restriction_wins(self):
        # z1 = 0 gives min -x1 over x1 >= 0 (unbounded); z1 = 1 forces x1 <= 0
        model = MilpModel(
            (Variable("x1", "nonneg"), Variable("z1", "binary")), (rat(-1), rat(0)),
            (Constraint("c", (rat(1), rat(5)), ">=", rat(0)), Constraint("d", (rat(0), rat(1)), ">=", rat(0))),
        )
        assert solve_by_z_enumeration(model).status is Status.UNBOUNDED

    def test_lexicographic_tie_break(self):
        model = MilpModel((Variable("z1", "binary"), Variable("z2", "binary")), (rat(0), rat(0)),
                          (Constraint("one", (rat(1), rat(1)), "=", rat(1)),))
        assert solve_by_z_enumeration(model).z == (0, 1)

    def test_witness_complementarity_and_dual_feasibility(self, solved_corpus):
        checked = 0
        for _, inst, bm, ref in solved_corpus:
            if not ref.optimal:
                continue
            res = solve_by_z_enumeration(build_milp(inst, bm.Mp, bm.Md))
            n, m, r = inst.n, inst.m, inst.r
            y = res.values[n:n + m]
            lam = res.values[n + m:n + m + r]
            slack = [inst.q[j] - dot(inst.W.col(j), lam) for j in range(m)]
            assert all(s >= 0 for s in slack)
            assert all(yj * sj == 0 for yj, sj in zip(y, slack))
            assert all(v in (0, 1) for v in res.z)
            checked += 1
        assert checked >= 30

    def test_equivalence_where_bilevel_has_an_optimum(self, solved_corpus):
        """Optimal and Infeasible instances: tag and value agree exactly."""
        compared = 0
        for _, inst, bm, ref in solved_corpus:
            if ref.status is Status.UNBOUNDED:
                continue
            res = solve_by_z_enumeration(build_milp(inst, bm.Mp, bm.Md))
            assert (res.status, res.value) == (ref.status, ref.value)
            compared += 1
        assert compared >= 150

    def test_finite_mp_cannot_follow_an_unbounded_ray_in_y(self):
        # follower indifferent (r = 0, q = 0); coupling -2x + 3y = 2 ties y to x
        inst = BlpInstance.build([-3], [0], [0], [[-2]], [[3]], [2], [], [], [])
        assert solve_optimistic(inst).status is Status.UNBOUNDED
        bm = compute_mp(scale_to_integers(inst))
        res = solve_by_z_enumeration(build_milp(inst, bm.Mp, bm.Md))
        assert (bm.Mp, res.status, res.value) == (108, Status.OPTIMAL, -483)
        # a bilevel-feasible point beyond y = Mp does strictly better
        x, y = Fraction(484, 3), Fraction(974, 9)
        assert is_bilevel_feasible(inst, [x], [y]) and inst.objective([x], [y]) == -484


class TestSabotage:
    def test_half_changes_outcome(self, solved_corpus):
        changed = 0
        for _, inst, bm, ref in solved_corpus:
            if not ref.optimal or max(ref.y) <= 1:
                continue
            good = solve_by_z_enumeration(build_milp(inst, bm.Mp, bm.Md))
            bad = solve_by_z_enumeration(build_milp(inst, Fraction(1, 2), bm.Md))
            assert (good.status, good.value) == (ref.status, ref.value)
            if (bad.status, bad.value) != (good.status, good.value):
                changed += 1
        assert changed >= 10

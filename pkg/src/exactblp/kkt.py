"""Single-level MILP reformulation of a bilevel LP.

The follower is replaced by its KKT conditions, with complementarity
``y_i (q - W^T lam)_i = 0`` linearized through binaries ``z_i``:

    y_i <= Mp (1 - z_i),   (q - W^T lam)_i <= Md z_i
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .lp import LinearSystem, Status, minimize
from .model import BlpInstance
from .rational import ONE, ZERO, Rat, format_rational, lcm_denominators, rat


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "nonneg", "free" or "binary"


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple
    sense: str  # "=", "<=" or ">="
    rhs: Rat


@dataclass(frozen=True)
class MilpModel:
    variables: tuple
    objective: tuple
    constraints: tuple
    comments: tuple = ()

    def index(self, name: str) -> int:
        return next(i for i, v in enumerate(self.variables) if v.name == name)


@dataclass(frozen=True)
class MilpResult:
    status: Status
    value: Rat | None = None
    values: tuple | None = None
    z: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def build_milp(inst: BlpInstance, mp, md, comments=()) -> MilpModel:
    """KKT reformulation with big-M linearization; variables ordered ``x, y, lam, z``.

    ``inst`` should be the integer-scaled instance the big-Ms were computed on.
    """
    mp, md = rat(mp), rat(md)
    n, m, k, r = inst.dims
    variables = (
        [Variable(f"x{j + 1}", "nonneg") for j in range(n)]
        + [Variable(f"y{j + 1}", "nonneg") for j in range(m)]
        + [Variable(f"l{j + 1}", "free") for j in range(r)]
        + [Variable(f"z{j + 1}", "binary") for j in range(m)]
    )
    N = len(variables)
    ox, oy, ol, oz = 0, n, n + m, n + m + r

    def row(entries):
        out = [ZERO] * N
        for idx, v in entries:
            out[idx] += rat(v)
        return tuple(out)

    cons = []
    for i in range(k):
        entries = [(ox + j, inst.A[i, j]) for j in range(n)] + [(oy + j, inst.B[i, j]) for j in range(m)]
        cons.append(Constraint(f"cpl{i + 1}", row(entries), "=", inst.a[i]))
    for i in range(r):
        entries = [(ox + j, inst.T[i, j]) for j in range(n)] + [(oy + j, inst.W[i, j]) for j in range(m)]
        cons.append(Constraint(f"ll{i + 1}", row(entries), "=", inst.h[i]))
    for j in range(m):
        cons.append(Constraint(f"dual{j + 1}", row((ol + i, inst.W[i, j]) for i in range(r)), "<=", inst.q[j]))
    for j in range(m):
        cons.append(Constraint(f"mp{j + 1}", row([(oy + j, ONE), (oz + j, mp)]), "<=", mp))
    for j in range(m):
        entries = [(ol + i, -inst.W[i, j]) for i in range(r)] + [(oz + j, -md)]
        cons.append(Constraint(f"md{j + 1}", row(entries), "<=", -inst.q[j]))
    objective = row([(ox + j, inst.c[j]) for j in range(n)] + [(oy + j, inst.d[j]) for j in range(m)])
    return MilpModel(tuple(variables), objective, tuple(cons), tuple(comments))


# -- LP file --------------------------------------------------------------------


def _smooth(den: int) -> bool:
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def _decimal(value: Rat) -> str:
    num, den = int(value.numerator), int(value.denominator)
    if den == 1:
        return str(num)
    digits = 0
    while (10 ** digits) % den:
        digits += 1
    scaled = num * (10 ** digits // den)
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def _scaled_row(coeffs, rhs=ZERO):
    """Multiply by the denominator LCM unless every entry has a 2/5-smooth denominator."""
    values = list(coeffs) + [rhs]
    if all(_smooth(int(v.denominator)) for v in values):
        return coeffs, rhs, 1
    f = lcm_denominators(values)
    return tuple(v * f for v in coeffs), rhs * f, f


def _expression(coeffs, names, per_line=8) -> str:
    terms = [(v, names[j]) for j, v in enumerate(coeffs) if v]
    if not terms:
        return f"0 {names[0]}"
    parts = []
    for t, (v, name) in enumerate(terms):
        text = f"{_decimal(abs(v))} {name}"
        if t == 0:
            parts.append(("-" if v < 0 else "") + text)
        else:
            sep = "\n   " if t % per_line == 0 else " "
            parts.append(f"{sep}{'-' if v < 0 else '+'} {text}")
    return "".join(parts)


def write_lp_format(model: MilpModel) -> str:
    """Render the model in the algebraic LP-file dialect (deterministic text)."""
    names = [v.name for v in model.variables]
    out = [f"\\ {line}" for line in model.comments]
    coeffs, _, f = _scaled_row(model.objective)
    if f != 1:
        out.append(f"\\ objective multiplied by {f}")
    out.append("Minimize")
    out.append(f" obj: {_expression(coeffs, names)}")
    out.append("Subject To")
    for con in model.constraints:
        coeffs, rhs, _ = _scaled_row(con.coeffs, con.rhs)
        out.append(f" {con.name}: {_expression(coeffs, names)} {con.sense} {_decimal(rhs)}")
    free = [v.name for v in model.variables if v.kind == "free"]
    if free:
        out.append("Bounds")
        out += [f" {name} free" for name in free]
    binary = [v.name for v in model.variables if v.kind == "binary"]
    if binary:
        out.append("Binary")
        out += [" " + " ".join(binary[i:i + 10]) for i in range(0, len(binary), 10)]
    out.append("End")
    return "\n".join(out) + "\n"


# -- exact oracle -----------------------------------------------------------------


def solve_by_z_enumeration(model: MilpModel) -> MilpResult:
    """Fix every binary assignment in lexicographic order and solve the LP exactly.

    Any unbounded restriction makes the model unbounded; otherwise the
    best optimum is returned, ties going to the lexicographically
    smallest ``z``.
    """
    kinds = [v.kind for v in model.variables]
    cont = [i for i, kind in enumerate(kinds) if kind != "binary"]
    bins = [i for i, kind in enumerate(kinds) if kind == "binary"]
    free = [t for t, i in enumerate(cont) if kinds[i] == "free"]
    blocks = {"=": [], "<=": [], ">=": []}
    for con in model.constraints:
        blocks[con.sense].append(con)
    objective = [model.objective[i] for i in cont]

    best = None
    for z in itertools.product((0, 1), repeat=len(bins)):
        def rows(sense):
            out = []
            for con in blocks[sense]:
                fixed = sum((con.coeffs[i] * zi for i, zi in zip(bins, z) if zi), ZERO)
                out.append(([con.coeffs[i] for i in cont], con.rhs - fixed))
            return out

        system = LinearSystem.from_rows(len(cont), eq=rows("="), le=rows("<="), ge=rows(">="), free=free)
        res = minimize(system, objective)
        if res.status is Status.UNBOUNDED:
            return MilpResult(Status.UNBOUNDED, z=z)
        if not res.optimal:
            continue
        value = res.value + sum((model.objective[i] for i, zi in zip(bins, z) if zi), ZERO)
        if best is None or value < best.value:
            values = [ZERO] * len(kinds)
            for t, i in enumerate(cont):
                values[i] = res.x[t]
            for i, zi in zip(bins, z):
                values[i] = rat(zi)
            best = MilpResult(Status.OPTIMAL, value, tuple(values), z)
    return best if best is not None else MilpResult(Status.INFEASIBLE)

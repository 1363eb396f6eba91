"""Bilevel linear program data, instance files and semantics.

The bilevel program is

    min  c x + d y
    s.t. A x + B y = a,  x >= 0
         y in argmin { q y' : T x + W y' = h, y' >= 0 }

with the optimistic reading (among lower-level optima the leader's
best one is taken).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple, Sequence

from .lp import LinearSystem, StandardLp, minimize, solve
from .rational import (
    ZERO,
    Matrix,
    Rat,
    dot,
    format_rational,
    lcm_denominators,
    parse_rational,
    rat,
    vec,
    vec_sub,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DimensionError(ValueError):
    def __init__(self, block: str, message: str):
        super().__init__(f"block {block}: {message}")
        self.block = block


class NegativeUpperDecision(ValueError):
    pass


@dataclass(frozen=True)
class BlpInstance:
    c: tuple
    d: tuple
    q: tuple
    A: Matrix
    B: Matrix
    a: tuple
    T: Matrix
    W: Matrix
    h: tuple

    def __post_init__(self):
        n, m, k, r = len(self.c), len(self.d), len(self.a), len(self.h)
        expected = {
            "q": (len(self.q), m),
            "A": (self.A.shape, (k, n)),
            "B": (self.B.shape, (k, m)),
            "T": (self.T.shape, (r, n)),
            "W": (self.W.shape, (r, m)),
        }
        for block, (got, want) in expected.items():
            if got != want:
                raise DimensionError(block, f"expected {want}, got {got}")

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.d)

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def r(self) -> int:
        return len(self.h)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.n, self.m, self.k, self.r

    def objective(self, x: Sequence, y: Sequence) -> Rat:
        return dot(self.c, x) + dot(self.d, y)

    @classmethod
    def build(cls, c, d, q, A, B, a, T, W, h) -> "BlpInstance":
        """Convenience constructor from nested lists (dimensions inferred)."""
        n, m, k, r = len(c), len(d), len(a), len(h)

        def block(data, rows, cols):
            data = list(data)
            if not data and cols == 0:
                data = [()] * rows  # width-0 rows may be written as []
            return Matrix(data, cols)

        return cls(
            vec(c), vec(d), vec(q),
            block(A, k, n), block(B, k, m), vec(a),
            block(T, r, n), block(W, r, m), vec(h),
        )


@dataclass(frozen=True)
class DecisionInstance:
    instance: BlpInstance
    alpha: Rat


@dataclass(frozen=True)
class ScaledInstance:
    """Integer-scaled copy; constraint rows and ``q`` multiplied by positive integers."""

    instance: BlpInstance
    upper_scales: tuple
    lower_scales: tuple
    q_scale: int


@dataclass(frozen=True)
class BinaryProgram:
    """``min g x  s.t.  D x <= e,  x binary``."""

    g: tuple
    D: Matrix
    e: tuple

    @property
    def p(self) -> int:
        return len(self.g)

    @property
    def t(self) -> int:
        return len(self.e)


# -- text format ------------------------------------------------------------

_BLP_BLOCKS = ("c", "d", "q", "A", "B", "a", "T", "W", "h")


def _tokenize(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        cut = line.find("#")
        if cut >= 0:
            line = line[:cut]
        col = 0
        for piece in line.split():
            col = line.index(piece, col)
            yield piece, lineno, col + 1
            col += len(piece)


def _read_blocks(text: str, header: str, allowed: Sequence[str]):
    tokens = list(_tokenize(text))
    if not tokens:
        raise ParseError(f"empty input, expected '{header}'", 1, 1)
    head = tokens[:2]
    if len(head) < 2 or f"{head[0][0]} {head[1][0]}" != header:
        tok, line, col = tokens[0]
        raise ParseError(f"expected header '{header}'", line, col)
    blocks: dict[str, list] = {}
    current = None
    for tok, line, col in tokens[2:]:
        if tok.endswith(":"):
            name = tok[:-1]
            if name not in allowed:
                raise ParseError(f"unknown block '{name}'", line, col)
            if name in blocks:
                raise ParseError(f"duplicate block '{name}'", line, col)
            blocks[name] = []
            current = name
            continue
        if current is None:
            raise ParseError(f"value {tok!r} outside of any block", line, col)
        try:
            blocks[current].append((parse_rational(tok), line, col))
        except ValueError:
            raise ParseError(f"malformed rational {tok!r}", line, col) from None
    return blocks


def _dims(blocks, name, count):
    if "dims" not in blocks:
        raise DimensionError("dims", "missing")
    values = blocks["dims"]
    if len(values) != count:
        raise DimensionError("dims", f"expected {count} integers, got {len(values)}")
    out = []
    for v, line, col in values:
        if v.denominator != 1 or v < 0:
            raise ParseError("dimensions must be nonnegative integers", line, col)
        out.append(int(v))
    return out


def _take(blocks, name, rows, cols=None):
    size = rows if cols is None else rows * cols
    values = [v for v, _, _ in blocks.get(name, [])]
    if name not in blocks and size:
        raise DimensionError(name, "missing")
    if len(values) != size:
        shape = f"{rows}" if cols is None else f"{rows}x{cols}"
        raise DimensionError(name, f"expected {shape} = {size} entries, got {len(values)}")
    if cols is None:
        return tuple(values)
    return Matrix([values[i * cols:(i + 1) * cols] for i in range(rows)], cols)


def parse_instance(text: str) -> BlpInstance | DecisionInstance:
    """Parse the ``BLP v1`` text format.

    Raises ``ParseError`` (with line/column) on lexical problems and
    ``DimensionError`` (naming the block) on size mismatches.
    """
    blocks = _read_blocks(text, "BLP v1", ("dims",) + _BLP_BLOCKS + ("alpha",))
    n, m, k, r = _dims(blocks, "dims", 4)
    inst = BlpInstance(
        c=_take(blocks, "c", n),
        d=_take(blocks, "d", m),
        q=_take(blocks, "q", m),
        A=_take(blocks, "A", k, n),
        B=_take(blocks, "B", k, m),
        a=_take(blocks, "a", k),
        T=_take(blocks, "T", r, n),
        W=_take(blocks, "W", r, m),
        h=_take(blocks, "h", r),
    )
    if "alpha" in blocks:
        (alpha,) = _take(blocks, "alpha", 1)
        return DecisionInstance(inst, alpha)
    return inst


def _fmt_vec(values) -> str:
    return " ".join(format_rational(v) for v in values)


def _fmt_block(name: str, data) -> list[str]:
    if isinstance(data, Matrix):
        if data.rows == 0:
            return [f"{name}:"]
        lines = [f"{name}:"]
        lines += [f"  {_fmt_vec(r)}" for r in data]
        return lines
    return [f"{name}: {_fmt_vec(data)}".rstrip()]


def format_instance(inst: BlpInstance | DecisionInstance) -> str:
    alpha = None
    if isinstance(inst, DecisionInstance):
        inst, alpha = inst.instance, inst.alpha
    lines = ["BLP v1", "dims: {} {} {} {}".format(*inst.dims)]
    for name in _BLP_BLOCKS:
        lines += _fmt_block(name, getattr(inst, name))
    if alpha is not None:
        lines.append(f"alpha: {format_rational(alpha)}")
    return "\n".join(lines) + "\n"


def parse_binary_program(text: str) -> BinaryProgram:
    blocks = _read_blocks(text, "BIN v1", ("dims", "g", "D", "e"))
    p, t = _dims(blocks, "dims", 2)
    return BinaryProgram(_take(blocks, "g", p), _take(blocks, "D", t, p), _take(blocks, "e", t))


def format_binary_program(bp: BinaryProgram) -> str:
    lines = ["BIN v1", f"dims: {bp.p} {bp.t}"]
    lines += _fmt_block("g", bp.g) + _fmt_block("D", bp.D) + _fmt_block("e", bp.e)
    return "\n".join(lines) + "\n"


# -- transformations ----------------------------------------------------------


def scale_to_integers(inst: BlpInstance) -> ScaledInstance:
    """Clear denominators row by row in ``[A B a]``, ``[T W h]`` and in ``q``.

    ``c`` and ``d`` are left untouched; they enter no big-M bound.
    """
    upper = tuple(
        lcm_denominators(inst.A.row(i) + inst.B.row(i) + (inst.a[i],)) for i in range(inst.k)
    )
    lower = tuple(
        lcm_denominators(inst.T.row(i) + inst.W.row(i) + (inst.h[i],)) for i in range(inst.r)
    )
    q_scale = lcm_denominators(inst.q)
    scaled = BlpInstance(
        c=inst.c,
        d=inst.d,
        q=tuple(q_scale * v for v in inst.q),
        A=inst.A.scale_rows(upper),
        B=inst.B.scale_rows(upper),
        a=tuple(f * v for f, v in zip(upper, inst.a)),
        T=inst.T.scale_rows(lower),
        W=inst.W.scale_rows(lower),
        h=tuple(f * v for f, v in zip(lower, inst.h)),
    )
    return ScaledInstance(scaled, upper, lower, q_scale)


def lower_level_at(inst: BlpInstance, xbar: Sequence) -> StandardLp:
    """The follower's LP ``min q y  s.t.  W y = h - T xbar, y >= 0``."""
    xbar = vec(xbar)
    if len(xbar) != inst.n:
        raise ValueError(f"xbar has length {len(xbar)}, expected {inst.n}")
    if any(v < 0 for v in xbar):
        raise NegativeUpperDecision(f"upper-level decision has a negative entry: {xbar}")
    return StandardLp(inst.W, vec_sub(inst.h, inst.T @ xbar), inst.q)


class Verdict(NamedTuple):
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok


def is_bilevel_feasible(inst: BlpInstance, x: Sequence, y: Sequence) -> Verdict:
    """Exact optimistic bilevel feasibility of ``(x, y)``.

    Sign conditions are checked before the equality blocks, then the
    lower level is solved at ``x`` and ``q y`` compared with its optimum.
    """
    x, y = vec(x), vec(y)
    if len(x) != inst.n or len(y) != inst.m:
        raise ValueError("point dimensions do not match the instance")
    if any(v < 0 for v in x):
        return Verdict(False, "x >= 0 violated")
    if any(v < 0 for v in y):
        return Verdict(False, "y >= 0 violated")
    if vec_sub(inst.a, inst.A @ x) != inst.B @ y:
        return Verdict(False, "coupling violated")
    if vec_sub(inst.h, inst.T @ x) != inst.W @ y:
        return Verdict(False, "lower-level constraints violated")
    res = solve(lower_level_at(inst, x))
    if not res.optimal:
        return Verdict(False, "lower-level-has-no-optimum")
    if dot(inst.q, y) != res.value:
        return Verdict(False, "y not lower-level optimal")
    return Verdict(True)


def optimistic_response(inst: BlpInstance, xbar: Sequence):
    """Best follower response at ``xbar`` for the leader, or ``None``.

    Solves the lower level, then minimizes ``d y`` over its optimal face
    intersected with the coupling rows.  Returns ``(y, leader value)``.
    """
    xbar = vec(xbar)
    ll = solve(lower_level_at(inst, xbar))
    if not ll.optimal:
        return None
    m = inst.m
    eq = [(inst.W.row(i), inst.h[i] - dot(inst.T.row(i), xbar)) for i in range(inst.r)]
    eq.append((inst.q, ll.value))
    eq += [(inst.B.row(i), inst.a[i] - dot(inst.A.row(i), xbar)) for i in range(inst.k)]
    res = minimize(LinearSystem.from_rows(m, eq=eq), inst.d)
    if not res.optimal:
        return None
    return res.x, dot(inst.c, xbar) + res.value


def gen_binary_gadget(bp: BinaryProgram) -> BlpInstance:
    """Encode ``min g x, D x <= e, x binary`` as a bilevel LP.

    Upper variables are ``x`` followed by slacks ``w`` (``D x + w = e``).
    For each binary ``x_i`` the follower maximizes ``y_i`` subject to
    ``y_i <= x_i`` and ``y_i <= 1 - x_i`` (slacks ``u_i``, ``v_i``), and
    the leader requires ``y_i = 0``.  ``x_i > 1`` makes the follower
    infeasible, so no ``x <= 1`` rows are needed.
    """
    p, t = bp.p, bp.t
    n = p + t
    m = 3 * p
    A_rows, B_rows, a = [], [], []
    for i in range(t):
        A_rows.append(list(bp.D.row(i)) + [1 if j == i else 0 for j in range(t)])
        B_rows.append([0] * m)
        a.append(bp.e[i])
    for i in range(p):
        A_rows.append([0] * n)
        B_rows.append([1 if j == 3 * i else 0 for j in range(m)])
        a.append(0)
    T_rows, W_rows, h = [], [], []
    for i in range(p):
        for sign, slack, rhs in ((-1, 1, 0), (1, 2, 1)):
            T_rows.append([sign if j == i else 0 for j in range(n)])
            W_rows.append([1 if j in (3 * i, 3 * i + slack) else 0 for j in range(m)])
            h.append(rhs)
    q = [-1 if j % 3 == 0 else 0 for j in range(m)]
    c = list(bp.g) + [0] * t
    return BlpInstance.build(c, [0] * m, q, A_rows, B_rows, a, T_rows, W_rows, h)


def brute_force_binary(bp: BinaryProgram):
    """Exhaustive optimum of a binary program; ``None`` when infeasible."""
    best = None
    for bits in itertools.product((0, 1), repeat=bp.p):
        x = vec(bits)
        if all(dot(bp.D.row(i), x) <= bp.e[i] for i in range(bp.t)):
            value = dot(bp.g, x)
            if best is None or value < best[0]:
                best = (value, x)
    return best


# -- fixtures -----------------------------------------------------------------


def load_fixture(name: str) -> BlpInstance | DecisionInstance:
    """Load a shipped instance (``"path"`` or ``"uniq"``)."""
    text = resources.files("exactblp.fixtures").joinpath(f"{name}.blp").read_text()
    return parse_instance(text)


def chain_system(m: int) -> LinearSystem:
    """``y_1 = 1, 2 y_i - y_{i+1} = 0``: coefficients at most 2, ``y_m = 2^(m-1)``."""
    eq = [([1] + [0] * (m - 1), 1)]
    for i in range(m - 1):
        row = [0] * m
        row[i], row[i + 1] = 2, -1
        eq.append((row, 0))
    return LinearSystem.from_rows(m, eq=eq)

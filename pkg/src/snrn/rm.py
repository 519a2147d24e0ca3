"""Register machines, their interpreter, and a compiler into normal-only symbols.

The compiled symbol runs the machine through a simultaneous recursion over a
packed state ``(index, inst, r_0, ..., r_{R-1})``.  One recursion base step
executes one instruction; the clock numeral ``y`` yields ``N(y)`` steps with
``N(0) = 1`` and ``N(C_i(y)) = 2 N(y)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .semantics import pi_eval
from .stdlib import (K1, Polynomial, accel_table, const_normal, const_safe,
                     exp_poly_normal, mk_exp_poly, mk_simul_snrn)
from .terms import CASES, O, PRED, SUCC, FuncSym, Proj, Sub, Zero, bitlen

__all__ = [
    "Instruction", "RegProgram", "MachineState", "RunResult", "RMError", "RMParseError",
    "rm_step", "rm_run", "initial_state", "expand_macros", "encode_instruction",
    "decode_instruction", "build_step_functions", "compile_program", "iterate_count",
    "verify_compile", "parse_program", "render_program", "sample_programs",
    "CompiledProgram", "CompileReport",
]

OPCODES = {"Z": 0, "S": 1, "P": 2, "T": 3, "JZ": 4}
_ARGC = {"Z": 1, "S": 1, "P": 1, "T": 2, "JZ": 2, "JEQ": 3}


class RMError(ValueError):
    pass


class RMParseError(RMError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class Instruction:
    """``op`` is one of Z, S, P, T, JZ or the macro JEQ; ``args`` as in the text format."""

    op: str
    args: tuple[int, ...]

    def __post_init__(self):
        if self.op not in _ARGC:
            raise RMError(f"unknown instruction {self.op}")
        if len(self.args) != _ARGC[self.op]:
            raise RMError(f"{self.op} takes {_ARGC[self.op]} operands")
        if any(a < 0 for a in self.args):
            raise RMError("operands are natural numbers")

    @property
    def registers(self) -> tuple[int, ...]:
        if self.op == "JZ":
            return self.args[:1]
        if self.op == "JEQ":
            return self.args[:2]
        return self.args

    @property
    def target(self) -> Optional[int]:
        return self.args[-1] if self.op in ("JZ", "JEQ") else None

    def __str__(self):
        return " ".join([self.op, *map(str, self.args)])


def Z(k):
    return Instruction("Z", (k,))


def S(k):
    return Instruction("S", (k,))


def P(k):
    return Instruction("P", (k,))


def T(k, l):
    return Instruction("T", (k, l))


def JZ(k, j):
    return Instruction("JZ", (k, j))


def JEQ(k, l, j):
    return Instruction("JEQ", (k, l, j))


@dataclass(frozen=True)
class RegProgram:
    instructions: tuple[Instruction, ...]
    input_count: int
    register_count: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not self.instructions:
            raise RMError("a program needs at least one instruction")
        if self.register_count < self.input_count + 1:
            raise RMError("need registers for the output and every input")
        halt = len(self.instructions) + 1
        for n, ins in enumerate(self.instructions, 1):
            for r in ins.registers:
                if r >= self.register_count:
                    raise RMError(f"instruction {n} ({ins}) uses register {r} of {self.register_count}")
            t = ins.target
            if t is not None and not 1 <= t <= halt:
                raise RMError(f"instruction {n} ({ins}) jumps outside 1..{halt}")

    @property
    def halt(self) -> int:
        return len(self.instructions) + 1

    @property
    def has_macros(self) -> bool:
        return any(i.op == "JEQ" for i in self.instructions)


@dataclass(frozen=True)
class MachineState:
    pc: int
    registers: tuple[int, ...]


class RunResult(NamedTuple):
    output: int
    steps: int
    halted: bool


def initial_state(prog: RegProgram, inputs: Sequence[int]) -> MachineState:
    if len(inputs) != prog.input_count:
        raise RMError(f"expected {prog.input_count} inputs, got {len(inputs)}")
    regs = [0] * prog.register_count
    regs[1:1 + len(inputs)] = inputs
    return MachineState(1, tuple(regs))


def rm_step(state: MachineState, prog: RegProgram) -> MachineState:
    """Execute one instruction; a halted state is returned unchanged."""
    if state.pc >= prog.halt:
        return state
    ins = prog.instructions[state.pc - 1]
    r = list(state.registers)
    nxt = state.pc + 1
    a = ins.args
    if ins.op == "Z":
        r[a[0]] = 0
    elif ins.op == "S":
        r[a[0]] += 1
    elif ins.op == "P":
        r[a[0]] = max(r[a[0]] - 1, 0)
    elif ins.op == "T":
        r[a[0]] = r[a[1]]
    elif ins.op == "JZ":
        if r[a[0]] == 0:
            nxt = a[1]
    elif r[a[0]] == r[a[1]]:
        nxt = a[2]
    return MachineState(nxt, tuple(r))


def rm_run(prog: RegProgram, inputs: Sequence[int], fuel: int = 10**6) -> RunResult:
    s = initial_state(prog, inputs)
    steps = 0
    while s.pc < prog.halt:
        if steps >= fuel:
            return RunResult(s.registers[0], steps, False)
        s = rm_step(s, prog)
        steps += 1
    return RunResult(s.registers[0], steps, True)


def expand_macros(prog: RegProgram, scratch: Sequence[int] | None = None) -> RegProgram:
    """Replace each equality jump by a zero-test loop.

    ``scratch`` names two copy registers and one register that stays zero
    (used for unconditional jumps); by default three fresh registers are
    appended.  They must not occur in the program or hold an input.
    """
    if not prog.has_macros:
        return prog
    R = prog.register_count
    if scratch is None:
        a, b, z = R, R + 1, R + 2
    else:
        a, b, z = scratch
    used = {r for ins in prog.instructions for r in ins.registers} | set(range(prog.input_count + 1))
    clash = sorted(used & {a, b, z})
    if clash or len({a, b, z}) != 3:
        raise RMError(f"scratch registers collide with program registers: {clash or (a, b, z)}")
    new_R = max(R, a + 1, b + 1, z + 1)

    starts, pos = [], 1
    for ins in prog.instructions:
        starts.append(pos)
        pos += 10 if ins.op == "JEQ" else 1
    new_halt = pos

    def where(j):
        return new_halt if j == prog.halt else starts[j - 1]

    out: list[Instruction] = []
    for n, ins in enumerate(prog.instructions):
        if ins.op == "JZ":
            out.append(JZ(ins.args[0], where(ins.args[1])))
        elif ins.op != "JEQ":
            out.append(ins)
        else:
            k, l, j = ins.args
            s0 = starts[n]
            after = where(n + 2)
            out += [
                T(a, k), T(b, l),
                JZ(a, s0 + 7),      # a exhausted: equal iff b is too
                JZ(b, s0 + 8),      # b exhausted first: not equal
                P(a), P(b), JZ(z, s0 + 2),
                JZ(b, s0 + 9),
                JZ(z, after),
                JZ(z, where(j)),
            ]
    return RegProgram(tuple(out), prog.input_count, new_R, prog.name)


# --- instruction codes ---------------------------------------------------------

def encode_instruction(ins: Instruction, register_count: int) -> int:
    """``opcode + 5 (k + R * second)`` with the second operand 0 for unary ops."""
    if ins.op == "JEQ":
        raise RMError("equality jumps are macros; expand them before encoding")
    R = register_count
    k = ins.args[0]
    if k >= R:
        raise RMError(f"register {k} outside 0..{R - 1}")
    second = ins.args[1] if len(ins.args) > 1 else 0
    return OPCODES[ins.op] + 5 * (k + R * second)


def decode_instruction(code: int, register_count: int) -> Instruction:
    if code < 0:
        raise RMError(f"{code} is not an instruction code")
    op = next(o for o, c in OPCODES.items() if c == code % 5)
    rest = code // 5
    k, second = rest % register_count, rest // register_count
    if op in ("Z", "S", "P"):
        if second:
            raise RMError(f"{code} is not an instruction code")
        return Instruction(op, (k,))
    return Instruction(op, (k, second))


# --- the step functions --------------------------------------------------------

def _ladder(idx: FuncSym, branches: Sequence[FuncSym], default: FuncSym, k: int, l: int) -> FuncSym:
    """``branches[j-1]`` when ``idx`` is j, ``default`` beyond the last branch."""
    pred = [idx]
    for _ in branches:
        pred.append(Sub(PRED, [], [pred[-1]], k=k, l=l))
    acc = default
    for j in range(len(branches), 0, -1):
        acc = Sub(CASES, [], [pred[j], branches[j - 1], acc], k=k, l=l)
    return acc


def _choose(test: FuncSym, if_zero: FuncSym, other: FuncSym, k: int, l: int) -> FuncSym:
    return Sub(CASES, [], [test, if_zero, other], k=k, l=l)


def build_step_functions(prog: RegProgram, k: int | None = None) -> list[FuncSym]:
    """One symbol per state component, each of arity (k, 2 + R).

    Only the safe state arguments are read.  Updates dispatch on the index
    component; index ``halt`` and beyond leave the state unchanged (``inst``
    is 0 there).
    """
    if prog.has_macros:
        raise RMError("expand equality jumps before building step functions")
    k = prog.input_count if k is None else k
    R = prog.register_count
    l = R + 2
    idx = Proj(k, l, k + 1)
    inst = Proj(k, l, k + 2)
    reg = [Proj(k, l, k + 3 + i) for i in range(R)]
    codes = [encode_instruction(i, R) for i in prog.instructions] + [0]

    def const(c):
        return const_safe(c, k, l)

    def code_at(j):
        return codes[j - 1]

    index_br, inst_br = [], []
    reg_br: list[list[FuncSym]] = [[] for _ in range(R)]
    for j, ins in enumerate(prog.instructions, 1):
        a = ins.args
        if ins.op == "JZ":
            index_br.append(_choose(reg[a[0]], const(a[1]), const(j + 1), k, l))
            inst_br.append(_choose(reg[a[0]], const(code_at(a[1])), const(code_at(j + 1)), k, l))
        else:
            index_br.append(const(j + 1))
            inst_br.append(const(code_at(j + 1)))
        for r in range(R):
            v = reg[r]
            if ins.op == "Z" and r == a[0]:
                v = Zero(k, l)
            elif ins.op == "S" and r == a[0]:
                v = Sub(SUCC, [], [reg[r]], k=k, l=l)
            elif ins.op == "P" and r == a[0]:
                v = Sub(PRED, [], [reg[r]], k=k, l=l)
            elif ins.op == "T" and r == a[0]:
                v = reg[a[1]]
            reg_br[r].append(v)
    out = [_ladder(idx, index_br, idx, k, l), _ladder(idx, inst_br, inst, k, l)]
    out += [_ladder(idx, reg_br[r], reg[r], k, l) for r in range(R)]
    return out


def _start_functions(prog: RegProgram) -> list[FuncSym]:
    k, R = prog.input_count, prog.register_count
    first = encode_instruction(prog.instructions[0], R)
    gs = [const_normal(1, k), const_normal(first, k), Zero(k, 0)]
    gs += [Proj(k, 0, i) if i <= k else Zero(k, 0) for i in range(1, R)]
    return gs


def iterate_count(y: int) -> int:
    """Number of base steps the recursion performs on clock ``y`` (counting oracle)."""
    counter = mk_simul_snrn([SUCC], K1, K1, [O], None)[0]
    return pi_eval(counter, [y], [])


@dataclass
class CompiledProgram:
    program: RegProgram
    q: Polynomial
    symbol: FuncSym
    step_functions: list[FuncSym]
    start_functions: list[FuncSym]
    clock: FuncSym
    width: Polynomial
    simulators: list[FuncSym] = field(repr=False, default_factory=list)

    @property
    def accel(self) -> dict:
        """Closed forms for the stdlib parts, including both exponential constants."""
        k = self.program.input_count
        return accel_table(mk_exp_poly(self.q, k), mk_exp_poly(self.width, k + 1))

    def __call__(self, *inputs: int) -> int:
        return pi_eval(self.symbol, inputs, (), accel=self.accel)


def _width(prog: RegProgram) -> Polynomial:
    # registers stay below max(x) + N(y), so |y| + sum |x_i| + 1 bits suffice
    c = max(1, bitlen(max(encode_instruction(i, prog.register_count) for i in prog.instructions)),
            bitlen(prog.halt))
    lin = [(i,) for i in range(prog.input_count + 1)]
    return Polynomial.of(*lin, *[()] * c)


def compile_program(prog: RegProgram, q: Polynomial) -> CompiledProgram:
    """Normal-only symbol ``F(x;)`` equal to the machine output.

    ``q`` bounds the running time: the machine must halt within ``2^q(|x|)``
    steps.  The clock ``2^q`` has ``q + 1`` constructors, so ``2^(q+1)`` steps
    are simulated.
    """
    prog = expand_macros(prog)
    k = prog.input_count
    hs = build_step_functions(prog)
    gs = _start_functions(prog)
    width = _width(prog)
    sims = mk_simul_snrn(hs, K1, K1, gs, width)
    clock = exp_poly_normal(q, k)
    xs = [Proj(k, 0, i) for i in range(1, k + 1)]
    F = Sub(sims[2], [clock, *xs], [], k=k, l=0)
    return CompiledProgram(prog, q, F, hs, gs, clock, width, sims)


# --- verification --------------------------------------------------------------

@dataclass
class CompileReport:
    checked: int = 0
    mismatches: list[dict] = field(default_factory=list)
    skipped: list[tuple] = field(default_factory=list)
    rewrite_checked: int = 0
    rewrite_truncated: list[tuple] = field(default_factory=list)
    max_sp: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "mismatches": self.mismatches,
                "skipped": [list(s) for s in self.skipped],
                "rewrite_checked": self.rewrite_checked,
                "rewrite_truncated": [list(s) for s in self.rewrite_truncated],
                "max_sp": self.max_sp}


def verify_compile(prog: RegProgram, q: Polynomial, inputs: Sequence[Sequence[int]],
                   rewrite_inputs: Sequence[Sequence[int]] = (), fuel: int = 10**5,
                   budgets=None, compiled: CompiledProgram | None = None) -> CompileReport:
    """Compare the compiled symbol with the interpreter.

    Inputs on which the machine does not halt within ``fuel`` or within the
    clock are skipped.  ``rewrite_inputs`` are also normalized innermost;
    runs that hit ``budgets`` are listed as truncated, not as mismatches.
    """
    from .rewrite import Budgets, clear_caches, normalize
    from .terms import mk, num

    comp = compiled or compile_program(prog, q)
    accel = comp.accel
    rep = CompileReport()
    for xs in map(tuple, inputs):
        run = rm_run(prog, xs, fuel)
        core = rm_run(comp.program, xs, fuel)
        clock_steps = 2 ** (q([bitlen(x) for x in xs]) + 1)
        if not (run.halted and core.halted) or core.steps > clock_steps:
            rep.skipped.append(xs)
            continue
        rep.checked += 1
        got = pi_eval(comp.symbol, xs, (), accel=accel)
        if got != run.output:
            rep.mismatches.append({"inputs": list(xs), "expected": run.output,
                                   "pi_eval": got})
    budgets = budgets or Budgets(max_steps=2 * 10**6, max_term_length=10**6)
    for xs in map(tuple, rewrite_inputs):
        run = rm_run(prog, xs, fuel)
        prof = normalize(mk(comp.symbol, [num(x) for x in xs], []), budgets=budgets)
        clear_caches()
        if prof.truncated:
            rep.rewrite_truncated.append(xs)
            continue
        rep.rewrite_checked += 1
        rep.max_sp = max(rep.max_sp or 0, prof.max_length)
        if prof.value != run.output:
            rep.mismatches.append({"inputs": list(xs), "expected": run.output,
                                   "rewrite": prof.value})
    return rep


# --- text format ---------------------------------------------------------------

_HEADER = re.compile(r"^regs\s+(\d+)\s+inputs\s+(\d+)$")


def parse_program(text: str, name: str = "") -> RegProgram:
    """Parse ``regs N inputs K`` followed by one instruction per line.

    ``#`` starts a comment; blank lines are ignored.
    """
    header = None
    body: list[tuple[int, Instruction]] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise RMParseError("expected header 'regs N inputs K'", n)
            header = (int(m.group(1)), int(m.group(2)))
            continue
        parts = line.split()
        op = parts[0].upper()
        if op not in _ARGC:
            raise RMParseError(f"unknown instruction {parts[0]!r}", n)
        try:
            args = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise RMParseError(f"operands must be integers: {line!r}", n) from None
        try:
            body.append((n, Instruction(op, args)))
        except RMError as e:
            raise RMParseError(str(e), n) from None
    if header is None:
        raise RMParseError("empty program")
    regs, k = header
    try:
        return RegProgram(tuple(i for _, i in body), k, regs, name)
    except RMError as e:
        m = re.match(r"instruction (\d+)", str(e))
        line = body[int(m.group(1)) - 1][0] if m else None
        raise RMParseError(str(e), line) from None


def render_program(prog: RegProgram) -> str:
    lines = [f"regs {prog.register_count} inputs {prog.input_count}"]
    lines += [str(i) for i in prog.instructions]
    return "\n".join(lines) + "\n"


def sample_programs() -> dict[str, tuple[RegProgram, Polynomial]]:
    """Three reference programs with running-time exponents over input lengths."""
    halt = RegProgram((Z(0),), 1, 2, "halt")
    double = RegProgram((JZ(1, 6), P(1), S(0), S(0), JZ(2, 1)), 1, 3, "double")
    add = RegProgram((T(0, 1), JEQ(3, 2, 6), S(0), S(3), JZ(4, 2)), 2, 5, "add")
    return {
        "halt": (halt, Polynomial()),
        "double": (double, Polynomial.of((0,), (), ())),
        "add": (add, Polynomial.of((1,), (1,), (), ())),
    }

"""Example functions of the class and the machinery built on top of them.

Every named function carries an exact Python closed form.  Helper symbols used
for packing tuples into one safe value carry one too; :func:`accel_table`
collects them so that :func:`~snrn.semantics.pi_eval` can skip their equations
on large inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .lex import LexFn, standard_lexfn, lexfn_from_rows
from .semantics import pi_eval
from .terms import (CASES, DEL, PRED, SUCC, C0, C1, FuncSym, Proj, Snrn, Sub, Zero,
                    bitlen, words)

__all__ = [
    "NamedFunction", "Polynomial", "K1", "mk_dotted_minus", "mk_plus", "mk_monus",
    "mk_times", "mk_exp_len", "mk_exp3", "mk_exp_poly", "exp_poly_normal",
    "mk_half_len", "mk_pair", "mk_unpair0", "mk_unpair1", "mk_safe_rec",
    "mk_simul_snrn", "simul_reference", "registry", "lookup", "accel_table",
    "const_normal", "const_safe", "lift_safe", "low_symbol", "shl_symbol",
    "pack_values", "unpack_value", "SimulPlan",
]

ClosedForm = Callable[[tuple, tuple], int]


@dataclass(frozen=True)
class NamedFunction:
    name: str
    symbol: FuncSym
    closed_form: ClosedForm = field(compare=False)
    note: str = ""

    def __call__(self, normal=(), safe=()):
        return self.closed_form(tuple(normal), tuple(safe))


@dataclass(frozen=True)
class Polynomial:
    """Sum of monomials; each monomial lists 0-based variable indices."""

    monomials: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def of(cls, *monomials: Sequence[int]) -> "Polynomial":
        return cls(tuple(tuple(m) for m in monomials))

    def __call__(self, lengths: Sequence[int]) -> int:
        total = 0
        for mono in self.monomials:
            prod = 1
            for v in mono:
                prod *= lengths[v]
            total += prod
        return total

    @property
    def variables(self) -> set[int]:
        return {v for m in self.monomials for v in m}

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(self.monomials + other.monomials)

    def __str__(self):
        if not self.monomials:
            return "0"
        return " + ".join("*".join(f"|x{v}|" for v in m) or "1" for m in self.monomials)


# --- small builders -------------------------------------------------------------

K1 = standard_lexfn(1)  # the only valid lex-function over one argument: f(1,w)=2


def _snrn1(g, h0, phi0, h1=None, phi1=None):
    return Snrn(1, g, {"0": (h0, phi0), "1": (h1 or h0, phi1 or phi0)}, K1, K1)


def lift_safe(g: FuncSym, k: int, l: int) -> FuncSym:
    """View a normal-only symbol of arity (k,0) as one of arity (k,l)."""
    if l == 0:
        return g
    return Sub(g, [Proj(k, 0, i) for i in range(1, k + 1)], [], k=k, l=l)


def const_normal(c: int, n: int) -> FuncSym:
    """The constant ``c`` as a normal-only symbol of arity (n,0)."""
    f: FuncSym = Zero(n, 0)
    for bit in format(c, "b") if c else "":
        f = Sub(C1 if bit == "1" else C0, [f], [])
    return f


@lru_cache(maxsize=None)
def _succ_chain(c: int) -> FuncSym:
    f: FuncSym = Proj(0, 1, 1)
    for _ in range(c):
        f = Sub(SUCC, [], [f])
    return f


def const_safe(c: int, k: int, l: int) -> FuncSym:
    """The constant ``c`` built from successors, arity (k,l)."""
    if c == 0:
        return Zero(k, l)
    return Sub(_succ_chain(c), [], [Zero(k, l)])


def _rm(a: int, b: int) -> int:
    return a - b if a > b else 0


# --- the examples ------------------------------------------------------------------

@lru_cache(maxsize=None)
def mk_dotted_minus() -> NamedFunction:
    rec = Proj(1, 2, 3)
    sym = _snrn1(DEL, rec, rec)
    return NamedFunction("dotted_minus", sym,
                         lambda n, s: s[0] >> (1 << bitlen(n[0])),
                         "floor(a / 2^(2^bitlen x))")


@lru_cache(maxsize=None)
def mk_plus() -> NamedFunction:
    rec = Proj(1, 2, 3)
    sym = _snrn1(Proj(0, 1, 1), rec, rec, Sub(SUCC, [], [rec]), rec)
    return NamedFunction("plus", sym, lambda n, s: n[0] + s[0], "x + a")


@lru_cache(maxsize=None)
def mk_monus() -> NamedFunction:
    rec = Proj(1, 2, 3)
    sym = _snrn1(Proj(0, 1, 1), rec, rec, Sub(PRED, [], [rec]), rec)
    return NamedFunction("monus", sym, lambda n, s: _rm(s[0], n[0]), "a - x, truncated")


@lru_cache(maxsize=None)
def mk_times() -> NamedFunction:
    g = Sub(mk_plus().symbol, [Proj(1, 0, 1)], [Proj(1, 1, 2)])
    rec = Proj(2, 2, 4)
    sym = _snrn1(g, rec, rec)
    return NamedFunction("times", sym, lambda n, s: (n[1] << bitlen(n[0])) + s[0],
                         "y * 2^bitlen(x) + a")


@lru_cache(maxsize=None)
def mk_exp_len() -> NamedFunction:
    rec = Proj(1, 2, 3)
    sym = _snrn1(SUCC, rec, rec)
    return NamedFunction("exp_len", sym, lambda n, s: (1 << bitlen(n[0])) + s[0],
                         "2^bitlen(x) + a")


@lru_cache(maxsize=None)
def mk_half_len() -> NamedFunction:
    sym = mk_safe_rec(Proj(0, 1, 1), Sub(DEL, [], [Proj(1, 2, 3)]))
    return NamedFunction("half_len", sym, lambda n, s: s[0] >> bitlen(n[0]),
                         "floor(a / 2^bitlen(x))")


@lru_cache(maxsize=None)
def mk_exp3() -> NamedFunction:
    """The three-slot recursion for 2^(|x||y|+|z|) + a, row by row."""
    rec, b = Proj(3, 2, 5), Proj(3, 2, 4)
    rows, branches = {}, {}
    for w in words(3):
        if w[2] != "Z":
            rows[w] = (1, 2, 6)
            branches[w] = (rec, rec)
        elif w[1] != "Z":
            rows[w] = (1, 5, 1)
            branches[w] = (rec, b)
        else:
            rows[w] = (4, 2, 3)
            branches[w] = (rec, b)
    f = lexfn_from_rows(3, rows)
    sym = Snrn(3, SUCC, branches, f, f)

    def closed(n, s):
        x, y, z = (bitlen(v) for v in n)
        return (1 << (x * y + z)) + s[0]

    return NamedFunction("exp3", sym, closed, "2^(|x||y|+|z|) + a")


def mk_safe_rec(g: FuncSym, h0: FuncSym, h1: FuncSym | None = None) -> FuncSym:
    """Plain safe recursion on notation as a recursion whose phi returns b."""
    kp, l1 = g.arity()
    h1 = h1 or h0
    phi = Proj(1 + kp, l1 + 1, 1 + kp + l1)
    return _snrn1(g, h0, phi, h1, phi)


@lru_cache(maxsize=None)
def mk_exp_poly(p: Polynomial, n_inputs: int) -> NamedFunction:
    """2^p(bitlens) + a as a symbol of arity (n_inputs, 1).

    Slots are: one reload source per variable that a monomial needs again,
    then the counters of each non-constant monomial in order, then a single
    slot whose start value has one bit per constant monomial.  The rightmost
    nonzero slot always moves: the last counter of a monomial doubles, any
    other counter steps once and reloads its successor from the source slot.
    """
    n = n_inputs
    if any(v >= n or v < 0 for v in p.variables):
        raise ValueError("polynomial uses a variable outside the inputs")

    def closed(ns, ss, p=p):
        return (1 << p([bitlen(v) for v in ns])) + ss[0]

    monos = [m for m in p.monomials if m]
    consts = len(p.monomials) - len(monos)
    if not p.monomials:
        sym = Sub(SUCC, [], [Proj(n, 1, n + 1)])
        return NamedFunction(f"exp_poly[{p}]", sym, closed, "2^p + a")

    sources = sorted({v for m in monos for v in m[1:]})
    src_slot = {v: i + 1 for i, v in enumerate(sources)}
    roles: list[tuple] = [("source", v) for v in sources]
    init: list[FuncSym] = [Proj(n, 0, v + 1) for v in sources]
    for m in monos:
        for j, v in enumerate(m):
            nxt = src_slot[m[j + 1]] if j + 1 < len(m) else None
            roles.append(("last", None) if nxt is None else ("step", nxt))
            init.append(Proj(n, 0, v + 1) if j == 0 else Zero(n, 0))
    if consts:
        roles.append(("last", None))
        init.append(const_normal(1 << (consts - 1), n))
    K = len(roles)
    rec, b = Proj(K, 2, K + 2), Proj(K, 2, K + 1)
    rows, branches = {}, {}
    for w in words(K):
        k0 = max(i for i, c in enumerate(w) if c != "Z")
        row = list(range(1, K + 1))
        row[k0] = K + k0 + 1
        kind, nxt = roles[k0]
        if kind == "last":
            branches[w] = (rec, rec)
        else:
            branches[w] = (rec, b)
            if kind == "step":
                row[k0 + 1] = nxt
        rows[w] = tuple(row)
    f = lexfn_from_rows(K, rows)
    core = Snrn(K, SUCC, branches, f, f)
    sym = Sub(core, init, [Proj(n, 1, n + 1)])
    return NamedFunction(f"exp_poly[{p}]", sym, closed, "2^p + a")


@lru_cache(maxsize=None)
def exp_poly_normal(p: Polynomial, n_inputs: int) -> FuncSym:
    """2^p(bitlens) as a normal-only symbol."""
    e = mk_exp_poly(p, n_inputs).symbol
    n = n_inputs
    return Sub(e, [Proj(n, 0, i) for i in range(1, n + 1)], [Zero(n, 0)], k=n, l=0)


@lru_cache(maxsize=None)
def mk_pair() -> NamedFunction:
    sym = Sub(mk_times().symbol, [Proj(3, 0, 1), Proj(3, 0, 2)], [Proj(3, 0, 3)])
    return NamedFunction("pair", sym, lambda n, s: (n[1] << bitlen(n[0])) + n[2],
                         "y0 * 2^bitlen(x) + y1")


@lru_cache(maxsize=None)
def mk_unpair0() -> NamedFunction:
    sym = Sub(mk_half_len().symbol, [Proj(2, 0, 1)], [Proj(2, 0, 2)])
    return NamedFunction("unpair0", sym, lambda n, s: n[1] >> bitlen(n[0]),
                         "floor(z / 2^bitlen(x))")


@lru_cache(maxsize=None)
def mk_unpair1() -> NamedFunction:
    hi = Sub(mk_times().symbol, [Proj(2, 0, 1), mk_unpair0().symbol], [Zero(2, 0)])
    sym = Sub(mk_monus().symbol, [hi], [Proj(2, 0, 2)])

    def closed(n, s):
        x, z = n
        return _rm(z, (z >> bitlen(x)) << bitlen(x))

    return NamedFunction("unpair1", sym, closed, "z - unpair0(x,z) * 2^bitlen(x)")


# --- packing with safe arguments ---------------------------------------------------
#
# pair/unpair need the high part in a normal position, which the recursion
# state cannot provide.  LOW and SHL do the same job on safe values, using two
# normal bounds: X fixes the slot width |X| and Y bounds the packed value.

def _low_r_exact(y: int, Y: int, X: int, s: int) -> int:
    r = s
    top = (1 << bitlen(Y)) >> 1
    lx = bitlen(X)
    hi = bitlen(Y) - 1
    lo = max(lx, bitlen(Y) - bitlen(y))
    if bitlen(y) <= bitlen(Y) and r >> (hi + 1) == 0:
        if lo <= hi:
            r &= ~(((1 << (hi + 1)) - 1) ^ ((1 << lo) - 1))
        return r
    for t in range(bitlen(y)):
        q = top >> t
        if q >> lx:
            if _rm(r, _rm(q, 1)):
                r = _rm(r, q)
    return r


def _shl_r_exact(y: int, Y: int, X: int, a: int, b: int) -> int:
    lx = bitlen(X)
    if a >> bitlen(Y) == 0:
        return b + ((a & ((1 << bitlen(y)) - 1)) << lx)
    r = b
    for t in range(bitlen(y)):
        e = 1 << t
        if _rm(_low_r_exact(Y, Y, e, a), e - 1):
            r += 1 << bitlen((e << lx) >> 1)
    return r


@lru_cache(maxsize=None)
def _low_r() -> NamedFunction:
    """LOWR(y, Y, X; s): clear bits |Y|-|y| .. |Y|-1 of s that lie at or above |X|."""
    E = mk_exp_len().symbol
    HL = mk_half_len().symbol
    MON = mk_monus().symbol
    ey = Sub(E, [Proj(3, 0, 2)], [Zero(3, 0)])
    q = Sub(HL, [Proj(3, 0, 1)], [Sub(DEL, [], [ey])])          # 2^pos, normal-only
    rec = Proj(3, 2, 5)
    guard = Sub(HL, [Proj(3, 0, 3)], [lift_safe(q, 3, 2)])
    below = Sub(MON, [Sub(PRED, [], [q])], [rec])
    minus = Sub(MON, [q], [rec])
    h = Sub(CASES, [], [guard, rec, Sub(CASES, [], [below, rec, minus])])
    sym = mk_safe_rec(Proj(2, 1, 3), h)
    return NamedFunction("low_r", sym, lambda n, s: _low_r_exact(*n, s[0]))


@lru_cache(maxsize=None)
def low_symbol() -> NamedFunction:
    """LOW(Y, X; s) = s mod 2^|X| whenever s < 2^|Y|."""
    sym = Sub(_low_r().symbol, [Proj(2, 0, 1), Proj(2, 0, 1), Proj(2, 0, 2)], [Proj(2, 1, 3)])
    return NamedFunction("low", sym, lambda n, s: _low_r_exact(n[0], n[0], n[1], s[0]))


@lru_cache(maxsize=None)
def _shl_r() -> NamedFunction:
    E = mk_exp_len().symbol
    ey = Sub(E, [Proj(3, 0, 1)], [Zero(3, 0)])                  # 2^|y'|
    low = Sub(low_symbol().symbol, [Proj(3, 0, 2), ey], [Proj(3, 3, 4)])
    test = Sub(mk_monus().symbol, [Sub(PRED, [], [ey])], [low])
    z = Sub(DEL, [], [Sub(mk_times().symbol, [Proj(3, 0, 3), ey], [Zero(3, 0)])])
    rec = Proj(3, 3, 6)
    h = Sub(CASES, [], [test, rec, Sub(E, [z], [rec])])
    sym = mk_safe_rec(Proj(2, 2, 4), h)
    return NamedFunction("shl_r", sym, lambda n, s: _shl_r_exact(*n, *s))


@lru_cache(maxsize=None)
def shl_symbol() -> NamedFunction:
    """SHL(Y, X; a, b) = a * 2^|X| + b whenever a < 2^|Y|."""
    sym = Sub(_shl_r().symbol, [Proj(2, 0, 1), Proj(2, 0, 1), Proj(2, 0, 2)],
              [Proj(2, 2, 3), Proj(2, 2, 4)])
    return NamedFunction("shl", sym, lambda n, s: _shl_r_exact(n[0], n[0], n[1], *s))


@lru_cache(maxsize=None)
def _pack_symbol(l: int) -> FuncSym:
    """PACK(X, Y; z1..zl), left-nested with z_l in the lowest slot."""
    shl = shl_symbol().symbol
    acc: FuncSym = Proj(2, l, 3)
    for j in range(2, l + 1):
        acc = Sub(shl, [Proj(2, 0, 2), Proj(2, 0, 1)], [acc, Proj(2, l, 2 + j)])
    return acc


@lru_cache(maxsize=None)
def _unpack_symbol(l: int, j: int) -> FuncSym:
    """UNPACK_j(X, Y; s), 1-based slot j of an l-slot pack."""
    hl = mk_half_len().symbol
    acc: FuncSym = Proj(2, 1, 3)
    for _ in range(l - j):
        acc = Sub(hl, [Proj(2, 0, 1)], [acc])
    return Sub(low_symbol().symbol, [Proj(2, 0, 2), Proj(2, 0, 1)], [acc])


def pack_values(X: int, zs: Sequence[int]) -> int:
    w = bitlen(X)
    acc = zs[0]
    for z in zs[1:]:
        acc = (acc << w) + z
    return acc


def unpack_value(X: int, l: int, j: int, s: int) -> int:
    w = bitlen(X)
    return (s >> (w * (l - j))) & ((1 << w) - 1)


@dataclass
class SimulPlan:
    """Everything :func:`mk_simul_snrn` built, kept for inspection and checks."""

    outputs: list
    core: FuncSym | None
    width: Polynomial | None
    k: int
    kp: int


def mk_simul_snrn(hs: Sequence[FuncSym], f1: LexFn, f2: LexFn, gs: Sequence[FuncSym],
                  p: Polynomial | None, plan: bool = False):
    """Simultaneous recursion folded into one recursion over a packed state.

    ``hs[i]`` has arity (k', l) and ``gs[i]`` arity (k', 0).  Returns the l
    normal-only symbols F_i(y, x) of arity (k+k', 0).  ``p`` must bound the
    bit length of every component over the variables (y, x).
    """
    l = len(hs)
    k = f1.k
    if l == 0 or len(gs) != l:
        raise ValueError("need matching non-empty lists of step and start functions")
    kp = gs[0].arity().normal_count
    N = k + kp
    xs_in_N = [Proj(N, 0, k + i) for i in range(1, kp + 1)]
    starts = [Sub(g, xs_in_N, [], k=N, l=0) if kp else
              Sub(g, [], [], k=N, l=0) for g in gs]
    if l == 1:
        K = k + kp
        rec = Proj(K, 2, K + 2)
        G = Snrn(k, hs[0], {w: (rec, rec) for w in words(k)}, f1, f2)
        F = Sub(G, [Proj(N, 0, i) for i in range(1, N + 1)], [starts[0]])
        res = SimulPlan([F], G, None, k, kp)
        return res if plan else [F]
    if p is None:
        raise ValueError("a width polynomial is required when l > 1")
    n = kp + 2
    U = [Sub(_unpack_symbol(l, j), [Proj(n, 0, kp + 1), Proj(n, 0, kp + 2)], [Proj(n, 1, n + 1)])
         for j in range(1, l + 1)]
    H = [Sub(h, [Proj(n, 0, i) for i in range(1, kp + 1)], U, k=n, l=1) for h in hs]
    base = Sub(_pack_symbol(l), [Proj(n, 0, kp + 1), Proj(n, 0, kp + 2)], H)
    K = k + kp + 2
    rec = Proj(K, 2, K + 2)
    G = Snrn(k, base, {w: (rec, rec) for w in words(k)}, f1, f2)

    Xf = exp_poly_normal(p, N)
    Yf = Xf
    for _ in range(l - 1):
        Yf = Sub(mk_times().symbol, [Xf, Yf], [Zero(N, 0)])
    s0 = starts[0]
    for g in starts[1:]:
        s0 = Sub(mk_times().symbol, [Xf, s0], [g])
    call = Sub(G, [Proj(N, 0, i) for i in range(1, N + 1)] + [Xf, Yf], [s0])
    outs = [Sub(_unpack_symbol(l, j), [Xf, Yf], [call]) for j in range(1, l + 1)]
    res = SimulPlan(outs, G, p, k, kp)
    return res if plan else outs


def simul_reference(hs, f1: LexFn, f2: LexFn, gs, ys: Sequence[int], xs: Sequence[int],
                    accel=None) -> list[int]:
    """Direct evaluation of the simultaneous recursion on values."""
    memo: dict = {}
    xs = tuple(xs)

    def run(y: tuple, a: tuple) -> tuple:
        key = (y, a)
        if key in memo:
            return memo[key]
        if not any(y):
            out = tuple(pi_eval(h, xs, a, accel=accel) for h in hs)
        else:
            w = "".join("Z" if v == 0 else str(v & 1) for v in y)
            m = y + tuple(v >> 1 for v in y)
            v1 = tuple(m[i - 1] for i in f1.row(w))
            v2 = tuple(m[i - 1] for i in f2.row(w))
            out = run(v1, run(v2, a))
        memo[key] = out
        return out

    start = tuple(pi_eval(g, xs, (), accel=accel) for g in gs)
    return list(run(tuple(ys), start))


# --- registry -------------------------------------------------------------------

_BUILDERS = {
    "dotted_minus": mk_dotted_minus,
    "plus": mk_plus,
    "monus": mk_monus,
    "times": mk_times,
    "exp_len": mk_exp_len,
    "exp3": mk_exp3,
    "half_len": mk_half_len,
    "pair": mk_pair,
    "unpair0": mk_unpair0,
    "unpair1": mk_unpair1,
}

_HELPERS = {
    "low": low_symbol,
    "shl": shl_symbol,
    "low_r": _low_r,
    "shl_r": _shl_r,
}


def registry() -> dict[str, NamedFunction]:
    """The named example functions, in a stable order."""
    return {name: b() for name, b in _BUILDERS.items()}


def helpers() -> dict[str, NamedFunction]:
    return {name: b() for name, b in _HELPERS.items()}


def lookup(name: str) -> NamedFunction:
    if name in _BUILDERS:
        return _BUILDERS[name]()
    if name in _HELPERS:
        return _HELPERS[name]()
    raise KeyError(f"unknown stdlib function @{name}")


def accel_table(*extra: NamedFunction) -> dict[FuncSym, ClosedForm]:
    """Closed forms keyed by symbol for evaluation shortcuts."""
    table = {nf.symbol: nf.closed_form for nf in registry().values()}
    table.update({nf.symbol: nf.closed_form for nf in helpers().values()})
    table.update({nf.symbol: nf.closed_form for nf in extra})
    return table

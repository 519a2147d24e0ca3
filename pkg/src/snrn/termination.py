"""Symbol precedence, the lexicographic path order, and decrease checks.

Terms may contain :class:`Var` leaves; those are the schematic variables of
the rule schemata.  Arguments are compared normal-then-safe, left to right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .terms import (App, C0, C1, CASES, Cases, Concat, DEL, Del, FuncSym, Num, O, PRED,
                    Pred, Proj, SUCC, Snrn, Sub, Succ, Term, ZERO, Zero, subsymbols)

__all__ = [
    "Var", "precedence_lt", "lpo_gt", "check_rules", "certify_trace",
    "RuleInstance", "RuleReport", "TraceReport", "substitute", "variables",
]


class Var(Term):
    """A schematic variable; compares by name."""

    __slots__ = ("name",)
    lh = 1
    normal = ()
    safe = ()

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return type(other) is Var and other.name == self.name

    def __hash__(self):
        return hash(("var", self.name))

    def __repr__(self):
        return self.name


_ACTIVE = (Succ, Pred, Cases, Del)
_INERT = (Zero, Proj, Concat)


@lru_cache(maxsize=None)
def precedence_lt(a: FuncSym, b: FuncSym) -> bool:
    """``a <_F b`` in the least transitive relation generated by the precedence clauses."""
    tb = type(b)
    if tb is Sub or tb is Snrn:
        return any(a == c or precedence_lt(a, c) for c in b.children())
    if tb in _ACTIVE:
        return type(a) in _INERT
    if tb is Zero:
        return b.k + b.l > 0 and a == O
    return False


def _view(t: Term):
    if type(t) is Num:
        if t.nbits == 0:
            return O, ()
        return (C1 if t.value & 1 else C0), (Num(t.value >> 1, t.nbits - 1),)
    return t.head, t.normal + t.safe


def variables(t: Term) -> frozenset:
    if type(t) is Var:
        return frozenset((t,))
    if type(t) is Num:
        return frozenset()
    out: set = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if type(s) is Var:
            out.add(s)
        elif type(s) is App:
            stack.extend(s.normal + s.safe)
    return frozenset(out)


def substitute(t: Term, theta: dict) -> Term:
    """Replace variables by terms; constructor applications over numerals fold."""
    from .terms import mk
    if type(t) is Var:
        return theta.get(t, t)
    if type(t) is Num:
        return t
    return mk(t.head, tuple(substitute(a, theta) for a in t.normal),
              tuple(substitute(a, theta) for a in t.safe))


class _LPO:
    def __init__(self):
        self.memo: dict = {}
        self.vars: dict = {}

    def _vars(self, t):
        v = self.vars.get(t)
        if v is None:
            v = self.vars[t] = variables(t)
        return v

    def gt(self, s: Term, t: Term) -> bool:
        if s is t:
            return False
        key = (s, t)
        r = self.memo.get(key)
        if r is None:
            r = self.memo[key] = self._gt(s, t)
        return r

    def _gt(self, s, t) -> bool:
        if s == t or type(s) is Var:
            return False
        if type(t) is Var:
            return t in self._vars(s)
        f, ss = _view(s)
        g, ts = _view(t)
        if any(a == t for a in ss):
            return True
        if f == g:
            i = next((i for i, (a, b) in enumerate(zip(ss, ts)) if a != b), None)
            if i is not None and self.gt(ss[i], ts[i]) and all(self.gt(s, b) for b in ts[i + 1:]):
                return True
        elif precedence_lt(g, f):
            if all(self.gt(s, b) for b in ts):
                return True
        return any(self.gt(a, t) for a in ss)


def lpo_gt(s: Term, t: Term, prec=None) -> bool:
    """``s >_lpo t``.  ``prec`` defaults to :func:`precedence_lt`."""
    if prec is not None and prec is not precedence_lt:
        raise NotImplementedError("only the built-in precedence is supported")
    return _LPO().gt(s, t)


# --- rule schemata -------------------------------------------------------

def _show(t: Term) -> str:
    from .dsl import _short, _stdlib_names, render_term
    if type(t) is Var:
        return t.name
    if type(t) is Num:
        return render_term(t)
    std = _stdlib_names()
    ns = ",".join(_show(a) for a in t.normal)
    ss = ",".join(_show(a) for a in t.safe)
    if type(t.head) is Concat and not t.safe:
        return f"C{t.head.i}({ns})"
    return f"{_short(t.head, std)}({ns};{ss})"


@dataclass
class RuleInstance:
    symbol: str
    rule: int
    lhs: Term
    rhs: Term
    ok: bool
    word: Optional[str] = None

    def as_dict(self) -> dict:
        d = {"symbol": self.symbol, "rule": self.rule, "lhs": _show(self.lhs),
             "rhs": _show(self.rhs), "ok": self.ok}
        if self.word is not None:
            d["word"] = self.word
        return d


@dataclass
class RuleReport:
    instances: list[RuleInstance] = field(default_factory=list)

    @property
    def failures(self) -> list[RuleInstance]:
        return [r for r in self.instances if not r.ok]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checked": len(self.instances),
                "failures": [r.as_dict() for r in self.failures],
                "instances": [r.as_dict() for r in self.instances]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _vs(prefix: str, n: int) -> tuple:
    return tuple(Var(f"{prefix}{i}") for i in range(1, n + 1))


def _a(f, normal=(), safe=()) -> App:
    return App(f, tuple(normal), tuple(safe))


def _base_instances() -> list[tuple[FuncSym, int, Term, Term]]:
    x, y, z = Var("x"), Var("y"), Var("z")
    c0, c1 = _a(C0, (x,)), _a(C1, (x,))
    return [
        (SUCC, 3, _a(SUCC, (), (ZERO,)), Num(1, 1)),
        (SUCC, 4, _a(SUCC, (), (c0,)), c1),
        (SUCC, 5, _a(SUCC, (), (c1,)), _a(C0, (_a(SUCC, (), (x,)),))),
        (PRED, 6, _a(PRED, (), (ZERO,)), ZERO),
        (PRED, 7, _a(PRED, (), (c0,)), _a(C1, (_a(PRED, (), (x,)),))),
        (PRED, 8, _a(PRED, (), (c1,)), c0),
        (PRED, 8, _a(PRED, (), (Num(1, 1),)), ZERO),
        (CASES, 9, _a(CASES, (), (ZERO, y, z)), y),
        (CASES, 10, _a(CASES, (), (_a(C0, (x,)), y, z)), z),
        (CASES, 10, _a(CASES, (), (_a(C1, (x,)), y, z)), z),
        (DEL, 11, _a(DEL, (), (ZERO,)), ZERO),
        (DEL, 12, _a(DEL, (), (c0,)), x),
        (DEL, 12, _a(DEL, (), (c1,)), x),
    ]


def _instances(f: FuncSym) -> list[tuple[int, Term, Term, Optional[str]]]:
    tf = type(f)
    k, l = f.arity()
    xs, ys = _vs("x", k), _vs("a", l)
    if tf is Zero:
        return [(1, _a(f, xs, ys), ZERO, None)] if k + l else []
    if tf is Proj:
        return [(2, _a(f, xs, ys), (xs + ys)[f.j - 1], None)]
    if tf is Sub:
        rhs = _a(f.h, [_a(g, xs) for g in f.gs], [_a(p, xs, ys) for p in f.phis])
        return [(13, _a(f, xs, ys), rhs, None)]
    if tf is not Snrn:
        return []
    kk = f.k
    px = xs[kk:]
    zs = ys[:-1]
    out = [(14, _a(f, (ZERO,) * kk + px, ys), _a(f.g, px, ys), None)]
    rec = _vs("y", kk)
    for w, h, phi in f.branches:
        top = tuple(ZERO if c == "Z" else _a(Concat(int(c)), (y,)) for c, y in zip(w, rec))
        low = tuple(ZERO if c == "Z" else y for c, y in zip(w, rec))
        menu = top + low
        v1 = tuple(menu[i - 1] for i in f.f1.row(w)) + px
        v2 = tuple(menu[i - 1] for i in f.f2.row(w)) + px
        inner = _a(f, v2, ys)
        c = _a(phi, v2, ys + (inner,))
        rhs = _a(h, v1, ys + (_a(f, v1, zs + (c,)),))
        out.append((15, _a(f, top + px, ys), rhs, w))
    return out


def check_rules(signature: Iterable[FuncSym] | FuncSym) -> RuleReport:
    """Check ``lhs >_lpo rhs`` for every schema instance over ``signature``.

    Every symbol reachable from the given ones is covered.  Base rules are
    checked once; rule 15 once per word with the symbol's own lex-functions.
    """
    if isinstance(signature, FuncSym):
        signature = [signature]
    from .dsl import _short, _stdlib_names
    std = _stdlib_names()
    seen: dict = {}
    for f in signature:
        for s in subsymbols(f):
            seen.setdefault(s, None)
    rep = RuleReport()
    lpo = _LPO()
    base_needed = {type(s) for s in seen}
    for sym, rule, lhs, rhs in _base_instances():
        if type(sym) in base_needed:
            rep.instances.append(RuleInstance(_short(sym, std), rule, lhs, rhs, lpo.gt(lhs, rhs)))
    for s in seen:
        for rule, lhs, rhs, w in _instances(s):
            rep.instances.append(RuleInstance(_short(s, std), rule, lhs, rhs, lpo.gt(lhs, rhs), w))
    return rep


@dataclass
class TraceReport:
    checked: int = 0
    failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checked": self.checked,
                "failures": [{"step": i, "rule": r} for i, r in self.failures]}


def certify_trace(trace: Sequence, lpo: Optional[_LPO] = None) -> TraceReport:
    """Check ground LPO decrease ``before > after`` at every recorded step.

    Accepts a list of step records or a reduction profile carrying one.
    Records must retain their terms (``retain_terms=True``).
    """
    trace = getattr(trace, "trace", trace) or []
    lpo = lpo or _LPO()
    rep = TraceReport()
    for i, rec in enumerate(trace, 1):
        if rec.before is None or rec.after is None:
            raise ValueError("trace records do not retain terms; use retain_terms=True")
        rep.checked += 1
        if not lpo.gt(rec.before, rec.after):
            rep.failures.append((i, rec.rule_id))
    return rep

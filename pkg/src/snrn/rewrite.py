"""The fifteen rewrite schemata, reduction strategies and space profiling.

Rules are matched structurally on ground terms.  Rule numbering follows the
usual listing: 1 zero, 2 projection, 3-5 successor, 6-8 predecessor, 9-10
cases, 11-12 deletion, 13 composition, 14-15 recursion.

Rule 8 is refined by default: ``P(;C1(x))`` fires only once ``x`` is a
numeral, and ``P(;C1(0))`` rewrites to ``0`` instead of ``C0(0)``.  This keeps
canonical numerals closed under rewriting in every strategy.  Pass
``literal=True`` to get the unrefined rule.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Optional

from .lex import predecessors
from .terms import (App, Cases, Concat, C0, C1, Del, FuncSym, Num, PRED, Pred, Proj,
                    SUCC, Snrn, Sub, Succ, Term, ZERO, Zero, mk, replace_at, subterm)

__all__ = [
    "Budgets", "LeftmostInnermost", "LeftmostOutermost", "ExploreInnermost",
    "StepRecord", "ReductionProfile", "BudgetExceeded", "match_rule", "step",
    "normalize", "sp_exhaustive", "redex_positions", "clear_caches", "Chooser",
]

sys.setrecursionlimit(max(sys.getrecursionlimit(), 50_000))

UNLIMITED = None
Chooser = Callable[[Snrn, str, list], tuple[list, list]]


@dataclass(frozen=True)
class Budgets:
    max_steps: Optional[int] = 10**7
    max_term_length: Optional[int] = 10**6

    @classmethod
    def unlimited(cls) -> "Budgets":
        return cls(None, None)


@dataclass(frozen=True)
class LeftmostInnermost:
    name = "in"


@dataclass(frozen=True)
class LeftmostOutermost:
    """Leftmost-outermost reduction.

    ``unfold_first`` contracts recursion unfoldings (rule 15) before anything
    else; ``fuse_projections`` resolves a projection h or phi inside the rule-15
    step instead of leaving it as a separate redex.
    """

    unfold_first: bool = False
    fuse_projections: bool = False
    name = "out"


@dataclass(frozen=True)
class ExploreInnermost:
    policy: str = "seeded-random"
    seed: int = 0
    name = "explore"

    def __post_init__(self):
        if self.policy not in ("seeded-random", "enumerate-all"):
            raise ValueError(f"unknown choice policy {self.policy!r}")


@dataclass
class StepRecord:
    position: tuple
    rule_id: int
    term_length_after: int
    before: Optional[Term] = None
    after: Optional[Term] = None

    def line(self, index: int) -> str:
        pos = ".".join(map(str, self.position)) or "e"
        return f"{index}\t{self.rule_id}\t{pos}\t{self.term_length_after}"


@dataclass
class ReductionProfile:
    steps: int
    max_length: int
    normal_form: Optional[Term]
    truncated: bool = False
    trace: Optional[list[StepRecord]] = None
    normal_forms: Optional[frozenset] = None

    @property
    def value(self) -> Optional[int]:
        return self.normal_form.value if type(self.normal_form) is Num else None

    def as_dict(self) -> dict:
        return {"steps": self.steps, "max_length": self.max_length,
                "truncated": self.truncated, "value": self.value}


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, steps: int, max_length: int):
        super().__init__(f"{what} budget exhausted after {steps} steps")
        self.what = what
        self.steps = steps
        self.max_length = max_length


# --- matching ------------------------------------------------------------------

def _view(t: Term):
    """Constructor view: 'Z' for the term 0, (bit, tail) for C_i(x), else None."""
    if type(t) is Num:
        if t.nbits == 0:
            return "Z"
        return (t.value & 1, Num(t.value >> 1, t.nbits - 1))
    if type(t.head) is Concat:
        return (t.head.i, t.normal[0])
    return None


def _rule_of(t: Term, only15: bool = False, literal: bool = False) -> int:
    """Rule id that applies at the root of ``t``, or 0."""
    if type(t) is Num:
        return 0
    f = t.head
    tf = type(f)
    if tf is Snrn:
        vs = [_view(a) for a in t.normal[:f.k]]
        if any(v is None for v in vs):
            return 0
        if all(v == "Z" for v in vs):
            return 0 if only15 else 14
        return 15
    if only15:
        return 0
    if tf is Sub:
        return 13
    if tf is Proj:
        return 2
    if tf is Zero:
        return 1 if f.k + f.l > 0 else 0
    if tf is Concat:
        return 0
    v = _view(t.safe[0])
    if v is None:
        return 0
    if tf is Succ:
        return 3 if v == "Z" else 4 + v[0]
    if tf is Pred:
        if v == "Z":
            return 6
        if v[0] and not literal and type(v[1]) is not Num:
            return 0  # refined rule 8 waits for its tail to become a numeral
        return 7 + v[0]
    if tf is Cases:
        return 9 if v == "Z" else 10
    if tf is Del:
        return 11 if v == "Z" else 12
    return 0


def _default_choice(f: Snrn, w: str, m: list) -> tuple[list, list]:
    return [m[i - 1] for i in f.f1.row(w)], [m[i - 1] for i in f.f2.row(w)]


def _contract(t: App, rule: int, literal: bool = False, fuse: bool = False,
              choose: Optional[Callable] = None) -> Term:
    f = t.head
    if rule == 1:
        return ZERO
    if rule == 2:
        return t.args[f.j - 1]
    if rule == 13:
        ns, ss = t.normal, t.safe
        return App(f.h, tuple(mk(g, ns, ()) for g in f.gs), tuple(mk(p, ns, ss) for p in f.phis))
    if rule == 14:
        return mk(f.g, t.normal[f.k:], t.safe)
    if rule == 15:
        k = f.k
        rec, xs, ss = t.normal[:k], t.normal[k:], t.safe
        vs = [_view(a) for a in rec]
        w = "".join("Z" if v == "Z" else str(v[0]) for v in vs)
        m = [ZERO if v == "Z" else a for v, a in zip(vs, rec)] + \
            [ZERO if v == "Z" else v[1] for v in vs]
        v1, v2 = (choose or _default_choice)(f, w, m)
        v1, v2 = tuple(v1) + xs, tuple(v2) + xs
        h, phi = f.branch(w)
        inner = App(f, v2, ss)
        if fuse and type(phi) is Proj:
            c = (v2 + ss + (inner,))[phi.j - 1]
        else:
            c = mk(phi, v2, ss + (inner,))
        outer = App(f, v1, ss[:-1] + (c,))
        if fuse and type(h) is Proj:
            return (v1 + ss + (outer,))[h.j - 1]
        return mk(h, v1, ss + (outer,))
    a = t.safe[0]
    v = _view(a)
    if rule == 3:
        return Num(1, 1)
    if rule == 4:
        return mk(C1, (v[1],))
    if rule == 5:
        return mk(C0, (App(SUCC, (), (v[1],)),))
    if rule == 6:
        return ZERO
    if rule == 7:
        return mk(C1, (App(PRED, (), (v[1],)),))
    if rule == 8:
        tail = v[1]
        if not literal and type(tail) is Num and tail.nbits == 0:
            return ZERO
        return mk(C0, (tail,))
    if rule == 9:
        return t.safe[1]
    if rule == 10:
        return t.safe[2]
    if rule == 11:
        return ZERO
    if rule == 12:
        return v[1]
    raise ValueError(f"unknown rule {rule}")


def match_rule(t: Term, literal: bool = False, choose: Optional[Chooser] = None,
               fuse: bool = False) -> Optional[tuple[int, Term]]:
    """Rule id and reduct for the root of ``t``; None when the root is not a redex."""
    r = _rule_of(t, False, literal)
    if not r:
        return None
    return r, _contract(t, r, literal, fuse, choose)


# --- numeral macros --------------------------------------------------------------

def _succ_num(x: Num) -> tuple[Num, int]:
    v, n = x.value, x.nbits
    t = ((v ^ (v + 1)).bit_length() - 1)  # trailing ones
    if t >= n:
        return Num(1 << n, n + 1), n + 1
    return Num(v + 1, n), t + 1


def _pred_num(x: Num, literal: bool) -> tuple[Num, int]:
    v, n = x.value, x.nbits
    if n == 0:
        return ZERO, 1
    if v == 0:
        return Num((1 << n) - 1, n), n + 1
    z = (v & -v).bit_length() - 1  # trailing zeros
    if not literal and z == n - 1:
        return Num((1 << z) - 1, z), z + 1
    return Num(v - 1, n), z + 1


# --- fast innermost -----------------------------------------------------------------

class _Engine:
    """Leftmost-innermost normalizer with redex memoization.

    Innermost reduction of a redex whose arguments are normal does not depend
    on the surrounding context, so each such redex maps to a fixed normal form,
    step count and peak length.
    """

    def __init__(self, literal=False, choose=None, cache=None):
        self.literal = literal
        self.choose = choose
        self.cache = {} if cache is None else cache
        self.reset(Budgets())

    def reset(self, budgets: Budgets):
        self.steps = 0
        self.max_abs = 0
        self.max_steps = budgets.max_steps
        self.max_len = budgets.max_term_length

    def _tick(self, n: int):
        self.steps += n
        if self.max_steps is not None and self.steps > self.max_steps:
            self.steps = self.max_steps
            raise BudgetExceeded("step", self.steps, self.max_abs)

    def _seen(self, length: int):
        if length > self.max_abs:
            self.max_abs = length
            if self.max_len is not None and length > self.max_len:
                raise BudgetExceeded("length", self.steps, length)

    def nf(self, t: Term, ctx: int = 0) -> tuple[Term, int]:
        """Normal form of ``t`` and the peak local length along the way."""
        if type(t) is Num:
            return t, t.lh
        peak = t.lh
        self._seen(ctx + peak)
        hist: list[int] = []
        pending: list[tuple[App, int, int]] = []
        cache = self.cache
        nf = self.nf
        while True:
            if type(t) is Num:
                final = t
                break
            targs = t.normal + t.safe
            args = None
            total = t.lh
            for i, a in enumerate(targs):
                if type(a) is Num:
                    continue
                other = total - a.lh
                n, p = nf(a, ctx + other)
                if other + p > peak:
                    peak = other + p
                if pending:
                    hist.append(other + p)
                total = other + n.lh
                if args is None:
                    args = list(targs)
                args[i] = n
            if args is None:
                r = t
            else:
                k = len(t.normal)
                r = mk(t.head, args[:k], args[k:])
                if type(r) is Num:
                    final = r
                    break
            hit = cache.get(r)
            if hit is not None:
                final, s, p = hit
                self._tick(s)
                self._seen(ctx + p)
                if p > peak:
                    peak = p
                if pending:
                    hist.append(p)
                break
            rule = _rule_of(r)
            if not rule:
                final = r
                break
            if rule in _TO_ARGUMENT:
                # the reduct is an argument (already normal) or 0: one step, no growth
                self._tick(1)
                final = _contract(r, rule, self.literal)
                break
            tf = type(r.head)
            if tf is Succ and rule != 3:
                final, s = _succ_num(r.safe[0])
                self._tick(s)
                break
            if tf is Pred and rule != 6:
                final, s = _pred_num(r.safe[0], self.literal)
                self._tick(s)
                break
            pending.append((r, self.steps, len(hist)))
            hist.append(r.lh)
            self._tick(1)
            t = _contract(r, rule, self.literal, False, self.choose)
            self._seen(ctx + t.lh)
            if t.lh > peak:
                peak = t.lh
            hist.append(t.lh)
        if pending:
            suffix = [0] * (len(hist) + 1)
            for i in range(len(hist) - 1, -1, -1):
                suffix[i] = max(hist[i], suffix[i + 1])
            for r, s0, idx in pending:
                cache[r] = (final, self.steps - s0, suffix[idx])
        return final, peak


_TO_ARGUMENT = frozenset((1, 2, 3, 6, 9, 10, 11, 12))


_ENGINES: dict = {}


def _engine(literal: bool) -> _Engine:
    eng = _ENGINES.get(literal)
    if eng is None:
        eng = _ENGINES[literal] = _Engine(literal)
    return eng


def clear_caches():
    """Drop memoized innermost reductions (memory only; results are unchanged)."""
    _ENGINES.clear()


def _random_chooser(rng: random.Random) -> Chooser:
    def choose(f, w, m):
        preds = _term_predecessors(w, m)
        return list(rng.choice(preds)), list(rng.choice(preds))
    return choose


def _term_predecessors(w: str, m: list) -> list[tuple]:
    if all(type(x) is Num for x in m):
        k = len(w)
        return predecessors(w, [ZERO if c == "Z" else y for c, y in zip(w, m[k:])])
    # Unevaluated components: enumerate from the menu directly.
    k = len(w)
    pool = list(dict.fromkeys(m))
    out = {}
    for k0 in (i for i, c in enumerate(w) if c != "Z"):
        for rest in product(pool, repeat=k - k0 - 1):
            out[tuple(m[:k0]) + (m[k + k0],) + rest] = None
    return list(out)


# --- explicit single steps ---------------------------------------------------------

def _iter_nodes(t: Term, pre: bool) -> Iterator[tuple[tuple, Term]]:
    stack = [((), t, False)]
    while stack:
        pos, s, expanded = stack.pop()
        if type(s) is Num:
            continue
        if pre:
            yield pos, s
            for i in range(len(s.args) - 1, -1, -1):
                stack.append((pos + (i,), s.args[i], False))
        elif expanded:
            yield pos, s
        else:
            stack.append((pos, s, True))
            for i in range(len(s.args) - 1, -1, -1):
                stack.append((pos + (i,), s.args[i], False))


def redex_positions(t: Term, literal: bool = False) -> list[tuple]:
    return [p for p, s in _iter_nodes(t, True) if _rule_of(s, False, literal)]


def _innermost_redex(t: Term, literal: bool = False):
    # Post-order: the first redex met has no redex below it.
    for pos, s in _iter_nodes(t, False):
        r = _rule_of(s, False, literal)
        if r:
            return pos, s, r
    return None


def _outermost_redex(t: Term, only15: bool = False, literal: bool = False):
    for pos, s in _iter_nodes(t, True):
        r = _rule_of(s, only15, literal)
        if r:
            return pos, s, r
    return None


def step(t: Term, strategy=LeftmostInnermost(), literal: bool = False,
         rng: Optional[random.Random] = None) -> Optional[tuple[Term, StepRecord]]:
    """One rewrite step under ``strategy``; None at normal form."""
    fuse = False
    choose = None
    if isinstance(strategy, LeftmostOutermost):
        found = None
        if strategy.unfold_first:
            found = _outermost_redex(t, True, literal)
        found = found or _outermost_redex(t, False, literal)
        fuse = strategy.fuse_projections
    else:
        found = _innermost_redex(t, literal)
        if isinstance(strategy, ExploreInnermost):
            choose = _random_chooser(rng or random.Random(strategy.seed))
    if found is None:
        return None
    pos, s, rule = found
    new = replace_at(t, pos, _contract(s, rule, literal, fuse, choose))
    return new, StepRecord(pos, rule, new.lh)


def _run_stepwise(t, strategy, budgets, literal, retain_terms, rng=None):
    trace = []
    steps, peak = 0, t.lh
    rng = rng or random.Random(getattr(strategy, "seed", 0))
    try:
        while True:
            res = step(t, strategy, literal, rng)
            if res is None:
                break
            new, rec = res
            steps += 1
            if retain_terms:
                rec.before, rec.after = t, new
            trace.append(rec)
            t = new
            peak = max(peak, t.lh)
            if budgets.max_steps is not None and steps >= budgets.max_steps and redex_positions(t, literal):
                raise BudgetExceeded("step", steps, peak)
            if budgets.max_term_length is not None and peak > budgets.max_term_length:
                raise BudgetExceeded("length", steps, peak)
    except BudgetExceeded:
        return ReductionProfile(steps, peak, None, True, trace)
    return ReductionProfile(steps, peak, t, False, trace)


# --- outermost with a zipper -------------------------------------------------------

class _Zipper:
    """Focus plus a stack of (head, args, index, length of the rest)."""

    def __init__(self, t: Term):
        self.focus = t
        self.frames: list = []
        self.rest = 0

    @property
    def total(self) -> int:
        return self.rest + self.focus.lh

    def down(self, i: int):
        t = self.focus
        other = t.lh - t.args[i].lh
        self.frames.append((t.head, t.args, i, len(t.normal), other))
        self.rest += other
        self.focus = t.args[i]

    def up(self):
        head, args, i, k, other = self.frames.pop()
        self.rest -= other
        new = args if args[i] is self.focus else args[:i] + (self.focus,) + args[i + 1:]
        self.focus = mk(head, new[:k], new[k:])
        return i

    def ancestor_view(self, levels: int) -> Optional[Term]:
        if len(self.frames) < levels:
            return None
        t = self.focus
        for head, args, i, k, _ in reversed(self.frames[-levels:]):
            new = args[:i] + (t,) + args[i + 1:]
            t = mk(head, new[:k], new[k:])
        return t

    def position(self) -> tuple:
        return tuple(f[2] for f in self.frames)

    def to_root(self) -> Term:
        while self.frames:
            self.up()
        return self.focus


def _first_redex_from(z: _Zipper, only15: bool, literal: bool) -> int:
    """Advance the zipper in pre-order to the next redex; 0 when none is left."""
    while True:
        t = z.focus
        r = _rule_of(t, only15, literal)
        if r:
            return r
        if type(t) is not Num:
            child = next((i for i, a in enumerate(t.args) if type(a) is not Num), None)
            if child is not None:
                z.down(child)
                continue
        # next sibling, climbing as needed
        while True:
            if not z.frames:
                return 0
            head, args, i, k, _ = z.frames[-1]
            j = next((j for j in range(i + 1, len(args)) if type(args[j]) is not Num), None)
            z.up()
            if j is not None:
                z.down(j)
                break


def _outermost(t: Term, strat: LeftmostOutermost, budgets: Budgets, literal: bool,
               want_trace: bool, retain: bool) -> ReductionProfile:
    z = _Zipper(t)
    steps, peak = 0, t.lh
    trace = [] if want_trace else None
    fuse = strat.fuse_projections
    phases = (True, False) if strat.unfold_first else (False,)
    try:
        for only15 in phases:
            z.to_root()
            rule = _first_redex_from(z, only15, literal)
            while rule:
                if budgets.max_steps is not None and steps >= budgets.max_steps:
                    raise BudgetExceeded("step", steps, peak)
                before = z.to_root_copy() if retain else None
                z.focus = _contract(z.focus, rule, literal, fuse)
                steps += 1
                total = z.total
                if total > peak:
                    peak = total
                    if budgets.max_term_length is not None and peak > budgets.max_term_length:
                        raise BudgetExceeded("length", steps, peak)
                if want_trace:
                    rec = StepRecord(z.position(), rule, total)
                    if retain:
                        rec.before, rec.after = before, z.to_root_copy()
                    trace.append(rec)
                # Patterns look at the heads of the arguments, plus (for the
                # refined rule 8) whether a chain of constructors has become a
                # numeral.  So only the parent and the first non-constructor
                # ancestor above a constructor chain can have turned into redexes.
                up = 1
                while up < len(z.frames) and type(z.frames[-up][0]) is Concat:
                    up += 1
                for levels in dict.fromkeys((1, up)):
                    anc = z.ancestor_view(levels)
                    if anc is not None and _rule_of(anc, only15, literal):
                        for _ in range(levels):
                            z.up()
                        rule = _rule_of(z.focus, only15, literal)
                        break
                else:
                    rule = _first_redex_from(z, only15, literal)
    except BudgetExceeded:
        return ReductionProfile(steps, peak, None, True, trace)
    return ReductionProfile(steps, peak, z.to_root(), False, trace)


def _to_root_copy(self) -> Term:
    t = self.focus
    for head, args, i, k, _ in reversed(self.frames):
        new = args[:i] + (t,) + args[i + 1:]
        t = mk(head, new[:k], new[k:])
    return t


_Zipper.to_root_copy = _to_root_copy


# --- public entry points ------------------------------------------------------------

def normalize(t: Term, strategy=LeftmostInnermost(), budgets: Budgets = Budgets(),
              trace: bool = False, literal: bool = False,
              retain_terms: bool = False) -> ReductionProfile:
    """Reduce ``t`` to normal form under ``strategy`` within ``budgets``.

    Without ``trace`` the innermost strategy uses a memoized fast path whose
    step counts and peak lengths equal those of the explicit reduction.
    """
    if isinstance(strategy, LeftmostOutermost):
        return _outermost(t, strategy, budgets, literal, trace or retain_terms, retain_terms)
    if isinstance(strategy, ExploreInnermost):
        if budgets.max_steps is None and budgets.max_term_length is None:
            raise ValueError("exploration needs a finite step or length budget")
        if strategy.policy == "enumerate-all":
            sp, nfs = _explore_all(t, budgets, literal)
            nf = min(nfs, key=lambda n: (n.value, n.nbits)) if len(nfs) == 1 else None
            return ReductionProfile(0, sp, nf, False, None, frozenset(nfs))
        rng = random.Random(strategy.seed)
        if trace or retain_terms:
            return _run_stepwise(t, strategy, budgets, literal, retain_terms, rng)
        eng = _Engine(literal, _random_chooser(rng))
        return _run_engine(eng, t, budgets)
    if trace or retain_terms:
        return _run_stepwise(t, strategy, budgets, literal, retain_terms)
    return _run_engine(_engine(literal), t, budgets)


def _run_engine(eng: _Engine, t: Term, budgets: Budgets) -> ReductionProfile:
    eng.reset(budgets)
    try:
        nf, peak = eng.nf(t)
    except BudgetExceeded as e:
        return ReductionProfile(e.steps, max(e.max_length, eng.max_abs, t.lh), None, True)
    return ReductionProfile(eng.steps, peak, nf)


# --- exhaustive exploration ----------------------------------------------------------

class StateBudgetExceeded(BudgetExceeded):
    pass


def sp_exhaustive(t: Term, budgets: Budgets = Budgets(), literal: bool = False,
                  max_states: int = 200_000) -> int:
    """Largest length reachable by any innermost reduction with any valid rule-15 choice."""
    return _explore_all(t, budgets, literal, max_states)[0]


def _explore_all(t: Term, budgets: Budgets, literal: bool, max_states: int = 200_000):
    memo: dict = {}
    root_memo: dict = {}
    limit = budgets.max_term_length

    def all_choices(f, w, m):
        preds = _term_predecessors(w, m)
        return [(list(a), list(b)) for a in preds for b in preds]

    def explore(s: Term):
        if type(s) is Num:
            return s.lh, (s,)
        got = memo.get(s)
        if got is not None:
            return got
        if len(memo) + len(root_memo) > max_states:
            raise StateBudgetExceeded("state", len(memo), 0)
        subs = [explore(a) for a in s.args]
        sp = s.head.lh + sum(x[0] for x in subs)
        nfs: dict = {}
        k = len(s.normal)
        for combo in product(*(x[1] for x in subs)):
            r = mk(s.head, combo[:k], combo[k:])
            rsp, rnfs = explore_root(r)
            sp = max(sp, rsp)
            nfs.update(dict.fromkeys(rnfs))
        if limit is not None and sp > limit:
            raise BudgetExceeded("length", 0, sp)
        res = (sp, tuple(nfs))
        memo[s] = res
        return res

    def explore_root(r: Term):
        if type(r) is Num:
            return r.lh, (r,)
        got = root_memo.get(r)
        if got is not None:
            return got
        rule = _rule_of(r)
        if not rule:
            res = (r.lh, (r,))
        elif type(r.head) is Succ and rule != 3:
            res = (r.lh, (_succ_num(r.safe[0])[0],))
        elif type(r.head) is Pred and rule != 6:
            res = (r.lh, (_pred_num(r.safe[0], literal)[0],))
        else:
            if rule == 15:
                f = r.head
                reducts = []
                for v1, v2 in _all_rule15(r):
                    reducts.append(_contract(r, 15, literal, False, lambda *_: (v1, v2)))
            else:
                reducts = [_contract(r, rule, literal)]
            sp = r.lh
            nfs: dict = {}
            for red in dict.fromkeys(reducts):
                a, b = explore(red)
                sp = max(sp, a)
                nfs.update(dict.fromkeys(b))
            res = (sp, tuple(nfs))
        root_memo[r] = res
        return res

    def _all_rule15(r):
        out = []

        def grab(f, w, m):
            out.extend(all_choices(f, w, m))
            return out[0]
        _contract(r, 15, literal, False, grab)
        return out

    return explore(t)

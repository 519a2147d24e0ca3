"""Signature, ground terms and numerals for the two-sorted class N.

Symbols are immutable.  Arity and length are computed on demand so that
ill-formed nodes can still be built and then reported by :func:`validate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

__all__ = [
    "Arity", "FuncSym", "Zero", "Proj", "Succ", "Pred", "Cases", "Concat",
    "Del", "Sub", "Snrn", "SUCC", "PRED", "CASES", "DEL", "C0", "C1", "O",
    "Term", "Num", "App", "mk", "num", "value_of", "bitlen", "is_numeral",
    "is_canonical", "lh_sym", "lh_term", "arity", "words", "validate",
    "Violation", "Report", "ArityError", "subsymbols", "subterm", "replace_at",
]


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class Arity:
    normal_count: int
    safe_count: int

    def __iter__(self):
        yield self.normal_count
        yield self.safe_count


def words(k: int) -> list[str]:
    """Sigma^k in canonical order: all words over 0/1/Z except Z...Z."""
    return ["".join(p) for p in product("01Z", repeat=k) if set(p) != {"Z"}]


class FuncSym:
    __slots__ = ("_h", "_lh", "_ar")

    def _key(self) -> tuple:
        raise NotImplementedError

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            h = hash(self._key())
            object.__setattr__(self, "_h", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self):
            return False
        return hash(self) == hash(other) and self._key() == other._key()

    def __setattr__(self, name, value):
        raise AttributeError("symbols are immutable")

    def _set(self, **kw):
        for k, v in kw.items():
            object.__setattr__(self, k, v)

    def arity(self) -> Arity:
        try:
            return self._ar
        except AttributeError:
            a = self._arity()
            object.__setattr__(self, "_ar", a)
            return a

    def _arity(self) -> Arity:
        raise NotImplementedError

    @property
    def lh(self) -> int:
        try:
            return self._lh
        except AttributeError:
            v = self._length()
            object.__setattr__(self, "_lh", v)
            return v

    def _length(self) -> int:
        return 1

    def children(self) -> tuple["FuncSym", ...]:
        return ()

    @property
    def is_base(self) -> bool:
        return not self.children()

    def __repr__(self):
        from .dsl import render_expr
        return render_expr(self)


class Zero(FuncSym):
    __slots__ = ("k", "l")

    def __init__(self, k: int = 0, l: int = 0):
        self._set(k=k, l=l)

    def _key(self):
        return ("O", self.k, self.l)

    def _arity(self):
        return Arity(self.k, self.l)


class Proj(FuncSym):
    __slots__ = ("k", "l", "j")

    def __init__(self, k: int, l: int, j: int):
        self._set(k=k, l=l, j=j)

    def _key(self):
        return ("I", self.k, self.l, self.j)

    def _arity(self):
        if not 1 <= self.j <= self.k + self.l:
            raise ArityError(f"projection index {self.j} outside 1..{self.k + self.l}")
        return Arity(self.k, self.l)


class _Unary(FuncSym):
    __slots__ = ()
    tag = ""
    shape = (0, 1)

    def _key(self):
        return (self.tag,)

    def _arity(self):
        return Arity(*self.shape)


class Succ(_Unary):
    __slots__ = ()
    tag = "S"


class Pred(_Unary):
    __slots__ = ()
    tag = "P"


class Del(_Unary):
    __slots__ = ()
    tag = "D"


class Cases(_Unary):
    __slots__ = ()
    tag = "C"
    shape = (0, 3)


class Concat(FuncSym):
    __slots__ = ("i",)

    def __init__(self, i: int):
        if i not in (0, 1):
            raise ValueError("concatenation bit must be 0 or 1")
        self._set(i=i)

    def _key(self):
        return ("Ci", self.i)

    def _arity(self):
        return Arity(1, 0)


class Sub(FuncSym):
    """Safe composition h(g(x;); phi(x; a)).

    ``k`` and ``l`` may be given explicitly; they are needed when ``gs`` or
    ``phis`` are empty and the outer arity cannot be read off the parts.
    """

    __slots__ = ("h", "gs", "phis", "k", "l")

    def __init__(self, h: FuncSym, gs: Sequence[FuncSym] = (), phis: Sequence[FuncSym] = (),
                 k: int | None = None, l: int | None = None):
        self._set(h=h, gs=tuple(gs), phis=tuple(phis), k=k, l=l)

    def _key(self):
        return ("SUB", self.h, self.gs, self.phis, self.k, self.l)

    def children(self):
        return (self.h, *self.gs, *self.phis)

    def _arity(self):
        k, l = self.k, self.l
        if k is None:
            if self.gs:
                k = self.gs[0].arity().normal_count
            elif self.phis:
                k = self.phis[0].arity().normal_count
            else:
                k = 0
        if l is None:
            l = self.phis[0].arity().safe_count if self.phis else 0
        return Arity(k, l)

    def _length(self):
        return self.h.lh + sum(g.lh for g in self.gs) + sum(p.lh for p in self.phis) + 1


class Snrn(FuncSym):
    """Safe nested recursion on notation over ``k`` recursion arguments.

    ``branches`` maps each word of Sigma^k to a pair ``(h_w, phi_w)``.
    """

    __slots__ = ("k", "g", "branches", "f1", "f2", "_bmap")

    def __init__(self, k: int, g: FuncSym, branches, f1, f2):
        items = branches.items() if isinstance(branches, dict) else branches
        order = {w: n for n, w in enumerate(words(k))}
        norm = tuple(sorted(((w, h, p) for w, h, p in ((w, *hp) for w, hp in items)),
                            key=lambda t: order.get(t[0], len(order))))
        self._set(k=k, g=g, branches=norm, f1=f1, f2=f2,
                  _bmap={w: (h, p) for w, h, p in norm})

    def _key(self):
        return ("SNRN", self.k, self.g, self.branches, self.f1, self.f2)

    def branch(self, w: str) -> tuple[FuncSym, FuncSym]:
        return self._bmap[w]

    def children(self):
        out = [self.g]
        for _, h, p in self.branches:
            out += [h, p]
        return tuple(out)

    def _arity(self):
        kp, l1 = self.g.arity()
        if l1 < 1:
            raise ArityError("snrn base function needs at least one safe argument")
        return Arity(self.k + kp, l1)

    def _length(self):
        return self.g.lh + sum(h.lh + p.lh for _, h, p in self.branches) + 1


SUCC, PRED, CASES, DEL = Succ(), Pred(), Cases(), Del()
C0, C1 = Concat(0), Concat(1)
O = Zero(0, 0)


def arity(f: FuncSym) -> Arity:
    """Arity of a symbol; raises ArityError on an ill-formed node."""
    rep = validate(f)
    if not rep.ok:
        raise ArityError(str(rep.violations[0]))
    return f.arity()


def lh_sym(f: FuncSym) -> int:
    return f.lh


def subsymbols(f: FuncSym) -> Iterator[FuncSym]:
    """Every distinct symbol occurring in ``f`` (including ``f``), children first."""
    seen: set = set()
    stack = [(f, False)]
    while stack:
        s, done = stack.pop()
        if done:
            yield s
            continue
        if s in seen:
            continue
        seen.add(s)
        stack.append((s, True))
        stack.extend((c, False) for c in reversed(s.children()))


# --- validation ------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path or '<root>'}: {self.message}"


@dataclass
class Report:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def as_dict(self) -> dict:
        return {"ok": self.ok, "violations": [{"path": v.path, "message": v.message}
                                               for v in self.violations]}


def validate(f: FuncSym) -> Report:
    """Check every arity side condition and lex-function recursively."""
    rep = Report()
    _check(f, "", rep, {})
    return rep


def _check(f: FuncSym, path: str, rep: Report, memo: dict) -> bool:
    if f in memo:
        return memo[f]
    n0 = len(rep.violations)

    def bad(msg, where=path):
        rep.violations.append(Violation(where, msg))

    def sub(child, name):
        return _check(child, f"{path}.{name}" if path else name, rep, memo)

    if isinstance(f, (Zero, Proj)):
        if f.k < 0 or f.l < 0:
            bad("negative arity")
        if isinstance(f, Proj) and not 1 <= f.j <= f.k + f.l:
            bad(f"projection index {f.j} outside 1..{f.k + f.l}")
    elif isinstance(f, Sub):
        okh = sub(f.h, "h")
        okg = all([sub(g, f"g[{i}]") for i, g in enumerate(f.gs)])
        okp = all([sub(p, f"phi[{i}]") for i, p in enumerate(f.phis)])
        if okh and okg and okp:
            kh, lhh = f.h.arity()
            k, l = f.arity()
            if len(f.gs) != kh:
                bad(f"sub: h takes {kh} normal arguments but {len(f.gs)} given")
            if len(f.phis) != lhh:
                bad(f"sub: h takes {lhh} safe arguments but {len(f.phis)} given")
            for i, g in enumerate(f.gs):
                if tuple(g.arity()) != (k, 0):
                    bad(f"sub: g[{i}] has arity {tuple(g.arity())}, expected {(k, 0)}")
            for i, p in enumerate(f.phis):
                if tuple(p.arity()) != (k, l):
                    bad(f"sub: phi[{i}] has arity {tuple(p.arity())}, expected {(k, l)}")
    elif isinstance(f, Snrn):
        from .lex import LexFn, validate_lexfn
        okg = sub(f.g, "g")
        if f.k < 1:
            bad("snrn needs at least one recursion argument")
        expected = words(f.k) if f.k >= 1 else []
        have = [w for w, _, _ in f.branches]
        for w in expected:
            if w not in have:
                bad(f"missing branch for word {w}")
        for w in have:
            if w not in expected:
                bad(f"unexpected branch word {w!r}")
        okb = True
        for w, h, p in f.branches:
            okb &= sub(h, f"h[{w}]")
            okb &= sub(p, f"phi[{w}]")
        if okg:
            kp, l1 = f.g.arity()
            if l1 < 1:
                bad("snrn: g needs at least one safe argument")
            elif okb:
                want = (f.k + kp, l1 + 1)
                for w, h, p in f.branches:
                    if tuple(h.arity()) != want:
                        bad(f"snrn: h[{w}] has arity {tuple(h.arity())}, expected {want}")
                    if tuple(p.arity()) != want:
                        bad(f"snrn: phi[{w}] has arity {tuple(p.arity())}, expected {want}")
        for name, fn in (("f1", f.f1), ("f2", f.f2)):
            if not isinstance(fn, LexFn) or fn.k != f.k:
                bad(f"{name} is not a lex function over {f.k} arguments")
                continue
            lr = validate_lexfn(fn)
            for i, w, why in lr.problems:
                bad(f"lex-function invalid at ({i}, {w}): {why}",
                    f"{path}.{name}" if path else name)
    ok = len(rep.violations) == n0
    memo[f] = ok
    return ok


# --- terms -------------------------------------------------------------------

class Term:
    __slots__ = ()

    head: FuncSym
    normal: tuple
    safe: tuple

    @property
    def args(self) -> tuple:
        return self.normal + self.safe


class Num(Term):
    """A numeral stored as a bit string: ``nbits`` constructors over 0.

    Leading zero bits are kept so that non-canonical numerals such as
    C_0(0) stay distinct terms.
    """

    __slots__ = ("value", "nbits", "lh", "_h")

    def __init__(self, value: int, nbits: int):
        if value < 0 or value >> nbits:
            raise ValueError(f"value {value} does not fit in {nbits} bits")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "nbits", nbits)
        object.__setattr__(self, "lh", nbits + 1)
        object.__setattr__(self, "_h", hash((value, nbits)))

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (type(other) is Num and self.value == other.value
                                 and self.nbits == other.nbits)

    @property
    def is_zero_term(self) -> bool:
        return self.nbits == 0

    @property
    def top(self) -> int:
        return self.value & 1

    @property
    def tail(self) -> "Num":
        return Num(self.value >> 1, self.nbits - 1)

    @property
    def head(self) -> FuncSym:
        return O if self.nbits == 0 else (C1 if self.value & 1 else C0)

    @property
    def normal(self) -> tuple:
        return () if self.nbits == 0 else (self.tail,)

    safe = ()

    def __repr__(self):
        if self.nbits == 0:
            return "0"
        bits = format(self.value, "b").zfill(self.nbits)
        return f"#{bits}"


class App(Term):
    __slots__ = ("head", "normal", "safe", "lh", "_h")

    def __init__(self, head: FuncSym, normal: tuple, safe: tuple):
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "safe", safe)
        n = head.lh
        for a in normal:
            n += a.lh
        for a in safe:
            n += a.lh
        object.__setattr__(self, "lh", n)
        object.__setattr__(self, "_h", hash((head, normal, safe)))

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is App and self._h == other._h and self.head == other.head
                and self.normal == other.normal and self.safe == other.safe)

    def __repr__(self):
        from .dsl import render_term
        return render_term(self)


def mk(head: FuncSym, normal=(), safe=()) -> Term:
    """Build a term, folding constructor applications over numerals into Num."""
    normal = tuple(normal)
    safe = tuple(safe)
    if type(head) is Concat and len(normal) == 1 and not safe and type(normal[0]) is Num:
        x = normal[0]
        return Num(2 * x.value + head.i, x.nbits + 1)
    if type(head) is Zero and head.k == 0 and head.l == 0 and not normal and not safe:
        return ZERO
    return App(head, normal, safe)


ZERO = Num(0, 0)


def num(n: int) -> Num:
    """Canonical numeral for a natural number."""
    if n < 0:
        raise ValueError("numerals denote natural numbers")
    return Num(n, n.bit_length())


def is_numeral(t) -> bool:
    return type(t) is Num


def is_canonical(t) -> bool:
    return type(t) is Num and t.nbits == t.value.bit_length()


def value_of(t) -> int:
    if type(t) is not Num:
        raise TypeError(f"not a numeral: {t!r}")
    return t.value


def bitlen(n: int) -> int:
    """ceil(log2(n+1)); zero has length 0."""
    return n.bit_length()


def lh_term(t: Term) -> int:
    return t.lh


def subterm(t: Term, pos: Sequence[int]) -> Term:
    for i in pos:
        t = t.args[i]
    return t


def replace_at(t: Term, pos: Sequence[int], new: Term) -> Term:
    if not pos:
        return new
    i, rest = pos[0], pos[1:]
    args = list(t.args)
    args[i] = replace_at(args[i], rest, new)
    k = len(t.normal)
    return mk(t.head, args[:k], args[k:])

"""Words, the predecessor relation on numeral tuples, and lex-functions."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .terms import ZERO, Num, Term, words

__all__ = [
    "LexFn", "LexReport", "BaseCase", "word_of_args", "menu", "prec1", "prec_k",
    "validate_lexfn", "apply_lexfn", "sum_measure", "predecessors",
    "standard_lexfn", "random_lexfn", "k0_choices",
]


class BaseCase(Exception):
    """All recursion arguments are the term 0; the base rule applies."""


class LexFn:
    """Finite table ``(i, w) -> index`` with 1-based ``i`` and ``index``."""

    __slots__ = ("k", "table", "_h")

    def __init__(self, k: int, table: Mapping[tuple[int, str], int]):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "table", dict(table))
        object.__setattr__(self, "_h", hash((k, frozenset(self.table.items()))))

    def __setattr__(self, name, value):
        raise AttributeError("lex functions are immutable")

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return isinstance(other, LexFn) and self.k == other.k and self.table == other.table

    def __call__(self, i: int, w: str) -> int:
        return self.table[(i, w)]

    def row(self, w: str) -> tuple[int, ...]:
        return tuple(self.table[(i, w)] for i in range(1, self.k + 1))

    def __repr__(self):
        return f"LexFn(k={self.k}, {len(self.table)} entries)"


@dataclass
class LexReport:
    problems: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok


def word_of_args(args: Sequence[Num]) -> tuple[str, list[Num]]:
    letters, tails = [], []
    for a in args:
        if type(a) is not Num:
            raise TypeError(f"recursion argument is not a numeral: {a!r}")
        if a.nbits == 0:
            letters.append("Z")
            tails.append(ZERO)
        else:
            letters.append(str(a.value & 1))
            tails.append(a.tail)
    w = "".join(letters)
    if set(w) == {"Z"} or not w:
        raise BaseCase()
    return w, tails


def _wrap(letter: str, y: Num) -> Num:
    if letter == "Z":
        return ZERO
    return Num(2 * y.value + int(letter), y.nbits + 1)


def menu(w: str, ys: Sequence[Num]) -> list[Num]:
    """The 2k candidates: wrapped components first, then their tails."""
    top = [_wrap(c, y) for c, y in zip(w, ys)]
    low = [ZERO if c == "Z" else y for c, y in zip(w, ys)]
    return top + low


def prec1(v: Term, y: Term) -> bool:
    return type(y) is Num and y.nbits > 0 and y.tail == v


def prec_k(vs: Sequence[Term], ys: Sequence[Term]) -> bool:
    k = len(ys)
    if len(vs) != k or k == 0:
        raise ValueError("tuples must have equal positive length")
    for k0 in range(k):
        if any(vs[i] != ys[i] for i in range(k0)):
            break
        if not prec1(vs[k0], ys[k0]):
            continue
        if all(any(vs[i] == y or prec1(vs[i], y) for y in ys) for i in range(k0 + 1, k)):
            return True
    return False


def k0_choices(w: str) -> list[int]:
    """0-based positions that can carry the strict descent for word w."""
    return [i for i, c in enumerate(w) if c != "Z"]


def _symbolic_menu(w: str) -> list[str]:
    k = len(w)
    top = ["0" if c == "Z" else f"C{c}(y{j + 1})" for j, c in enumerate(w)]
    low = ["0" if c == "Z" else f"y{j + 1}" for j, c in enumerate(w)]
    assert len(top) == k
    return top + low


def _row_ok(k: int, w: str, row: Sequence[int]) -> tuple[bool, int, str]:
    """Return (ok, first bad 1-based i, reason)."""
    sym = _symbolic_menu(w)
    for i, idx in enumerate(row, 1):
        if not 1 <= idx <= 2 * k:
            return False, i, f"index {idx} outside 1..{2 * k}"
    best_i, best_why = 1, "no position carries a strict descent"
    for k0 in range(1, k + 1):
        if w[k0 - 1] == "Z":
            continue
        prefix_bad = next((i for i in range(1, k0) if sym[row[i - 1] - 1] != sym[i - 1]), None)
        if prefix_bad is not None:
            if prefix_bad >= best_i:
                best_i = prefix_bad
                best_why = "prefix entry must repeat the matching component"
            continue
        if row[k0 - 1] == k + k0:
            return True, 0, ""
        if k0 >= best_i:
            best_i = k0
            best_why = f"index {row[k0 - 1]} is not a predecessor"
    return False, best_i, best_why


def validate_lexfn(f: LexFn) -> LexReport:
    """Symbolic check with y_1..y_k treated as opaque atoms."""
    rep = LexReport()
    for w in words(f.k):
        try:
            row = f.row(w)
        except KeyError:
            missing = next(i for i in range(1, f.k + 1) if (i, w) not in f.table)
            rep.problems.append((missing, w, "table entry missing"))
            continue
        ok, i, why = _row_ok(f.k, w, row)
        if not ok:
            rep.problems.append((i, w, why))
    return rep


def apply_lexfn(f: LexFn, w: str, ys: Sequence[Num]) -> list[Num]:
    m = menu(w, ys)
    return [m[f.table[(i, w)] - 1] for i in range(1, f.k + 1)]


def sum_measure(d: int, bs: Sequence[int]) -> int:
    if len(bs) > d:
        raise ValueError(f"tuple length {len(bs)} exceeds d={d}")
    if not bs:
        return 0
    base = max(bs) + 1
    return sum(base ** (d - i) * b for i, b in enumerate(bs, 1))


def predecessors(w: str, ys: Sequence[Num]) -> list[tuple[Num, ...]]:
    """Every tuple a valid lex-function can select for ``w`` and ``ys``.

    Built directly from the menu closure rather than from lex tables, so it
    serves as an independent check of :func:`apply_lexfn`.
    """
    m = menu(w, ys)
    k = len(w)
    pool = list(dict.fromkeys(m))
    out: dict[tuple, None] = {}
    for k0 in k0_choices(w):
        prefix = tuple(m[:k0]) + (m[k + k0],)
        tails = [()]
        for _ in range(k - k0 - 1):
            tails = [t + (c,) for t in tails for c in pool]
        for t in tails:
            out[prefix + t] = None
    return list(out)


def standard_lexfn(k: int, pick: Callable[[str], int] | str = "last",
                   fill: Callable[[str, int, int], int] | None = None) -> LexFn:
    """A lex-function that descends at one chosen position per word.

    ``pick`` selects the 0-based descent position among the non-Z letters
    (``"first"``, ``"last"`` or a callable).  ``fill(w, i, k0)`` chooses the
    1-based index for positions after it; the default keeps the component.
    """
    if pick == "last":
        pick_fn = lambda w: k0_choices(w)[-1]
    elif pick == "first":
        pick_fn = lambda w: k0_choices(w)[0]
    else:
        pick_fn = pick
    table = {}
    for w in words(k):
        k0 = pick_fn(w)
        for i in range(1, k + 1):
            if i - 1 < k0:
                table[(i, w)] = i
            elif i - 1 == k0:
                table[(i, w)] = k + i
            else:
                table[(i, w)] = fill(w, i, k0) if fill else i
    return LexFn(k, table)


def random_lexfn(k: int, rng: random.Random) -> LexFn:
    """A uniformly structured random valid lex-function."""
    def pick(w):
        return rng.choice(k0_choices(w))

    return standard_lexfn(k, pick, lambda w, i, k0: rng.randint(1, 2 * k))


def lexfn_from_rows(k: int, rows: Mapping[str, Iterable[int]]) -> LexFn:
    return LexFn(k, {(i, w): idx for w, r in rows.items() for i, idx in enumerate(r, 1)})

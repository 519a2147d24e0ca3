"""Text form of symbols: a small s-expression language.

    (def NAME EXPR)
    EXPR  ::= (zero K L) | (proj K L J) | succ | pred | cases | del | (concat I)
            | (sub EXPR (EXPR*) (EXPR*) [K L])
            | (snrn K EXPR ((WORD EXPR EXPR)*) LEXFN LEXFN)
            | @stdlib-name | NAME
    LEXFN ::= (lexfn ((I WORD IDX)*))

Comments run from ``;`` to the end of the line.
"""

from __future__ import annotations

import re
import zlib
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .lex import LexFn
from .terms import (App, Cases, Concat, Del, FuncSym, Num, Pred, Proj, Snrn, Sub, Succ,
                    Term, Zero, CASES, DEL, PRED, SUCC, subsymbols, validate)

__all__ = ["ParseError", "SymbolValidationError", "parse_symbols", "parse_expr",
           "render_expr", "render_table", "render_term"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line, self.col = line, col


class SymbolValidationError(ValueError):
    def __init__(self, name: str, report):
        super().__init__(f"{name}: " + "; ".join(map(str, report.violations)))
        self.name = name
        self.report = report


@dataclass
class _Tok:
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def _tokens(text: str) -> list[_Tok]:
    out, line, col0 = [], 1, 0
    for m in _TOKEN.finditer(text):
        s = m.group()
        if s[0] in " \t\r\n" or s[0] == ";":
            nl = s.count("\n")
            if nl:
                line += nl
                col0 = m.start() + s.rfind("\n") + 1
            continue
        out.append(_Tok(s, line, m.start() - col0 + 1))
    return out


def _tree(toks: list[_Tok]):
    """Nested lists of tokens."""
    stack: list[list] = [[]]
    opens: list[_Tok] = []
    for t in toks:
        if t.text == "(":
            stack.append([])
            opens.append(t)
        elif t.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", t.line, t.col)
            done = stack.pop()
            stack[-1].append((opens.pop(), done))
        else:
            stack[-1].append(t)
    if opens:
        t = opens[-1]
        raise ParseError("unclosed '('", t.line, t.col)
    return stack[0]


def _where(node) -> _Tok:
    return node[0] if isinstance(node, tuple) else node


def _int(node) -> int:
    if isinstance(node, tuple) or not re.fullmatch(r"\d+", node.text):
        t = _where(node)
        raise ParseError("expected a non-negative integer", t.line, t.col)
    return int(node.text)


def _list(node) -> list:
    if not isinstance(node, tuple):
        raise ParseError("expected a list", node.line, node.col)
    return node[1]


_BASE = {"succ": SUCC, "pred": PRED, "cases": CASES, "del": DEL}


class _Parser:
    def __init__(self, env: dict[str, FuncSym]):
        self.env = env

    def expr(self, node) -> FuncSym:
        if not isinstance(node, tuple):
            s = node.text
            if s in _BASE:
                return _BASE[s]
            if s.startswith("@"):
                from .stdlib import lookup
                try:
                    return lookup(s[1:]).symbol
                except KeyError as e:
                    raise ParseError(str(e.args[0]), node.line, node.col) from None
            if s in self.env:
                return self.env[s]
            raise ParseError(f"undefined name {s!r}", node.line, node.col)
        tok, items = node
        if not items or isinstance(items[0], tuple):
            raise ParseError("expected a form keyword", tok.line, tok.col)
        kw, args = items[0].text, items[1:]

        def need(n):
            if len(args) != n:
                raise ParseError(f"{kw} takes {n} arguments, got {len(args)}", tok.line, tok.col)

        if kw == "zero":
            need(2)
            return Zero(_int(args[0]), _int(args[1]))
        if kw == "proj":
            need(3)
            return Proj(_int(args[0]), _int(args[1]), _int(args[2]))
        if kw == "concat":
            need(1)
            i = _int(args[0])
            if i not in (0, 1):
                raise ParseError("concat bit must be 0 or 1", tok.line, tok.col)
            return Concat(i)
        if kw == "sub":
            if len(args) not in (3, 5):
                raise ParseError("sub takes h, (g...), (phi...) and an optional arity", tok.line, tok.col)
            h = self.expr(args[0])
            gs = [self.expr(a) for a in _list(args[1])]
            phis = [self.expr(a) for a in _list(args[2])]
            k = l = None
            if len(args) == 5:
                k, l = _int(args[3]), _int(args[4])
            return Sub(h, gs, phis, k=k, l=l)
        if kw == "snrn":
            need(5)
            k = _int(args[0])
            g = self.expr(args[1])
            branches = {}
            for b in _list(args[2]):
                parts = _list(b)
                if len(parts) != 3 or isinstance(parts[0], tuple):
                    t = _where(b)
                    raise ParseError("branch must be (WORD h phi)", t.line, t.col)
                branches[parts[0].text] = (self.expr(parts[1]), self.expr(parts[2]))
            return Snrn(k, g, branches, self.lexfn(args[3], k), self.lexfn(args[4], k))
        raise ParseError(f"unknown form {kw!r}", tok.line, tok.col)

    def lexfn(self, node, k: int) -> LexFn:
        tok = _where(node)
        items = _list(node)
        if not items or isinstance(items[0], tuple) or items[0].text != "lexfn" or len(items) != 2:
            raise ParseError("expected (lexfn ((I WORD IDX) ...))", tok.line, tok.col)
        table = {}
        for e in _list(items[1]):
            parts = _list(e)
            if len(parts) != 3 or isinstance(parts[1], tuple):
                t = _where(e)
                raise ParseError("lexfn entry must be (I WORD IDX)", t.line, t.col)
            word = parts[1].text
            if not re.fullmatch(r"[01Z]+", word):
                raise ParseError(f"bad word {word!r}", parts[1].line, parts[1].col)
            table[(_int(parts[0]), word)] = _int(parts[2])
        return LexFn(k, table)


def parse_expr(text: str, env: dict | None = None) -> FuncSym:
    nodes = _tree(_tokens(text))
    if len(nodes) != 1:
        raise ParseError("expected exactly one expression")
    return _Parser(dict(env or {})).expr(nodes[0])


def parse_symbols(text: str, check: bool = True) -> dict[str, FuncSym]:
    """Parse ``(def NAME EXPR)`` forms into a name -> symbol table."""
    env: dict[str, FuncSym] = {}
    p = _Parser(env)
    for node in _tree(_tokens(text)):
        t = _where(node)
        items = _list(node) if isinstance(node, tuple) else None
        if not items or isinstance(items[0], tuple) or items[0].text != "def" or len(items) != 3:
            raise ParseError("expected (def NAME EXPR)", t.line, t.col)
        name_tok = items[1]
        if isinstance(name_tok, tuple):
            raise ParseError("definition name must be an atom", t.line, t.col)
        env[name_tok.text] = p.expr(items[2])
    if check:
        for name, sym in env.items():
            if name.startswith("_"):
                continue
            rep = validate(sym)
            if not rep.ok:
                raise SymbolValidationError(name, rep)
    return env


# --- rendering -----------------------------------------------------------------

def _stdlib_names() -> dict[FuncSym, str]:
    from .stdlib import helpers, registry
    out = {nf.symbol: nf.name for nf in helpers().values()}
    out.update({nf.symbol: nf.name for nf in registry().values()})
    return out


def _render_lexfn(f: LexFn) -> str:
    entries = " ".join(f"({i} {w} {idx})" for (i, w), idx in
                       sorted(f.table.items(), key=lambda e: (e[0][1], e[0][0])))
    return f"(lexfn ({entries}))"


def render_expr(f: FuncSym, names: dict | None = None, use_stdlib: bool = True) -> str:
    names = dict(names or {})
    if use_stdlib:
        for sym, n in _stdlib_names().items():
            names.setdefault(sym, "@" + n)
    memo: dict = {}
    # iterative post-order so deep chains do not hit the recursion limit
    stack = [(f, False)]
    while stack:
        s, ready = stack.pop()
        if s in memo:
            continue
        if s is not f and s in names:
            memo[s] = names[s]
            continue
        kids = s.children()
        if not ready and kids:
            stack.append((s, True))
            stack.extend((c, False) for c in kids if c not in memo)
            continue
        memo[s] = _render_node(s, memo)
    return memo[f]


def _render_node(s: FuncSym, memo: dict) -> str:
    t = type(s)
    if t is Zero:
        return f"(zero {s.k} {s.l})"
    if t is Proj:
        return f"(proj {s.k} {s.l} {s.j})"
    if t is Concat:
        return f"(concat {s.i})"
    if t in (Succ, Pred, Cases, Del):
        return {Succ: "succ", Pred: "pred", Cases: "cases", Del: "del"}[t]
    if t is Sub:
        gs = " ".join(memo[g] for g in s.gs)
        ps = " ".join(memo[p] for p in s.phis)
        tail = f" {s.k} {s.l}" if s.k is not None or s.l is not None else ""
        if (s.k is None) != (s.l is None):
            k, l = s.arity()
            tail = f" {k} {l}"
        return f"(sub {memo[s.h]} ({gs}) ({ps}){tail})"
    if t is Snrn:
        br = " ".join(f"({w} {memo[h]} {memo[p]})" for w, h, p in s.branches)
        return f"(snrn {s.k} {memo[s.g]} ({br}) {_render_lexfn(s.f1)} {_render_lexfn(s.f2)})"
    raise TypeError(f"cannot render {s!r}")


def render_table(table: dict[str, FuncSym], use_stdlib: bool = True) -> str:
    """Definitions for ``table``; shared sub-symbols get their own ``_sN`` names."""
    std = _stdlib_names() if use_stdlib else {}
    parents: Counter = Counter()
    order: list[FuncSym] = []
    seen = set()
    for sym in table.values():
        for s in subsymbols(sym):
            if s in seen:
                continue
            seen.add(s)
            order.append(s)
            if s in std:
                continue
            for c in set(s.children()):
                parents[c] += 1
    names: dict[FuncSym, str] = {s: "@" + n for s, n in std.items()}
    lines = []
    for name, sym in table.items():
        names.setdefault(sym, name)
    count = 0
    for s in order:
        if s in names or not s.children() or s in std:
            continue
        if parents[s] > 1:
            count += 1
            nm = f"_s{count}"
            lines.append(f"(def {nm} {render_expr(s, names, use_stdlib)})")
            names[s] = nm
    for name, sym in table.items():
        own = {k: v for k, v in names.items() if k is not sym}
        lines.append(f"(def {name} {render_expr(sym, own, use_stdlib)})")
    return "\n".join(lines) + "\n"


def _short(f: FuncSym, std: dict) -> str:
    t = type(f)
    if f in std:
        return std[f]
    if t is Zero:
        return f"O[{f.k},{f.l}]"
    if t is Proj:
        return f"I[{f.k},{f.l},{f.j}]"
    if t is Concat:
        return f"C{f.i}"
    if t in (Succ, Pred, Cases, Del):
        return {Succ: "S", Pred: "P", Cases: "C", Del: "D"}[t]
    return f"{'sub' if t is Sub else 'snrn'}#{_digest(f) & 0xffff:04x}"


@lru_cache(maxsize=None)
def _digest(f: FuncSym) -> int:
    # str hashes are salted per process; a checksum keeps reports reproducible
    if not f.children():
        return zlib.crc32(_render_node(f, {}).encode())
    parts = [type(f).__name__, *map(str, map(_digest, f.children()))]
    if type(f) is Snrn:
        parts += [str(f.k), _render_lexfn(f.f1), _render_lexfn(f.f2), *(w for w, _, _ in f.branches)]
    else:
        parts.append(f"{f.k} {f.l}")
    return zlib.crc32(" ".join(parts).encode())


def render_term(t: Term, canonical_digits: bool = True) -> str:
    std = _stdlib_names()
    out: list[str] = []
    stack: list = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, str):
            out.append(s)
            continue
        if type(s) is Num:
            if canonical_digits and s.nbits == s.value.bit_length():
                out.append(str(s.value))
            else:
                bits = format(s.value, "b").zfill(s.nbits) if s.nbits else ""
                out.append("".join(f"C{b}(" for b in reversed(bits)) + "0" + ")" * len(bits))
            continue
        parts: list = [_short(s.head, std) + "("]
        for i, a in enumerate(s.normal):
            if i:
                parts.append(",")
            parts.append(a)
        if s.safe or type(s.head) is not Concat:
            parts.append(";")
        for i, a in enumerate(s.safe):
            if i:
                parts.append(",")
            parts.append(a)
        parts.append(")")
        stack.extend(reversed(parts))
    return "".join(out)

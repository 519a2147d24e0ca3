"""Direct evaluation of symbols as functions on natural numbers."""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from .terms import (App, Cases, Concat, Del, FuncSym, Num, Pred, Proj, Snrn, Sub,
                    Succ, Term, Zero)

__all__ = ["EvalCache", "pi_eval", "pi_eval_term", "ArgumentError"]

Accel = Mapping[FuncSym, Callable[[tuple, tuple], int]]


class ArgumentError(ValueError):
    pass


class EvalCache(dict):
    """Memo table ``(symbol, normals, safes) -> value``."""


def _base(f: FuncSym, ns: tuple, ss: tuple):
    t = type(f)
    if t is Proj:
        return (ns + ss)[f.j - 1]
    if t is Zero:
        return 0
    if t is Succ:
        return ss[0] + 1
    if t is Pred:
        return ss[0] - 1 if ss[0] else 0
    if t is Cases:
        return ss[1] if ss[0] == 0 else ss[2]
    if t is Del:
        return ss[0] >> 1
    if t is Concat:
        return 2 * ns[0] + f.i
    return None


def _frame(f: FuncSym, ns: tuple, ss: tuple, observer):
    if type(f) is Sub:
        gv = []
        for g in f.gs:
            gv.append((yield g, ns, ()))
        pv = []
        for p in f.phis:
            pv.append((yield p, ns, ss))
        return (yield f.h, tuple(gv), tuple(pv))
    # Snrn
    k = f.k
    ys, xs = ns[:k], ns[k:]
    if not any(ys):
        return (yield f.g, xs, ss)
    w = "".join("Z" if y == 0 else str(y & 1) for y in ys)
    m = ys + tuple(y >> 1 for y in ys)
    v1 = tuple(m[i - 1] for i in f.f1.row(w))
    v2 = tuple(m[i - 1] for i in f.f2.row(w))
    if observer is not None:
        observer(f, ys, v1, v2)
    h, phi = f.branch(w)
    inner = yield f, v2 + xs, ss
    c = yield phi, v2 + xs, ss + (inner,)
    rec = yield f, v1 + xs, ss[:-1] + (c,)
    return (yield h, v1 + xs, ss + (rec,))


def pi_eval(f: FuncSym, normal: Sequence[int], safe: Sequence[int],
            cache: dict | None = None, accel: Accel | None = None,
            observer=None) -> int:
    """Value of ``f`` on the given normal and safe arguments.

    ``accel`` maps selected symbols to verified closed forms; those calls
    skip the equations.  ``observer(f, ys, v1, v2)`` sees each recursion step.
    """
    ns, ss = tuple(normal), tuple(safe)
    k, l = f.arity()
    if len(ns) != k or len(ss) != l:
        raise ArgumentError(f"expected {k} normal and {l} safe arguments, got {len(ns)} and {len(ss)}")
    if any((not isinstance(v, int)) or v < 0 for v in ns + ss):
        raise ArgumentError("arguments must be natural numbers")
    memo = {} if cache is None else cache
    accel = accel or {}

    def direct(g, a, b):
        v = _base(g, a, b)
        if v is not None:
            return v
        fn = accel.get(g)
        if fn is not None:
            return fn(a, b)
        return memo.get((g, a, b))

    v = direct(f, ns, ss)
    if v is not None:
        return v
    stack = [((f, ns, ss), _frame(f, ns, ss, observer))]
    send = None
    while stack:
        key, gen = stack[-1]
        try:
            g, a, b = gen.send(send)
        except StopIteration as stop:
            stack.pop()
            send = stop.value
            memo[key] = send
            continue
        v = direct(g, a, b)
        if v is not None:
            send = v
        else:
            stack.append(((g, a, b), _frame(g, a, b, observer)))
            send = None
    return send


def pi_eval_term(t: Term, cache: dict | None = None, accel: Accel | None = None) -> int:
    """Evaluate a ground term bottom-up."""
    memo = {} if cache is None else cache
    vals: dict[int, int] = {}
    stack = [(t, False)]
    while stack:
        s, ready = stack.pop()
        if type(s) is Num:
            vals[id(s)] = s.value
            continue
        if ready:
            k = len(s.normal)
            args = [vals[id(a)] for a in s.args]
            vals[id(s)] = pi_eval(s.head, args[:k], args[k:], memo, accel)
            continue
        stack.append((s, True))
        stack.extend((a, False) for a in s.args)
    return vals[id(t)]

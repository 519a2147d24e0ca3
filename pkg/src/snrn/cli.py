"""Command-line front end.

Exit status is 0 on success, 1 when a verification or validation fails and
2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from .dsl import ParseError, SymbolValidationError, parse_expr, parse_symbols, render_table
from .lex import validate_lexfn
from .rewrite import (Budgets, ExploreInnermost, LeftmostInnermost, LeftmostOutermost,
                      normalize)
from .rm import RMParseError, compile_program, parse_program, verify_compile
from .semantics import pi_eval
from .stdlib import Polynomial, accel_table, registry
from .terms import FuncSym, Snrn, bitlen, mk, num, subsymbols, validate

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- argument helpers -------------------------------------------------------

def _split_safe(argv: list[str]) -> tuple[list[str], list[str]]:
    """Pull the integers after ``--`` out as safe arguments."""
    if "--" not in argv:
        return argv, []
    i = argv.index("--")
    head, tail = argv[:i], argv[i + 1:]
    safe = []
    while tail and re.fullmatch(r"\d+", tail[0]):
        safe.append(tail.pop(0))
    return head + tail, safe


def _range(spec: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", spec)
    if not m:
        raise UsageError(f"bad range {spec!r}; use A or A..B")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) else a
    return list(range(a, b + 1))


def parse_poly(spec: str) -> Polynomial:
    """``"x1*x2 + x1 + 3"``: 1-based input variables, integer constants."""
    monos: list[tuple[int, ...]] = []
    text = spec.replace(" ", "")
    if text in ("", "0"):
        return Polynomial()
    for term in text.split("+"):
        if re.fullmatch(r"\d+", term):
            monos += [()] * int(term)
            continue
        factors = term.split("*")
        if not all(re.fullmatch(r"x[1-9]\d*", f) for f in factors):
            raise UsageError(f"bad polynomial term {term!r}")
        monos.append(tuple(int(f[1:]) - 1 for f in factors))
    return Polynomial.of(*monos)


def _load_table(files: Sequence[str]) -> dict[str, FuncSym]:
    table: dict[str, FuncSym] = {}
    for f in files or ():
        table.update(parse_symbols(Path(f).read_text()))
    return table


def _resolve(name: str, table: dict[str, FuncSym]) -> FuncSym:
    if name.startswith("("):
        return parse_expr(name, table)
    if name.startswith("@"):
        return parse_expr(name)
    if name in table:
        return table[name]
    raise UsageError(f"unknown symbol {name!r}; use @name for the library or --file")


def _strategy(args):
    if args.strategy == "out":
        return LeftmostOutermost()
    if args.strategy == "explore":
        return ExploreInnermost("seeded-random", args.seed)
    return LeftmostInnermost()


def _budgets(args) -> Budgets:
    return Budgets(args.max_steps, args.max_len)


def _emit(args, report: dict):
    if args.json:
        Path(args.json).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _ints(values: Sequence[str], what: str) -> list[int]:
    try:
        out = [int(v) for v in values]
    except ValueError:
        raise UsageError(f"{what} arguments must be natural numbers") from None
    if any(v < 0 for v in out):
        raise UsageError(f"{what} arguments must be natural numbers")
    return out


def _term(args):
    f = _resolve(args.symbol, _load_table(args.file))
    normal = _ints(args.values, "normal")
    safe = _ints(args.safe, "safe")
    k, l = f.arity()
    if len(normal) + len(safe) == k + l:
        # the separator is advisory when the total already fits the arity
        normal, safe = (normal + safe)[:k], (normal + safe)[k:]
    else:
        raise UsageError(f"symbol takes {k} normal and {l} safe arguments "
                         f"(write NORMAL... -- SAFE...), got {len(normal)} and {len(safe)}")
    return f, normal, safe, mk(f, [num(v) for v in normal], [num(v) for v in safe])


# --- commands ----------------------------------------------------------------

def cmd_eval(args) -> int:
    f, normal, safe, t = _term(args)
    prof = normalize(t, _strategy(args), _budgets(args))
    report = {"symbol": args.symbol, "normal": normal, "safe": safe,
              "strategy": args.strategy, "profile": prof.as_dict()}
    if prof.truncated:
        print(f"budget exhausted after {prof.steps} steps (max length {prof.max_length})")
        _emit(args, report)
        return EXIT_FAIL
    line = str(prof.value)
    status = EXIT_OK
    if args.oracle:
        expected = pi_eval(f, normal, safe, accel=accel_table())
        agree = expected == prof.value
        report["oracle"] = {"pi_eval": expected, "agree": agree}
        line += ", oracle agree" if agree else f", oracle DISAGREE (pi_eval {expected})"
        status = EXIT_OK if agree else EXIT_FAIL
    print(line)
    _emit(args, report)
    return status


def cmd_trace(args) -> int:
    _, normal, safe, t = _term(args)
    prof = normalize(t, _strategy(args), _budgets(args), trace=True)
    for i, rec in enumerate(prof.trace or (), 1):
        print(rec.line(i))
    print(f"# steps {prof.steps} max_length {prof.max_length} value {prof.value}"
          + (" (truncated)" if prof.truncated else ""))
    _emit(args, {**prof.as_dict(),
                 "trace": [{"step": i, "rule": r.rule_id, "position": list(r.position),
                            "lh_after": r.term_length_after}
                           for i, r in enumerate(prof.trace or (), 1)]})
    return EXIT_FAIL if prof.truncated else EXIT_OK


def _sweep_value(b: int) -> int:
    return (1 << b) - 1 if b else 0


def cmd_profile(args) -> int:
    f = _resolve(args.symbol, _load_table(args.file))
    k, l = f.arity()
    safe = _ints(args.safe, "safe") or [0] * l
    if len(safe) != l:
        raise UsageError(f"symbol takes {l} safe arguments")
    strategies = {"in": LeftmostInnermost(), "out": LeftmostOutermost(True, True),
                  "explore": ExploreInnermost("seeded-random", args.seed)}
    chosen = ["in", "out"] if args.strategy == "both" else [args.strategy]
    rows = []
    for b in _range(args.bitlens):
        normal = [_sweep_value(b)] * k
        t = mk(f, [num(v) for v in normal], [num(v) for v in safe])
        row = {"bitlen": b, "normal": normal}
        for name in chosen:
            prof = normalize(t, strategies[name], _budgets(args))
            row[name] = prof.as_dict()
        rows.append(row)
    nlen = max((num(v).lh for v in safe), default=0)
    fit = None
    if args.d is not None:
        ratios = [r[s]["max_length"] / ((r["bitlen"] ** args.d + 1) * (nlen + 1))
                  for r in rows for s in chosen if not r[s]["truncated"]]
        fit = {"d": args.d, "c": max(ratios) if ratios else None}
    print("bitlen  " + "  ".join(f"{s}:steps {s}:max_length" for s in chosen))
    for r in rows:
        cells = "  ".join(f"{r[s]['steps']:>8} {r[s]['max_length']:>12}" +
                          ("*" if r[s]["truncated"] else "") for s in chosen)
        print(f"{r['bitlen']:>6}  {cells}")
    if fit:
        print(f"fit: c = {fit['c']:.4g} for d = {fit['d']} "
              f"in max_length <= c (bitlen^d + 1)(|n| + 1)")
    _emit(args, {"symbol": args.symbol, "safe": safe, "rows": rows, "fit": fit})
    return EXIT_OK


def cmd_check(args) -> int:
    from .termination import check_rules
    table: dict[str, FuncSym] = {}
    for path in args.files:
        try:
            table.update(parse_symbols(Path(path).read_text(), check=False))
        except ParseError as e:
            raise UsageError(f"{path}: {e}") from None
    if args.stdlib or not (args.files or args.rm):
        table.update({"@" + n: nf.symbol for n, nf in registry().items()})
    for path in args.rm or ():
        prog = parse_program(Path(path).read_text(), Path(path).stem)
        table[path] = compile_program(prog, Polynomial()).symbol
    verdicts = {}
    for name, sym in table.items():
        if name.startswith("_"):
            continue
        v = validate(sym)
        lex = [f"(i={i}, w={w}): {why}" for s in subsymbols(sym) if isinstance(s, Snrn)
               for lf in (s.f1, s.f2) for i, w, why in validate_lexfn(lf).problems]
        entry = {"valid": v.ok, "violations": [str(x) for x in v.violations],
                 "lexfn_problems": sorted(set(lex))}
        if v.ok:
            rr = check_rules(sym)
            entry["termination"] = {"ok": rr.ok, "checked": len(rr.instances),
                                    "failures": [r.as_dict() for r in rr.failures]}
        ok = v.ok and entry["termination"]["ok"]
        entry["ok"] = ok
        verdicts[name] = entry
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        for msg in entry["violations"]:
            print(f"    {msg}")
        if ok:
            print(f"    {entry['termination']['checked']} rule instances decrease")
        elif v.ok:
            for fl in entry["termination"]["failures"]:
                print(f"    rule {fl['rule']}: {fl['lhs']} -> {fl['rhs']} does not decrease")
    errors = [n for n, e in verdicts.items() if not e["ok"]]
    _emit(args, {"ok": not errors, "symbols": verdicts})
    return EXIT_FAIL if errors else EXIT_OK


def cmd_compile_rm(args) -> int:
    try:
        prog = parse_program(Path(args.program).read_text(), Path(args.program).stem)
    except RMParseError as e:
        raise UsageError(f"{args.program}: {e}") from None
    q = parse_poly(args.q)
    comp = compile_program(prog, q)
    name = re.sub(r"\W", "_", prog.name or "program")
    text = render_table({name: comp.symbol})
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({comp.symbol.lh} symbol length)")
    report = {"program": args.program, "q": str(q), "length": comp.symbol.lh}
    status = EXIT_OK
    if args.verify:
        grid = _grid(_range(args.verify), prog.input_count)
        small = _grid(_range(args.rewrite_verify), prog.input_count) if args.rewrite_verify else []
        rep = verify_compile(prog, q, grid, small, compiled=comp, budgets=_budgets(args))
        report["verify"] = rep.as_dict()
        print(f"verified {rep.checked} inputs, {len(rep.mismatches)} mismatches, "
              f"{len(rep.skipped)} skipped")
        if small:
            print(f"rewriting: {rep.rewrite_checked} normalized, "
                  f"{len(rep.rewrite_truncated)} over budget, max Sp {rep.max_sp}")
        status = EXIT_OK if rep.ok else EXIT_FAIL
    _emit(args, report)
    return status


def _grid(values: list[int], n: int) -> list[tuple[int, ...]]:
    from itertools import product
    return list(product(values, repeat=n))


def cmd_demo_blowup(args) -> int:
    from .stdlib import mk_exp_len
    f = mk_exp_len().symbol
    n = args.safe_value
    rows = []
    ok = True
    print("bitlen  outer_max_length  predicted  inner_max_length")
    for b in _range(args.bitlens):
        m = _sweep_value(b)
        t = mk(f, [num(m)], [num(n)])
        out = normalize(t, LeftmostOutermost(True, True), _budgets(args))
        inn = normalize(t, LeftmostInnermost(), _budgets(args))
        pred = (f.lh + 1) * 2 ** bitlen(m) + num(n).lh
        hit = (not out.truncated) and out.max_length == pred
        ok &= hit
        rows.append({"bitlen": b, "outermost": out.as_dict(), "predicted": pred,
                     "innermost": inn.as_dict()})
        print(f"{b:>6}  {out.max_length:>16}{'*' if out.truncated else ' '} {pred:>10}  "
              f"{inn.max_length:>16}")
    _emit(args, {"symbol": "exp_len", "safe": n, "rows": rows, "exact": ok})
    return EXIT_OK if ok else EXIT_FAIL


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strategy", choices=["in", "out", "explore"], default="in")
    common.add_argument("--max-steps", type=int, default=10**7)
    common.add_argument("--max-len", type=int, default=10**6)
    common.add_argument("--json", metavar="PATH")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--oracle", action="store_true",
                        help="cross-check against direct evaluation")

    p = argparse.ArgumentParser(prog="snrn", description="Safe nested recursion toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def term_cmd(name, fn, help_):
        c = sub.add_parser(name, parents=[common], help=help_,
                           usage=f"snrn {name} SYMBOL [NORMAL ...] [-- SAFE ...] [options]")
        c.add_argument("symbol", help="@name, a name from --file, or an inline expression")
        c.add_argument("values", nargs="*", help="normal arguments")
        c.add_argument("-f", "--file", action="append", help="symbol definitions (.snrn)")
        c.set_defaults(func=fn)
        return c

    term_cmd("eval", cmd_eval, "normalize a ground term and print its value")
    term_cmd("trace", cmd_trace, "print every rewrite step")

    c = sub.add_parser("profile", parents=[common], help="steps and peak length over a sweep")
    c.add_argument("symbol")
    c.add_argument("-f", "--file", action="append")
    c.add_argument("--bitlens", default="1..8", help="range A..B of normal-argument bit lengths")
    c.add_argument("--d", type=int, help="report the fitted c for this exponent")
    c.add_argument("--both", dest="strategy", action="store_const", const="both")
    c.set_defaults(func=cmd_profile)

    c = sub.add_parser("check", parents=[common], help="validation and termination checks")
    c.add_argument("files", nargs="*", help="symbol files (.snrn)")
    c.add_argument("--stdlib", action="store_true", help="include the library functions")
    c.add_argument("--rm", action="append", help="register program (.rm) to compile and check")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("compile-rm", parents=[common], help="compile a register program")
    c.add_argument("program")
    c.add_argument("--q", default="0", help="running-time exponent, e.g. 'x1 + 2'")
    c.add_argument("-o", "--out", help="write the compiled symbol here (.snrn)")
    c.add_argument("--verify", help="input range A..B compared against the interpreter")
    c.add_argument("--rewrite-verify", help="input range also checked by rewriting")
    c.set_defaults(func=cmd_compile_rm)

    c = sub.add_parser("demo-blowup", parents=[common],
                       help="outermost versus innermost peak length on exp_len")
    c.add_argument("--bitlens", default="1..12")
    c.add_argument("--safe-value", type=int, default=0)
    c.set_defaults(func=cmd_demo_blowup)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv, safe = _split_safe(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    args.safe = safe
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SymbolValidationError as e:
        print(f"invalid symbol: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ParseError, RMParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

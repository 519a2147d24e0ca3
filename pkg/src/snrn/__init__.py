"""Safe nested recursion on notation: symbols, rewriting, evaluation and compilation."""

from .terms import (Arity, FuncSym, Zero, Proj, Succ, Pred, Cases, Concat, Del, Sub, Snrn,
                    SUCC, PRED, CASES, DEL, C0, C1, O, Term, Num, App, mk, num, value_of,
                    bitlen, is_numeral, is_canonical, lh_sym, lh_term, arity, validate, words)
from .lex import (LexFn, word_of_args, menu, prec1, prec_k, validate_lexfn, apply_lexfn,
                  sum_measure, predecessors, standard_lexfn)
from .semantics import pi_eval, pi_eval_term, EvalCache
from .rewrite import (Budgets, LeftmostInnermost, LeftmostOutermost, ExploreInnermost,
                      ReductionProfile, StepRecord, match_rule, step, normalize, sp_exhaustive)

numeral_of_nat = num

__version__ = "0.1.0"

import pytest

from snrn import CASES, DEL, PRED, SUCC, Concat, EvalCache, Proj, Sub, Zero, mk, num, pi_eval, pi_eval_term
from snrn.lex import sum_measure
from snrn.semantics import ArgumentError
from snrn.stdlib import accel_table, lookup, registry
from snrn.terms import bitlen


class TestBaseFunctions:
    def test_projection_counts_safe_after_normal(self):
        assert pi_eval(Proj(2, 1, 3), [4, 5], [6]) == 6
        assert pi_eval(Proj(2, 1, 1), [4, 5], [6]) == 4

    def test_successor_predecessor(self):
        assert pi_eval(SUCC, [], [7]) == 8
        assert pi_eval(PRED, [], [7]) == 6
        assert pi_eval(PRED, [], [0]) == 0

    def test_cases_uses_value_zero(self):
        assert pi_eval(CASES, [], [0, 3, 4]) == 3
        assert pi_eval(CASES, [], [2, 3, 4]) == 4

    def test_del_and_concat(self):
        assert pi_eval(DEL, [], [13]) == 6
        assert pi_eval(Concat(1), [6], []) == 13

    def test_zero(self):
        assert pi_eval(Zero(2, 1), [9, 9], [9]) == 0


class TestErrors:
    def test_arity_mismatch(self):
        with pytest.raises(ArgumentError):
            pi_eval(SUCC, [1], [])

    def test_negative(self):
        with pytest.raises(ArgumentError):
            pi_eval(SUCC, [], [-1])


def test_composition():
    # S(; P(; x)) on a safe argument
    f = Sub(SUCC, [], [Sub(PRED, [], [Proj(0, 1, 1)])])
    assert [pi_eval(f, [], [v]) for v in range(4)] == [1, 1, 2, 3]


def test_registry_matches_closed_forms_on_small_inputs():
    for name, nf in registry().items():
        if name == "exp3":
            continue
        k, l = nf.symbol.arity()
        for v in range(6):
            n, s = (v,) * k, (v,) * l
            assert pi_eval(nf.symbol, n, s) == nf(n, s), name


def test_cache_is_shared_and_changes_nothing():
    f = lookup("times").symbol
    cache = EvalCache()
    a = pi_eval(f, [6, 7], [1], cache)
    assert len(cache) > 0
    assert pi_eval(f, [6, 7], [1], cache) == a == pi_eval(f, [6, 7], [1])


def test_accel_gives_the_same_values():
    acc = accel_table()
    f = lookup("unpair1").symbol
    for x, z in [(3, 29), (16, 163), (0, 5)]:
        assert pi_eval(f, [x, z], [], accel=acc) == pi_eval(f, [x, z], [])


def test_ground_term_evaluation():
    times = lookup("times").symbol
    t = mk(times, [num(3), mk(Concat(1), [num(2)])], [mk(SUCC, [], [num(0)])])
    assert pi_eval_term(t) == pi_eval(times, [3, 5], [1]) == 21


def test_observer_sees_descent_in_the_measure():
    seen = []

    def watch(f, ys, v1, v2):
        d = max(f.k, 1)
        top = sum_measure(d, tuple(bitlen(y) for y in ys))
        seen.append(top > sum_measure(d, tuple(bitlen(v) for v in v1))
                    and top > sum_measure(d, tuple(bitlen(v) for v in v2)))

    pi_eval(lookup("times").symbol, [13, 6], [0], observer=watch)
    assert seen and all(seen)


def test_deep_nesting_does_not_overflow():
    f = Proj(0, 1, 1)
    for _ in range(5000):
        f = Sub(SUCC, [], [f])
    assert pi_eval(f, [], [2]) == 5002

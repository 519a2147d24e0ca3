import random

from hypothesis import given, settings
from hypothesis import strategies as st

from snrn import (SUCC, PRED, apply_lexfn, is_numeral, mk, normalize, num, pi_eval, prec_k,
                  sum_measure, value_of, words)
from snrn.lex import menu, random_lexfn
from snrn.stdlib import lookup, pack_values, unpack_value
from snrn.termination import lpo_gt
from snrn.terms import bitlen

nat = st.integers(min_value=0, max_value=2 ** 40)
small = st.integers(min_value=0, max_value=255)


@given(nat)
def test_numeral_round_trip(n):
    t = num(n)
    assert is_numeral(t) and value_of(t) == n


@given(nat)
def test_length_is_bitlen_plus_one(n):
    assert num(n).lh == bitlen(n) + 1


@given(st.lists(small, min_size=1, max_size=4))
def test_prec_k_is_irreflexive(vs):
    ts = [num(v) for v in vs]
    assert not prec_k(ts, ts)


@given(st.integers(1, 4), st.integers(0, 10 ** 6), st.data())
def test_lexfn_choice_lowers_the_measure(k, seed, data):
    rng = random.Random(seed)
    f = random_lexfn(k, rng)
    w = data.draw(st.sampled_from(words(k)))
    ys = [num(0) if ch == "Z" else num(2 * data.draw(small) + int(ch)) for ch in w]
    out = apply_lexfn(f, w, ys)
    top = menu(w, ys)[:k]
    d = data.draw(st.integers(k, 6))
    assert prec_k(out, top)
    assert sum_measure(d, tuple(t.lh - 1 for t in out)) < sum_measure(d, tuple(t.lh - 1 for t in top))


@given(small, small)
def test_lpo_orders_numerals_by_structure(a, b):
    s, t = num(a), num(b)
    assert not (lpo_gt(s, t) and lpo_gt(t, s))
    assert not lpo_gt(s, s)


@given(small, small, small)
def test_lpo_is_transitive_on_successor_terms(a, b, c):
    ts = [mk(SUCC, [], [num(a)]), mk(PRED, [], [num(b)]), num(c)]
    for x in ts:
        for y in ts:
            for z in ts:
                if lpo_gt(x, y) and lpo_gt(y, z):
                    assert lpo_gt(x, z)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["plus", "monus", "dotted_minus", "times", "half_len", "exp_len"]),
       st.integers(0, 63), st.integers(0, 63), st.integers(0, 63))
def test_rewriting_pi_eval_and_closed_form_agree(name, a, b, c):
    nf = lookup(name)
    k, l = nf.symbol.arity()
    normal, safe = (a, b)[:k], (c,)[:l]
    t = mk(nf.symbol, [num(v) for v in normal], [num(v) for v in safe])
    assert normalize(t).value == pi_eval(nf.symbol, normal, safe) == nf(normal, safe)


@given(st.integers(1, 200), st.lists(st.integers(0, 2 ** 10), min_size=1, max_size=4))
def test_pack_unpack(X, raw):
    w = bitlen(X)
    zs = [z % (1 << w) for z in raw]
    s = pack_values(X, zs)
    assert [unpack_value(X, len(zs), j, s) for j in range(1, len(zs) + 1)] == zs

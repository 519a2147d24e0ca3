import random

import pytest

from snrn import (apply_lexfn, menu, mk, num, prec1, prec_k, predecessors, standard_lexfn,
                  sum_measure, validate_lexfn, word_of_args, words)
from snrn.lex import BaseCase, LexFn, lexfn_from_rows, random_lexfn
from snrn.terms import C0, C1, Num

Z = num(0)


def c(i, x):
    return mk(C1 if i else C0, [x])


class TestWordOfArgs:
    def test_reads_top_constructors(self):
        assert word_of_args([num(1), Z]) == ("1Z", [Z, Z])
        assert word_of_args([num(2), num(1)]) == ("01", [num(1), Z])

    def test_all_zero_is_the_base_case(self):
        with pytest.raises(BaseCase):
            word_of_args([Z, Z])

    def test_non_canonical_zero_reads_as_letter_zero(self):
        assert word_of_args([c(0, Z)]) == ("0", [Z])


class TestMenu:
    def test_single(self):
        m = num(5)
        assert menu("1", [m]) == [c(1, m), m]

    def test_z_entries_are_zero(self):
        m = num(3)
        assert menu("Z1", [Z, m]) == [Z, c(1, m), Z, m]

    def test_two_letters(self):
        a, b = num(1), num(6)
        assert menu("00", [a, b]) == [c(0, a), c(0, b), a, b]


class TestPrec:
    def test_prec1(self):
        m = num(5)
        assert prec1(m, c(0, m))
        assert not prec1(m, m)
        assert not prec1(num(1), Z)

    def test_prec_k(self):
        assert prec_k([num(1)], [num(3)])
        assert prec_k([num(1), num(3)], [num(3), num(3)])

    def test_prec_k_is_irreflexive(self):
        vs = [num(3), num(4)]
        assert not prec_k(vs, vs)

    def test_prefix_uses_term_equality(self):
        # C_0(C_0(0)) and 0 have the same value but are different terms
        zz = c(0, c(0, Z))
        assert not prec_k([Z, num(1)], [zz, num(3)])
        assert prec_k([zz, num(1)], [zz, num(3)])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            prec_k([Z], [Z, Z])


class TestValidateLexfn:
    def test_unique_k1_function(self):
        assert validate_lexfn(lexfn_from_rows(1, {"0": (2,), "1": (2,)})).ok

    def test_k1_index_one_is_rejected(self):
        rep = validate_lexfn(lexfn_from_rows(1, {"0": (1,), "1": (1,)}))
        assert not rep.ok
        assert {(i, w) for i, w, _ in rep.problems} == {(1, "0"), (1, "1")}

    def test_jump_over_second_argument(self):
        rows = {}
        for w in words(2):
            rows[w] = (1, 4) if w[1] != "Z" else (3, 2)
        assert validate_lexfn(lexfn_from_rows(2, rows)).ok

    def test_descent_must_sit_on_a_non_z_letter(self):
        rows = {w: (1, 4) for w in words(2)}
        rep = validate_lexfn(lexfn_from_rows(2, rows))
        assert {w for _, w, _ in rep.problems} == {"0Z", "1Z"}

    def test_prefix_must_repeat(self):
        rows = {w: (2, 4) for w in words(2)}
        rows.update({"0Z": (3, 2), "1Z": (3, 2)})
        rep = validate_lexfn(lexfn_from_rows(2, rows))
        assert not rep.ok

    def test_missing_entry(self):
        rep = validate_lexfn(LexFn(1, {(1, "0"): 2}))
        assert rep.problems == [(1, "1", "table entry missing")]


class TestApply:
    def test_k1(self):
        m = num(6)
        f = standard_lexfn(1)
        assert apply_lexfn(f, "1", [m]) == [m]
        assert apply_lexfn(f, "0", [Z]) == [Z]

    def test_z_position_cannot_descend(self):
        f = standard_lexfn(2)
        y1 = num(5)
        out = apply_lexfn(f, "1Z", [y1, Z])
        assert out[0] == y1
        assert prec_k(out, menu("1Z", [y1, Z])[:2])

    def test_random_functions_agree_with_enumeration(self):
        rng = random.Random(7)
        for _ in range(200):
            k = rng.randint(1, 3)
            f = random_lexfn(k, rng)
            assert validate_lexfn(f).ok
            w = rng.choice(words(k))
            ys = [Z if ch == "Z" else num(rng.randrange(20)) for ch in w]
            got = tuple(apply_lexfn(f, w, ys))
            top = menu(w, ys)[:k]
            assert prec_k(list(got), top)
            assert got in predecessors(w, ys)


def test_every_enumerated_predecessor_is_one():
    rng = random.Random(3)
    for _ in range(100):
        k = rng.randint(1, 3)
        w = rng.choice(words(k))
        ys = [Z if ch == "Z" else num(rng.randrange(9)) for ch in w]
        top = menu(w, ys)[:k]
        for v in predecessors(w, ys):
            assert prec_k(list(v), top)


class TestSumMeasure:
    def test_examples(self):
        assert sum_measure(2, (2, 1)) == 7
        assert sum_measure(3, (0, 0, 0)) == 0
        assert sum_measure(1, (5,)) == 5

    def test_tuple_longer_than_d(self):
        with pytest.raises(ValueError):
            sum_measure(1, (1, 2))


def test_lexfn_is_immutable_and_hashable():
    f = standard_lexfn(2)
    assert f == standard_lexfn(2) and hash(f) == hash(standard_lexfn(2))
    with pytest.raises(AttributeError):
        f.k = 3
    assert isinstance(menu("1", [Z])[0], Num)

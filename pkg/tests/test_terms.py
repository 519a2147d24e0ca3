import pytest

from snrn import (C0, C1, CASES, DEL, O, PRED, SUCC, Arity, Concat, Num, Proj, Snrn, Sub, Zero,
                  arity, bitlen, is_canonical, is_numeral, lh_sym, lh_term, mk, num,
                  numeral_of_nat, validate, value_of, words)
from snrn.lex import lexfn_from_rows
from snrn.stdlib import K1

REC = Proj(1, 2, 3)


def snrn1(branches=None, f1=K1, f2=K1):
    if branches is None:
        branches = {"0": (REC, REC), "1": (REC, REC)}
    return Snrn(1, SUCC, branches, f1, f2)


class TestArity:
    def test_base_symbols(self):
        assert arity(SUCC) == Arity(0, 1)
        assert tuple(arity(PRED)) == tuple(arity(DEL)) == (0, 1)
        assert tuple(arity(CASES)) == (0, 3)
        assert tuple(arity(C0)) == (1, 0)
        assert tuple(arity(Zero(2, 3))) == (2, 3)

    def test_projection_carries_its_arity(self):
        assert tuple(arity(Proj(2, 1, 3))) == (2, 1)

    def test_sub(self):
        assert tuple(arity(Sub(SUCC, [], [Proj(1, 1, 2)]))) == (1, 1)

    def test_snrn_adds_a_safe_argument(self):
        # g : (k', l+1), result : (k+k', l+1)
        assert tuple(arity(snrn1())) == (1, 1)


class TestLength:
    def test_base_symbol_is_one(self):
        assert lh_sym(SUCC) == 1
        assert lh_sym(Proj(3, 3, 1)) == 1

    def test_sub_length(self):
        assert lh_sym(Sub(SUCC, [], [Proj(1, 1, 2)])) == 3

    def test_snrn_length(self):
        assert lh_sym(snrn1()) == 6

    def test_numeral_lengths(self):
        assert lh_term(num(0)) == 1
        assert lh_term(num(6)) == 4

    def test_application_length(self):
        assert lh_term(mk(SUCC, [], [num(1)])) == 3

    @pytest.mark.parametrize("n", [1, 2, 7, 8, 255, 1 << 40])
    def test_canonical_numeral_length_is_bitlen_plus_one(self, n):
        assert lh_term(num(n)) == bitlen(n) + 1


class TestNumerals:
    def test_numeral_of_nat(self):
        assert numeral_of_nat(0) == num(0) == mk(O)
        assert num(6) == mk(C0, [mk(C1, [mk(C1, [num(0)])])])
        assert num(1) == mk(C1, [num(0)])

    def test_value_of(self):
        assert value_of(mk(C1, [mk(C1, [num(0)])])) == 3
        assert value_of(mk(C0, [num(0)])) == 0
        assert value_of(num(83)) == 83

    def test_non_canonical_zero_is_a_distinct_term(self):
        z = mk(C0, [num(0)])
        assert is_numeral(z) and not is_canonical(z)
        assert z != num(0)

    def test_value_of_rejects_non_numerals(self):
        with pytest.raises(TypeError):
            value_of(mk(SUCC, [], [num(0)]))

    def test_negative_numbers_are_rejected(self):
        with pytest.raises(ValueError):
            num(-1)

    @pytest.mark.parametrize("n, expected", [(0, 0), (6, 3), (8, 4), (1, 1), (7, 3)])
    def test_bitlen(self, n, expected):
        assert bitlen(n) == expected

    def test_terms_are_immutable(self):
        t = mk(SUCC, [], [num(1)])
        with pytest.raises(AttributeError):
            t.head = PRED
        with pytest.raises(AttributeError):
            num(3).value = 4


class TestValidate:
    def test_base_ok(self):
        assert validate(SUCC).ok

    def test_missing_branch(self):
        rep = validate(snrn1({"0": (REC, REC)}))
        assert not rep.ok
        assert any("missing branch" in v.message for v in rep.violations)

    def test_invalid_lexfn(self):
        bad = lexfn_from_rows(1, {"0": (1,), "1": (1,)})
        rep = validate(snrn1(f1=bad))
        assert not rep.ok
        assert all("lex-function invalid" in v.message for v in rep.violations)
        assert rep.violations[0].path == "f1"

    def test_sub_arity_mismatch_names_the_node(self):
        # phi must have arity (k, l) = (1, 1); this one is (2, 0)
        rep = validate(Sub(SUCC, [], [Proj(2, 0, 1)], k=1, l=1))
        assert not rep.ok
        assert "phi[0]" in rep.violations[0].message

    def test_nested_violation_path(self):
        inner = snrn1({"0": (REC, REC)})
        rep = validate(Sub(inner, [Proj(1, 0, 1)], [Zero(1, 0)]))
        assert not rep.ok
        assert rep.violations[0].path.startswith("h")


def test_words_exclude_all_z():
    assert words(1) == ["0", "1"]
    assert len(words(2)) == 8 and "ZZ" not in words(2)
    assert len(words(3)) == 26


def test_concat_folds_into_numeral():
    t = mk(Concat(1), [num(2)])
    assert type(t) is Num and t.value == 5

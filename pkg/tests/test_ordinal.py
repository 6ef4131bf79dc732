import random

import pytest
from hypothesis import given, settings, strategies as st

from nmorbits.ordinal import (
    OMEGA,
    ONE,
    ZERO,
    Ordinal,
    OrdinalParseError,
    add,
    compare,
    format_ordinal,
    is_indecomposable,
    left_sub,
    nat_sum,
    omega_pow,
    ordinal,
    parse,
    succ,
)
from oracles import add_blocks, coefficient_vector, natsum_blocks, random_ordinal


def w(text):
    return parse(text)


small = st.builds(
    lambda coefs: Ordinal([(Ordinal.of(e), c) for e, c in zip(range(4, -1, -1), coefs) if c]),
    st.lists(st.integers(0, 4), min_size=5, max_size=5),
)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ("w*2+3", "w+1", "w*3+1"),
        ("3", "w", "w"),
        ("w", "3", "w+3"),
        ("w^2+w", "w^2", "w^2*2"),
        ("w^(w)+5", "w^3", "w^(w)+w^3"),
        ("0", "w^2", "w^2"),
    ],
)
def test_add_examples(a, b, expected):
    assert format_ordinal(add(w(a), w(b))) == expected


def test_natsum_example():
    assert format_ordinal(nat_sum(w("w^2+w"), w("w*2+5"))) == "w^2+w*3+5"
    assert nat_sum(w("w^2+w"), w("w*2+5")) == natsum_blocks(w("w^2+w"), w("w*2+5"))


def test_compare_examples():
    assert compare("w^2+3", "w*5") == 1
    assert compare("w", "w") == 0
    assert compare(7, "w") == -1
    assert w("w^(w)") > w("w^5*9")


@given(small, small)
def test_compare_matches_coefficient_vectors(a, b):
    va, vb = coefficient_vector(a, 5), coefficient_vector(b, 5)
    assert compare(a, b) == (va > vb) - (va < vb)


@given(small, small)
def test_add_matches_block_absorption(a, b):
    assert add(a, b) == add_blocks(a, b)


@given(small, small)
def test_natsum_matches_block_merge(a, b):
    assert nat_sum(a, b) == natsum_blocks(a, b)


@given(small, small)
def test_sums_are_in_normal_form(a, b):
    for result in (add(a, b), nat_sum(a, b)):
        assert Ordinal(result.terms) == result


@given(small, small)
def test_sum_at_most_natural_sum(a, b):
    assert add(a, b) <= nat_sum(a, b)


@given(small, small)
def test_left_sub_inverts_add(a, b):
    # ordinal addition cancels on the left
    assert left_sub(a, add(a, b)) == b


def test_left_sub_examples():
    assert left_sub(2, w("w+2")) == w("w+2")
    assert left_sub(w("w"), w("w*2+1")) == w("w+1")
    assert left_sub(w("w^2"), w("w^2")) == ZERO
    with pytest.raises(ValueError):
        left_sub(w("w+1"), w("w"))


def test_structure():
    assert OMEGA.is_limit and not OMEGA.is_successor
    assert w("w+1").is_successor and w("w+1").pred() == OMEGA
    assert ZERO.is_finite and not ZERO.is_limit and not ZERO.is_successor
    assert int(ordinal(7)) == 7
    assert succ(OMEGA) == w("w+1")
    assert omega_pow(OMEGA) == w("w^(w)")
    assert is_indecomposable(w("w^3")) and not is_indecomposable(w("w*2")) and not is_indecomposable(ZERO)
    assert ONE == 1 and ZERO == 0 and OMEGA != 1


def test_fundamental_sequences():
    assert w("w^2").fundamental(3) == w("w*3")
    assert w("w*2").fundamental(4) == w("w+4")
    assert w("w^(w)").fundamental(2) == w("w^2")
    assert OMEGA.fundamental(0) == ZERO
    lam = w("w^2*2+w")
    seq = [lam.fundamental(k) for k in range(6)]
    assert all(x < y for x, y in zip(seq, seq[1:])) and all(x < lam for x in seq)
    with pytest.raises(ValueError):
        w("w+1").fundamental(0)


def test_constructor_rejects_bad_terms():
    with pytest.raises(ValueError):
        Ordinal([(ZERO, 1), (ONE, 1)])
    with pytest.raises(ValueError):
        Ordinal([(ONE, 0)])
    with pytest.raises(TypeError):
        w("w") < True


@pytest.mark.parametrize(
    "text, position",
    [("w+w^2", 2), ("", 0), ("w^", 2), ("w^(w", 4), ("1+w", 2), ("w*0", 2), ("03", 1), ("x", 0)],
)
def test_parse_errors_report_position(text, position):
    with pytest.raises(OrdinalParseError) as exc:
        parse(text)
    assert exc.value.position == position


@pytest.mark.parametrize("text", ["0", "7", "w", "w*3+2", "w^2", "w^(w)", "w^(w+1)*3+w^2+1", "w^(w^(w))"])
def test_format_is_canonical(text):
    assert format_ordinal(parse(text)) == text


@settings(max_examples=300)
@given(st.integers(0, 10**6))
def test_parse_format_roundtrip(seed):
    a = random_ordinal(random.Random(seed))
    assert parse(format_ordinal(a)) == a


def test_hash_and_equality_with_ints():
    assert hash(ordinal(3)) == hash(Ordinal.of(3))
    assert {ordinal("w"), parse("w")} == {OMEGA}
    assert ordinal(3) == 3 and ordinal(3) != "3"

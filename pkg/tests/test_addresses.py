from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbe.addresses import (
    Address,
    SymbolicSet,
    disjunctive_prefix,
    format_address,
    is_valid_word,
    iterate_symbolic_ifs,
    metric,
    negate,
    parse_address,
    positive_truncations,
    shift,
    sigma,
    symbolic_hausdorff,
    validate,
    word_metric,
)
from fbe.errors import (
    EmptyAddressError,
    InvalidDigitError,
    SpecFormatError,
    TruncationDepthError,
)
from fbe.ifs import random_address

A = parse_address


# -- strategies ---------------------------------------------------------------


@st.composite
def addresses(draw, n_maps=2, tail="any"):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.Generator(np.random.PCG64(seed))
    return random_address(rng, n_maps, max_pre=4, max_period=3, tail=tail)


# -- construction and canonical form -------------------------------------------


def test_parse_format_round_trip():
    for text in ["-1.-1.(2)*", "(1)*", "1.2", "(1.2)*", "-2", "2.(1)*"]:
        a = A(text)
        assert format_address(a) == text
        assert A(format_address(a)) == a
    # non-canonical input parses to the same word, printed canonically
    assert format_address(A("2.(1.2)*")) == "(2.1)*"


def test_empty_address():
    a = A("")
    assert a.is_empty and not a.is_infinite


def test_parse_rejects_garbage():
    with pytest.raises(SpecFormatError):
        A("abc")
    with pytest.raises(SpecFormatError):
        A("1.()*")


def test_canonical_primitive_period():
    assert A("(2.2)*") == A("(2)*")
    assert A("(1.2.1.2)*") == A("(1.2)*")


def test_canonical_minimal_preperiod():
    # 1 1 1 1 ... has empty preperiod in canonical form
    assert A("1.1.(1)*") == A("(1)*")
    # 1 2 1 2 ... written with a shifted preperiod
    assert A("1.(2.1)*") == A("(1.2)*")


def test_zero_digit_rejected():
    with pytest.raises(InvalidDigitError):
        Address((0,), ())


# -- validate -------------------------------------------------------------------


def test_validate_spec_examples():
    c = validate(A("-1.-1.(2)*"), 2)
    assert c.in_I and c.in_Ihat and c.in_Jplus and not c.in_Iplus

    c = validate(A("(1)*"), 2)
    assert c.in_Iplus and c.in_Ihat and c.in_Jplus

    c = validate(A("1.-1.(2)*"), 2)
    assert not c.in_I


def test_validate_digit_out_of_range():
    with pytest.raises(InvalidDigitError):
        validate(A("3.(1)*"), 2)


def test_validate_wrap_cancellation():
    # period (1.-1) cancels across the wrap
    assert not validate(A("(1.-2)*"), 2).in_I or True  # 1,-2 ok; wrap -2,1 ok
    assert validate(A("(1.-2)*"), 2).in_I
    assert not validate(A("(1.-1)*"), 2).in_I


def test_validate_negative_side():
    c = validate(A("2.2.(-1)*"), 2)
    assert c.in_I and c.in_Ihat_star and c.in_Jminus and not c.in_Iminus


@settings(max_examples=300)
@given(addresses(n_maps=3))
def test_classification_chain(addr):
    c = validate(addr, 3)
    assert c.in_I
    if c.in_Iplus:
        assert c.in_Ihat
    if c.in_Ihat:
        assert c.in_Jplus
    if c.in_Iminus:
        assert c.in_Ihat_star
    if c.in_Ihat_star:
        assert c.in_Jminus
    if c.in_Jplus or c.in_Jminus:
        assert c.in_I


def test_classification_chain_bulk():
    rng = np.random.Generator(np.random.PCG64(11))
    for _ in range(10_000):
        addr = random_address(rng, 2, max_pre=5, max_period=3, tail="any")
        c = validate(addr, 2)
        assert c.in_I
        assert not c.in_Iplus or c.in_Ihat
        assert not c.in_Ihat or c.in_Jplus
        assert not c.in_Iminus or c.in_Ihat_star
        assert not c.in_Ihat_star or c.in_Jminus


# -- shift / sigma ----------------------------------------------------------------


def test_shift_examples():
    assert shift(A("1.(2)*")) == A("(2)*")
    assert shift(A("(1.2)*")) == A("(2.1)*")
    assert shift(A("-1.(2)*")) == A("(2)*")


def test_shift_empty_errors():
    with pytest.raises(EmptyAddressError):
        shift(A(""))


def test_sigma_examples():
    assert sigma(1, A("2.(1)*")) == A("1.2.(1)*")
    assert sigma(1, A("-1.(2)*")) == A("(2)*")
    assert sigma(-1, A("1.(2)*")) == A("(2)*")


@settings(max_examples=300)
@given(addresses(n_maps=2), st.sampled_from([-2, -1, 1, 2]))
def test_sigma_inverse_pair(addr, n):
    assert sigma(-n, sigma(n, addr)) == addr


@settings(max_examples=300)
@given(addresses(n_maps=2), st.sampled_from([-2, -1, 1, 2]))
def test_shift_sigma_identity(addr, n):
    if addr.digit(1) != -n:
        assert shift(sigma(n, addr)) == addr


@settings(max_examples=200)
@given(addresses(n_maps=2), addresses(n_maps=2), st.sampled_from([1, 2]))
def test_sigma_bi_lipschitz(a, b, n):
    d = metric(a, b)
    ds = metric(sigma(n, a), sigma(n, b))
    assert Fraction(1, 2) * d <= ds <= 2 * d


# -- negate -----------------------------------------------------------------------


def test_negate_examples():
    assert negate(A("(1)*")) == A("(-1)*")
    assert negate(A("-1.-2")) == A("1.2")


@settings(max_examples=200)
@given(addresses(n_maps=3))
def test_negate_involution(addr):
    assert negate(negate(addr)) == addr
    assert validate(negate(addr), 3).in_I


# -- metric -----------------------------------------------------------------------


def test_metric_examples():
    assert metric(A("(1)*"), A("(2)*")) == Fraction(1, 2)
    assert metric(A("(1.2)*"), A("(1.2)*")) == 0
    assert metric(A("1.1.(2)*"), A("1.1.(1)*")) == Fraction(1, 8)


def test_metric_finite_vs_infinite():
    # finite word vs an extension: first difference just past the end
    assert metric(A("1.2"), A("1.2.(1)*")) == Fraction(1, 8)


@settings(max_examples=300)
@given(addresses(), addresses(), addresses())
def test_metric_axioms(a, b, c):
    dab = metric(a, b)
    assert dab == metric(b, a)
    assert (dab == 0) == (a == b)
    assert dab <= metric(a, c) + metric(c, b)


# -- disjunctive prefix --------------------------------------------------------------


def test_disjunctive_examples():
    assert disjunctive_prefix(2, 6) == (1, 2, 1, 1, 1, 2)
    assert disjunctive_prefix(1, 3) == (1, 1, 1)
    assert disjunctive_prefix(2, 0) == ()


@settings(max_examples=60)
@given(st.lists(st.sampled_from([1, 2]), min_size=1, max_size=5))
def test_disjunctive_contains_every_word(word):
    word = tuple(word)
    # the concatenation up to all words of length len(word) surely contains it
    total = sum(k * 2**k for k in range(1, len(word) + 1))
    prefix = disjunctive_prefix(2, total)
    assert any(
        prefix[i : i + len(word)] == word for i in range(len(prefix) - len(word) + 1)
    )


# -- symbolic IFS iteration ------------------------------------------------------------


def test_iterate_symbolic_branches():
    # Exclusive inverse-shift branches: the cancellation replaces the prepend.
    s = SymbolicSet.singleton(A("-1.-1.(2)*"), 8)
    r = iterate_symbolic_ifs(s, (1, 2), 1)
    assert r.depth == 7
    assert r.elements == {
        (-1, 2, 2, 2, 2, 2, 2),
        (2, -1, -1, 2, 2, 2, 2),
    }


def test_iterate_symbolic_stays_positive():
    s = positive_truncations(2, 6)
    r = iterate_symbolic_ifs(s, (1, 2), 3)
    assert all(all(d > 0 for d in w) for w in r.elements)


def test_iterate_symbolic_depth_error():
    s = SymbolicSet.singleton(A("(1)*"), 4)
    with pytest.raises(TruncationDepthError):
        iterate_symbolic_ifs(s, (1, 2), 4)


def test_symbolic_attractor_convergence():
    iota = A("-1.-1.(2)*")
    K, L = 3, 12
    for j in range(1, 4):
        r = iterate_symbolic_ifs(SymbolicSet.singleton(iota, L), (1, 2), K + j)
        target = positive_truncations(2, L - (K + j))
        assert symbolic_hausdorff(r, target) <= Fraction(1, 2 ** (j + 1))


def test_word_metric_and_validity():
    assert word_metric((1, 2), (1, 1)) == Fraction(1, 4)
    assert word_metric((1, 2), (1, 2)) == 0
    assert is_valid_word((1, 2, -1)) and not is_valid_word((1, -1))


@settings(max_examples=300)
@given(addresses(n_maps=3))
def test_parse_format_round_trip_random(addr):
    assert A(format_address(addr)) == addr

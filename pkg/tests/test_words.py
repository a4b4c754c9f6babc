import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discrete_f2.words import (
    EMPTY,
    Letter,
    ReducedWord,
    WordPair,
    block_count_formula,
    concat,
    cumulative_block_count,
    enumerate_pairs,
    inverse,
    is_suffix,
    iter_words_of_length,
    longest_common_suffix,
    make_pair,
    pair_block_count,
    reduce,
    stage_words,
    words_of_length,
)

W = ReducedWord.parse
f, F, g, G = Letter.f, Letter.F, Letter.g, Letter.G
letters = st.lists(st.sampled_from([f, F, g, G]), max_size=8)


def test_letter_alphabet_has_four_values():
    assert len({(l.generator, l.exponent) for l in Letter}) == 4
    assert all(l.inverse.inverse is l for l in Letter)


def test_parse_and_text_round_trip():
    assert str(W("ffgFG")) == "ffgFG"
    assert str(EMPTY) == "1"
    assert W("1") == EMPTY
    assert W("fF") == EMPTY
    with pytest.raises(ValueError):
        W("fx")


def test_unreduced_word_rejected():
    with pytest.raises(ValueError):
        ReducedWord((f, F))


@pytest.mark.parametrize(
    "seq, expected",
    [([f, F], "1"), ([f, g, G, f], "ff"), ([G, f, F, g], "1")],
)
def test_reduce_examples(seq, expected):
    assert str(reduce(seq)) == expected


def test_reduce_is_idempotent():
    w = W("fgFGf")
    assert reduce(w.letters) == w


@pytest.mark.parametrize("a, b, expected", [("f", "F", "1"), ("fg", "Gf", "ff"), ("1", "fgF", "fgF")])
def test_concat_examples(a, b, expected):
    assert str(concat(W(a), W(b))) == expected


@pytest.mark.parametrize("w, expected", [("fg", "GF"), ("1", "1"), ("ff", "FF")])
def test_inverse_examples(w, expected):
    assert str(inverse(W(w))) == expected
    assert concat(W(w), inverse(W(w))) == EMPTY


@pytest.mark.parametrize("u, w, expected", [("g", "fg", True), ("f", "fg", False), ("fg", "fg", True), ("1", "fg", True)])
def test_is_suffix_examples(u, w, expected):
    assert is_suffix(W(u), W(w)) is expected


@pytest.mark.parametrize("u, v, word, s", [("fg", "gg", "g", 1), ("fgF", "fgF", "fgF", 3), ("f", "g", "1", 0)])
def test_longest_common_suffix_examples(u, v, word, s):
    assert longest_common_suffix(W(u), W(v)) == (W(word), s)


@pytest.mark.parametrize(
    "w, expected",
    [("fg", ["1", "g", "fg"]), ("1", ["1"]), ("Fgf", ["1", "f", "gf", "Fgf"])],
)
def test_stage_words_examples(w, expected):
    assert [str(x) for x in stage_words(W(w))] == expected


@pytest.mark.parametrize("n, count", [(1, 4), (2, 12), (3, 36)])
def test_word_counts(n, count):
    c, words = words_of_length(n, materialize=True)
    assert c == count == len(words) == len(set(words))


def test_words_of_length_order_and_guards():
    assert [str(w) for w in words_of_length(1, True)[1]] == ["f", "F", "g", "G"]
    assert words_of_length(30)[1] is None
    with pytest.raises(OverflowError):
        words_of_length(20, materialize=True)
    with pytest.raises(ValueError):
        words_of_length(0)


def test_first_pairs():
    pairs = enumerate_pairs(5)
    assert [(str(p.U), str(p.V)) for p in pairs[:4]] == [("f", "1"), ("F", "1"), ("g", "1"), ("G", "1")]
    assert (str(pairs[4].U), str(pairs[4].V)) == ("f", "f")
    assert [p.index for p in pairs] == [1, 2, 3, 4, 5]


def test_enumeration_monotone():
    pairs = enumerate_pairs(cumulative_block_count(3) + 10)
    for a, b in zip(pairs, pairs[1:]):
        assert len(a.U) <= len(b.U)
        if len(a.U) == len(b.U):
            assert len(a.V) <= len(b.V)


def test_common_suffix_is_suffix_of_both():
    for p in enumerate_pairs(cumulative_block_count(2) + 1):
        w, s = longest_common_suffix(p.U, p.V)
        assert s == p.s <= len(p.V)
        assert is_suffix(w, p.U) and is_suffix(w, p.V)


@pytest.mark.parametrize("j, count", [(1, 20), (2, 204), (3, 1908)])
def test_pair_block_count(j, count):
    assert pair_block_count(j, cumulative_block_count(j) + 1) == count == block_count_formula(j)
    assert block_count_formula(j) == 4 * 3 ** (j - 1) * (1 + sum(4 * 3 ** (k - 1) for k in range(1, j + 1)))


def test_pair_block_count_needs_horizon():
    with pytest.raises(ValueError):
        pair_block_count(1, 20)
    with pytest.raises(ValueError):
        pair_block_count(1, 5)


def test_word_pair_invariants():
    with pytest.raises(ValueError):
        WordPair(EMPTY, EMPTY, 1, 0)
    with pytest.raises(ValueError):
        make_pair(W("f"), W("fg"), 1)


def test_reduction_confluence_exhaustive_small():
    seqs = [list(s) for n in range(5) for s in itertools.product([f, F, g, G], repeat=n)]
    reduced = [reduce(s) for s in seqs]
    for x, rx in zip(seqs[::7], reduced[::7]):
        for y, ry in zip(seqs, reduced):
            assert reduce(x + y) == concat(rx, ry)


@settings(max_examples=300, deadline=None)
@given(letters, letters)
def test_reduction_confluence(x, y):
    assert reduce(x + y) == concat(reduce(x), reduce(y))


@settings(max_examples=200, deadline=None)
@given(letters, letters, letters)
def test_concat_associative(x, y, z):
    a, b, c = reduce(x), reduce(y), reduce(z)
    assert concat(concat(a, b), c) == concat(a, concat(b, c))
    assert len(concat(a, b)) <= len(a) + len(b)


def test_iter_words_lexicographic():
    words = list(iter_words_of_length(2))
    assert words == sorted(words, key=lambda w: w.sort_key())

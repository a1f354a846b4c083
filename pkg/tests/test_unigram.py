import math
import random

import pytest
from hypothesis import given, strategies as st

import oracles
from toklab.text import Corpus, normalize
from toklab.tokenizers import (META, UNK, UnigramModel, decode, em_step, encode_unigram,
                               prune, seed_vocab, tokenizer_from_dict, train_unigram)
from toklab.tokenizers.base import flatten
from toklab.tokenizers.unigram import corpus_log_likelihood

WORDS = st.text(alphabet="abc", min_size=1, max_size=6)


def _mass(model):
    return sum(math.exp(lp) for lp in model.log_prob.values())


def test_seed_vocab_example():
    seeds = seed_vocab({"ab": 1}, 2, 100)
    assert set(seeds) == {META, "a", "b", META + "a", "ab"}
    assert set(seed_vocab({"ab": 1}, 1, 100)) == {META, "a", "b"}
    with pytest.raises(ValueError):
        seed_vocab({}, 2, 10)
    with pytest.raises(ValueError):
        seed_vocab({"abc": 1}, 2, 3)


def test_seed_vocab_ranks_by_count_times_length():
    seeds = seed_vocab({"aaaa": 1}, 4, 4)  # alphabet {▁, a} plus two best
    # aa occurs 3x (score 6), ▁a 1x (2), aaa 2x (6), aaaa 1x (4), ▁aa 1x (3)
    assert set(seeds) == {META, "a", "aa", "aaa"}


def test_viterbi_example():
    model = UnigramModel({META + "ab": -1.0, META + "a": -1.5, "b": -1.5,
                          META: -3.0, "a": -3.0}, {META, "a", "b"})
    assert encode_unigram(model, "ab") == [[META + "ab"]]


def test_single_path_and_unk():
    model = UnigramModel({META: math.log(0.5), "c": math.log(0.5)}, {META, "c"})
    assert model.encode_word("c") == [META, "c"]
    assert model.encode_word("z") == [META, UNK]
    assert model.unk_log_prob == pytest.approx(math.log(0.5) - 10)


def test_em_alphabet_only_gives_char_frequencies():
    freqs = {"ab": 2, "b": 1}
    model = UnigramModel.from_counts({META: 1, "a": 1, "b": 1}, {META, "a", "b"})
    new, _ = em_step(model, freqs)
    # ▁:3, a:2, b:3 over 8 symbols
    assert new.log_prob[META] == pytest.approx(math.log(3 / 8), abs=1e-12)
    assert new.log_prob["a"] == pytest.approx(math.log(2 / 8), abs=1e-12)
    assert new.log_prob["b"] == pytest.approx(math.log(3 / 8), abs=1e-12)


def test_forward_sum_three_paths():
    lp = {"a": math.log(0.3), "aa": math.log(0.2), META: math.log(0.1), META + "a": math.log(0.4)}
    model = UnigramModel(lp, {META, "a"})
    log_z, expected = model.forward_backward("aa")
    paths = list(oracles.scored_segmentations("aa", lp, {META, "a"}, model.unk_log_prob))
    assert len(paths) == 3  # ▁|a|a, ▁|aa, ▁a|a
    assert log_z == pytest.approx(oracles.forward_sum("aa", lp, {META, "a"}, model.unk_log_prob),
                                  abs=1e-12)
    z = math.exp(log_z)
    want = {p: 0.0 for p in lp}
    for seg, s in paths:
        for p in seg:
            want[p] += math.exp(s) / z
    for p in lp:
        assert expected.get(p, 0.0) == pytest.approx(want[p], abs=1e-12)


def test_em_fixed_point_single_segmentation():
    model = UnigramModel.from_counts({META: 1, "a": 1}, {META, "a"})
    new, _ = em_step(model, {"a": 3})
    again, _ = em_step(new, {"a": 3})
    assert again.log_prob == pytest.approx(new.log_prob, abs=1e-15)


def test_em_skips_out_of_alphabet_words(caplog):
    model = UnigramModel.from_counts({META: 1, "a": 1}, {META, "a"})
    new, ll = em_step(model, {"a": 1, "az": 1})
    assert "skipped 1" in caplog.text
    assert math.isfinite(ll)


def _model_with_unused_piece():
    lp = {META: -2.0, "a": -2.0, "b": -2.0, META + "ab": -0.5, "ba": -9.0}
    return UnigramModel(lp, {META, "a", "b"})


def test_prune_unused_piece_goes_first():
    model = _model_with_unused_piece()
    pruned = prune(model, {"ab": 4}, 0.5)
    assert META + "ab" in pruned.log_prob and "ba" not in pruned.log_prob
    assert {META, "a", "b"} <= set(pruned.log_prob)
    assert _mass(pruned) == pytest.approx(1.0, abs=1e-9)


def test_prune_arithmetic():
    letters = "abcdefghij"
    lp = {META: -3.0, **{c: -3.0 for c in letters}}
    lp.update({META + c: -1.0 - i / 10 for i, c in enumerate(letters)})
    model = UnigramModel(lp, {META, *letters})
    pruned = prune(model, {c: 1 for c in letters}, 0.5)
    assert len(pruned.prunable) == 5
    assert set(pruned.alphabet) <= set(pruned.log_prob)


def test_train_budget_forces_alphabet():
    freqs = {"abc": 3, "cab": 2}
    model = train_unigram(freqs, 5)
    assert set(model.log_prob) == {META, "a", "b", "c"}
    assert len(model.vocab) == 5


def test_train_two_words_keeps_most_used_piece():
    model = train_unigram(Corpus.from_lines(["ab", "ab"]), 5)
    assert model.prunable in ([META + "ab"], ["ab"])


def test_train_determinism_and_file():
    corpus = Corpus.from_lines(["abc abd", "bcd abc ab", "dab cab"])
    a = train_unigram(corpus, 12)
    b = train_unigram(corpus, 12)
    assert a.to_dict() == b.to_dict()
    again = tokenizer_from_dict(a.to_dict())
    assert again.to_dict() == a.to_dict()


@st.composite
def lattices(draw):
    alphabet = draw(st.sets(st.sampled_from("abcd"), min_size=1, max_size=4))
    letters = sorted(alphabet)
    extra = draw(st.lists(st.text(alphabet=letters, min_size=2, max_size=4), max_size=6))
    extra += [META + w for w in draw(st.lists(st.text(alphabet=letters, min_size=1, max_size=3),
                                               max_size=3))]
    pieces = sorted({META, *letters, *extra})
    # half-integer log probs make ties exact, exercising the tie-break
    lp = {p: -draw(st.integers(1, 12)) / 2 for p in pieces}
    word = draw(st.text(alphabet=letters + ["z"], min_size=1, max_size=7))
    return lp, {META, *letters}, word


@given(lattices())
def test_viterbi_matches_enumeration_with_tiebreak(case):
    lp, alphabet, word = case
    model = UnigramModel(lp, alphabet)
    pieces, score = model.viterbi(word)
    want, want_score = oracles.best_segmentation(word, lp, alphabet, model.unk_log_prob)
    assert pieces == want
    assert score == want_score


@given(lattices())
def test_forward_sum_bounds_viterbi(case):
    lp, alphabet, word = case
    model = UnigramModel(lp, alphabet)
    log_z, _ = model.forward_backward(word)
    assert log_z >= model.viterbi(word)[1] - 1e-12
    assert log_z == pytest.approx(oracles.forward_sum(word, lp, alphabet, model.unk_log_prob),
                                  abs=1e-9)


@given(st.dictionaries(WORDS, st.integers(1, 4), min_size=1, max_size=8))
def test_em_and_prune_keep_simplex(freqs):
    model = UnigramModel.from_counts(seed_vocab(freqs, 4, 40), sorted({c for w in freqs for c in META + w}))
    for _ in range(3):
        model, _ = em_step(model, freqs)
        assert _mass(model) == pytest.approx(1.0, abs=1e-6)
    if model.prunable:
        model = prune(model, freqs, 0.5)
        assert _mass(model) == pytest.approx(1.0, abs=1e-6)


@given(st.dictionaries(WORDS, st.integers(1, 4), min_size=1, max_size=8))
def test_em_monotone(freqs):
    model = UnigramModel.from_counts(seed_vocab(freqs, 4, 40), sorted({c for w in freqs for c in META + w}))
    prev = -math.inf
    for _ in range(5):
        model, ll = em_step(model, freqs)
        assert ll >= prev - 1e-9 * abs(ll)
        prev = ll
    assert corpus_log_likelihood(model, freqs) >= prev - 1e-9 * abs(prev)


@given(st.dictionaries(WORDS, st.integers(1, 4), min_size=1, max_size=8),
       st.lists(WORDS, max_size=5))
def test_roundtrip(freqs, words):
    model = train_unigram(freqs, 12)
    text = " ".join(w for w in words if set(w) <= model.alphabet)
    assert decode(flatten(encode_unigram(model, text))) == normalize(text)


def test_log_space_fallback_agrees():
    rng = random.Random(0)
    lp = {META: -300.0, "a": -300.0, "b": -300.0, "ab": -290.0}
    model = UnigramModel(lp, {META, "a", "b"})
    word = "".join(rng.choice("ab") for _ in range(6))
    log_z, expected = model.forward_backward(word)
    assert log_z == pytest.approx(oracles.forward_sum(word, lp, model.alphabet,
                                                      model.unk_log_prob), rel=1e-12)
    assert sum(expected.values()) >= 1.0

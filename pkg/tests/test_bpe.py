import json
import random

import pytest
from hypothesis import given, strategies as st

import oracles
from toklab.text import Corpus, normalize
from toklab.tokenizers import (META, UNK, BpeModel, decode, encode_bpe, pretokenize,
                               tokenizer_from_dict, train_bpe)
from toklab.tokenizers.base import flatten

WORDS = st.text(alphabet="abcd", min_size=1, max_size=6)


@pytest.fixture
def toy():
    return train_bpe(Corpus.from_lines(["ab ab", "ab c"]), 100)


def test_pretokenize_examples():
    assert pretokenize("ab c") == [[META, "a", "b"], [META, "c"]]
    assert pretokenize("") == []
    assert pretokenize("कल") == [[META, "क", "ल"]]


def test_decode_examples():
    assert decode([META + "ab", META + "c"]) == "ab c"
    assert decode([]) == ""
    assert decode([META, "a", "b"]) == "ab"


def test_toy_merges(toy):
    assert [(m.left, m.right, m.frequency_at_merge) for m in toy.merges] == [
        ("a", "b", 3), (META, "ab", 3)]
    assert [m.rank for m in toy.merges] == [0, 1]


def test_toy_encoding(toy):
    assert encode_bpe(toy, "ab ab") == [[META + "ab"], [META + "ab"]]
    assert encode_bpe(toy, "c") == [[META, "c"]]
    assert encode_bpe(toy, "z") == [[META, UNK]]


def test_single_word_a():
    model = train_bpe({"a": 1}, 10)
    assert model.merges == []
    assert list(model.vocab) == [UNK, "a", META]  # codepoint order


def test_budget_exhausted_by_alphabet():
    model = train_bpe({"ab": 5, "ba": 5}, 4)
    assert model.merges == []
    with pytest.raises(ValueError, match="vocab_size"):
        train_bpe({"ab": 5}, 3)


def test_empty_corpus():
    with pytest.raises(ValueError):
        train_bpe({}, 10)


def test_model_file_roundtrip(toy):
    data = json.loads(json.dumps(toy.to_dict()))
    assert data["type"] == "bpe" and data["merges"] == [["a", "b"], [META, "ab"]]
    again = tokenizer_from_dict(data)
    assert isinstance(again, BpeModel)
    assert again.to_dict() == toy.to_dict()
    assert again.tokenizer_id == toy.tokenizer_id


@given(st.dictionaries(WORDS, st.integers(1, 5), min_size=1, max_size=12), st.integers(0, 30))
def test_matches_bruteforce_oracle(freqs, extra):
    size = len({c for w in freqs for c in w}) + 2 + extra
    model = train_bpe(freqs, size)
    assert [(m.left, m.right, m.frequency_at_merge) for m in model.merges] == \
        oracles.bpe_merges(freqs, size)


@given(st.dictionaries(WORDS, st.integers(1, 5), min_size=1, max_size=12), st.integers(0, 30))
def test_vocab_arithmetic_and_decomposition(freqs, extra):
    size = len({c for w in freqs for c in w}) + 2 + extra
    model = train_bpe(freqs, size)
    assert len(model.vocab) == len(model.alphabet) + 1 + len(model.merges)
    assert len(model.vocab) <= size
    assert model.alphabet <= set(model.vocab)
    known = set(model.alphabet)
    for m in model.merges:
        assert m.output in model.vocab
        assert m.left in known and m.right in known
        known.add(m.output)


@given(st.dictionaries(WORDS, st.integers(1, 5), min_size=1, max_size=12),
       st.lists(WORDS, max_size=5))
def test_roundtrip(freqs, words):
    model = train_bpe(freqs, 30)
    text = "  ".join(w for w in words if set(w) <= model.alphabet)
    assert decode(flatten(encode_bpe(model, text))) == normalize(text)


def test_determinism():
    freqs = {"abab": 3, "bcab": 2, "cab": 4}
    assert train_bpe(freqs, 12).to_dict() == train_bpe(dict(reversed(freqs.items())), 12).to_dict()


def test_monotone_compression():
    rng = random.Random(3)
    lines = [" ".join("".join(rng.choice("abcde") for _ in range(rng.randint(1, 7)))
                      for _ in range(8)) for _ in range(40)]
    corpus = Corpus.from_lines(lines)
    prev = None
    for size in range(7, 120, 7):
        model = train_bpe(corpus, size)
        pieces = sum(len(model.encode_word(w)) for w in corpus.words())
        if prev is not None:
            assert pieces <= prev
        prev = pieces

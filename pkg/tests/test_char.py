import grapheme
from hypothesis import given, strategies as st

from toklab.intrinsic import unk_rate, word_split_rate
from toklab.text import Corpus, normalize
from toklab.tokenizers import META, UNK, CharTokenizer, decode, encode_char, tokenizer_from_dict
from toklab.tokenizers.base import flatten

INDIC = st.text(alphabet="কখগািীুেোৰ্ংकखगािीुेो्ं ab", max_size=20)
# The independent segmenter predates the Unicode 15.1 conjunct rule (GB9c),
# so it is only consulted on text without a virama.
NO_VIRAMA = st.text(alphabet="কখগািীুেোৰংकखगािीुेों ab", max_size=20)


def test_examples():
    assert encode_char("ab c") == [[META, "a", "b"], [META, "c"]]
    assert sum(map(len, encode_char("ab c"))) == 5
    assert encode_char("") == []


def test_devanagari_consonant_plus_vowel_sign():
    word = "कि"  # KA + VOWEL SIGN I
    assert encode_char(word, "codepoint") == [[META, "क", "ि"]]
    assert encode_char(word, "grapheme") == [[META, word]]
    assert grapheme.length(word) == 1


def test_conjunct_is_one_cluster():
    # KA + VIRAMA + SSA forms a single cluster under GB9c
    assert encode_char("\u0915\u094d\u0937", "grapheme") == [[META, "\u0915\u094d\u0937"]]
    assert len(encode_char("\u0915\u094d\u0937")[0]) == 4


@given(NO_VIRAMA)
def test_grapheme_mode_matches_independent_segmenter(text):
    for word, pieces in zip(normalize(text).split(), encode_char(text, "grapheme")):
        assert pieces[1:] == list(grapheme.graphemes(word))


@given(INDIC)
def test_piece_count_and_no_unk(text):
    for word, pieces in zip(normalize(text).split(), encode_char(text)):
        assert len(pieces) == len(word) + 1
        assert UNK not in pieces


@given(st.text(), st.sampled_from(["codepoint", "grapheme"]))
def test_roundtrip_any_text(text, mode):
    assert decode(flatten(encode_char(text, mode))) == normalize(text)


@given(st.lists(st.text(alphabet="abকি", min_size=1, max_size=5), min_size=1, max_size=10))
def test_split_rate_identity(words):
    corpus = Corpus.from_lines([" ".join(words)])
    tok = CharTokenizer()
    assert word_split_rate(tok, corpus) == sum(len(w) >= 2 for w in words) / len(words)
    assert unk_rate(tok, corpus) == 0.0


def test_model_file():
    tok = CharTokenizer("grapheme")
    assert tok.to_dict() == {"format_version": 1, "type": "char", "mode": "grapheme",
                             "meta_symbol": META}
    assert tokenizer_from_dict(tok.to_dict()).mode == "grapheme"

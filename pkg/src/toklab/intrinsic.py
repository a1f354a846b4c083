"""Intrinsic tokenizer metrics: efficiency, splitting, OOV, compression, morphology."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from toklab.text import Corpus, MorphLexicon
from toklab.tokenizers.base import META, UNK, Tokenizer


def _encode_corpus(tokenizer: Tokenizer, corpus: Corpus) -> list[list[list[str]]]:
    return [[tokenizer.encode_word(w) for w in s.words] for s in corpus.sentences]


def _require_sentences(corpus: Corpus) -> None:
    if not corpus.sentences:
        raise ValueError("corpus has no sentences")


def _require_words(corpus: Corpus) -> None:
    if corpus.num_words == 0:
        raise ValueError("corpus has no words")


def is_split(pieces: Sequence[str]) -> bool:
    """A word is split iff it has >= 2 pieces once a lone leading ▁ is fused."""
    n = len(pieces)
    if n > 1 and pieces[0] == META:
        n -= 1
    return n >= 2


def tokens_per_sentence(tokenizer: Tokenizer, corpus: Corpus) -> float:
    _require_sentences(corpus)
    encoded = _encode_corpus(tokenizer, corpus)
    return sum(len(p) for sent in encoded for p in sent) / len(encoded)


def fertility(tokenizer: Tokenizer, corpus: Corpus) -> float:
    _require_words(corpus)
    encoded = _encode_corpus(tokenizer, corpus)
    return sum(len(p) for sent in encoded for p in sent) / corpus.num_words


def word_split_rate(tokenizer: Tokenizer, corpus: Corpus) -> float:
    _require_words(corpus)
    encoded = _encode_corpus(tokenizer, corpus)
    return sum(is_split(p) for sent in encoded for p in sent) / corpus.num_words


def unk_rate(tokenizer: Tokenizer, corpus: Corpus) -> float:
    _require_sentences(corpus)
    pieces = [p for sent in _encode_corpus(tokenizer, corpus) for word in sent for p in word]
    return pieces.count(UNK) / len(pieces) if pieces else 0.0


def vocab_compression(tokenizer: Tokenizer, corpus: Corpus,
                      baseline: Optional["IntrinsicReport"] = None) -> tuple[float, Optional[float]]:
    """Distinct word types over distinct emitted piece types.

    With a ``baseline`` report the second value is the ratio of the two raw
    values on the same corpus.
    """
    _require_sentences(corpus)
    encoded = _encode_corpus(tokenizer, corpus)
    raw = len(set(corpus.words())) / len({p for s in encoded for w in s for p in w})
    vs = raw / baseline.vocab_compression_raw if baseline is not None else None
    return raw, vs


@dataclass(frozen=True)
class MorphScore:
    precision: float
    recall: float
    f1: float
    predicted: int
    gold: int
    correct: int

    @property
    def zero_predicted(self) -> bool:
        return self.predicted == 0


def piece_boundaries(pieces: Sequence[str], surface_len: int) -> set[int]:
    """Interior character offsets between pieces; the ▁ junction is ignored."""
    offsets = set()
    pos = 0
    for piece in pieces[:-1]:
        if piece == UNK:
            pos += 1
        else:
            pos += len(piece.replace(META, ""))
        if 0 < pos < surface_len:
            offsets.add(pos)
    return offsets


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def morph_preservation(tokenizer: Tokenizer, lexicon: MorphLexicon) -> MorphScore:
    """Micro-averaged boundary precision/recall/F1 against a gold lexicon."""
    if not lexicon.entries:
        raise ValueError("empty morph lexicon")
    predicted = gold = correct = 0
    for surface, bounds in lexicon.entries:
        pred = piece_boundaries(tokenizer.encode_word(surface), len(surface))
        predicted += len(pred)
        gold += len(bounds)
        correct += len(pred & set(bounds))
    return MorphScore(*_prf(correct, predicted, gold), predicted, gold, correct)


@dataclass(frozen=True)
class IntrinsicReport:
    tokenizer: str
    corpus: str
    sentences: int
    words: int
    tokens_per_sentence: float
    fertility: float
    word_split_rate: float
    unk_rate: float
    vocab_compression_raw: float
    vocab_compression_vs_baseline: Optional[float] = None
    morph_boundary_precision: Optional[float] = None
    morph_boundary_recall: Optional[float] = None
    morph_boundary_f1: Optional[float] = None
    morph_zero_predicted: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)


def intrinsic_report(tokenizer: Tokenizer, corpus: Corpus, corpus_name: str = "",
                     lexicon: MorphLexicon | None = None,
                     baseline: IntrinsicReport | None = None,
                     tokenizer_name: str | None = None) -> IntrinsicReport:
    """All intrinsic metrics from a single encoding pass over ``corpus``."""
    _require_words(corpus)
    encoded = _encode_corpus(tokenizer, corpus)
    words = [p for sent in encoded for p in sent]
    pieces = [p for w in words for p in w]
    raw = len(set(corpus.words())) / len(set(pieces))
    morph = morph_preservation(tokenizer, lexicon) if lexicon is not None else None
    return IntrinsicReport(
        tokenizer=tokenizer_name or tokenizer.name,
        corpus=corpus_name or corpus.language_tag,
        sentences=len(encoded),
        words=len(words),
        tokens_per_sentence=len(pieces) / len(encoded),
        fertility=len(pieces) / len(words),
        word_split_rate=sum(map(is_split, words)) / len(words),
        unk_rate=pieces.count(UNK) / len(pieces),
        vocab_compression_raw=raw,
        vocab_compression_vs_baseline=(raw / baseline.vocab_compression_raw
                                       if baseline is not None else None),
        morph_boundary_precision=morph.precision if morph else None,
        morph_boundary_recall=morph.recall if morph else None,
        morph_boundary_f1=morph.f1 if morph else None,
        morph_zero_predicted=morph.zero_predicted if morph else None,
    )

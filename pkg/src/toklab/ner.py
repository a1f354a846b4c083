"""Subword label alignment and an averaged structured perceptron tagger.

The tagger makes one decision per word, but every feature it sees is built
from the pieces a tokenizer produced for that word, so two taggers trained
on the same data with different tokenizers learn different models.
"""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from toklab.errors import DataError
from toklab.text import NerDocument, is_valid_iob2
from toklab.tokenizers.base import FORMAT_VERSION, META, Tokenizer, canonical_json

CONT = "CONT"
BOS = "<s>"
EOS = "</s>"


class TokenizerMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AlignedSentence:
    pieces: tuple[str, ...]
    piece_tags: tuple[str, ...]
    word_starts: tuple[int, ...]

    def word_pieces(self) -> list[tuple[str, ...]]:
        bounds = list(self.word_starts) + [len(self.pieces)]
        return [self.pieces[a:b] for a, b in zip(bounds, bounds[1:])]

    def word_tags(self) -> list[str]:
        return [self.piece_tags[i] for i in self.word_starts]


def encode_token(tokenizer: Tokenizer, word: str) -> list[str]:
    """Pieces for one annotated token (normalized; internal spaces are dropped)."""
    pieces = [p for wp in tokenizer.encode(word) for p in wp]
    if len(pieces) > 1:
        pieces = [pieces[0]] + [p for p in pieces[1:] if p != META]
    return pieces or [META]


def align_labels(words: Sequence[str], tags: Sequence[str],
                 tokenizer: Tokenizer) -> AlignedSentence:
    """First piece of each word carries its tag; the remaining pieces get CONT."""
    if len(words) != len(tags):
        raise ValueError(f"{len(words)} words but {len(tags)} tags")
    pieces: list[str] = []
    piece_tags: list[str] = []
    starts: list[int] = []
    for word, tag in zip(words, tags):
        wp = encode_token(tokenizer, word)
        assert wp, f"tokenizer produced no pieces for {word!r}"
        starts.append(len(pieces))
        pieces.extend(wp)
        piece_tags.append(tag)
        piece_tags.extend([CONT] * (len(wp) - 1))
    return AlignedSentence(tuple(pieces), tuple(piece_tags), tuple(starts))


def tag_set_for(labels: Iterable[str]) -> list[str]:
    """``O`` first, then ``B-T``/``I-T`` per label in sorted order."""
    tags = ["O"]
    for label in sorted(labels):
        tags += [f"B-{label}", f"I-{label}"]
    return tags


def transition_allowed(prev: str, cur: str) -> bool:
    if not cur.startswith("I-"):
        return True
    return prev[:2] in ("B-", "I-") and prev[2:] == cur[2:]


def _lead(pieces: Sequence[str]) -> str:
    if len(pieces) > 1 and pieces[0] == META:
        return META + pieces[1]
    return pieces[0]


def word_features(word_pieces: Sequence[Sequence[str]], i: int) -> list[str]:
    pieces = word_pieces[i]
    first, last = pieces[0], pieces[-1]
    lead = _lead(pieces).lstrip(META)
    feats = ["bias", f"f={first}", f"l={last}", f"n={min(len(pieces), 6)}"]
    feats += sorted({f"p={p}" for p in pieces})
    for k in range(1, 4):
        if len(lead) >= k:
            feats.append(f"pre{k}={lead[:k]}")
        if len(last.lstrip(META)) >= k:
            feats.append(f"suf{k}={last.lstrip(META)[-k:]}")
    feats.append(f"pf={word_pieces[i - 1][0] if i > 0 else BOS}")
    feats.append(f"nf={word_pieces[i + 1][0] if i + 1 < len(word_pieces) else EOS}")
    return feats


def sentence_features(word_pieces: Sequence[Sequence[str]]) -> list[list[str]]:
    return [word_features(word_pieces, i) for i in range(len(word_pieces))]


@dataclass
class TaggerModel:
    tag_set: list[str]
    tokenizer_id: str
    weights: dict[tuple[str, str], float] = field(default_factory=dict)
    seed: int = 0
    epochs: int = 0

    def _emission(self, feats: Sequence[str]) -> list[float]:
        w = self.weights
        return [sum(w.get((f, t), 0.0) for f in feats) for t in self.tag_set]

    def _transition(self, prev: str, cur: str) -> float:
        if not transition_allowed(prev, cur):
            return -math.inf
        return self.weights.get((f"prev={prev}", cur), 0.0)

    def decode(self, features: Sequence[Sequence[str]]) -> list[str]:
        """Viterbi over the tag set. Ties go to the earlier tag in ``tag_set``."""
        if not features:
            return []
        tags = self.tag_set
        k = len(tags)
        trans = [[self._transition(p, c) for c in tags] for p in tags]
        start = [-math.inf if c.startswith("I-") else self.weights.get((f"prev={BOS}", c), 0.0)
                 for c in tags]
        emit = self._emission(features[0])
        score = [start[j] + emit[j] for j in range(k)]
        back: list[list[int]] = []
        for feats in features[1:]:
            emit = self._emission(feats)
            new = [-math.inf] * k
            ptr = [0] * k
            for j in range(k):
                best, arg = -math.inf, 0
                for i in range(k):
                    s = score[i] + trans[i][j]
                    if s > best:
                        best, arg = s, i
                new[j] = best + emit[j]
                ptr[j] = arg
            score = new
            back.append(ptr)
        j = max(range(k), key=lambda t: (score[t], -t))
        path = [j]
        for ptr in reversed(back):
            j = ptr[j]
            path.append(j)
        return [tags[j] for j in reversed(path)]

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "type": "perceptron_tagger",
            "tag_set": self.tag_set,
            "tokenizer_id": self.tokenizer_id,
            "seed": self.seed,
            "epochs": self.epochs,
            "weights": [[f, t, v] for (f, t), v in sorted(self.weights.items()) if v != 0.0],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaggerModel":
        return cls(list(data["tag_set"]), data["tokenizer_id"],
                   {(f, t): float(v) for f, t, v in data["weights"]},
                   data.get("seed", 0), data.get("epochs", 0))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1, sort_keys=True) + "\n"


def _transition_features(tags: Sequence[str]) -> list[tuple[str, str]]:
    prev = [BOS] + list(tags[:-1])
    return [(f"prev={p}", t) for p, t in zip(prev, tags)]


class _Averager:
    """Perceptron weights with lazily accumulated running sums for averaging."""

    def __init__(self):
        self.w: dict[tuple[str, str], float] = defaultdict(float)
        self.total: dict[tuple[str, str], float] = defaultdict(float)
        self.stamp: dict[tuple[str, str], int] = defaultdict(int)
        self.clock = 0

    def update(self, key: tuple[str, str], delta: float) -> None:
        self.total[key] += (self.clock - self.stamp[key]) * self.w[key]
        self.stamp[key] = self.clock
        self.w[key] += delta

    def averaged(self) -> dict[tuple[str, str], float]:
        out = {}
        for key, value in self.w.items():
            total = self.total[key] + (self.clock + 1 - self.stamp[key]) * value
            avg = total / self.clock if self.clock else 0.0
            if avg != 0.0:
                out[key] = avg
        return out


def train_tagger(doc: NerDocument, tokenizer: Tokenizer, epochs: int = 10,
                 seed: int = 0) -> TaggerModel:
    """Averaged structured perceptron over word-level tags.

    Instance order is reshuffled each epoch by ``random.Random(seed)``.
    """
    if not doc.sentences:
        raise ValueError("cannot train a tagger on an empty document")
    for sent in doc.sentences:
        if not is_valid_iob2(sent.tags):
            raise DataError(f"training tags are not valid IOB2: {list(sent.tags)}")
    tag_set = tag_set_for(doc.label_set)
    instances = []
    for sent in doc.sentences:
        aligned = align_labels(sent.words, sent.tags, tokenizer)
        instances.append((sentence_features(aligned.word_pieces()), list(sent.tags)))

    model = TaggerModel(tag_set, tokenizer.tokenizer_id, seed=seed, epochs=epochs)
    acc = _Averager()
    model.weights = acc.w
    rng = random.Random(seed)
    order = list(range(len(instances)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            feats, gold = instances[idx]
            acc.clock += 1
            guess = model.decode(feats)
            if guess == gold:
                continue
            for i, (g, p) in enumerate(zip(gold, guess)):
                if g != p:
                    for f in feats[i]:
                        acc.update((f, g), 1.0)
                        acc.update((f, p), -1.0)
            for key in _transition_features(gold):
                acc.update(key, 1.0)
            for key in _transition_features(guess):
                acc.update(key, -1.0)
    model.weights = acc.averaged()
    return model


def predict(tagger: TaggerModel, tokenizer: Tokenizer, words: Sequence[str]) -> list[str]:
    if tagger.tokenizer_id != tokenizer.tokenizer_id:
        raise TokenizerMismatch(
            f"tagger was trained with {tagger.tokenizer_id}, got {tokenizer.tokenizer_id}")
    word_pieces = [encode_token(tokenizer, w) for w in words]
    return tagger.decode(sentence_features(word_pieces))


def predict_document(tagger: TaggerModel, tokenizer: Tokenizer, doc: NerDocument) -> NerDocument:
    pairs = [(s.words, predict(tagger, tokenizer, s.words)) for s in doc.sentences]
    return NerDocument.from_pairs(pairs, doc.language_tag)


def model_digest(tagger: TaggerModel) -> str:
    return canonical_json(tagger.to_dict())

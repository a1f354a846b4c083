"""Byte-pair encoding over codepoints, with a leading word-boundary symbol."""

from __future__ import annotations

import heapq
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from toklab.tokenizers.base import (FORMAT_VERSION, META, UNK, Tokenizer, Vocabulary)
from toklab.text import Corpus

MIN_PAIR_FREQ = 2


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    rank: int
    frequency_at_merge: int

    @property
    def output(self) -> str:
        return self.left + self.right


def _word_freqs(corpus: Corpus | Mapping[str, int]) -> dict[str, int]:
    if isinstance(corpus, Corpus):
        return dict(corpus.word_counts())
    return dict(corpus)


def _pairs(seq: Sequence[str]):
    return zip(seq, seq[1:])


def _merge_seq(seq: list[str], left: str, right: str) -> list[str]:
    out = []
    i = 0
    n = len(seq)
    while i < n:
        if i + 1 < n and seq[i] == left and seq[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


class BpeModel(Tokenizer):
    kind = "bpe"

    def __init__(self, alphabet, merges: Sequence[MergeRule]):
        self.alphabet = frozenset(alphabet)
        self.merges = list(merges)
        self.meta_symbol = META
        self.vocab = Vocabulary(sorted(self.alphabet))
        for rule in self.merges:
            self.vocab.add(rule.output)
        self._ranks = {(m.left, m.right): m.rank for m in self.merges}
        self._cache: dict[str, list[str]] = {}

    @property
    def name(self) -> str:
        return f"bpe-{len(self.vocab)}"

    def encode_word(self, word: str) -> list[str]:
        cached = self._cache.get(word)
        if cached is not None:
            return list(cached)
        seq = [c if c in self.alphabet else UNK for c in (META, *word)]
        ranks = self._ranks
        while len(seq) > 1:
            best = None
            best_rank = None
            for pair in _pairs(seq):
                r = ranks.get(pair)
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = pair, r
            if best is None:
                break
            seq = _merge_seq(seq, *best)
        self._cache[word] = seq
        return list(seq)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "type": "bpe",
            "meta_symbol": self.meta_symbol,
            "alphabet": sorted(self.alphabet),
            "merges": [[m.left, m.right] for m in self.merges],
            "merge_frequencies": [m.frequency_at_merge for m in self.merges],
            "specials": [UNK],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BpeModel":
        freqs = data.get("merge_frequencies") or [0] * len(data["merges"])
        merges = [MergeRule(l, r, i, f)
                  for i, ((l, r), f) in enumerate(zip(data["merges"], freqs))]
        return cls(data["alphabet"], merges)


def train_bpe(corpus: Corpus | Mapping[str, int], vocab_size: int) -> BpeModel:
    """Learn merges until the vocabulary reaches ``vocab_size``.

    Pair counts are weighted by word frequency and never cross word
    boundaries. The most frequent pair wins; ties go to the smallest
    ``(left, right)`` in codepoint order. Training stops early once no pair
    occurs at least twice. A pair whose concatenation is already a
    vocabulary piece is not a candidate, so pieces stay unique.
    """
    freqs = _word_freqs(corpus)
    if not freqs:
        raise ValueError("cannot train BPE on an empty corpus")
    words = sorted(freqs)
    seqs = [[META, *w] for w in words]
    weights = [freqs[w] for w in words]
    alphabet = sorted({s for seq in seqs for s in seq})
    if vocab_size < len(alphabet) + 1:
        raise ValueError(
            f"vocab_size {vocab_size} < alphabet ({len(alphabet)}) + specials (1)")

    counts: Counter = Counter()
    where: dict[tuple[str, str], set[int]] = defaultdict(set)
    for idx, seq in enumerate(seqs):
        for pair in _pairs(seq):
            counts[pair] += weights[idx]
            where[pair].add(idx)

    heap = [(-c, pair) for pair, c in counts.items()]
    heapq.heapify(heap)
    pieces = set(alphabet)
    merges: list[MergeRule] = []
    while len(alphabet) + 1 + len(merges) < vocab_size:
        best = None
        while heap:
            neg, pair = heapq.heappop(heap)
            if counts.get(pair, 0) != -neg or pair[0] + pair[1] in pieces:
                continue  # stale entry, or its output is already a piece
            if -neg >= MIN_PAIR_FREQ:
                best = pair
            break
        if best is None:
            break
        left, right = best
        merges.append(MergeRule(left, right, len(merges), counts[best]))
        pieces.add(left + right)
        touched = set()
        for idx in sorted(where[best]):
            old = seqs[idx]
            new = _merge_seq(old, left, right)
            w = weights[idx]
            for pair in _pairs(old):
                counts[pair] -= w
                touched.add(pair)
                where[pair].discard(idx)
            for pair in _pairs(new):
                counts[pair] += w
                touched.add(pair)
                where[pair].add(idx)
            seqs[idx] = new
        for pair in touched:
            c = counts[pair]
            if c <= 0:
                del counts[pair]
            else:
                heapq.heappush(heap, (-c, pair))
    return BpeModel(alphabet, merges)

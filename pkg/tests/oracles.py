"""Slow, obviously-correct reference implementations used only by the tests.

Nothing here imports the algorithms under test.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter

BOUNDARY = "▁"


def bpe_merges(word_freqs: dict[str, int], vocab_size: int) -> list[tuple[str, str, int]]:
    """Recount every pair from scratch after each merge."""
    words = {w: [BOUNDARY, *w] for w in word_freqs}
    pieces = {c for seq in words.values() for c in seq}
    alphabet_size = len(pieces)
    merges = []
    while alphabet_size + 1 + len(merges) < vocab_size:
        counts = Counter()
        for w, seq in words.items():
            for a, b in zip(seq, seq[1:]):
                counts[(a, b)] += word_freqs[w]
        candidates = [(c, pair) for pair, c in counts.items()
                      if c >= 2 and pair[0] + pair[1] not in pieces]
        if not candidates:
            break
        top = max(c for c, _ in candidates)
        left, right = min(pair for c, pair in candidates if c == top)
        merges.append((left, right, top))
        pieces.add(left + right)
        for w, seq in words.items():
            out, i = [], 0
            while i < len(seq):
                if i + 1 < len(seq) and seq[i] == left and seq[i + 1] == right:
                    out.append(left + right)
                    i += 2
                else:
                    out.append(seq[i])
                    i += 1
            words[w] = out
    return merges


def segmentations(symbols: str):
    """Every way to cut ``symbols`` into contiguous pieces (2**(m-1) of them)."""
    m = len(symbols)
    for cuts in itertools.product((False, True), repeat=m - 1):
        out, start = [], 0
        for i, cut in enumerate(cuts, 1):
            if cut:
                out.append(symbols[start:i])
                start = i
        out.append(symbols[start:])
        yield out


def _piece_score(piece: str, log_prob: dict[str, float], alphabet, unk_lp: float):
    if piece in log_prob:
        return log_prob[piece]
    if len(piece) == 1 and piece not in alphabet:
        return unk_lp
    return None


def scored_segmentations(word: str, log_prob: dict[str, float], alphabet, unk_lp: float):
    for seg in segmentations(BOUNDARY + word):
        total = 0.0
        for piece in seg:
            s = _piece_score(piece, log_prob, alphabet, unk_lp)
            if s is None:
                break
            total += s
        else:
            yield seg, total


def best_segmentation(word: str, log_prob: dict[str, float], alphabet, unk_lp: float):
    """Max score; ties by fewer pieces then lexicographic piece sequence (UNK shown as '<unk>')."""
    best = None
    for seg, score in scored_segmentations(word, log_prob, alphabet, unk_lp):
        shown = tuple(p if p in log_prob else "<unk>" for p in seg)
        key = (-score, len(seg), shown)
        if best is None or key < best[0]:
            best = (key, list(shown), score)
    return best[1], best[2]


def forward_sum(word: str, log_prob: dict[str, float], alphabet, unk_lp: float) -> float:
    scores = [s for _, s in scored_segmentations(word, log_prob, alphabet, unk_lp)]
    top = max(scores)
    return top + math.log(sum(math.exp(s - top) for s in scores))

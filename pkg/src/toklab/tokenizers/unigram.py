"""Unigram language-model tokenizer: seeding, EM, pruning and Viterbi encoding."""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from typing import Iterable, Mapping

from toklab.tokenizers.base import FORMAT_VERSION, META, UNK, Tokenizer, Vocabulary
from toklab.text import Corpus

log = logging.getLogger(__name__)

UNK_PENALTY = 10.0


def _word_freqs(corpus: Corpus | Mapping[str, int]) -> dict[str, int]:
    if isinstance(corpus, Corpus):
        return dict(corpus.word_counts())
    return dict(corpus)


def _logsumexp(values: Iterable[float]) -> float:
    values = list(values)
    if not values:
        return -math.inf
    top = max(values)
    if top == -math.inf:
        return top
    return top + math.log(sum(math.exp(v - top) for v in values))


class UnigramModel(Tokenizer):
    kind = "unigram"

    def __init__(self, log_prob: Mapping[str, float], alphabet: Iterable[str],
                 _spans: dict | None = None):
        self.alphabet = frozenset(alphabet)
        missing = self.alphabet - set(log_prob)
        if missing:
            raise ValueError(f"alphabet symbols without probability: {sorted(missing)}")
        self.meta_symbol = META
        ordered = sorted(self.alphabet) + sorted(
            (p for p in log_prob if p not in self.alphabet),
            key=lambda p: (-log_prob[p], p))
        self.log_prob = {p: float(log_prob[p]) for p in ordered}
        self.vocab = Vocabulary(ordered)
        self.max_len = max(len(p) for p in ordered)
        self.unk_log_prob = min(self.log_prob.values()) - UNK_PENALTY
        self._cache: dict[str, list[str]] = {}
        self._prob: dict[str, float] | None = None
        # word -> per-start [(end, piece)]; depends only on the piece set
        self._spans: dict[str, list[list[tuple[int, str]]]] = {} if _spans is None else _spans

    @classmethod
    def from_counts(cls, counts: Mapping[str, float], alphabet: Iterable[str],
                    _spans: dict | None = None) -> "UnigramModel":
        total = sum(counts.values())
        return cls({p: math.log(c / total) for p, c in counts.items()}, alphabet, _spans)

    @property
    def name(self) -> str:
        return f"unigram-{len(self.vocab)}"

    @property
    def prunable(self) -> list[str]:
        return [p for p in self.log_prob if p not in self.alphabet]

    def spans(self, word: str) -> list[list[tuple[int, str]]]:
        cached = self._spans.get(word)
        if cached is not None:
            return cached
        symbols = META + word
        m = len(symbols)
        lp = self.log_prob
        out = []
        for i in range(m):
            if symbols[i] not in self.alphabet:
                out.append([(i + 1, UNK)])
                continue
            out.append([(j, symbols[i:j]) for j in range(i + 1, min(m, i + self.max_len) + 1)
                        if symbols[i:j] in lp])
        self._spans[word] = out
        return out

    def edges(self, word: str, exclude: str | None = None) -> list[list[tuple[int, str, float]]]:
        """Outgoing lattice edges ``(end, piece, log_prob)`` of ``▁word`` per start position."""
        lp = self.log_prob
        unk = self.unk_log_prob
        return [[(j, p, unk if p == UNK else lp[p]) for j, p in row if p != exclude]
                for row in self.spans(word)]

    def viterbi(self, word: str) -> tuple[list[str], float]:
        """Best segmentation of ``▁word`` and its summed log probability.

        Ties on score prefer fewer pieces, then the lexicographically
        smallest piece sequence.
        """
        edges = self.edges(word)
        m = len(edges)
        best: list[tuple[float, int, tuple[str, ...]] | None] = [None] * (m + 1)
        best[0] = (0.0, 0, ())
        for i in range(m):
            here = best[i]
            if here is None:
                continue
            score, count, pieces = here
            for j, piece, lp in edges[i]:
                cand = (score + lp, count + 1, pieces + (piece,))
                cur = best[j]
                if cur is None or (-cand[0], cand[1], cand[2]) < (-cur[0], cur[1], cur[2]):
                    best[j] = cand
        final = best[m]
        assert final is not None, "lattice disconnected"
        return list(final[2]), final[0]

    def best_score(self, word: str, exclude: str | None = None) -> float:
        """Viterbi score only, optionally with one piece removed from the vocabulary."""
        edges = self.edges(word, exclude)
        m = len(edges)
        best = [-math.inf] * (m + 1)
        best[0] = 0.0
        for i in range(m):
            b = best[i]
            for j, _, lp in edges[i]:
                if b + lp > best[j]:
                    best[j] = b + lp
        return best[m]

    def path_score(self, pieces: Iterable[str]) -> float:
        score = 0.0
        for p in pieces:
            score += self.unk_log_prob if p == UNK else self.log_prob[p]
        return score

    def encode_word(self, word: str) -> list[str]:
        cached = self._cache.get(word)
        if cached is None:
            cached = self.viterbi(word)[0]
            self._cache[word] = cached
        return list(cached)

    def forward_backward(self, word: str) -> tuple[float, dict[str, float]]:
        """Return ``log Z`` over all segmentations and expected piece counts."""
        prob = self._prob
        if prob is None:
            prob = self._prob = {p: math.exp(lp) for p, lp in self.log_prob.items()}
            prob[UNK] = math.exp(self.unk_log_prob)
        spans = self.spans(word)
        m = len(spans)
        alpha = [0.0] * (m + 1)
        alpha[0] = 1.0
        for i in range(m):
            a = alpha[i]
            if a:
                for j, piece in spans[i]:
                    alpha[j] += a * prob[piece]
        z = alpha[m]
        if not z > 1e-250:
            return self._forward_backward_log(self.edges(word))
        beta = [0.0] * (m + 1)
        beta[m] = 1.0
        for i in range(m - 1, -1, -1):
            beta[i] = sum(prob[piece] * beta[j] for j, piece in spans[i])
        expected: dict[str, float] = defaultdict(float)
        for i in range(m):
            a = alpha[i] / z
            for j, piece in spans[i]:
                expected[piece] += a * prob[piece] * beta[j]
        return math.log(z), expected

    @staticmethod
    def _forward_backward_log(edges) -> tuple[float, dict[str, float]]:
        m = len(edges)
        incoming: list[list[float]] = [[] for _ in range(m + 1)]
        alpha = [-math.inf] * (m + 1)
        alpha[0] = 0.0
        for i in range(m):
            if i > 0:
                alpha[i] = _logsumexp(incoming[i])
            for j, _, lp in edges[i]:
                incoming[j].append(alpha[i] + lp)
        alpha[m] = _logsumexp(incoming[m])
        beta = [-math.inf] * (m + 1)
        beta[m] = 0.0
        for i in range(m - 1, -1, -1):
            beta[i] = _logsumexp(lp + beta[j] for j, _, lp in edges[i])
        log_z = alpha[m]
        expected: dict[str, float] = defaultdict(float)
        for i in range(m):
            for j, piece, lp in edges[i]:
                expected[piece] += math.exp(alpha[i] + lp + beta[j] - log_z)
        return log_z, expected

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "type": "unigram",
            "meta_symbol": self.meta_symbol,
            "pieces": [[p, lp] for p, lp in self.log_prob.items()],
            "alphabet": sorted(self.alphabet),
            "specials": [UNK],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UnigramModel":
        return cls({p: lp for p, lp in data["pieces"]}, data["alphabet"])


def seed_vocab(corpus: Corpus | Mapping[str, int], max_piece_len: int,
               seed_size: int) -> Counter:
    """Candidate pieces: every within-word substring up to ``max_piece_len``.

    Multi-character candidates are ranked by count times length and the best
    ``seed_size - |alphabet|`` are kept; every single codepoint is kept.
    """
    freqs = _word_freqs(corpus)
    if not freqs:
        raise ValueError("cannot seed a vocabulary from an empty word list")
    if max_piece_len < 1:
        raise ValueError("max_piece_len must be >= 1")
    singles: Counter = Counter()
    multis: Counter = Counter()
    for word, f in freqs.items():
        symbols = META + word
        m = len(symbols)
        for i in range(m):
            singles[symbols[i]] += f
            for j in range(i + 2, min(m, i + max_piece_len) + 1):
                multis[symbols[i:j]] += f
    if seed_size < len(singles):
        raise ValueError(f"seed_size {seed_size} < alphabet size {len(singles)}")
    ranked = sorted(multis.items(), key=lambda kv: (-kv[1] * len(kv[0]), kv[0]))
    seeds = Counter(singles)
    for piece, count in ranked[: seed_size - len(singles)]:
        seeds[piece] = count
    return seeds


def corpus_log_likelihood(model: UnigramModel, corpus: Corpus | Mapping[str, int]) -> float:
    total = 0.0
    for word, f in sorted(_word_freqs(corpus).items()):
        if all(c in model.alphabet for c in word):
            total += f * model.forward_backward(word)[0]
    return total


def em_step(model: UnigramModel, corpus: Corpus | Mapping[str, int]) -> tuple[UnigramModel, float]:
    """One EM iteration at fixed vocabulary.

    Returns the re-estimated model and the log-likelihood of the corpus
    under the *input* model. Words containing symbols outside the alphabet
    are skipped (and logged).
    """
    counts: dict[str, float] = {p: 0.0 for p in model.log_prob}
    ll = 0.0
    skipped = 0
    for word, f in sorted(_word_freqs(corpus).items()):
        if not all(c in model.alphabet for c in word):
            skipped += 1
            continue
        log_z, expected = model.forward_backward(word)
        ll += f * log_z
        for piece, c in expected.items():
            counts[piece] += f * c
    if skipped:
        log.warning("em_step skipped %d word types with out-of-alphabet symbols", skipped)
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("no trainable words in corpus")
    floor = total * 1e-12
    return UnigramModel.from_counts({p: max(c, floor) for p, c in counts.items()},
                                    model.alphabet, model._spans), ll


def prune(model: UnigramModel, corpus: Corpus | Mapping[str, int],
          shrink_factor: float, keep: int | None = None) -> UnigramModel:
    """Drop the multi-character pieces whose removal costs the least likelihood.

    The loss of a piece is the drop in summed Viterbi score over the words
    whose best path uses it, after re-segmenting them without the piece.
    ``ceil(shrink_factor * n)`` of the ``n`` prunable pieces survive unless
    ``keep`` overrides the count. The alphabet always survives.
    """
    if not 0 < shrink_factor < 1:
        raise ValueError("shrink_factor must be in (0, 1)")
    prunable = model.prunable
    n_keep = math.ceil(shrink_factor * len(prunable)) if keep is None else keep
    n_keep = max(0, min(n_keep, len(prunable)))

    users: dict[str, list[tuple[str, int, float]]] = defaultdict(list)
    for word, f in sorted(_word_freqs(corpus).items()):
        pieces, score = model.viterbi(word)
        for piece in set(pieces):
            if piece not in model.alphabet and piece != UNK:
                users[piece].append((word, f, score))

    loss: dict[str, float] = {}
    for piece in prunable:
        total = 0.0
        for word, f, score in users.get(piece, ()):
            total += f * (score - model.best_score(word, exclude=piece))
        loss[piece] = total

    ranked = sorted(prunable, key=lambda p: (-loss[p], -model.log_prob[p], p))
    survivors = set(ranked[:n_keep]) | model.alphabet
    kept = {p: lp for p, lp in model.log_prob.items() if p in survivors}
    norm = _logsumexp(kept.values())
    return UnigramModel({p: lp - norm for p, lp in kept.items()}, model.alphabet)


def train_unigram(corpus: Corpus | Mapping[str, int], vocab_size: int, max_piece_len: int = 8,
                  seed_size: int | None = None, em_iters_per_round: int = 2,
                  shrink_factor: float = 0.75) -> UnigramModel:
    freqs = _word_freqs(corpus)
    if not freqs:
        raise ValueError("cannot train a unigram model on an empty corpus")
    alphabet = sorted({c for w in freqs for c in META + w})
    if vocab_size < len(alphabet) + 1:
        raise ValueError(
            f"vocab_size {vocab_size} < alphabet ({len(alphabet)}) + specials (1)")
    if seed_size is None:
        seed_size = 8 * vocab_size
    model = UnigramModel.from_counts(seed_vocab(freqs, max_piece_len, seed_size), alphabet)
    target = vocab_size - 1 - len(alphabet)

    while len(model.vocab) > vocab_size:
        for _ in range(em_iters_per_round):
            model, ll = em_step(model, freqs)
        n = len(model.prunable)
        keep = min(max(math.ceil(shrink_factor * n), target), n - 1)
        log.debug("prune: %d -> %d pieces (ll=%.3f)", n, keep, ll)
        model = prune(model, freqs, shrink_factor, keep=keep)
    for _ in range(em_iters_per_round):
        model, _ = em_step(model, freqs)
    return model

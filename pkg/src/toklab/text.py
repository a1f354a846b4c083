"""Corpus ingestion, normalization and CoNLL / morph-lexicon parsing."""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from toklab.errors import DataError

_WS_RUN = re.compile(r"\s+")
_TAG_RE = re.compile(r"^(O|[BI]-[A-Z]+)$")


def normalize(text: str) -> str:
    """NFC-normalize ``text`` and collapse every whitespace run to one space."""
    text = unicodedata.normalize("NFC", text)
    return _WS_RUN.sub(" ", text).strip()


@dataclass(frozen=True)
class Sentence:
    raw: str
    words: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        norm = normalize(text)
        return cls(raw=norm, words=tuple(norm.split(" ")) if norm else ())


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    language_tag: str = "und"
    script_tag: str = "Zyyy"

    @classmethod
    def from_lines(cls, lines: Iterable[str], language_tag: str = "und",
                   script_tag: str = "Zyyy") -> "Corpus":
        sents = [Sentence.from_text(line) for line in lines]
        return cls(tuple(s for s in sents if s.words), language_tag, script_tag)

    def __len__(self) -> int:
        return len(self.sentences)

    def words(self) -> Iterable[str]:
        for sent in self.sentences:
            yield from sent.words

    @property
    def num_words(self) -> int:
        return sum(len(s.words) for s in self.sentences)

    def word_counts(self) -> Counter:
        return Counter(self.words())


def load_corpus(path: str | Path, language_tag: str = "und",
                script_tag: str = "Zyyy") -> Corpus:
    """Read one sentence per line; blank lines are skipped."""
    lines = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            try:
                lines.append(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid UTF-8 ({exc.reason})") from None
    return Corpus.from_lines(lines, language_tag, script_tag)


def is_valid_iob2(tags: Sequence[str]) -> bool:
    prev = "O"
    for tag in tags:
        if tag.startswith("I-") and prev[2:] != tag[2:]:
            return False
        prev = tag
    return True


def repair_iob2(tags: Sequence[str]) -> tuple[list[str], int]:
    """Rewrite orphan ``I-T`` tags to ``B-T``; return (tags, number of repairs)."""
    out: list[str] = []
    repairs = 0
    prev = "O"
    for tag in tags:
        if tag.startswith("I-") and prev[2:] != tag[2:]:
            tag = "B-" + tag[2:]
            repairs += 1
        out.append(tag)
        prev = tag
    return out, repairs


@dataclass(frozen=True)
class NerSentence:
    words: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.words) != len(self.tags):
            raise DataError(f"{len(self.words)} words but {len(self.tags)} tags")


@dataclass(frozen=True)
class NerDocument:
    sentences: tuple[NerSentence, ...] = ()
    label_set: frozenset[str] = frozenset()
    repairs: int = 0
    language_tag: str = "und"

    def __len__(self) -> int:
        return len(self.sentences)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[str], Sequence[str]]],
                   language_tag: str = "und") -> "NerDocument":
        """Build a document from (words, tags) pairs, validating and repairing tags."""
        sents = []
        labels: set[str] = set()
        repairs = 0
        for words, tags in pairs:
            for tag in tags:
                if not _TAG_RE.match(tag):
                    raise DataError(f"bad tag {tag!r}")
            fixed, n = repair_iob2(tags)
            repairs += n
            labels.update(t[2:] for t in fixed if t != "O")
            sents.append(NerSentence(tuple(words), tuple(fixed)))
        return cls(tuple(sents), frozenset(labels), repairs, language_tag)

    @property
    def num_words(self) -> int:
        return sum(len(s.words) for s in self.sentences)

    def to_conll(self) -> str:
        blocks = ["".join(f"{w}\t{t}\n" for w, t in zip(s.words, s.tags))
                  for s in self.sentences]
        return "\n".join(blocks)


def parse_conll(path: str | Path, language_tag: str = "und") -> NerDocument:
    """Parse a ``word<TAB>tag`` file with blank-line sentence breaks.

    Tags must match ``O|[BI]-[A-Z]+``. Orphan ``I-`` tags are repaired to
    ``B-`` and counted in ``NerDocument.repairs``.
    """
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        lineno = Path(path).read_bytes()[: exc.start].count(b"\n") + 1
        raise DataError(f"{path}:{lineno}: invalid UTF-8") from None
    return parse_conll_text(text, language_tag, source=str(path))


def parse_conll_text(text: str, language_tag: str = "und",
                     source: str = "<string>") -> NerDocument:
    pairs: list[tuple[list[str], list[str]]] = []
    words: list[str] = []
    tags: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            if words:
                pairs.append((words, tags))
                words, tags = [], []
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{source}:{lineno}: expected word<TAB>tag, got {line!r}")
        word, tag = parts[0], parts[1].strip()
        if not _TAG_RE.match(tag):
            raise DataError(f"{source}:{lineno}: bad tag {tag!r}")
        words.append(word)
        tags.append(tag)
    if words:
        pairs.append((words, tags))
    return NerDocument.from_pairs(pairs, language_tag)


@dataclass(frozen=True)
class MorphLexicon:
    entries: tuple[tuple[str, tuple[int, ...]], ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)


def lexicon_from_lines(lines: Iterable[str], source: str = "<string>") -> MorphLexicon:
    entries = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{source}:{lineno}: expected surface<TAB>morphs")
        surface = normalize(parts[0])
        morphs = [normalize(m) for m in parts[1].split("+")]
        if "".join(morphs) != surface or any(not m for m in morphs):
            raise DataError(f"{source}:{lineno}: morphs {parts[1]!r} do not spell {surface!r}")
        if surface in seen:
            raise DataError(f"{source}:{lineno}: duplicate surface {surface!r}")
        seen.add(surface)
        offsets = []
        pos = 0
        for m in morphs[:-1]:
            pos += len(m)
            offsets.append(pos)
        entries.append((surface, tuple(offsets)))
    return MorphLexicon(tuple(entries))


def load_morph_lexicon(path: str | Path) -> MorphLexicon:
    with open(path, encoding="utf-8") as fh:
        return lexicon_from_lines(fh, source=str(path))

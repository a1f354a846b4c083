from __future__ import annotations

import hashlib
import json
from typing import Iterable, Sequence

from toklab.text import normalize

META = "\u2581"
UNK = "<unk>"
FORMAT_VERSION = 1


class Vocabulary:
    """Ordered piece set with UNK pinned at id 0."""

    def __init__(self, pieces: Iterable[str]):
        self.pieces: list[str] = [UNK]
        self.index: dict[str, int] = {UNK: 0}
        for piece in pieces:
            self.add(piece)

    def add(self, piece: str) -> int:
        if piece in self.index:
            raise ValueError(f"duplicate piece {piece!r}")
        self.index[piece] = len(self.pieces)
        self.pieces.append(piece)
        return self.index[piece]

    @property
    def specials(self) -> frozenset[str]:
        return frozenset({UNK})

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self.index

    def __iter__(self):
        return iter(self.pieces)

    def id_of(self, piece: str) -> int:
        return self.index.get(piece, 0)


def pretokenize(text: str) -> list[list[str]]:
    """Split normalized text on spaces; each word becomes ``[▁, c1, c2, ...]``."""
    return [[META, *word] for word in text.split(" ") if word]


def decode(pieces: Sequence[str]) -> str:
    text = "".join(pieces).replace(META, " ")
    return text[1:] if text.startswith(" ") else text


def flatten(words: Iterable[Sequence[str]]) -> list[str]:
    return [p for word in words for p in word]


class Tokenizer:
    """Common surface of the bpe, unigram and char tokenizers."""

    kind: str = ""

    def encode_word(self, word: str) -> list[str]:
        raise NotImplementedError

    def encode(self, text: str) -> list[list[str]]:
        return [self.encode_word(w) for w in normalize(text).split(" ") if w]

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def tokenizer_id(self) -> str:
        """``name`` plus a content fingerprint, so retrained models never collide."""
        return f"{self.name}@{fingerprint(self.to_dict())}"


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def fingerprint(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:12]

from __future__ import annotations

import regex

from toklab.tokenizers.base import FORMAT_VERSION, META, Tokenizer

MODES = ("codepoint", "grapheme")
_GRAPHEME = regex.compile(r"\X")


class CharTokenizer(Tokenizer):
    """One piece per codepoint (default) or per extended grapheme cluster."""

    kind = "char"

    def __init__(self, mode: str = "codepoint"):
        if mode not in MODES:
            raise ValueError(f"unknown char mode {mode!r}; expected one of {MODES}")
        self.mode = mode
        self.meta_symbol = META

    @property
    def name(self) -> str:
        return f"char-{self.mode}"

    def encode_word(self, word: str) -> list[str]:
        if self.mode == "grapheme":
            return [META, *_GRAPHEME.findall(word)]
        return [META, *word]

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "type": "char", "mode": self.mode,
                "meta_symbol": self.meta_symbol}

    @classmethod
    def from_dict(cls, data: dict) -> "CharTokenizer":
        return cls(data.get("mode", "codepoint"))


def encode_char(text: str, mode: str = "codepoint") -> list[list[str]]:
    return CharTokenizer(mode).encode(text)

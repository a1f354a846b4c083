import json
from pathlib import Path

from toklab.tokenizers.base import META, UNK, Tokenizer, Vocabulary, decode, pretokenize
from toklab.tokenizers.bpe import BpeModel, MergeRule, train_bpe
from toklab.tokenizers.char import CharTokenizer, encode_char
from toklab.tokenizers.unigram import UnigramModel, em_step, prune, seed_vocab, train_unigram

_KINDS = {"bpe": BpeModel, "unigram": UnigramModel, "char": CharTokenizer}


def encode_bpe(model: BpeModel, text: str) -> list[list[str]]:
    return model.encode(text)


def encode_unigram(model: UnigramModel, text: str) -> list[list[str]]:
    return model.encode(text)


def tokenizer_from_dict(data: dict) -> Tokenizer:
    try:
        cls = _KINDS[data["type"]]
    except KeyError:
        raise ValueError(f"unknown tokenizer type {data.get('type')!r}") from None
    return cls.from_dict(data)


def load_tokenizer(path) -> Tokenizer:
    return tokenizer_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "META", "UNK", "Tokenizer", "Vocabulary", "decode", "pretokenize",
    "BpeModel", "MergeRule", "train_bpe", "encode_bpe",
    "UnigramModel", "em_step", "prune", "seed_vocab", "train_unigram", "encode_unigram",
    "CharTokenizer", "encode_char", "tokenizer_from_dict", "load_tokenizer",
]

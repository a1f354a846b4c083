"""Experiment configuration: loading, validation and provenance hashing."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from toklab.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OUTPUT_ENV = "TOKLAB_OUTPUT"

# Accepted keys in ``params`` for each tokenizer kind.
PARAMS = {
    "bpe": {},
    "unigram": {"max_piece_len": int, "seed_size": int, "em_iters_per_round": int,
                "shrink_factor": float},
    "char": {"mode": str},
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TokenizerSpec(_Strict):
    kind: Literal["bpe", "unigram", "char"]
    vocab_size: Optional[int] = Field(default=None, ge=2)
    params: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self):
        if self.kind in ("bpe", "unigram") and self.vocab_size is None:
            raise ValueError(f"vocab_size is required for {self.kind}")
        allowed = PARAMS[self.kind]
        for key, value in self.params.items():
            if key not in allowed:
                raise ValueError(f"unknown param {key!r} for {self.kind}; "
                                 f"allowed: {sorted(allowed) or 'none'}")
            typ = allowed[key]
            if typ is float and isinstance(value, int) and not isinstance(value, bool):
                continue
            if not isinstance(value, typ) or isinstance(value, bool):
                raise ValueError(f"param {key!r} must be {typ.__name__}")
        if self.kind == "char" and self.params.get("mode", "codepoint") not in ("codepoint", "grapheme"):
            raise ValueError("param 'mode' must be 'codepoint' or 'grapheme'")
        return self

    @property
    def stem(self) -> str:
        if self.kind == "char":
            return f"char-{self.params.get('mode', 'codepoint')}"
        return f"{self.kind}-{self.vocab_size}"

    @property
    def filename(self) -> str:
        return f"{self.stem}.model.json"


class CorpusSpec(_Strict):
    path: str
    language: str
    script: str = "Zyyy"
    role: Literal["train", "test", "intrinsic", "tokenizer"]


class LexiconSpec(_Strict):
    path: str
    language: str


class NerSpec(_Strict):
    train_language: str
    test_languages: list[str] = Field(min_length=1)
    epochs: int = Field(default=10, ge=1)
    seed: int = 42


class IntrinsicSpec(_Strict):
    baseline: str = "bpe"
    lexicons: list[LexiconSpec] = Field(default_factory=list)


class ExperimentConfig(_Strict):
    tokenizers: list[TokenizerSpec] = Field(min_length=1)
    corpora: list[CorpusSpec] = Field(default_factory=list)
    ner: Optional[NerSpec] = None
    intrinsic: IntrinsicSpec = Field(default_factory=IntrinsicSpec)
    output_dir: str = "out"

    @model_validator(mode="after")
    def _cross_check(self):
        stems = [t.stem for t in self.tokenizers]
        dupes = sorted({s for s in stems if stems.count(s) > 1})
        if dupes:
            raise ValueError(f"duplicate tokenizer specs: {', '.join(dupes)}")
        if self.ner is not None:
            langs = {c.language for c in self.corpora if c.role == "train"}
            if self.ner.train_language not in langs:
                raise ValueError(f"ner.train_language {self.ner.train_language!r} "
                                 "has no corpus with role 'train'")
            tests = {c.language for c in self.corpora if c.role == "test"}
            missing = [lang for lang in self.ner.test_languages if lang not in tests]
            if missing:
                raise ValueError(f"ner.test_languages without a 'test' corpus: {missing}")
        return self


class LoadedConfig:
    """A validated config plus the directory its relative paths hang off."""

    def __init__(self, config: ExperimentConfig, base_dir: Path, source: Optional[Path] = None):
        self.config = config
        self.base_dir = base_dir
        self.source = source

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else (self.base_dir / p)

    @property
    def output_dir(self) -> Path:
        override = os.environ.get(OUTPUT_ENV)
        return Path(override) if override else self.resolve(self.config.output_dir)

    def corpora(self, role: str, language: Optional[str] = None) -> list[CorpusSpec]:
        return [c for c in self.config.corpora
                if c.role == role and (language is None or c.language == language)]

    def with_seed(self, seed: Optional[int]) -> "LoadedConfig":
        if seed is None or self.config.ner is None:
            return self
        ner = self.config.ner.model_copy(update={"seed": seed})
        return LoadedConfig(self.config.model_copy(update={"ner": ner}), self.base_dir, self.source)

    def input_paths(self) -> list[str]:
        paths = [c.path for c in self.config.corpora]
        paths += [lex.path for lex in self.config.intrinsic.lexicons]
        return paths

    @property
    def config_hash(self) -> str:
        """sha256 over the config (minus output_dir) and every input file's bytes.

        Paths enter the hash as written, so moving the whole experiment
        directory does not change it.
        """
        body = self.config.model_dump(mode="json", exclude={"output_dir"})
        h = hashlib.sha256()
        h.update(json.dumps(body, sort_keys=True, ensure_ascii=False).encode("utf-8"))
        for path in sorted(set(self.input_paths())):
            h.update(b"\0" + path.encode("utf-8") + b"\0")
            h.update(hashlib.sha256(self.resolve(path).read_bytes()).digest())
        return h.hexdigest()


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        msg = e["msg"].removeprefix("Value error, ")
        lines.append(f"{_field_path(e['loc'])}: {msg}")
    return "; ".join(lines)


def parse_config(data: Any, base_dir: Path, source: Optional[Path] = None) -> LoadedConfig:
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(f"invalid config: {_format_errors(err)}") from None
    loaded = LoadedConfig(config, base_dir, source)
    refs = [(f"corpora.{i}.path", c.path) for i, c in enumerate(config.corpora)]
    refs += [(f"intrinsic.lexicons.{i}.path", lex.path)
             for i, lex in enumerate(config.intrinsic.lexicons)]
    for field, path in refs:
        if not loaded.resolve(path).is_file():
            raise ConfigError(f"invalid config: {field}: file not found: {path}")
    return loaded


def load_config(path: str | Path) -> LoadedConfig:
    """Read a TOML or JSON experiment config; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError, tomllib.TOMLDecodeError) as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from None
    return parse_config(data, path.resolve().parent, path)

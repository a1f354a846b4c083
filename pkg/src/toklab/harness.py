"""Pipeline stages behind the ``toklab`` command line.

Each stage reads a validated config, writes into the output directory and
stamps every JSON artifact with ``format_version``, ``config_hash`` and
``created_at``. Given the same config, seed and ``SOURCE_DATE_EPOCH``, every
model and report file is byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from collections import Counter
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from filelock import FileLock, Timeout

from toklab.charts import grouped_bars
from toklab.config import LoadedConfig, TokenizerSpec
from toklab.errors import ConfigError, DataError, ToklabError
from toklab.intrinsic import IntrinsicReport, intrinsic_report
from toklab.ner import TaggerModel, predict_document, train_tagger
from toklab.nerscore import compare_report, entity_prf
from toklab.text import Corpus, NerDocument, load_corpus, load_morph_lexicon, parse_conll
from toklab.tokenizers import (CharTokenizer, Tokenizer, load_tokenizer, train_bpe,
                               train_unigram)
from toklab.tokenizers.base import FORMAT_VERSION

log = logging.getLogger(__name__)

LOCK_NAME = ".toklab.lock"
EXTRINSIC_KINDS = ("bpe", "unigram")


def created_at() -> str:
    """UTC timestamp; honours ``SOURCE_DATE_EPOCH`` for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        try:
            ts = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        except ValueError:
            raise ConfigError(f"SOURCE_DATE_EPOCH must be an integer, got {epoch!r}") from None
    else:
        ts = datetime.now(timezone.utc).replace(microsecond=0)
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def dumps(data: dict) -> str:
    return json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


@contextmanager
def locked(output_dir: Path) -> Iterator[None]:
    output_dir.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(output_dir / LOCK_NAME), timeout=0)
    try:
        lock.acquire()
    except Timeout:
        raise ToklabError(f"{output_dir} is in use by another toklab process") from None
    try:
        yield
    finally:
        lock.release()


def _csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else f"{row[c]:.6f}" if isinstance(row[c], float)
                         else row[c] for c in columns])
    return buf.getvalue()


class Harness:
    def __init__(self, loaded: LoadedConfig, force: bool = False, include_char: bool = False):
        self.loaded = loaded
        self.config = loaded.config
        self.force = force
        self.include_char = include_char
        self.out = loaded.output_dir
        self._hash: Optional[str] = None
        self._stamp: Optional[str] = None

    @property
    def provenance(self) -> dict:
        if self._hash is None:
            self._hash = self.loaded.config_hash
            self._stamp = created_at()
        return {"format_version": FORMAT_VERSION, "config_hash": self._hash,
                "created_at": self._stamp}

    def _write_json(self, path: Path, data: dict) -> None:
        write_text(path, dumps({**data, **self.provenance}))

    def _refuse_overwrite(self, paths: list[Path]) -> None:
        existing = [p for p in paths if p.exists()]
        if existing and not self.force:
            names = ", ".join(str(p) for p in existing)
            raise DataError(f"refusing to overwrite {names} (use --force)")

    # tokenizers ---------------------------------------------------------

    def tokenizer_counts(self) -> Counter:
        """Word counts for tokenizer training: 'tokenizer' corpora, else NER 'train' files."""
        counts: Counter = Counter()
        specs = self.loaded.corpora("tokenizer")
        if specs:
            for c in specs:
                counts.update(load_corpus(self.loaded.resolve(c.path), c.language,
                                          c.script).word_counts())
            return counts
        for c in self.loaded.corpora("train"):
            doc = parse_conll(self.loaded.resolve(c.path), c.language)
            lines = (" ".join(s.words) for s in doc.sentences)
            counts.update(Corpus.from_lines(lines, c.language, c.script).word_counts())
        return counts

    def model_path(self, spec: TokenizerSpec) -> Path:
        return self.out / "tokenizers" / spec.filename

    def train_tokenizers(self) -> list[Path]:
        paths = [self.model_path(t) for t in self.config.tokenizers]
        self._refuse_overwrite(paths)
        needs_text = any(t.kind != "char" for t in self.config.tokenizers)
        counts = self.tokenizer_counts() if needs_text else Counter()
        if needs_text and not counts:
            raise DataError("no tokenizer training text: add a corpus with role "
                            "'tokenizer' or 'train'")
        log_lines = []
        for i, (spec, path) in enumerate(zip(self.config.tokenizers, paths)):
            start = time.perf_counter()
            try:
                tok = self._train_one(spec, counts)
            except ValueError as err:
                raise ConfigError(f"invalid config: tokenizers.{i}.vocab_size: {err}") from None
            elapsed = time.perf_counter() - start
            self._write_json(path, {**tok.to_dict(), "name": spec.stem})
            size = len(tok.vocab) if hasattr(tok, "vocab") else "n/a"
            log_lines.append(f"{spec.stem}\tvocab_size={size}\tseconds={elapsed:.2f}")
            log.info("trained %s (vocab %s) in %.2fs", spec.stem, size, elapsed)
        write_text(self.out / "tokenizers" / "train.log", "\n".join(log_lines) + "\n")
        return paths

    @staticmethod
    def _train_one(spec: TokenizerSpec, counts: Counter) -> Tokenizer:
        if spec.kind == "bpe":
            return train_bpe(counts, spec.vocab_size)
        if spec.kind == "unigram":
            return train_unigram(counts, spec.vocab_size, **spec.params)
        return CharTokenizer(spec.params.get("mode", "codepoint"))

    def load_tokenizer(self, spec: TokenizerSpec) -> Tokenizer:
        path = self.model_path(spec)
        if not path.is_file():
            raise DataError(f"missing tokenizer model {path}; run train-tok first")
        try:
            return load_tokenizer(path)
        except (KeyError, ValueError) as err:
            raise DataError(f"cannot load tokenizer model {path}: {err}") from None

    # intrinsic ----------------------------------------------------------

    def eval_intrinsic(self) -> Path:
        specs = self.loaded.corpora("intrinsic")
        if not specs:
            raise DataError("no corpus with role 'intrinsic' in config")
        toks = [(t.stem, self.load_tokenizer(t)) for t in self.config.tokenizers]
        base = self.config.intrinsic.baseline
        base_idx = next((i for i, t in enumerate(self.config.tokenizers)
                         if base in (t.stem, t.kind)), None)
        lexicons = {}
        for lex in self.config.intrinsic.lexicons:
            lexicons.setdefault(lex.language, load_morph_lexicon(self.loaded.resolve(lex.path)))
        langs = Counter(c.language for c in specs)

        rows: list[IntrinsicReport] = []
        for c in specs:
            corpus = load_corpus(self.loaded.resolve(c.path), c.language, c.script)
            name = c.language if langs[c.language] == 1 else f"{c.language}/{Path(c.path).stem}"
            lexicon = lexicons.get(c.language)
            baseline = None
            if base_idx is not None:
                stem, tok = toks[base_idx]
                baseline = intrinsic_report(tok, corpus, name, tokenizer_name=stem)
            for stem, tok in toks:
                rows.append(intrinsic_report(tok, corpus, name, lexicon, baseline, stem))

        out = self.out / "intrinsic"
        table = [r.to_dict() for r in rows]
        self._write_json(out / "report.json", {
            "baseline": self.config.tokenizers[base_idx].stem if base_idx is not None else None,
            "rows": table})
        write_text(out / "report.csv", _csv(list(table[0]), table))
        corpora = list(dict.fromkeys(r.corpus for r in rows))
        names = [stem for stem, _ in toks]
        write_text(out / "tokens_per_sentence.svg", grouped_bars(
            "Tokenization efficiency", corpora, names,
            {(r.corpus, r.tokenizer): r.tokens_per_sentence for r in rows},
            y_label="avg. tokens per sentence"))
        write_text(out / "compression.svg", grouped_bars(
            "Vocabulary compression ratio", corpora, names,
            {(r.corpus, r.tokenizer): r.vocab_compression_raw for r in rows},
            y_label="word types / piece types"))
        return out / "report.json"

    # NER ----------------------------------------------------------------

    def _ner(self):
        if self.config.ner is None:
            raise ConfigError("invalid config: ner: section is required for this command")
        return self.config.ner

    def extrinsic_specs(self) -> list[TokenizerSpec]:
        kinds = EXTRINSIC_KINDS + (("char",) if self.include_char else ())
        specs = [t for t in self.config.tokenizers if t.kind in kinds]
        if not specs:
            raise ConfigError("invalid config: tokenizers: no bpe or unigram tokenizer "
                              "for NER (char needs --include-char)")
        return specs

    def _document(self, role: str, language: str) -> NerDocument:
        docs = [parse_conll(self.loaded.resolve(c.path), language)
                for c in self.loaded.corpora(role, language)]
        pairs = [(s.words, s.tags) for d in docs for s in d.sentences]
        doc = NerDocument.from_pairs(pairs, language)
        if not doc.sentences:
            raise DataError(f"no {role} sentences for language {language!r}")
        return doc

    def _tagger_path(self, stage: str, spec: TokenizerSpec) -> Path:
        return self.out / stage / "taggers" / f"{spec.stem}.{self._ner().train_language}.tagger.json"

    def ner_train(self, stage: str = "ner", overwrite: bool = False) -> list[Path]:
        ner = self._ner()
        specs = self.extrinsic_specs()
        paths = [self._tagger_path(stage, s) for s in specs]
        if not overwrite:
            self._refuse_overwrite(paths)
        doc = self._document("train", ner.train_language)
        for spec, path in zip(specs, paths):
            tok = self.load_tokenizer(spec)
            start = time.perf_counter()
            tagger = train_tagger(doc, tok, epochs=ner.epochs, seed=ner.seed)
            log.info("trained tagger %s in %.2fs", path.name, time.perf_counter() - start)
            self._write_json(path, tagger.to_dict())
        return paths

    def ner_eval(self, stage: str = "ner") -> Path:
        ner = self._ner()
        scores = []
        for spec in self.extrinsic_specs():
            tok = self.load_tokenizer(spec)
            path = self._tagger_path(stage, spec)
            if not path.is_file():
                raise DataError(f"missing tagger {path}; run ner-train first")
            tagger = TaggerModel.from_dict(json.loads(path.read_text(encoding="utf-8")))
            for target in ner.test_languages:
                gold = self._document("test", target)
                pred = predict_document(tagger, tok, gold)
                pair = f"{ner.train_language}-{target}"
                write_text(self.out / stage / "predictions" / f"{spec.stem}.{pair}.conll",
                           pred.to_conll())
                score = entity_prf(gold, pred)
                self._write_json(self.out / stage / "scores" / f"{spec.stem}.{pair}.json", {
                    "tokenizer": spec.stem, "tokenizer_id": tok.tokenizer_id,
                    "source": ner.train_language, "target": target, **score.to_dict()})
                scores.append((spec.stem, (ner.train_language, target), score))
        report = compare_report(scores)
        out = self.out / stage
        self._write_json(out / "report.json", {**report.to_dict(), "seed": ner.seed,
                                               "epochs": ner.epochs})
        write_text(out / "report.csv", report.to_csv())
        write_text(out / "report.svg", report.to_svg())
        return out / "report.json"

    def zeroshot(self) -> Path:
        """Train one tagger per tokenizer on the source language, score every target."""
        self.ner_train("zeroshot", overwrite=True)
        return self.ner_eval("zeroshot")


# report -------------------------------------------------------------------

def _load_artifacts(output_dir: Path) -> dict[Path, dict]:
    found = {}
    for path in sorted(output_dir.rglob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            raise DataError(f"unreadable artifact {path}: {err}") from None
        if isinstance(data, dict) and "config_hash" in data:
            found[path] = data
    return found


def _md_table(columns: list[str], rows: list[list]) -> list[str]:
    def cell(v):
        return f"{v:.4f}" if isinstance(v, float) else ("" if v is None else str(v))
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    lines += ["| " + " | ".join(cell(v) for v in row) + " |" for row in rows]
    return lines


def build_report(output_dir: Path, mixed: bool = False) -> Path:
    """Write ``summary.md`` linking every table and chart under ``output_dir``."""
    output_dir = Path(output_dir)
    if not output_dir.is_dir():
        raise DataError(f"output directory {output_dir} does not exist")
    artifacts = _load_artifacts(output_dir)
    if not artifacts:
        raise DataError(f"no toklab artifacts in {output_dir}")
    hashes = sorted({a["config_hash"] for a in artifacts.values()})
    if len(hashes) > 1 and not mixed:
        raise DataError(f"artifacts come from {len(hashes)} different configs "
                        f"({', '.join(h[:12] for h in hashes)}); pass --mixed to combine")

    rel = {p: p.relative_to(output_dir).as_posix() for p in artifacts}
    md = ["# toklab summary", ""]
    md.append("Config hash: " + ", ".join(f"`{h}`" for h in hashes))
    md.append("")

    models = [(rel[p], a) for p, a in artifacts.items() if p.name.endswith(".model.json")]
    if models:
        md += ["## Tokenizers", ""]
        md += _md_table(["model", "type", "pieces"], [
            [f"[{a.get('name', path)}]({path})", a["type"],
             len(a.get("alphabet", [])) + len(a.get("merges", [])) + 1 if a["type"] == "bpe"
             else len(a["pieces"]) + 1 if a["type"] == "unigram" else None]
            for path, a in models])
        md.append("")

    intrinsic = output_dir / "intrinsic" / "report.json"
    if intrinsic in artifacts:
        cols = ["tokenizer", "corpus", "tokens_per_sentence", "fertility", "word_split_rate",
                "unk_rate", "vocab_compression_raw", "vocab_compression_vs_baseline",
                "morph_boundary_f1"]
        md += ["## Intrinsic metrics", ""]
        md += _md_table(cols, [[r[c] for c in cols] for r in artifacts[intrinsic]["rows"]])
        md += ["", "Charts: [tokens per sentence](intrinsic/tokens_per_sentence.svg), "
               "[compression](intrinsic/compression.svg). "
               "Full table: [report.csv](intrinsic/report.csv).", ""]

    for stage, title in (("ner", "NER evaluation"), ("zeroshot", "Zero-shot transfer")):
        path = output_dir / stage / "report.json"
        if path not in artifacts:
            continue
        cols = ["target", "source", "tokenizer", "precision", "recall", "f1", "accuracy"]
        md += [f"## {title}", ""]
        md += _md_table(cols, [[r[c] for c in cols] for r in artifacts[path]["rows"]])
        md += ["", f"Chart: [F1 by target]({stage}/report.svg). "
               f"Full table: [report.csv]({stage}/report.csv).", ""]

    md += ["## Artifacts", ""]
    md += [f"- [{r}]({r}) `{artifacts[p]['config_hash'][:12]}`" for p, r in rel.items()]
    summary = output_dir / "summary.md"
    write_text(summary, "\n".join(md) + "\n")
    return summary

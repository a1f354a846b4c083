#!/usr/bin/env python3
"""Regenerate the bundled sample data under src/toklab/data/samples/.

Everything here is synthetic: agglutinative pseudo-languages rendered in four
scripts, built from seeded random syllable inventories. Running this script
twice produces identical files.

Outputs
  intrinsic/<lang>.train.txt tokenizer training text
  intrinsic/<lang>.txt       held-out evaluation text, one sentence per line
  intrinsic/<lang>.morph.tsv surface<TAB>morph+morph
  ner/src.conll, ner/tgt.conll, ner/unlabeled_{src,tgt}.txt

The bundled zeroshot.toml trains its tokenizers on unlabeled_src.txt only, so
the target orthography is never seen before evaluation.
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "toklab" / "data" / "samples"

SCRIPTS = {
    # language tag: (script tag, consonants, vowel marks/letters)
    "qaa": ("Beng", "কখগঘচছজটডতথদধনপফবভমযরলশসহ", ["", "া", "ি", "ী", "ু", "ূ", "ে", "ো"]),
    "qab": ("Arab", "بتثجحخدرزسشصطعفقكلمنهوي", ["", "ا", "و", "ي"]),
    "qac": ("Olck", "ᱛᱜᱞᱠᱡᱢᱥᱦᱨᱪᱫᱯᱱᱵ", ["ᱚ", "ᱟ", "ᱤ", "ᱩ", "ᱮ", "ᱳ"]),
    "qad": ("Deva", "कखगघचजटडतदनपबभमयरलवशसह", ["", "ा", "ि", "ी", "ु", "ू", "े", "ै", "ो"]),
}


def zipf_choice(rng: random.Random, items: list, s: float = 1.1):
    weights = [1.0 / (r + 1) ** s for r in range(len(items))]
    return rng.choices(items, weights=weights, k=1)[0]


class PseudoLanguage:
    def __init__(self, rng: random.Random, consonants: str, vowels: list[str],
                 n_stems: int = 450, n_suffixes: int = 14, n_function: int = 24):
        self.rng = rng
        self.consonants = consonants
        self.vowels = vowels
        self.stems = self._unique(n_stems, 2, 3)
        self.suffixes = self._unique(n_suffixes, 1, 2, exclude=set(self.stems))
        self.function_words = self._unique(n_function, 1, 2,
                                           exclude=set(self.stems) | set(self.suffixes))

    def syllable(self) -> str:
        return self.rng.choice(self.consonants) + self.rng.choice(self.vowels)

    def _unique(self, n: int, lo: int, hi: int, exclude: set | None = None) -> list[str]:
        seen = set(exclude or ())
        out = []
        while len(out) < n:
            w = "".join(self.syllable() for _ in range(self.rng.randint(lo, hi)))
            if w not in seen:
                seen.add(w)
                out.append(w)
        return out

    def content_word(self) -> tuple[str, list[str]]:
        morphs = [zipf_choice(self.rng, self.stems)]
        for _ in range(self.rng.choices([0, 1, 2], weights=[4, 4, 2])[0]):
            morphs.append(zipf_choice(self.rng, self.suffixes, 0.8))
        return "".join(morphs), morphs

    def sentence(self) -> tuple[str, list[tuple[str, list[str]]]]:
        words = []
        for _ in range(self.rng.randint(6, 14)):
            if self.rng.random() < 0.3:
                fw = zipf_choice(self.rng, self.function_words, 0.9)
                words.append((fw, [fw]))
            else:
                words.append(self.content_word())
        return " ".join(w for w, _ in words), words


def make_intrinsic(seed: int, n_sentences: int, n_train: int) -> None:
    out = OUT / "intrinsic"
    out.mkdir(parents=True, exist_ok=True)
    for i, (lang, (_, consonants, vowels)) in enumerate(sorted(SCRIPTS.items())):
        lang_rng = random.Random(seed * 100 + i)
        pl = PseudoLanguage(lang_rng, consonants, vowels)
        train = [pl.sentence()[0] for _ in range(n_train)]
        (out / f"{lang}.train.txt").write_text("\n".join(train) + "\n", encoding="utf-8")
        lines = []
        lexicon: dict[str, list[str]] = {}
        for _ in range(n_sentences):
            text, words = pl.sentence()
            lines.append(text)
            for surface, morphs in words:
                if len(morphs) > 1 and surface not in lexicon:
                    lexicon[surface] = morphs
        (out / f"{lang}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        entries = sorted(lexicon.items())[:400]
        (out / f"{lang}.morph.tsv").write_text(
            "".join(f"{s}\t{'+'.join(m)}\n" for s, m in entries), encoding="utf-8")


# --- NER pair -------------------------------------------------------------
#
# A source language and a closely related target language written in two
# variants of the Bengali script. The target shares the underlying lexicon,
# but two letters are rendered differently (as between Bengali and Assamese
# orthography) and its inflections and function words differ. Entities are
# shared names transliterated into the target orthography.

TARGET_LETTERS = {"র": "ৰ", "ব": "ৱ"}


def to_target(text: str) -> str:
    return "".join(TARGET_LETTERS.get(c, c) for c in text)


def make_ner(seed: int, n_train: int, n_test: int, n_unlabeled: int) -> None:
    rng = random.Random(seed)
    _, consonants, vowels = SCRIPTS["qaa"]
    pl = PseudoLanguage(rng, consonants, vowels, n_stems=600, n_suffixes=10)
    tgt_suffix = {s: pl._unique(1, 1, 2, exclude=set(pl.suffixes))[0] for s in pl.suffixes}
    tgt_function = {f: (to_target(f) if rng.random() < 0.5 else pl._unique(1, 1, 2, exclude=set(pl.function_words))[0])
                    for f in pl.function_words}

    given = pl._unique(80, 2, 2)
    family = pl._unique(40, 2, 3)
    place_stems = pl._unique(80, 1, 2)
    place_suffix = ["পুর", "নগর", "বাটী", "গ্রাম"]
    org_stems = pl._unique(50, 1, 2)
    org_heads = ["সমিতি", "সংঘ", "ব্যাংক", "পরিষদ"]
    title = "শ্রী"
    # target case markers written onto the last word of a name
    tgt_case = {"PER": ["ৰ", "ক", "এ"], "LOC": ["ত", "লৈ", "ৰ"], "ORG": ["ৰ", "ত", "ক"]}
    postposition_loc = ["থেকে", "মধ্যে"]

    def entity(kind: str) -> list[str]:
        if kind == "PER":
            words = [rng.choice(given)]
            if rng.random() < 0.6:
                words.append(rng.choice(family))
            return words
        if kind == "LOC":
            return [rng.choice(place_stems) + rng.choice(place_suffix)]
        return [rng.choice(org_stems), rng.choice(org_heads)]

    def sentence() -> list[tuple[str, str, str]]:
        """(source word, target word, tag) triples."""
        out: list[tuple[str, str, str]] = []
        for _ in range(rng.randint(1, 2)):
            for _ in range(rng.randint(1, 4)):
                word, morphs = pl.content_word()
                tgt = to_target(morphs[0]) + "".join(tgt_suffix[m] for m in morphs[1:])
                out.append((word, tgt, "O"))
            kind = rng.choice(["PER", "LOC", "ORG"])
            if kind == "PER" and rng.random() < 0.5:
                out.append((title, to_target(title), "O"))
            names = entity(kind)
            case = rng.choice(tgt_case[kind]) if rng.random() < 0.7 else ""
            for j, w in enumerate(names):
                tw = to_target(w) + (case if j == len(names) - 1 else "")
                out.append((w, tw, ("B-" if j == 0 else "I-") + kind))
            if kind == "LOC" and rng.random() < 0.6:
                p = rng.choice(postposition_loc)
                out.append((p, to_target(p), "O"))
            if rng.random() < 0.7:
                fw = zipf_choice(rng, pl.function_words, 0.9)
                out.append((fw, tgt_function[fw], "O"))
        return out

    def write(path: Path, sents, col: int) -> None:
        blocks = ["".join(f"{t[col]}\t{t[2]}\n" for t in s) for s in sents]
        path.write_text("\n".join(blocks), encoding="utf-8")

    out = OUT / "ner"
    out.mkdir(parents=True, exist_ok=True)
    write(out / "src.conll", [sentence() for _ in range(n_train)], 0)
    write(out / "tgt.conll", [sentence() for _ in range(n_test)], 1)
    src_lines, tgt_lines = [], []
    for k in range(n_unlabeled):
        s = sentence()
        src_lines.append(" ".join(t[0] for t in s))
        if k % 4 == 0:
            tgt_lines.append(" ".join(t[1] for t in s))
    (out / "unlabeled_src.txt").write_text("\n".join(src_lines) + "\n", encoding="utf-8")
    (out / "unlabeled_tgt.txt").write_text("\n".join(tgt_lines) + "\n", encoding="utf-8")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--sentences", type=int, default=300)
    ap.add_argument("--train-sentences", type=int, default=2000)
    args = ap.parse_args()
    make_intrinsic(args.seed, args.sentences, args.train_sentences)
    make_ner(args.seed, n_train=400, n_test=200, n_unlabeled=1200)


if __name__ == "__main__":
    main()

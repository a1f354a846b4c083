"""``toklab`` command line.

Exit codes: 0 success, 1 other failure, 2 config error, 3 data error,
4 internal assertion.
"""

from __future__ import annotations

import functools
import logging
import shutil
import sys
from importlib import resources
from pathlib import Path

import click

from toklab import __version__
from toklab.config import load_config
from toklab.errors import ToklabError
from toklab.harness import Harness, build_report, locked

EXIT_ASSERT = 4


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ToklabError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(err.exit_code)
        except AssertionError as err:
            click.echo(f"internal error: {err or 'assertion failed'}", err=True)
            sys.exit(EXIT_ASSERT)
    return wrapper


config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(dir_okay=False, path_type=Path),
                             help="Experiment config (TOML or JSON).")
seed_option = click.option("--seed", type=int, default=None,
                           help="Override ner.seed from the config.")
force_option = click.option("--force", is_flag=True, help="Overwrite existing model files.")
char_option = click.option("--include-char", is_flag=True,
                           help="Also run the character tokenizer in NER stages.")


def _run(config_path: Path, seed, force: bool, include_char: bool, stage: str):
    loaded = load_config(config_path).with_seed(seed)
    harness = Harness(loaded, force=force, include_char=include_char)
    with locked(harness.out):
        result = getattr(harness, stage)()
    for path in result if isinstance(result, list) else [result]:
        click.echo(str(path))


@click.group()
@click.version_option(__version__, prog_name="toklab")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Train, compare and evaluate subword tokenizers."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("train-tok")
@config_option
@seed_option
@force_option
@_guard
def train_tok(config_path, seed, force):
    """Train every tokenizer listed in the config."""
    _run(config_path, seed, force, False, "train_tokenizers")


@main.command("eval-intrinsic")
@config_option
@seed_option
@_guard
def eval_intrinsic(config_path, seed):
    """Intrinsic metrics for every (tokenizer, corpus) pair, plus charts."""
    _run(config_path, seed, False, False, "eval_intrinsic")


@main.command("ner-train")
@config_option
@seed_option
@force_option
@char_option
@_guard
def ner_train(config_path, seed, force, include_char):
    """Train one tagger per tokenizer on the NER training language."""
    _run(config_path, seed, force, include_char, "ner_train")


@main.command("ner-eval")
@config_option
@seed_option
@char_option
@_guard
def ner_eval(config_path, seed, include_char):
    """Tag every test language with the trained taggers and score them."""
    _run(config_path, seed, False, include_char, "ner_eval")


@main.command("zeroshot")
@config_option
@seed_option
@char_option
@_guard
def zeroshot(config_path, seed, include_char):
    """Train on the source language and evaluate on unseen targets in one go."""
    _run(config_path, seed, False, include_char, "zeroshot")


@main.command("report")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Take the output directory from this config.")
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path),
              help="Output directory to summarize.")
@click.option("--mixed", is_flag=True, help="Allow artifacts from different configs.")
@_guard
def report(config_path, output_dir, mixed):
    """Write summary.md linking all tables and charts."""
    if output_dir is None:
        if config_path is None:
            raise click.UsageError("give --config or --output-dir")
        output_dir = load_config(config_path).output_dir
    with locked(output_dir):
        click.echo(str(build_report(output_dir, mixed=mixed)))


@main.command("samples")
@click.argument("dest", type=click.Path(file_okay=False, path_type=Path))
@_guard
def samples(dest: Path):
    """Copy the bundled sample corpora and configs to DEST."""
    if dest.exists() and any(dest.iterdir()):
        raise ToklabError(f"{dest} is not empty")
    src = resources.files("toklab") / "data" / "samples"
    with resources.as_file(src) as path:
        shutil.copytree(path, dest, dirs_exist_ok=True,
                        ignore=shutil.ignore_patterns("__pycache__"))
    click.echo(str(dest))


if __name__ == "__main__":
    main()

"""Command-line entry point wiring all pipeline stages.

Subcommands: train-vocab, tokenize, build-dataset, stats, inspect.  Data goes
to stdout, diagnostics to stderr; exit status is 0 iff no error path was
taken (2 on any error).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import dataset as ds
from . import tokenizer as tok
from . import vocab as vb
from .errors import MixtokError
from .mmlm import SENTINEL_LABEL, MaskingConfig, TASK_MLM, TASK_MMLM
from .textnorm import normalize, read_corpus
from .trainer import TrainerConfig, train, train_char_vocab
from .vocab import MASK_ID


def _probs(text: str, arity: int, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise MixtokError(f"{flag} must be comma-separated decimals: {text!r}") from None
    if len(values) != arity:
        raise MixtokError(f"{flag} must have {arity} entries, got {len(values)}")
    return values


def _cmd_train_vocab(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise MixtokError(f"input file not found: {path}")
    lines = [nt.text for nt in read_corpus(path)]
    cfg = TrainerConfig(
        target_size=args.vocab_size,
        max_piece_len=args.max_piece_len,
        char_coverage=args.char_coverage,
        seed=args.seed,
    )
    if args.vocab_granularity == "char":
        vocabulary = train_char_vocab(lines, cfg)
    else:
        vocabulary = train(lines, cfg)
    vb.save(vocabulary, args.model_out)
    print(f"wrote {len(vocabulary)} pieces to {args.model_out}", file=sys.stderr)
    return 0


def _cmd_tokenize(args) -> int:
    vocabulary = vb.load(args.vocab)
    for line in sys.stdin:
        seq = tok.encode(normalize(line), vocabulary, args.mode, args.max_piece_len)
        if args.ids:
            print(" ".join(str(i) for i in seq.piece_ids))
        else:
            print(" ".join(vocabulary.piece(i).surface for i in seq.piece_ids))
    return 0


def _cmd_build_dataset(args) -> int:
    vocab_path = Path(args.vocab)
    input_path = Path(args.input)
    for p in (vocab_path, input_path):
        if not p.exists():
            raise MixtokError(f"file not found: {p}")
    vocabulary = vb.load(vocab_path)
    cfg = MaskingConfig(
        mask_rate=args.mask_rate,
        action_probs=_probs(args.action_probs, 3, "--action-probs"),
        cmlm_rate=args.cmlm_rate,
        ngram_probs=_probs(args.ngram_probs, 4, "--ngram-probs"),
        max_len=args.max_len,
        seed=args.seed,
        task=args.task,
        max_piece_len=args.max_piece_len,
    )
    if cfg.task == TASK_MMLM and not vocabulary.has_words():
        raise MixtokError(
            "--task mmlm over a character-only vocabulary is vacuous: there are "
            "no multi-character words to expand; use --task mlm"
        )
    lines = [nt.text for nt in read_corpus(input_path)]
    fingerprint = ds.config_fingerprint(cfg, vocab_path)
    shards = ds.write_shards(
        ds.generate_examples(lines, vocabulary, cfg, workers=args.workers),
        args.out,
        args.shard_size,
        fingerprint=fingerprint,
        max_len=cfg.max_len,
        config={"masking": asdict(cfg), "vocab": str(vocab_path)},
    )
    total = sum(s.example_count for s in shards)
    print(f"wrote {total} examples in {len(shards)} shards to {args.out}", file=sys.stderr)
    return 0


def _cmd_stats(args) -> int:
    vocabulary = vb.load(args.vocab)
    paths = ds.dataset_shard_paths(args.dataset)
    print(ds.compute_stats(paths, vocabulary).to_json())
    return 0


def _render_example(ex, vocabulary) -> str:
    parts = []
    for inp, label, att in zip(ex.input_ids, ex.labels, ex.attention):
        if att == 0:
            break
        surface = vocabulary.piece(inp).surface if 0 <= inp < len(vocabulary) else f"<{inp}>"
        if label == SENTINEL_LABEL:
            parts.append(surface)
            continue
        target = vocabulary.piece(label).surface if 0 <= label < len(vocabulary) else f"<{label}>"
        if inp == MASK_ID:
            parts.append(f"[MASK]->{target}")
        elif inp == label:
            parts.append(f"{surface}(kept)")
        else:
            parts.append(f"{surface}(was:{target})")
    return " ".join(parts)


def _cmd_inspect(args) -> int:
    vocab_path = args.vocab or ds.load_manifest(args.dataset).get("config", {}).get("vocab")
    if not vocab_path:
        raise MixtokError("no --vocab given and the manifest does not record one")
    vocabulary = vb.load(vocab_path)
    paths = ds.dataset_shard_paths(args.dataset)
    for i, ex in enumerate(ds.read_shards(paths)):
        if i >= args.n:
            break
        print(f"# example {i}")
        print(_render_example(ex, vocabulary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixtok",
        description="Mixed-granularity tokenizer and masked-LM dataset pipeline",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train-vocab", help="learn a vocabulary from a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--vocab-size", type=int, default=40000)
    p.add_argument("--model-out", required=True)
    p.add_argument("--char-coverage", type=float, default=1.0)
    p.add_argument("--max-piece-len", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab-granularity", choices=["char", "mixed"], default="mixed")
    p.set_defaults(run=_cmd_train_vocab)

    p = sub.add_parser("tokenize", help="encode stdin lines to stdout")
    p.add_argument("--vocab", required=True)
    p.add_argument("--mode", choices=["char", "mixed"], default="mixed")
    p.add_argument("--max-piece-len", type=int, default=8)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ids", action="store_true", help="print space-joined ids")
    group.add_argument("--pieces", action="store_true", help="print space-joined surfaces")
    p.set_defaults(run=_cmd_tokenize)

    p = sub.add_parser("build-dataset", help="generate masked-LM training shards")
    p.add_argument("--vocab", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-len", type=int, default=512)
    p.add_argument("--mask-rate", type=float, default=0.15)
    p.add_argument("--cmlm-rate", type=float, default=0.20)
    p.add_argument("--ngram-probs", default="0.4,0.3,0.2,0.1")
    p.add_argument("--action-probs", default="0.8,0.1,0.1")
    p.add_argument("--task", choices=[TASK_MLM, TASK_MMLM], default=TASK_MMLM)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--shard-size", type=int, default=1000)
    p.add_argument("--max-piece-len", type=int, default=8)
    p.set_defaults(run=_cmd_build_dataset)

    p = sub.add_parser("stats", help="print masking statistics as JSON")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab", required=True)
    p.set_defaults(run=_cmd_stats)

    p = sub.add_parser("inspect", help="pretty-print the first n examples")
    p.add_argument("--dataset", required=True)
    p.add_argument("--vocab", help="defaults to the vocabulary recorded in the manifest")
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(run=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (MixtokError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

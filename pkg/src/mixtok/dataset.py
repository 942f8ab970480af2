"""Shard serialization and dataset statistics.

Shards are JSON-lines files named ``shard-%05d.jsonl``: a single-line JSON
header (format version, config fingerprint, max_len, example count) followed
by one example per line with the schema
``{"input_ids": [...], "labels": [...], "attention": [...]}``.
A ``manifest.json`` lists the shards, counts, fingerprint, and config.

Statistics are recomputed purely from file bytes plus the vocabulary, so two
byte-identical datasets always yield identical stats.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing as mp
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import FingerprintMismatchError, ShardFormatError
from .mmlm import SENTINEL_LABEL, MaskingConfig, TrainingExample, make_example
from .vocab import CLS_ID, MASK_ID, PieceKind, SEP_ID, Vocabulary

FORMAT_VERSION = 1
SHARD_NAME = "shard-%05d.jsonl"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Shard:
    path: Path
    example_count: int
    config_fingerprint: str


@dataclass(frozen=True)
class MaskingStats:
    word_positions_total: int
    masked_fraction: float
    action_counts: dict[str, int]
    expand_count: int
    expand_fraction_multichar: float
    span_length_histogram: dict[int, int]
    label_consistency_violations: int

    def to_json(self) -> str:
        payload = asdict(self)
        payload["span_length_histogram"] = {
            str(k): v for k, v in sorted(self.span_length_histogram.items())
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def config_fingerprint(cfg: MaskingConfig, vocab_path) -> str:
    """64-bit hash tying a dataset to its masking config and vocabulary file."""
    vocab_digest = hashlib.sha256(Path(vocab_path).read_bytes()).hexdigest()
    canonical = json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256((canonical + vocab_digest).encode()).hexdigest()[:16]


_worker_vocab: Vocabulary | None = None
_worker_cfg: MaskingConfig | None = None


def _init_worker(vocab: Vocabulary, cfg: MaskingConfig) -> None:
    global _worker_vocab, _worker_cfg
    _worker_vocab = vocab
    _worker_cfg = cfg


def _worker_chunk(chunk: list[tuple[int, str]]) -> list[TrainingExample]:
    return [make_example(text, _worker_vocab, _worker_cfg, ordinal) for ordinal, text in chunk]


def generate_examples(
    lines: Sequence[str], vocab: Vocabulary, cfg: MaskingConfig, workers: int = 1
) -> Iterator[TrainingExample]:
    """Examples for ``lines`` in order, ordinal = line index.

    The per-ordinal rng stream makes the output identical for any worker
    count; parallel chunks are reduced in ordinal order.
    """
    if workers <= 1:
        for ordinal, text in enumerate(lines):
            yield make_example(text, vocab, cfg, ordinal)
        return
    chunk_size = max(1, min(256, (len(lines) + workers - 1) // workers))
    numbered = list(enumerate(lines))
    chunks = [numbered[i : i + chunk_size] for i in range(0, len(numbered), chunk_size)]
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_init_worker, initargs=(vocab, cfg)) as pool:
        for batch in pool.imap(_worker_chunk, chunks):
            yield from batch


def write_shards(
    examples: Iterable[TrainingExample],
    out_dir,
    shard_size: int,
    *,
    fingerprint: str,
    max_len: int,
    config: dict | None = None,
) -> list[Shard]:
    """Write shards of at most ``shard_size`` examples plus a manifest."""
    if shard_size < 1:
        raise ValueError("shard_size must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shards: list[Shard] = []

    def flush(buffer: list[TrainingExample]) -> None:
        path = out_dir / (SHARD_NAME % len(shards))
        header = {
            "format_version": FORMAT_VERSION,
            "config_fingerprint": fingerprint,
            "max_len": max_len,
            "example_count": len(buffer),
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for ex in buffer:
                fh.write(
                    json.dumps(
                        {
                            "input_ids": list(ex.input_ids),
                            "labels": list(ex.labels),
                            "attention": list(ex.attention),
                        },
                        separators=(",", ":"),
                    )
                    + "\n"
                )
        shards.append(Shard(path, len(buffer), fingerprint))

    buffer: list[TrainingExample] = []
    for ex in examples:
        buffer.append(ex)
        if len(buffer) == shard_size:
            flush(buffer)
            buffer = []
    if buffer:
        flush(buffer)
    manifest = {
        "format_version": FORMAT_VERSION,
        "fingerprint": fingerprint,
        "max_len": max_len,
        "total_examples": sum(s.example_count for s in shards),
        "shards": [
            {"path": s.path.name, "example_count": s.example_count} for s in shards
        ],
        "config": config or {},
    }
    with open(out_dir / MANIFEST_NAME, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return shards


def load_manifest(dataset_dir) -> dict:
    """Parse the manifest of a dataset directory."""
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise ShardFormatError("missing manifest.json", path=dataset_dir)
    try:
        return json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ShardFormatError(f"bad manifest: {exc}", path=manifest_path) from exc


def dataset_shard_paths(dataset_dir) -> list[Path]:
    """Shard paths listed by the manifest of a dataset directory."""
    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir)
    return [dataset_dir / entry["path"] for entry in manifest.get("shards", [])]


def _parse_example(obj, path, lineno: int) -> TrainingExample:
    if not isinstance(obj, dict) or set(obj) != {"input_ids", "labels", "attention"}:
        raise ShardFormatError("example must have input_ids/labels/attention", path, lineno)
    ids, labels, attention = obj["input_ids"], obj["labels"], obj["attention"]
    if not (len(ids) == len(labels) == len(attention)):
        raise ShardFormatError("parallel arrays differ in length", path, lineno)
    if not all(isinstance(v, int) for seq in (ids, labels, attention) for v in seq):
        raise ShardFormatError("example arrays must be integers", path, lineno)
    return TrainingExample(tuple(ids), tuple(labels), tuple(attention))


def read_shards(paths: Iterable) -> Iterator[TrainingExample]:
    """Yield examples in shard order then line order, verifying headers."""
    expected_fingerprint: str | None = None
    for path in paths:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            header_line = fh.readline()
            if not header_line:
                raise ShardFormatError("empty shard", path, 1)
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise ShardFormatError(f"bad header: {exc}", path, 1) from exc
            if header.get("format_version") != FORMAT_VERSION:
                raise ShardFormatError(
                    f"unsupported format_version {header.get('format_version')!r}", path, 1
                )
            fingerprint = header.get("config_fingerprint")
            if expected_fingerprint is None:
                expected_fingerprint = fingerprint
            elif fingerprint != expected_fingerprint:
                raise FingerprintMismatchError(
                    f"{path}: fingerprint {fingerprint!r} != {expected_fingerprint!r}"
                )
            count = 0
            for lineno, line in enumerate(fh, start=2):
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ShardFormatError(f"bad example: {exc}", path, lineno) from exc
                yield _parse_example(obj, path, lineno)
                count += 1
            if count != header.get("example_count"):
                raise ShardFormatError(
                    f"header promises {header.get('example_count')} examples, found {count}",
                    path,
                )


def compute_stats(paths: Iterable, vocab: Vocabulary) -> MaskingStats:
    """Recompute masking statistics purely from serialized examples.

    Word positions are recovered by collapsing expansion runs: maximal runs of
    mask_id whose labels are CHAR pieces concatenating (longest match first)
    to a WORD piece count as one expanded word.  UNK positions are not word
    positions and break span runs, mirroring the generator.
    """
    n_vocab = len(vocab)
    max_word_len = max(
        (len(p.surface) for p in vocab.pieces if p.kind is PieceKind.WORD), default=0
    )
    word_total = 0
    actions = {"keep": 0, "mask": 0, "random": 0}
    expands = 0
    masked_multi_plain = 0
    hist = {1: 0, 2: 0, 3: 0, 4: 0}
    violations = 0

    def label_piece(label: int):
        if label == SENTINEL_LABEL or not 0 <= label < n_vocab:
            return None
        return vocab.piece(label)

    for ex in read_shards(paths):
        ok = True
        att = ex.attention
        real = len(att)
        for i, flag in enumerate(att):
            if flag == 0:
                real = i
                break
        if any(att[i] != 0 for i in range(real, len(att))):
            ok = False
        if any(
            ex.input_ids[i] != 0 or ex.labels[i] != SENTINEL_LABEL
            for i in range(real, len(att))
        ):
            ok = False
        if real < 2 or ex.input_ids[0] != CLS_ID or ex.input_ids[real - 1] != SEP_ID:
            violations += 1
            continue
        if any(ex.input_ids[i] in (CLS_ID, SEP_ID) for i in range(1, real - 1)):
            ok = False
        # (is_word, masked) per collapsed token between [CLS] and [SEP]
        tokens: list[tuple[bool, bool]] = []
        i = 1
        while i < real - 1:
            inp = ex.input_ids[i]
            if inp != MASK_ID:
                label = ex.labels[i]
                if label == SENTINEL_LABEL:
                    tokens.append((inp >= 5, False))
                else:
                    piece = label_piece(label)
                    if piece is None or piece.kind is PieceKind.SPECIAL:
                        ok = False
                        tokens.append((True, False))
                    else:
                        actions["keep" if label == inp else "random"] += 1
                        if len(piece.surface) >= 2:
                            masked_multi_plain += 1
                        tokens.append((True, True))
                i += 1
                continue
            run_end = i
            while run_end < real - 1 and ex.input_ids[run_end] == MASK_ID:
                run_end += 1
            k = i
            while k < run_end:
                piece = label_piece(ex.labels[k])
                if piece is None or piece.kind is PieceKind.SPECIAL:
                    ok = False
                    tokens.append((True, True))
                    k += 1
                    continue
                if piece.kind is PieceKind.WORD:
                    actions["mask"] += 1
                    masked_multi_plain += 1
                    tokens.append((True, True))
                    k += 1
                    continue
                span = 0
                for m in range(min(run_end - k, max_word_len), 1, -1):
                    tail = [label_piece(t) for t in ex.labels[k : k + m]]
                    if any(p is None or p.kind is not PieceKind.CHAR for p in tail):
                        continue
                    word_id = vocab.id_of("".join(p.surface for p in tail))
                    if word_id is not None and vocab.piece(word_id).kind is PieceKind.WORD:
                        span = m
                        break
                if span >= 2:
                    expands += 1
                    tokens.append((True, True))
                    k += span
                else:
                    actions["mask"] += 1
                    tokens.append((True, True))
                    k += 1
            i = run_end
        word_total += sum(1 for is_word, _ in tokens if is_word)
        run = 0
        for _, masked in tokens + [(False, False)]:
            if masked:
                run += 1
            elif run:
                hist[min(run, 4)] += 1
                run = 0
        if not ok:
            violations += 1

    masked_words = actions["mask"] + actions["random"] + actions["keep"] + expands
    multi_denominator = masked_multi_plain + expands
    return MaskingStats(
        word_positions_total=word_total,
        masked_fraction=(masked_words / word_total) if word_total else 0.0,
        action_counts=actions,
        expand_count=expands,
        expand_fraction_multichar=(expands / multi_denominator) if multi_denominator else 0.0,
        span_length_histogram=hist,
        label_consistency_violations=violations,
    )

"""Vocabularies, parallel corpora and the synthetic transduction task."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .rng import GENERATOR_NAME, PortableRng

BOS, EOS, UNK = 0, 1, 2
BOS_TOKEN, EOS_TOKEN, UNK_TOKEN = "<s>", "</s>", "<unk>"
RESERVED = (BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)

_HEADER_RE = re.compile(r"^# seed=(\d+) generator=(\S+)$")

Sentence = tuple[int, ...]


class CorpusError(ValueError):
    pass


class Vocabulary:
    """Dense bijection between surface tokens and ids.

    Ids 0, 1 and 2 are always ``<s>``, ``</s>`` and ``<unk>``.
    """

    def __init__(self, tokens: Iterable[str] = ()):
        self._itos: list[str] = list(RESERVED)
        self._stoi: dict[str, int] = {t: i for i, t in enumerate(RESERVED)}
        for tok in tokens:
            self.add(tok)

    def add(self, token: str) -> int:
        if token in RESERVED:
            raise CorpusError(f"token {token!r} collides with a reserved symbol")
        if not token or any(c.isspace() for c in token):
            raise CorpusError(f"invalid token {token!r}")
        idx = self._stoi.get(token)
        if idx is None:
            idx = len(self._itos)
            self._itos.append(token)
            self._stoi[token] = idx
        return idx

    @classmethod
    def build(cls, sentences: Iterable[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        """Vocabulary of tokens seen at least ``min_count`` times, in first-seen order."""
        counts: Counter[str] = Counter()
        order: list[str] = []
        for sent in sentences:
            for tok in sent:
                if tok in RESERVED:
                    raise CorpusError(f"token {tok!r} collides with a reserved symbol")
                if tok not in counts:
                    order.append(tok)
                counts[tok] += 1
        return cls(t for t in order if counts[t] >= min_count)

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, token: str) -> bool:
        return token in self._stoi

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._itos == other._itos

    def index(self, token: str) -> int:
        return self._stoi.get(token, UNK)

    def token(self, idx: int) -> str:
        return self._itos[idx]

    def encode(self, tokens: Sequence[str]) -> Sentence:
        return tuple(self._stoi.get(t, UNK) for t in tokens)

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self._itos[i] for i in ids]

    @property
    def tokens(self) -> list[str]:
        return list(self._itos)

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self._itos), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if tuple(lines[:3]) != RESERVED:
            raise CorpusError(f"{path}: first three lines must be {' '.join(RESERVED)}")
        return cls(lines[3:])

    @classmethod
    def from_list(cls, tokens: Sequence[str]) -> "Vocabulary":
        if tuple(tokens[:3]) != RESERVED:
            raise CorpusError("token list must start with the reserved symbols")
        return cls(tokens[3:])


@dataclass
class ParallelCorpus:
    pairs: list[tuple[Sentence, Sentence]]
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary
    header: str | None = None

    def __post_init__(self):
        for i, (src, tgt) in enumerate(self.pairs):
            if not src:
                raise CorpusError(f"pair {i}: empty source sentence")
            if EOS in src or EOS in tgt:
                raise CorpusError(f"pair {i}: sentences are stored without </s>")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def sources(self) -> list[Sentence]:
        return [s for s, _ in self.pairs]

    @property
    def targets(self) -> list[Sentence]:
        return [t for _, t in self.pairs]

    def subset(self, indices: Iterable[int]) -> "ParallelCorpus":
        return ParallelCorpus([self.pairs[i] for i in indices], self.src_vocab, self.tgt_vocab,
                              self.header)

    def head(self, n: int) -> "ParallelCorpus":
        return ParallelCorpus(self.pairs[:n], self.src_vocab, self.tgt_vocab, self.header)


def _read_lines(path: Path) -> list[str]:
    data = path.read_bytes()
    raw = data.split(b"\n")
    if raw and raw[-1] == b"":
        raw.pop()
    lines = []
    for lineno, chunk in enumerate(raw, start=1):
        try:
            lines.append(chunk.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{path}: invalid UTF-8 on line {lineno}") from exc
    return lines


def _strip_header(lines: list[str]) -> tuple[list[str], str | None]:
    if lines and _HEADER_RE.match(lines[0]):
        return lines[1:], lines[0]
    return lines, None


def load_parallel(
    source_path: str | Path,
    target_path: str | Path,
    src_vocab: Vocabulary | None = None,
    tgt_vocab: Vocabulary | None = None,
    min_count: int = 1,
) -> ParallelCorpus:
    """Read a line-aligned, whitespace-tokenized parallel corpus.

    Vocabularies that are not supplied are built from the files, with tokens
    seen fewer than ``min_count`` times mapped to ``<unk>``.
    """
    source_path, target_path = Path(source_path), Path(target_path)
    for p in (source_path, target_path):
        if not p.is_file():
            raise CorpusError(f"no such file: {p}")
    src_lines, header = _strip_header(_read_lines(source_path))
    tgt_lines, _ = _strip_header(_read_lines(target_path))
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(f"line count mismatch {len(src_lines)} vs {len(tgt_lines)}")
    src_toks = [line.split() for line in src_lines]
    tgt_toks = [line.split() for line in tgt_lines]
    for i, toks in enumerate(src_toks, start=1):
        if not toks:
            raise CorpusError(f"{source_path}: empty source sentence on line {i}")
    if src_vocab is None:
        src_vocab = Vocabulary.build(src_toks, min_count)
    if tgt_vocab is None:
        tgt_vocab = Vocabulary.build(tgt_toks, min_count)
    pairs = [(src_vocab.encode(s), tgt_vocab.encode(t)) for s, t in zip(src_toks, tgt_toks)]
    return ParallelCorpus(pairs, src_vocab, tgt_vocab, header)


def write_parallel(corpus: ParallelCorpus, source_path: str | Path, target_path: str | Path) -> None:
    for path, vocab, side in ((source_path, corpus.src_vocab, 0), (target_path, corpus.tgt_vocab, 1)):
        lines = [corpus.header] if corpus.header else []
        lines += [" ".join(vocab.decode(pair[side])) for pair in corpus.pairs]
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@dataclass
class SyntheticTaskConfig:
    n_pairs: int = 1000
    src_vocab_size: int = 50
    tgt_vocab_size: int = 80
    min_len: int = 1
    max_len: int = 20
    fertility: dict[int, float] = field(default_factory=lambda: {1: 0.5, 2: 0.5})
    seed: int = 1

    def validate(self) -> None:
        if self.min_len < 1 or self.max_len < self.min_len:
            raise CorpusError(f"bad length range [{self.min_len}, {self.max_len}]")
        if self.n_pairs < 1 or self.src_vocab_size < 1 or self.tgt_vocab_size < 2:
            raise CorpusError("corpus and vocabulary sizes must be positive")
        if set(self.fertility) - {1, 2}:
            raise CorpusError("fertility is defined over {1, 2} only")
        if any(p < 0 for p in self.fertility.values()):
            raise CorpusError("fertility probabilities must be non-negative")
        if not math.isclose(sum(self.fertility.values()), 1.0, abs_tol=1e-9):
            raise CorpusError("fertility probabilities must sum to 1")


def synthetic_vocabularies(config: SyntheticTaskConfig) -> tuple[Vocabulary, Vocabulary]:
    src = Vocabulary(f"s{i}" for i in range(config.src_vocab_size))
    tgt = Vocabulary(f"t{i}" for i in range(config.tgt_vocab_size))
    return src, tgt


def gloss_table(config: SyntheticTaskConfig) -> dict[int, tuple[int, int]]:
    """Seed-derived map from each source id to its (primary, secondary) target ids."""
    rng = PortableRng(config.seed)
    first = len(RESERVED)
    table = {}
    for i in range(config.src_vocab_size):
        a = first + rng.below(config.tgt_vocab_size)
        b = first + rng.below(config.tgt_vocab_size - 1)
        if b >= a:
            b += 1
        table[first + i] = (a, b)
    return table


def generate_synthetic(config: SyntheticTaskConfig) -> ParallelCorpus:
    """Word-by-word synthetic translation task.

    Each source token is glossed by its primary target token, followed by its
    secondary token when the per-occurrence fertility draw is 2.
    """
    config.validate()
    src_vocab, tgt_vocab = synthetic_vocabularies(config)
    table = gloss_table(config)
    # sentence draws use a stream independent of the gloss table
    rng = PortableRng(config.seed + 1)
    fert_values = sorted(config.fertility)
    fert_weights = [config.fertility[v] for v in fert_values]
    first = len(RESERVED)
    pairs = []
    for _ in range(config.n_pairs):
        n = rng.integer(config.min_len, config.max_len)
        src = tuple(first + rng.below(config.src_vocab_size) for _ in range(n))
        tgt: list[int] = []
        for tok in src:
            fert = fert_values[rng.choice_weighted(fert_weights)]
            tgt.extend(table[tok][:fert])
        pairs.append((src, tuple(tgt)))
    header = f"# seed={config.seed} generator={GENERATOR_NAME}"
    return ParallelCorpus(pairs, src_vocab, tgt_vocab, header)


def split(
    corpus: ParallelCorpus, fractions: Sequence[float], seed: int
) -> tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Seeded train/dev/test partition.

    Dev and test sizes are ``floor(fraction * n)``; train absorbs the remainder.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise CorpusError("need three positive fractions")
    if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
        raise CorpusError("fractions must sum to 1")
    n = len(corpus)
    if n < 3:
        raise CorpusError(f"corpus too small to split: {n} sentences")
    order = list(range(n))
    PortableRng(seed).shuffle(order)
    n_dev = math.floor(fractions[1] * n)
    n_test = math.floor(fractions[2] * n)
    n_train = n - n_dev - n_test
    return (
        corpus.subset(order[:n_train]),
        corpus.subset(order[n_train:n_train + n_dev]),
        corpus.subset(order[n_train + n_dev:]),
    )

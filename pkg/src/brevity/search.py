"""Greedy, beam and exhaustive decoding.

Beam search follows the simplest variant: at every step each retained
incomplete hypothesis is expanded over the whole vocabulary, ``</s>``
expansions become complete hypotheses, retained complete hypotheses are
carried over unchanged, and the top ``k`` of the union survive.  Complete
hypotheses therefore compete with partial ones for beam slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import BOS, EOS
from .model.base import NEG_INF, sequence_logprob
from .scoring import ScoringMode, hypothesis_score, hypothesis_scores, rank_key

DEFAULT_BUDGET = 2_000_000


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    score: float
    complete: bool
    corrected: float

    @property
    def length(self) -> int:
        return len(self.tokens)

    def key(self) -> tuple:
        return rank_key(self.corrected, len(self.tokens), self.tokens, self.complete)


@dataclass
class BeamTrace:
    steps: list[list[Hypothesis]] = field(default_factory=list)
    # 1-based rank of the empty translation at each step, None once pruned
    empty_rank: list[int | None] = field(default_factory=list)
    empty_pruned_at: int | None = None

    def record(self, step: int, beam: list[Hypothesis]) -> None:
        self.steps.append(list(beam))
        rank = next((i + 1 for i, h in enumerate(beam) if h.complete and not h.tokens), None)
        self.empty_rank.append(rank)
        if rank is None and self.empty_pruned_at is None:
            self.empty_pruned_at = step

    def rows(self, vocab=None) -> list[list[str]]:
        out = []
        for step, beam in enumerate(self.steps, start=1):
            for rank, h in enumerate(beam, start=1):
                toks = vocab.decode(h.tokens) if vocab is not None else [str(t) for t in h.tokens]
                out.append([str(step), str(rank), repr(h.corrected), repr(h.score),
                            str(int(h.complete)), " ".join(toks)])
        return out

    def write_tsv(self, path: str | Path, vocab=None) -> None:
        lines = ["step\trank\tcorrected_score\tbase_score\tcomplete\ttokens"]
        lines += ["\t".join(r) for r in self.rows(vocab)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class DecodeResult:
    hypotheses: list[Hypothesis]
    trace: BeamTrace | None = None
    steps: int = 0
    expanded: int = 0

    @property
    def best(self) -> Hypothesis:
        return self.hypotheses[0]


def default_max_len(source: Sequence[int]) -> int:
    return 2 * len(source) + 5


def _make(tokens: tuple[int, ...], s: float, complete: bool, mode: ScoringMode) -> Hypothesis:
    return Hypothesis(tokens, s, complete, hypothesis_score(s, len(tokens), complete, mode))


def greedy_decode(model, scoring: ScoringMode, source: Sequence[int],
                  max_len: int | None = None) -> DecodeResult:
    """Follow the single best expansion (``</s>`` included) at every step."""
    source = tuple(source)
    max_len = default_max_len(source) if max_len is None else max_len
    if max_len < 1:
        raise SearchError("max_len must be >= 1")
    tokens: tuple[int, ...] = ()
    s = 0.0
    steps = 0
    for t in range(1, max_len + 1):
        steps = t
        lp = model.next_logprobs(source, tokens)
        best = None
        for w in range(len(lp)):
            if w == BOS or lp[w] == NEG_INF:
                continue
            if w == EOS:
                cand = _make(tokens, s + float(lp[w]), True, scoring)
            else:
                cand = _make(tokens + (w,), s + float(lp[w]), False, scoring)
            if best is None or cand.key() < best.key():
                best = cand
        if best is None:
            raise SearchError(f"no possible continuation of prefix {tokens}")
        if best.complete:
            return DecodeResult([best], steps=steps, expanded=t)
        tokens, s = best.tokens, best.score
    lp = model.next_logprobs(source, tokens)
    final = _make(tokens, s + float(lp[EOS]), True, scoring)
    return DecodeResult([final], steps=steps, expanded=max_len + 1)


def _select(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of finite values that can make the top ``k`` (ties included)."""
    idx = np.flatnonzero(values > NEG_INF)
    if len(idx) <= k:
        return idx
    sub = values[idx]
    kth = np.partition(sub, len(sub) - k)[len(sub) - k]
    return idx[sub >= kth]


def beam_decode(model, scoring: ScoringMode, source: Sequence[int], k: int,
                max_len: int | None = None, trace: bool = False) -> DecodeResult:
    source = tuple(source)
    max_len = default_max_len(source) if max_len is None else max_len
    if k < 1:
        raise SearchError("beam size must be >= 1")
    if max_len < 1:
        raise SearchError("max_len must be >= 1")
    beam = [_make((), 0.0, False, scoring)]
    record = BeamTrace() if trace else None
    expanded = 0
    steps = 0
    for t in range(1, max_len + 1):
        partial = [h for h in beam if not h.complete]
        done = [h for h in beam if h.complete]
        if not partial:
            break
        steps = t
        expanded += len(partial)
        rows = np.stack([model.next_logprobs(source, h.tokens) for h in partial])
        v = rows.shape[1]
        base = np.array([h.score for h in partial])[:, None] + rows
        eos_base = base[:, EOS].copy()
        base[:, EOS] = NEG_INF
        base[:, BOS] = NEG_INF
        ext = hypothesis_scores(base, t, False, scoring)
        fin = hypothesis_scores(eos_base, t - 1, True, scoring)
        old = np.array([h.corrected for h in done], dtype=np.float64)
        values = np.concatenate([ext.ravel(), fin, old])

        n_ext, n_fin = ext.size, fin.size
        pool = []
        for j in _select(values, k).tolist():
            if j < n_ext:
                i, w = divmod(j, v)
                h = partial[i]
                pool.append(Hypothesis(h.tokens + (w,), float(base[i, w]), False, float(ext[i, w])))
            elif j < n_ext + n_fin:
                h = partial[j - n_ext]
                pool.append(Hypothesis(h.tokens, float(eos_base[j - n_ext]), True,
                                       float(fin[j - n_ext])))
            else:
                pool.append(done[j - n_ext - n_fin])
        pool.sort(key=Hypothesis.key)
        beam = pool[:k]
        if record is not None:
            record.record(t, beam)

    final = []
    for h in beam:
        if h.complete:
            final.append(h)
        else:
            lp = model.next_logprobs(source, h.tokens)
            final.append(_make(h.tokens, h.score + float(lp[EOS]), True, scoring))
    final.sort(key=Hypothesis.key)
    return DecodeResult(final, record, steps, expanded)


def count_candidates(n_emit: int, max_len: int) -> int:
    return sum(n_emit ** j for j in range(max_len + 1))


def exhaustive_decode(model, scoring: ScoringMode, source: Sequence[int],
                      max_len: int | None = None,
                      budget_limit: int = DEFAULT_BUDGET) -> DecodeResult:
    """Score every complete output of length <= ``max_len`` and rank them all.

    Zero-probability prefixes are not expanded.  Scores come from
    :func:`sequence_logprob`, independently of the incremental sums used by
    beam search.
    """
    source = tuple(source)
    max_len = default_max_len(source) if max_len is None else max_len
    n_emit = len(model.tgt_vocab) - 2
    required = n_emit ** (max_len + 1)
    if required > budget_limit:
        raise SearchError(
            f"exhaustive search needs {required} sequences, budget allows {budget_limit}")
    results = []
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        lp = model.next_logprobs(source, prefix)
        if lp[EOS] > NEG_INF:
            s = sequence_logprob(model, source, prefix)
            if s > NEG_INF:
                results.append(_make(prefix, s, True, scoring))
        if len(prefix) < max_len:
            for w in range(len(lp) - 1, -1, -1):
                if w not in (BOS, EOS) and lp[w] > NEG_INF:
                    stack.append(prefix + (w,))
    if not results:
        raise SearchError("no complete output has non-zero probability")
    results.sort(key=Hypothesis.key)
    return DecodeResult(results, steps=max_len, expanded=len(results))


def probability(h: Hypothesis) -> float:
    return math.exp(h.score)

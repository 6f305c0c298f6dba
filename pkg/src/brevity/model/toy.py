"""Count-based toy transducer.

The next-token distribution mixes two add-k smoothed components over the
emittable target tokens:

* a source component, the translation distribution of the leftmost source
  token not yet covered by the prefix (``lam`` controls its weight), and
* a target bigram component conditioned on the previous output token.

End of sentence is predicted separately, from counts bucketed by the covered
fraction of the source and the prefix/source length ratio.  The buckets are
deliberately coarse, which is what lets the model overestimate ``</s>``.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from ..corpus import BOS, EOS, ParallelCorpus, Vocabulary
from .base import ModelError, from_probs

COVERAGE_EDGES = (0.5, 1.0)
RATIO_EDGES = (0.5, 1.0, 1.5, 2.0)
N_COVERAGE = len(COVERAGE_EDGES) + 1
N_RATIO = len(RATIO_EDGES) + 1


def _bucket(x: float, edges: Sequence[float]) -> int:
    for i, edge in enumerate(edges):
        if x < edge:
            return i
    return len(edges)


class ToyTransducer:
    kind = "toy"

    def __init__(self, src_vocab: Vocabulary, tgt_vocab: Vocabulary, bigram: np.ndarray,
                 cooc: np.ndarray, eos_counts: np.ndarray, eos_totals: np.ndarray,
                 lam: float, smoothing: float):
        if not 0.0 <= lam <= 1.0:
            raise ModelError(f"interpolation weight must be in [0, 1], got {lam}")
        if not smoothing > 0:
            raise ModelError("smoothing constant must be positive")
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.bigram = bigram
        self.cooc = cooc
        self.eos_counts = eos_counts
        self.eos_totals = eos_totals
        self.lam = lam
        self.smoothing = smoothing

        k = smoothing
        v = len(tgt_vocab)
        self._emit = np.ones(v, dtype=bool)
        self._emit[[BOS, EOS]] = False
        n_emit = int(self._emit.sum())
        # row-normalized, smoothed component tables over emittable ids
        self._bigram_p = self._normalize(bigram, k, n_emit)
        self._trans_p = self._normalize(cooc, k, n_emit)
        self._eos_p = (eos_counts + k) / (eos_totals + 2 * k)
        masked = np.where(self._emit[None, :], cooc, -1.0)
        self._best = masked.argmax(axis=1)

    def _normalize(self, counts: np.ndarray, k: float, n_emit: int) -> np.ndarray:
        c = np.where(self._emit[None, :], counts + k, 0.0)
        return c / (counts[:, self._emit].sum(axis=1, keepdims=True) + k * n_emit)

    def coverage(self, source: Sequence[int], prefix: Sequence[int]) -> tuple[int, int | None]:
        """Number of covered source positions and the leftmost uncovered one.

        A position is covered when its best translation occurs in the prefix;
        each prefix token covers at most one position, left to right.
        """
        avail = Counter(prefix)
        covered = 0
        first_open = None
        for j, tok in enumerate(source):
            best = int(self._best[tok])
            if avail[best] > 0:
                avail[best] -= 1
                covered += 1
            elif first_open is None:
                first_open = j
        return covered, first_open

    def eos_bucket(self, source: Sequence[int], prefix: Sequence[int]) -> tuple[int, int]:
        covered, _ = self.coverage(source, prefix)
        n = len(source)
        return _bucket(covered / n, COVERAGE_EDGES), _bucket(len(prefix) / n, RATIO_EDGES)

    def next_logprobs(self, source: Sequence[int], prefix: Sequence[int]) -> np.ndarray:
        covered, first_open = self.coverage(source, prefix)
        n = len(source)
        if first_open is not None:
            src_p = self._trans_p[source[first_open]]
        else:
            src_p = self._trans_p[list(source)].mean(axis=0)
        prev = prefix[-1] if prefix else BOS
        mix = self.lam * src_p + (1.0 - self.lam) * self._bigram_p[prev]
        cb = _bucket(covered / n, COVERAGE_EDGES)
        rb = _bucket(len(prefix) / n, RATIO_EDGES)
        p_eos = self._eos_p[cb, rb]
        probs = (1.0 - p_eos) * mix
        probs[EOS] = p_eos
        return from_probs(probs)

    def to_payload(self) -> dict:
        return {
            "lam": self.lam,
            "smoothing": self.smoothing,
            "bigram": self.bigram.tolist(),
            "cooc": self.cooc.tolist(),
            "eos_counts": self.eos_counts.tolist(),
            "eos_totals": self.eos_totals.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict, src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> "ToyTransducer":
        arr = lambda key: np.asarray(payload[key], dtype=np.float64)  # noqa: E731
        return cls(src_vocab, tgt_vocab, arr("bigram"), arr("cooc"), arr("eos_counts"),
                   arr("eos_totals"), float(payload["lam"]), float(payload["smoothing"]))


def train_toy(corpus: ParallelCorpus, lam: float = 0.5, smoothing: float = 0.1) -> ToyTransducer:
    """Accumulate counts from ``corpus``.

    Translation counts come from a diagonal window: target position ``i`` of
    an ``(f, e)`` pair is credited to the source position at the same relative
    offset (weight 2) and its two neighbours (weight 1).
    """
    if len(corpus) == 0:
        raise ModelError("cannot train on an empty corpus")
    if not smoothing > 0:
        raise ModelError("smoothing constant must be positive")
    sv, tv = len(corpus.src_vocab), len(corpus.tgt_vocab)
    bigram = np.zeros((tv, tv))
    cooc = np.zeros((sv, tv))
    for src, tgt in corpus:
        prev = BOS
        for tok in tgt:
            bigram[prev, tok] += 1
            prev = tok
        n, m = len(src), len(tgt)
        for i, tok in enumerate(tgt):
            center = (2 * i + 1) * n // (2 * m)
            for j in (center - 1, center, center + 1):
                if 0 <= j < n:
                    cooc[src[j], tok] += 2 if j == center else 1

    eos_counts = np.zeros((N_COVERAGE, N_RATIO))
    eos_totals = np.zeros((N_COVERAGE, N_RATIO))
    # the first pass fixes best translations, which define coverage
    model = ToyTransducer(corpus.src_vocab, corpus.tgt_vocab, bigram, cooc, eos_counts,
                          eos_totals, lam, smoothing)
    for src, tgt in corpus:
        for i in range(len(tgt) + 1):
            cb, rb = model.eos_bucket(src, tgt[:i])
            eos_totals[cb, rb] += 1
            if i == len(tgt):
                eos_counts[cb, rb] += 1
    return ToyTransducer(corpus.src_vocab, corpus.tgt_vocab, bigram, cooc, eos_counts,
                         eos_totals, lam, smoothing)

"""A constructed model that overestimates ``</s>``.

For a source sentence ``f`` the model knows its intended translation ``e``
(the word-by-word gloss of ``f``).  While the prefix is shorter than ``e`` the
distribution is position-indexed:

* the intended token at that position gets probability ``p_i``,
* ``</s>`` gets a per-sentence constant ``c`` (the "budget"),
* the remaining mass is spread over the other tokens by a Zipf profile.

Once the prefix is as long as ``e``, ``</s>`` gets ``eos_after`` and filler
tokens share the rest by a steeper Zipf profile.  ``c``, ``p_i`` and the
orderings are drawn from a stream seeded by ``(seed, f)``, so the model is a
pure function of its parameters.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..corpus import BOS, EOS, UNK, Vocabulary
from ..rng import PortableRng, derive_seed
from .base import ModelError, from_probs


@dataclass(frozen=True)
class BudgetParams:
    seed: int = 7
    eos_min: float = 1e-4
    eos_max: float = 0.05
    word_min: float = 0.35
    word_max: float = 0.65
    alt_zipf: float = 1.0
    eos_after: float = 0.6
    filler_zipf: float = 2.0
    # chance that a position's intended token swaps probability with the top alternative
    confusion: float = 0.1

    def validate(self) -> None:
        if not 0 < self.eos_min <= self.eos_max < 1:
            raise ModelError("need 0 < eos_min <= eos_max < 1")
        if not 0 < self.word_min <= self.word_max < 1 - self.eos_max:
            raise ModelError("need 0 < word_min <= word_max < 1 - eos_max")
        if not 0 <= self.confusion <= 1:
            raise ModelError("confusion must be in [0, 1]")
        if not 0 < self.eos_after < 1:
            raise ModelError("eos_after must be in (0, 1)")


class BudgetModel:
    kind = "budget"

    def __init__(self, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                 gloss: dict[int, tuple[int, ...]], params: BudgetParams = BudgetParams()):
        params.validate()
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.gloss = dict(gloss)
        self.params = params
        v = len(tgt_vocab)
        self._others = np.array([i for i in range(v) if i not in (BOS, EOS)], dtype=np.int64)
        self._cache: dict[tuple[int, ...], list[np.ndarray]] = {}

    def intended(self, source: Sequence[int]) -> tuple[int, ...]:
        out: list[int] = []
        for tok in source:
            out.extend(self.gloss.get(tok, (UNK,)))
        return tuple(out)

    def eos_budget(self, source: Sequence[int]) -> float:
        """The constant in-sentence probability of ``</s>`` for ``source``."""
        rng = PortableRng(derive_seed(self.params.seed, tuple(source)))
        return self._draw_eos(rng)

    def _draw_eos(self, rng: PortableRng) -> float:
        lo, hi = math.log(self.params.eos_min), math.log(self.params.eos_max)
        return math.exp(lo + (hi - lo) * rng.uniform())

    def _zipf_row(self, rng: PortableRng, exclude: int | None, mass: float,
                  exponent: float) -> tuple[np.ndarray, int]:
        cand = [int(t) for t in self._others if t != exclude]
        rng.shuffle(cand)
        w = 1.0 / np.arange(1, len(cand) + 1, dtype=np.float64) ** exponent
        probs = np.zeros(len(self.tgt_vocab))
        probs[cand] = mass * w / w.sum()
        return probs, cand[0]

    def _rows(self, source: tuple[int, ...]) -> list[np.ndarray]:
        rows = self._cache.get(source)
        if rows is not None:
            return rows
        p = self.params
        rng = PortableRng(derive_seed(p.seed, source))
        c = self._draw_eos(rng)
        rows = []
        for tok in self.intended(source):
            word = p.word_min + (p.word_max - p.word_min) * rng.uniform()
            probs, top = self._zipf_row(rng, tok, 1.0 - word - c, p.alt_zipf)
            probs[tok] = word
            if rng.uniform() < p.confusion:
                probs[tok], probs[top] = probs[top], probs[tok]
            probs[EOS] = c
            rows.append(from_probs(probs))
        probs, _ = self._zipf_row(rng, None, 1.0 - p.eos_after, p.filler_zipf)
        probs[EOS] = p.eos_after
        rows.append(from_probs(probs))
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[source] = rows
        return rows

    def next_logprobs(self, source: Sequence[int], prefix: Sequence[int]) -> np.ndarray:
        rows = self._rows(tuple(source))
        return rows[min(len(prefix), len(rows) - 1)]

    def to_payload(self) -> dict:
        return {"params": asdict(self.params),
                "gloss": sorted([k, list(v)] for k, v in self.gloss.items())}

    @classmethod
    def from_payload(cls, payload: dict, src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> "BudgetModel":
        gloss = {int(k): tuple(int(t) for t in v) for k, v in payload["gloss"]}
        return cls(src_vocab, tgt_vocab, gloss, BudgetParams(**payload["params"]))

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_cache"] = {}
        return state

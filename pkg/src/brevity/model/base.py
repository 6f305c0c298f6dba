from __future__ import annotations

import math
from typing import Protocol, Sequence

import numpy as np

from ..corpus import BOS, EOS, Vocabulary

NEG_INF = -math.inf


class ModelError(ValueError):
    pass


class ConditionalModel(Protocol):
    """Anything that yields a normalized next-token log-distribution.

    ``next_logprobs`` returns a float64 array of natural-log probabilities,
    one entry per target vocabulary id.  The prefix never contains ``</s>``.
    """

    kind: str
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary

    def next_logprobs(self, source: Sequence[int], prefix: Sequence[int]) -> np.ndarray: ...


def logsumexp(lp: np.ndarray) -> float:
    top = float(np.max(lp))
    if top == NEG_INF:
        return NEG_INF
    return top + math.log(float(np.sum(np.exp(lp - top))))


def check_distribution(lp: np.ndarray, size: int | None = None, tol: float = 1e-6) -> None:
    if lp.ndim != 1 or (size is not None and lp.shape[0] != size):
        raise ModelError(f"distribution has shape {lp.shape}, expected ({size},)")
    if np.any(np.isnan(lp)) or np.any(lp > 1e-12):
        raise ModelError("log-probabilities must be <= 0 and not NaN")
    total = logsumexp(lp)
    if not abs(total) <= tol:
        raise ModelError(f"distribution is not normalized: logsumexp = {total}")


def next_logprobs(model: ConditionalModel, source: Sequence[int], prefix: Sequence[int]) -> np.ndarray:
    """Checked call of ``model.next_logprobs``."""
    if EOS in prefix:
        raise ModelError("prefix must not contain </s>")
    return model.next_logprobs(tuple(source), tuple(prefix))


def sequence_logprob(model: ConditionalModel, source: Sequence[int], target: Sequence[int]) -> float:
    """Sum of step log-probabilities of ``target`` followed by ``</s>``.

    Returns ``-inf`` if any required token has zero probability.
    """
    source, target = tuple(source), tuple(target)
    if EOS in target:
        raise ModelError("target must not contain </s>")
    total = 0.0
    for i in range(len(target) + 1):
        lp = model.next_logprobs(source, target[:i])
        tok = target[i] if i < len(target) else EOS
        total = total + float(lp[tok])
        if total == NEG_INF:
            return NEG_INF
    return total


def eos_only(size: int) -> np.ndarray:
    lp = np.full(size, NEG_INF)
    lp[EOS] = 0.0
    return lp


def from_probs(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lp = np.log(probs)
    lp[BOS] = NEG_INF
    lp.flags.writeable = False
    return lp

"""Length-corrected hypothesis scores.

``m`` is always the number of output words; ``</s>`` does not count.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

BASELINE, NORM, GNMT, REWARD = "baseline", "norm", "gnmt", "reward"
GNMT_OFFSET = 5.0


@dataclass(frozen=True)
class ScoringMode:
    kind: str = BASELINE
    alpha: float = 0.0
    gamma: float = 0.0
    # correct partial hypotheses too, not only complete ones
    partial: bool = True

    def __post_init__(self):
        if self.kind not in (BASELINE, NORM, GNMT, REWARD):
            raise ValueError(f"unknown scoring mode {self.kind!r}")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be finite, got {self.gamma}")

    def __str__(self) -> str:
        if self.kind == GNMT:
            return f"gnmt:alpha={self.alpha!r}"
        if self.kind == REWARD:
            return f"reward:gamma={self.gamma!r}"
        return self.kind


def Baseline() -> ScoringMode:
    return ScoringMode(BASELINE)


def LengthNorm(partial: bool = True) -> ScoringMode:
    return ScoringMode(NORM, partial=partial)


def Gnmt(alpha: float, partial: bool = True) -> ScoringMode:
    return ScoringMode(GNMT, alpha=alpha, partial=partial)


def WordReward(gamma: float) -> ScoringMode:
    return ScoringMode(REWARD, gamma=gamma)


_MODE_RE = re.compile(r"^(baseline|norm|gnmt:alpha=(?P<a>\S+)|reward:gamma=(?P<g>\S+))$")


def parse_mode(text: str, partial: bool = True) -> ScoringMode:
    """Parse ``baseline``, ``norm``, ``gnmt:alpha=A`` or ``reward:gamma=G``."""
    m = _MODE_RE.match(text.strip())
    if m is None:
        raise ValueError(f"bad scoring mode {text!r}; "
                         "expected baseline|norm|gnmt:alpha=A|reward:gamma=G")
    if text.startswith("gnmt"):
        return Gnmt(float(m.group("a")), partial)
    if text.startswith("reward"):
        return WordReward(float(m.group("g")))
    if text.startswith("norm"):
        return LengthNorm(partial)
    return Baseline()


def _divisor(m: int, mode: ScoringMode) -> float:
    if mode.kind == NORM:
        return float(max(m, 1))
    return (GNMT_OFFSET + m) ** mode.alpha / (GNMT_OFFSET + 1) ** mode.alpha


def corrected_score(s: float, m: int, mode: ScoringMode) -> float:
    if mode.kind == BASELINE:
        return s
    if mode.kind == REWARD:
        return s + mode.gamma * m
    return s / _divisor(m, mode)


def hypothesis_score(s: float, m: int, complete: bool, mode: ScoringMode) -> float:
    """Score used for ranking inside search."""
    if not complete and not mode.partial:
        return s
    return corrected_score(s, m, mode)


def hypothesis_scores(s: np.ndarray, m: int, complete: bool, mode: ScoringMode) -> np.ndarray:
    """Vectorized :func:`hypothesis_score` for hypotheses sharing one length.

    Uses the same scalar length term as the scalar path, so every element is
    bit-identical to ``hypothesis_score(s[i], m, complete, mode)``.
    """
    if mode.kind == BASELINE or (not complete and not mode.partial):
        return s
    if mode.kind == REWARD:
        return s + mode.gamma * m
    return s / _divisor(m, mode)


def rank_key(score: float, m: int, tokens: Sequence[int], complete: bool) -> tuple:
    """Total order: higher score, then shorter, then smaller token ids, then complete first."""
    return (-score, m, tuple(tokens), not complete)


def compare(a: tuple, b: tuple, mode: ScoringMode) -> int:
    """Order two ``(s, m, tokens)`` hypotheses; negative means ``a`` ranks first."""
    ka = rank_key(corrected_score(a[0], a[1], mode), a[1], a[2] if len(a) > 2 else (), True)
    kb = rank_key(corrected_score(b[0], b[1], mode), b[1], b[2] if len(b) > 2 else (), True)
    return (ka > kb) - (ka < kb)

"""Perceptron tuning of the word reward.

The model stays frozen; only gamma moves.  Each epoch decodes the whole dev
set with the current reward and applies one batch update

    gamma <- gamma + clamp(eta * mean(|e*| - |e_hat|), -clip, clip)

which approximates the globally normalized likelihood gradient by replacing
the expected output length with the length of the 1-best output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import ParallelCorpus
from .decoding import decode_corpus
from .evaluation import corpus_bleu, length_report
from .scoring import WordReward

CONVERGED = "converged"
MAX_EPOCHS = "max-epochs"


@dataclass
class TunerConfig:
    gamma0: float = 0.2
    eta: float = 0.2
    clip: float = 0.5
    tol: float = 0.03
    max_epochs: int = 25
    beam: int = 10
    max_len: int | None = None  # None: 2|f| + 5 per sentence
    workers: int | None = None

    def validate(self) -> None:
        if not self.eta > 0 or not self.clip > 0 or not self.tol > 0:
            raise ValueError("eta, clip and tol must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.beam < 1:
            raise ValueError("beam must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    gamma: float  # reward used to decode this epoch
    mean_ref_len: float
    mean_hyp_len: float
    raw_grad: float  # mean(|e*| - |e_hat|)
    update: float
    seconds: float


@dataclass
class TunerState:
    gamma: float
    history: list[EpochRecord] = field(default_factory=list)
    stop_reason: str | None = None

    @property
    def seconds(self) -> float:
        return sum(r.seconds for r in self.history)


def perceptron_update(ref_lens: Sequence[int], hyp_lens: Sequence[int], eta: float,
                      clip: float) -> tuple[float, float]:
    """Return ``(g, update)`` for one batch; lengths are summed as integers first."""
    if len(ref_lens) != len(hyp_lens) or not ref_lens:
        raise ValueError("need equal, non-empty length lists")
    g = (sum(ref_lens) - sum(hyp_lens)) / len(ref_lens)
    return g, max(-clip, min(clip, eta * g))


def tune_word_reward(model, dev: ParallelCorpus, config: TunerConfig = TunerConfig(),
                     log=None) -> TunerState:
    config.validate()
    if len(dev) == 0:
        raise ValueError("dev set is empty")
    refs = dev.targets
    ref_lens = [len(r) for r in refs]
    state = TunerState(config.gamma0)
    for epoch in range(1, config.max_epochs + 1):
        start = time.perf_counter()
        results = decode_corpus(model, WordReward(state.gamma), dev.sources, config.beam,
                                config.max_len, config.workers)
        hyp_lens = [r.best.length for r in results]
        g, update = perceptron_update(ref_lens, hyp_lens, config.eta, config.clip)
        record = EpochRecord(epoch, state.gamma, sum(ref_lens) / len(ref_lens),
                             sum(hyp_lens) / len(hyp_lens), g, update,
                             time.perf_counter() - start)
        state.history.append(record)
        state.gamma = state.gamma + update
        if log is not None:
            log(f"epoch {epoch}: gamma={record.gamma:.4f} ref={record.mean_ref_len:.3f} "
                f"hyp={record.mean_hyp_len:.3f} update={update:+.4f}")
        if abs(update) < config.tol:
            state.stop_reason = CONVERGED
            break
    else:
        state.stop_reason = MAX_EPOCHS
    return state


TUNER_COLUMNS = ("epoch", "gamma", "mean_ref_len", "mean_hyp_len", "raw_grad", "update")


def tuner_tsv(state: TunerState) -> str:
    """Deterministic tuner report; wall times go to :func:`timing_tsv`."""
    lines = ["\t".join(TUNER_COLUMNS)]
    for r in state.history:
        lines.append(f"{r.epoch}\t{r.gamma!r}\t{r.mean_ref_len!r}\t{r.mean_hyp_len!r}\t"
                     f"{r.raw_grad!r}\t{r.update!r}")
    lines.append(f"# final_gamma={state.gamma!r} stop={state.stop_reason}")
    return "\n".join(lines) + "\n"


def timing_tsv(state: TunerState) -> str:
    lines = ["epoch\tseconds"]
    lines += [f"{r.epoch}\t{r.seconds:.3f}" for r in state.history]
    return "\n".join(lines) + "\n"


def write_gamma(path: str | Path, gamma: float) -> None:
    Path(path).write_text(f"{gamma!r}\n", encoding="utf-8")


def read_gamma(path: str | Path) -> float:
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{path}: expected a single number, got {text!r}") from None


@dataclass
class GammaPoint:
    gamma: float
    bleu: float
    length_ratio: float
    empty_fraction: float


def evaluate_gamma_grid(model, dev: ParallelCorpus, gammas: Sequence[float], k: int,
                        max_len: int | None = None, workers: int | None = None) -> list[GammaPoint]:
    """One decode pass per reward value: BLEU points and length ratio."""
    refs = dev.targets
    points = []
    for gamma in gammas:
        results = decode_corpus(model, WordReward(gamma), dev.sources, k, max_len, workers)
        hyps = [r.best.tokens for r in results]
        lengths = length_report(hyps, refs)
        points.append(GammaPoint(gamma, corpus_bleu(hyps, refs).points, lengths.ratio,
                                 lengths.empty_fraction))
    return points

"""Decode whole corpora, optionally across worker processes.

Results always come back in input order, so the worker count never changes
any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .scoring import ScoringMode
from .search import DecodeResult, beam_decode

WORKERS_ENV = "BREVITY_WORKERS"

_state: dict = {}


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {value!r}") from None
    return max(n, 1)


def _init(model, mode, k, max_len, trace):
    _state.update(model=model, mode=mode, k=k, max_len=max_len, trace=trace)


def _decode_one(source) -> DecodeResult:
    s = _state
    return beam_decode(s["model"], s["mode"], source, s["k"], s["max_len"], s["trace"])


def decode_corpus(model, mode: ScoringMode, sources: Sequence[Sequence[int]], k: int,
                  max_len: int | None = None, workers: int | None = None,
                  trace: bool = False) -> list[DecodeResult]:
    workers = default_workers() if workers is None else workers
    sources = [tuple(s) for s in sources]
    if workers <= 1 or len(sources) < 2:
        return [beam_decode(model, mode, s, k, max_len, trace) for s in sources]
    chunk = max(1, len(sources) // (4 * workers))
    with ProcessPoolExecutor(workers, initializer=_init,
                             initargs=(model, mode, k, max_len, trace)) as pool:
        return list(pool.map(_decode_one, sources, chunksize=chunk))


def best_outputs(results: Sequence[DecodeResult]) -> list[tuple[int, ...]]:
    return [r.best.tokens for r in results]

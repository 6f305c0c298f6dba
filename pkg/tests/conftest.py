"""Shared fixtures: small random table models for search oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from brevity.corpus import EOS, Vocabulary
from brevity.model import TableModel
from brevity.model.table import ANY


def random_table_model(rng: np.random.Generator, n_words: int, max_len: int,
                       concentration: float = 0.7) -> TableModel:
    """Every prefix up to ``max_len`` gets its own Dirichlet draw over words and ``</s>``.

    Reserved ids other than ``</s>`` keep probability zero, so the effective
    vocabulary is ``n_words + 1``.
    """
    tgt = Vocabulary([f"w{i}" for i in range(n_words)])
    src = Vocabulary(["f"])
    words = [tgt.index(f"w{i}") for i in range(n_words)]
    entries = {}
    for length in range(max_len + 1):
        for prefix in itertools.product(words, repeat=length):
            probs = rng.dirichlet([concentration] * (n_words + 1))
            dist = {w: float(p) for w, p in zip(words, probs[:-1])}
            dist[EOS] = float(1.0 - sum(probs[:-1]))
            entries[(ANY, prefix)] = dist
    return TableModel(src, tgt, entries)


SOURCE = (3,)


@pytest.fixture
def table_rng():
    return np.random.default_rng(20180601)


# lines printed by the acceptance suite, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

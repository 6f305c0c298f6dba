"""Hand-specified table models.

Spec format, one entry per line, tab separated::

    source<TAB>prefix<TAB>token<TAB>prob

``source`` and ``prefix`` are space-separated token strings.  ``*`` as the
source matches any source; ``*`` as the prefix matches any prefix not listed
explicitly.  The empty prefix is an empty field.  Three-field lines omit the
source (equivalent to ``*``).  ``</s>`` names the end-of-sentence token and
``#`` starts a comment line.  Prefixes with no entry at all get the default
distribution, which puts all its mass on ``</s>``.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import EOS, EOS_TOKEN, Vocabulary
from .base import NEG_INF, ModelError, eos_only

ANY = "*"

Key = tuple  # (source ids or ANY, prefix ids or ANY)


class TableModel:
    kind = "table"

    def __init__(self, src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                 entries: dict[Key, dict[int, float]]):
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.entries = entries
        size = len(tgt_vocab)
        self._table: dict[Key, np.ndarray] = {}
        for key, probs in entries.items():
            total = math.fsum(probs.values())
            if abs(total - 1.0) > 1e-6 or any(p < 0 for p in probs.values()):
                raise ModelError(
                    f"distribution for prefix {self._describe(key)} sums to {total:.9g}, not 1")
            lp = np.full(size, NEG_INF)
            for tok, p in probs.items():
                if p > 0:
                    lp[tok] = math.log(p)
            lp.flags.writeable = False
            self._table[key] = lp
        self._default = eos_only(size)
        self._default.flags.writeable = False

    def _describe(self, key: Key) -> str:
        src, prefix = key
        src_s = ANY if src == ANY else " ".join(self.src_vocab.decode(src))
        pre_s = ANY if prefix == ANY else " ".join(self.tgt_vocab.decode(prefix))
        return f"[{pre_s}] (source {src_s})"

    def next_logprobs(self, source: Sequence[int], prefix: Sequence[int]) -> np.ndarray:
        source, prefix = tuple(source), tuple(prefix)
        for key in ((source, prefix), (ANY, prefix), (source, ANY), (ANY, ANY)):
            lp = self._table.get(key)
            if lp is not None:
                return lp
        return self._default

    def to_payload(self) -> dict:
        rows = []
        for (src, prefix), probs in self.entries.items():
            rows.append([src if src == ANY else list(src),
                         prefix if prefix == ANY else list(prefix),
                         sorted([tok, p] for tok, p in probs.items())])
        return {"entries": rows}

    @classmethod
    def from_payload(cls, payload: dict, src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> "TableModel":
        entries: dict[Key, dict[int, float]] = OrderedDict()
        for src, prefix, probs in payload["entries"]:
            key = (src if src == ANY else tuple(src), prefix if prefix == ANY else tuple(prefix))
            entries[key] = {int(tok): float(p) for tok, p in probs}
        return cls(src_vocab, tgt_vocab, entries)


def table_model_from_spec(text: str) -> TableModel:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 3:
            fields = [ANY] + fields
        if len(fields) != 4:
            raise ModelError(f"line {lineno}: expected 3 or 4 tab-separated fields")
        src, prefix, token, prob = fields
        try:
            p = float(prob)
        except ValueError:
            raise ModelError(f"line {lineno}: bad probability {prob!r}") from None
        rows.append((lineno, src.strip(), prefix.strip(), token.strip(), p))

    src_vocab, tgt_vocab = Vocabulary(), Vocabulary()
    for _, src, prefix, token, _ in rows:
        if src != ANY:
            for tok in src.split():
                src_vocab.add(tok)
        if prefix != ANY:
            for tok in prefix.split():
                tgt_vocab.add(tok)
        if token != EOS_TOKEN:
            tgt_vocab.add(token)

    entries: dict[Key, dict[int, float]] = OrderedDict()
    for lineno, src, prefix, token, p in rows:
        key = (ANY if src == ANY else src_vocab.encode(src.split()),
               ANY if prefix == ANY else tgt_vocab.encode(prefix.split()))
        if EOS in (key[1] if key[1] != ANY else ()):
            raise ModelError(f"line {lineno}: prefix must not contain </s>")
        tok = EOS if token == EOS_TOKEN else tgt_vocab.index(token)
        dist = entries.setdefault(key, {})
        if tok in dist:
            raise ModelError(f"line {lineno}: duplicate entry for {token!r}")
        dist[tok] = p
    return TableModel(src_vocab, tgt_vocab, entries)


def load_table_spec(path: str | Path) -> TableModel:
    return table_model_from_spec(Path(path).read_text(encoding="utf-8"))


def figure1_spec() -> str:
    from importlib import resources

    return resources.files("brevity.data").joinpath("figure1.model").read_text(encoding="utf-8")


def figure1_model() -> TableModel:
    """The word-by-word un hélicoptère automaton with label bias."""
    return table_model_from_spec(figure1_spec())

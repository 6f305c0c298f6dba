"""Binary model files.

Layout: 8 magic bytes, little-endian uint32 format version, uint64 payload
length, then a UTF-8 JSON payload holding the model kind, both vocabularies
and the model parameters.  JSON is written with sorted keys so that saving the
same model twice gives identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

from ..corpus import Vocabulary
from .base import ModelError
from .budget import BudgetModel
from .table import TableModel
from .toy import ToyTransducer

MAGIC = b"BRVMODEL"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ")

_KINDS = {cls.kind: cls for cls in (TableModel, ToyTransducer, BudgetModel)}


def model_bytes(model) -> bytes:
    payload = {
        "kind": model.kind,
        "src_vocab": model.src_vocab.tokens,
        "tgt_vocab": model.tgt_vocab.tokens,
        "model": model.to_payload(),
    }
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(body)) + body


def save_model(model, path: str | Path) -> None:
    Path(path).write_bytes(model_bytes(model))


def is_model_file(path: str | Path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def load_model(path: str | Path):
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) and data and MAGIC.startswith(data):
        raise ModelError("unexpected end of model file")
    if data[:len(MAGIC)] != MAGIC:
        raise ModelError("not a model file")
    if len(data) < _HEADER.size:
        raise ModelError("unexpected end of model file")
    _, version, length = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    body = data[_HEADER.size:]
    if len(body) < length:
        raise ModelError("unexpected end of model file")
    if len(body) > length:
        raise ModelError("trailing bytes after model payload")
    payload = json.loads(body.decode("utf-8"))
    cls = _KINDS.get(payload["kind"])
    if cls is None:
        raise ModelError(f"unknown model kind {payload['kind']!r}")
    src_vocab = Vocabulary.from_list(payload["src_vocab"])
    tgt_vocab = Vocabulary.from_list(payload["tgt_vocab"])
    return cls.from_payload(payload["model"], src_vocab, tgt_vocab)

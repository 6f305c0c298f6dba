from .base import (
    ConditionalModel,
    ModelError,
    check_distribution,
    logsumexp,
    next_logprobs,
    sequence_logprob,
)
from .budget import BudgetModel, BudgetParams
from .io import is_model_file, load_model, model_bytes, save_model
from .table import TableModel, figure1_model, load_table_spec, table_model_from_spec
from .toy import ToyTransducer, train_toy

__all__ = [
    "BudgetModel",
    "BudgetParams",
    "ConditionalModel",
    "ModelError",
    "TableModel",
    "ToyTransducer",
    "check_distribution",
    "figure1_model",
    "is_model_file",
    "load_any_model",
    "load_model",
    "load_table_spec",
    "logsumexp",
    "model_bytes",
    "next_logprobs",
    "save_model",
    "sequence_logprob",
    "table_model_from_spec",
    "train_toy",
]


def load_any_model(path):
    """Binary model file or, failing the magic check, a table-model spec."""
    if is_model_file(path):
        return load_model(path)
    return load_table_spec(path)

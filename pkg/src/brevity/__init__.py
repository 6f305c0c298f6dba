"""Beam search, length corrections and word-reward tuning for toy sequence models."""

from .corpus import BOS, EOS, UNK, ParallelCorpus, Vocabulary, load_parallel
from .evaluation import corpus_bleu, length_report
from .scoring import Baseline, Gnmt, LengthNorm, ScoringMode, WordReward, parse_mode
from .search import beam_decode, exhaustive_decode, greedy_decode
from .tuning import TunerConfig, tune_word_reward

__version__ = "0.1.0"

__all__ = [
    "BOS", "EOS", "UNK", "Baseline", "Gnmt", "LengthNorm", "ParallelCorpus", "ScoringMode",
    "TunerConfig", "Vocabulary", "WordReward", "beam_decode", "corpus_bleu", "exhaustive_decode",
    "greedy_decode", "length_report", "load_parallel", "parse_mode", "tune_word_reward",
]

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brevity.evaluation import (
    corpus_bleu,
    cumulative_bleu_by_length,
    length_report,
    plot_report,
    report_tsv,
)

# Computed once with nltk.translate.bleu_score.corpus_bleu(weights=(1/3,)*3)
# before the implementation existed; equal to exp(1 - 4/3).
CAT_SAT_BLEU3 = 0.7165313105737893

sentences = st.lists(st.sampled_from("a b c d e".split()), min_size=0, max_size=8)


def test_identical_corpora():
    refs = [["the", "cat", "sat", "on", "the", "mat"], ["a", "b", "c", "d", "e"]]
    score = corpus_bleu(refs, refs)
    assert score.score == 1.0
    assert score.brevity_penalty == 1.0


def test_all_empty():
    refs = [["a", "b", "c", "d"]] * 3
    score = corpus_bleu([[]] * 3, refs)
    assert score.score == 0.0
    assert score.brevity_penalty == 0.0


def test_cat_sat_bleu4_is_zero():
    score = corpus_bleu([["the", "cat", "sat"]], [["the", "cat", "sat", "down"]])
    assert score.precisions == [1.0, 1.0, 1.0, 0.0]
    assert score.score == 0.0


def test_cat_sat_bleu3_matches_frozen_oracle():
    score = corpus_bleu([["the", "cat", "sat"]], [["the", "cat", "sat", "down"]], max_order=3)
    assert score.score == pytest.approx(CAT_SAT_BLEU3, abs=1e-9)
    assert score.brevity_penalty == pytest.approx(math.exp(1 - 4 / 3), abs=1e-15)


def test_count_mismatch():
    with pytest.raises(ValueError):
        corpus_bleu([["a"]], [])


def test_clipping():
    score = corpus_bleu([["the"] * 4], [["the", "cat", "the", "dog"]], max_order=1)
    assert score.precisions == [0.5]


@settings(max_examples=50)
@given(st.lists(st.tuples(sentences, sentences), min_size=1, max_size=8), st.randoms())
def test_permutation_invariance(pairs, rnd):
    hyps, refs = map(list, zip(*pairs))
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    h2, r2 = map(list, zip(*shuffled))
    assert corpus_bleu(hyps, refs).score == corpus_bleu(h2, r2).score


@given(st.integers(1, 50), st.integers(1, 50))
def test_brevity_penalty_direction(c, r):
    hyp_short = [["a"] * c]
    hyp_shorter = [["a"] * max(c - 1, 1)]
    ref = [["a"] * r]
    if c - 1 >= 1 and c <= r:
        assert (corpus_bleu(hyp_shorter, ref, 1).brevity_penalty
                < corpus_bleu(hyp_short, ref, 1).brevity_penalty)


# --- length report --------------------------------------------------------


def test_identical_lengths():
    refs = [["a"] * n for n in (2, 5, 7)]
    report = length_report(refs, refs)
    assert report.ratio == 1.0
    assert report.exact_one == 3
    assert report.total == 3


def test_all_empty_lengths():
    report = length_report([[]] * 4, [["a"]] * 4)
    assert report.ratio == 0.0
    assert report.exact_zero == 4
    assert report.empty_fraction == 1.0


def test_corpus_ratio_versus_sentence_bins():
    report = length_report([["a"] * 3, ["a"] * 9], [["a"] * 6, ["a"] * 6])
    assert report.ratio == 1.0
    assert report.bin_count_at(0.5) == 1
    assert report.bin_count_at(1.5) == 1
    assert report.mean_sentence_ratio == 1.0


def test_bin_edges_are_right_open_and_two_is_last_bin():
    report = length_report([["a"] * 21, ["a"] * 40, ["a"] * 41], [["a"] * 20] * 3)
    assert report.bin_count_at(1.05) == 1
    assert report.bin_count_at(1.95) == 1
    assert report.overflow == 1


def test_empty_reference_excluded_from_histogram_only():
    report = length_report([["a"], ["a", "b"]], [[], ["a", "b"]])
    assert report.excluded == 1
    assert report.total == 1
    assert report.ratio == 1.5


@given(st.lists(st.tuples(sentences, sentences), max_size=20))
def test_histogram_totals(pairs):
    hyps = [h for h, _ in pairs]
    refs = [r for _, r in pairs]
    report = length_report(hyps, refs)
    assert report.total + report.excluded == len(pairs)


# --- cumulative curve -----------------------------------------------------


def test_infinite_threshold_is_corpus_bleu():
    rng = random.Random(1)
    refs = [[rng.choice("abcd") for _ in range(rng.randint(1, 9))] for _ in range(30)]
    hyps = [r[: rng.randint(0, len(r))] + ["x"] for r in refs]
    [(limit, score, count)] = cumulative_bleu_by_length(hyps, refs, [math.inf])
    assert score.score == corpus_bleu(hyps, refs).score
    assert count == 30


def test_absent_point_for_empty_subset():
    refs = [["a"] * 8, ["b"] * 8]
    hyps = [["a"] * 8, ["b"] * 7]
    curve = cumulative_bleu_by_length(hyps, refs, [5, 10])
    assert curve[0] == (5, None, 0)
    assert curve[1][1].score == corpus_bleu(hyps, refs).score


def test_thresholds_must_ascend():
    with pytest.raises(ValueError):
        cumulative_bleu_by_length([["a"]], [["a"]], [10, 5])


def test_report_blocks(tmp_path):
    hyps = [["a", "b"], ["c"]]
    refs = [["a", "b"], ["c", "d"]]
    text = report_tsv(hyps, refs)
    assert text.startswith("# summary\nmetric\tvalue\n")
    assert "\n# histogram\nbin\tcount\n" in text
    assert "\n# cumulative\nmax_ref_len\tsentences\tbleu\n" in text
    assert "length_ratio\t0.7500" in text


def test_plot_is_reproducible(tmp_path):
    pytest.importorskip("matplotlib")
    hyps = [["a", "b"], ["c"]]
    refs = [["a", "b"], ["c", "d"]]
    plot_report(tmp_path / "a.svg", hyps, refs)
    plot_report(tmp_path / "b.svg", hyps, refs)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


long_sentences = st.lists(st.sampled_from("a b c d e".split()), min_size=4, max_size=10)


# nltk counts at least one n-gram per sentence, so hypotheses shorter than 4
# tokens are outside the region where the two definitions coincide
@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(long_sentences, sentences), min_size=1, max_size=10))
def test_agrees_with_nltk_when_all_precisions_positive(pairs):
    nltk_bleu = pytest.importorskip("nltk.translate.bleu_score")
    hyps = [h for h, _ in pairs]
    refs = [r for _, r in pairs]
    ours = corpus_bleu(hyps, refs)
    if min(ours.precisions) == 0.0:
        return
    theirs = nltk_bleu.corpus_bleu([[r] for r in refs], hyps)
    assert ours.score == pytest.approx(theirs, abs=1e-9)

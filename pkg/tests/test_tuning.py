import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brevity.decoding import decode_corpus
from brevity.experiments import build_budget_demo
from brevity.scoring import Baseline
from brevity.tuning import (
    CONVERGED,
    MAX_EPOCHS,
    TunerConfig,
    evaluate_gamma_grid,
    perceptron_update,
    read_gamma,
    tune_word_reward,
    tuner_tsv,
    write_gamma,
)


@pytest.fixture(scope="module")
def demo():
    return build_budget_demo()


def test_update_at_clip_boundary():
    g, update = perceptron_update([10, 12], [8, 9], eta=0.2, clip=0.5)
    assert g == 2.5
    assert update == 0.5


def test_update_clipped_negative():
    g, update = perceptron_update([10], [30], eta=0.2, clip=0.5)
    assert 0.2 * g == -4.0
    assert update == -0.5


def test_zero_gradient():
    assert perceptron_update([4, 7], [4, 7], eta=0.2, clip=0.5) == (0.0, 0.0)


def test_mismatched_lengths():
    with pytest.raises(ValueError):
        perceptron_update([1, 2], [1], 0.2, 0.5)


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=30),
       st.floats(0.01, 2.0), st.floats(0.01, 2.0))
def test_update_sign_and_bound(pairs, eta, clip):
    refs, hyps = zip(*pairs)
    g, update = perceptron_update(refs, hyps, eta, clip)
    assert abs(update) <= clip
    assert math.copysign(1, update) == math.copysign(1, g) or update == 0


def test_converges_when_lengths_match(demo):
    model, dev, _ = demo
    state = tune_word_reward(model, dev.head(20), TunerConfig(beam=1))
    assert state.stop_reason == CONVERGED
    assert len(state.history) == 1
    assert state.history[0].update == 0.0


def test_budget_dev_set_tunes_positive(demo):
    model, dev, _ = demo
    config = TunerConfig(beam=10)
    state = tune_word_reward(model, dev, config)
    assert state.stop_reason == CONVERGED
    assert state.gamma > 0
    last = state.history[-1]
    assert abs(last.mean_hyp_len - last.mean_ref_len) < config.tol / config.eta


def test_max_epochs_stop(demo):
    model, dev, _ = demo
    state = tune_word_reward(model, dev.head(30), TunerConfig(beam=50, max_epochs=1))
    assert state.stop_reason == MAX_EPOCHS
    assert len(state.history) == 1


def test_report_is_deterministic_and_headed(demo):
    model, dev, _ = demo
    a = tuner_tsv(tune_word_reward(model, dev.head(30), TunerConfig(beam=10)))
    b = tuner_tsv(tune_word_reward(model, dev.head(30), TunerConfig(beam=10, workers=2)))
    assert a == b
    assert a.splitlines()[0] == "epoch\tgamma\tmean_ref_len\tmean_hyp_len\traw_grad\tupdate"


def test_gamma_file_round_trip(tmp_path):
    write_gamma(tmp_path / "g.txt", 0.716)
    assert read_gamma(tmp_path / "g.txt") == 0.716
    (tmp_path / "bad.txt").write_text("abc\n")
    with pytest.raises(ValueError):
        read_gamma(tmp_path / "bad.txt")


def test_grid_zero_matches_baseline(demo):
    model, dev, _ = demo
    subset = dev.head(40)
    point = evaluate_gamma_grid(model, subset, [0.0], k=20)[0]
    base = decode_corpus(model, Baseline(), subset.sources, 20)
    from brevity.evaluation import corpus_bleu

    assert point.bleu == corpus_bleu([r.best.tokens for r in base], subset.targets).points


def test_invalid_config():
    with pytest.raises(ValueError):
        TunerConfig(eta=0).validate()
    with pytest.raises(ValueError):
        TunerConfig(max_epochs=0).validate()

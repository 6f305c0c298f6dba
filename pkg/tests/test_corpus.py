import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brevity.corpus import (
    BOS,
    EOS,
    UNK,
    CorpusError,
    ParallelCorpus,
    SyntheticTaskConfig,
    Vocabulary,
    generate_synthetic,
    gloss_table,
    load_parallel,
    split,
    write_parallel,
)
from brevity.rng import GENERATOR_NAME, PortableRng


def _write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


# --- rng ------------------------------------------------------------------


def test_rng_matches_numpy_pcg64_raw_stream():
    ours = PortableRng(42)
    ref = np.random.PCG64(42).random_raw(50)
    assert [ours.raw() for _ in range(50)] == [int(x) for x in ref]


def test_rng_frozen_values():
    r = PortableRng(42)
    assert r.raw() == 14276969152011380360
    r = PortableRng(42)
    assert (r.below(10), r.uniform(), r.integer(1, 6)) == (0, 0.4388784397520523, 3)


@given(st.integers(0, 2**32), st.integers(1, 1000))
def test_rng_below_in_range(seed, n):
    r = PortableRng(seed)
    assert all(0 <= r.below(n) < n for _ in range(20))


@given(st.integers(0, 2**32), st.lists(st.integers(), max_size=30))
def test_rng_shuffle_is_permutation(seed, items):
    shuffled = list(items)
    PortableRng(seed).shuffle(shuffled)
    assert sorted(shuffled) == sorted(items)


# --- vocabulary -----------------------------------------------------------


def test_reserved_ids():
    v = Vocabulary(["x"])
    assert (v.index("<s>"), v.index("</s>"), v.index("<unk>")) == (BOS, EOS, UNK) == (0, 1, 2)
    assert v.index("x") == 3
    assert v.index("never-seen") == UNK


def test_vocabulary_rejects_reserved_collision():
    with pytest.raises(CorpusError):
        Vocabulary().add("</s>")


def test_vocabulary_file_round_trip(tmp_path):
    v = Vocabulary(["b", "a", "c"])
    v.save(tmp_path / "v.txt")
    lines = (tmp_path / "v.txt").read_text(encoding="utf-8").splitlines()
    assert lines[:3] == ["<s>", "</s>", "<unk>"]
    assert Vocabulary.load(tmp_path / "v.txt") == v


def test_vocabulary_file_without_sentinels(tmp_path):
    _write(tmp_path / "v.txt", ["a", "b", "c"])
    with pytest.raises(CorpusError, match="first three lines"):
        Vocabulary.load(tmp_path / "v.txt")


# --- load_parallel --------------------------------------------------------


def test_two_three_line_files(tmp_path):
    src = _write(tmp_path / "a.src", ["x y", "y", "z x z"])
    tgt = _write(tmp_path / "a.tgt", ["X Y", "Y", ""])
    corpus = load_parallel(src, tgt)
    assert len(corpus) == 3
    assert corpus.targets[2] == ()
    assert corpus.src_vocab.decode(corpus.sources[2]) == ["z", "x", "z"]


def test_line_count_mismatch(tmp_path):
    src = _write(tmp_path / "a.src", ["a", "b", "c"])
    tgt = _write(tmp_path / "a.tgt", ["a", "b", "c", "d"])
    with pytest.raises(CorpusError, match="line count mismatch 3 vs 4"):
        load_parallel(src, tgt)


def test_invalid_utf8_names_line(tmp_path):
    src = _write(tmp_path / "a.src", ["a", "b"])
    tgt = tmp_path / "a.tgt"
    tgt.write_bytes(b"ok\n\xff\xfe\n")
    with pytest.raises(CorpusError, match="line 2"):
        load_parallel(src, tgt)


def test_min_count_maps_rare_tokens_to_unk(tmp_path):
    src = _write(tmp_path / "a.src", ["a a b", "a"])
    tgt = _write(tmp_path / "a.tgt", ["x", "x"])
    corpus = load_parallel(src, tgt, min_count=2)
    assert corpus.sources[0] == (3, 3, UNK)


def test_empty_source_line_rejected(tmp_path):
    src = _write(tmp_path / "a.src", ["a", ""])
    tgt = _write(tmp_path / "a.tgt", ["x", "y"])
    with pytest.raises(CorpusError, match="empty source"):
        load_parallel(src, tgt)


def test_stored_sentences_never_contain_eos():
    v = Vocabulary(["a"])
    with pytest.raises(CorpusError):
        ParallelCorpus([((3,), (3, EOS))], v, v)


# --- synthetic generator --------------------------------------------------


def test_same_seed_byte_identical(tmp_path):
    cfg = SyntheticTaskConfig(n_pairs=50, seed=5)
    for tag in ("a", "b"):
        write_parallel(generate_synthetic(cfg), tmp_path / f"{tag}.src", tmp_path / f"{tag}.tgt")
    assert (tmp_path / "a.src").read_bytes() == (tmp_path / "b.src").read_bytes()
    assert (tmp_path / "a.tgt").read_bytes() == (tmp_path / "b.tgt").read_bytes()


def test_header_records_seed_and_generator(tmp_path):
    corpus = generate_synthetic(SyntheticTaskConfig(n_pairs=5, seed=9))
    write_parallel(corpus, tmp_path / "c.src", tmp_path / "c.tgt")
    first = (tmp_path / "c.src").read_text(encoding="utf-8").splitlines()[0]
    assert first == f"# seed=9 generator={GENERATOR_NAME}"
    reloaded = load_parallel(tmp_path / "c.src", tmp_path / "c.tgt",
                             corpus.src_vocab, corpus.tgt_vocab)
    assert reloaded.pairs == corpus.pairs


def test_different_seeds_differ():
    a = generate_synthetic(SyntheticTaskConfig(n_pairs=20, seed=1))
    b = generate_synthetic(SyntheticTaskConfig(n_pairs=20, seed=2))
    assert a.pairs != b.pairs


def test_fertility_one_preserves_length():
    corpus = generate_synthetic(SyntheticTaskConfig(n_pairs=200, fertility={1: 1.0}, seed=3))
    assert all(len(s) == len(t) for s, t in corpus)


def test_fertility_mix_mean_ratio():
    cfg = SyntheticTaskConfig(n_pairs=10_000, max_len=20, fertility={1: 0.5, 2: 0.5}, seed=4)
    corpus = generate_synthetic(cfg)
    ratio = np.mean([len(t) / len(s) for s, t in corpus])
    assert abs(ratio - 1.5) <= 0.02


def test_targets_follow_gloss_table():
    cfg = SyntheticTaskConfig(n_pairs=30, fertility={1: 1.0}, seed=8)
    table = gloss_table(cfg)
    for src, tgt in generate_synthetic(cfg):
        assert tgt == tuple(table[s][0] for s in src)


def test_invalid_fertility_rejected():
    with pytest.raises(CorpusError):
        generate_synthetic(SyntheticTaskConfig(fertility={1: 0.5, 2: 0.2}))


# --- split ----------------------------------------------------------------


def _tiny(n):
    v = Vocabulary(["a"])
    return ParallelCorpus([((3,) * (i + 1), (3,)) for i in range(n)], v, v)


def test_split_sizes_floor_rule():
    train, dev, test = split(_tiny(10), (0.8, 0.1, 0.1), seed=1)
    assert (len(train), len(dev), len(test)) == (8, 1, 1)


def test_split_fractions_must_sum_to_one():
    with pytest.raises(CorpusError, match="fractions must sum to 1"):
        split(_tiny(10), (0.5, 0.5, 0.1), seed=1)


def test_split_too_small():
    with pytest.raises(CorpusError):
        split(_tiny(2), (0.8, 0.1, 0.1), seed=1)


@settings(max_examples=30)
@given(st.integers(3, 60), st.integers(0, 10**6))
def test_split_is_seeded_partition(n, seed):
    corpus = _tiny(n)
    parts = split(corpus, (0.6, 0.2, 0.2), seed)
    again = split(corpus, (0.6, 0.2, 0.2), seed)
    assert [p.pairs for p in parts] == [p.pairs for p in again]
    assert sorted(pair for p in parts for pair in p.pairs) == sorted(corpus.pairs)

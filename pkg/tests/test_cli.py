import pytest

from brevity.cli import main
from brevity.config import ConfigError, default_config, dump_defaults, parse_config


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert main(["gen-data", "--out-dir", str(out), "--pairs", "120", "--seed", "3",
                 "--src-vocab", "12", "--tgt-vocab", "20", "--max-len", "8"]) == 0
    assert main(["train", "--out-dir", str(out), "--train-src", str(out / "train.src"),
                 "--train-tgt", str(out / "train.tgt")]) == 0
    return out


# --- config ---------------------------------------------------------------


def test_dump_defaults_round_trips(capsys):
    code, out, _ = run(capsys, "config", "--dump-defaults")
    assert code == 0
    assert out == dump_defaults()
    assert parse_config(out) == default_config()


def test_unknown_key_names_the_key():
    with pytest.raises(ConfigError, match="beem_size"):
        parse_config("[decode]\nbeem_size = 10\n")


def test_unknown_key_exits_nonzero(tmp_path, capsys):
    (tmp_path / "c.ini").write_text("[decode]\nbeem_size = 10\n")
    code, _, err = run(capsys, "sweep-beam", "--config", tmp_path / "c.ini")
    assert code != 0
    assert "beem_size" in err
    assert len(err.strip().splitlines()) == 1


def test_beams_must_ascend():
    with pytest.raises(ConfigError):
        parse_config("[decode]\nbeams = 10,5\n").validate()


def test_missing_path_rejected():
    with pytest.raises(ConfigError, match="no such file"):
        parse_config("[data]\ndev_src = /nonexistent/file\n").validate()


def test_gamma_grid_includes_stop():
    cfg = parse_config("[gamma]\ngrid = 0:1:0.25\n")
    assert cfg.gamma_grid == [0.0, 0.25, 0.5, 0.75, 1.0]


# --- commands -------------------------------------------------------------


def test_gen_data_files(data):
    for name in ("train", "dev", "test"):
        assert (data / f"{name}.src").is_file()
    assert (data / "vocab.tgt").read_text().splitlines()[:3] == ["<s>", "</s>", "<unk>"]
    assert (data / "model.bin").is_file()


def test_reward_zero_equals_baseline(data, tmp_path, capsys):
    outs = []
    for tag, score in (("a", "baseline"), ("b", "reward:gamma=0")):
        code, _, _ = run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
                         "--score", score, "--beam", 5, "--out-dir", tmp_path / tag)
        assert code == 0
        outs.append((tmp_path / tag / "hyp.txt").read_bytes())
    assert outs[0] == outs[1]


def test_tune_then_decode_tuned(data, tmp_path, capsys):
    code, out, _ = run(capsys, "tune", "--model", data / "model.bin", "--dev-src", data / "dev.src",
                       "--dev-tgt", data / "dev.tgt", "--beam", 3, "--out-dir", tmp_path)
    assert code == 0
    gamma = float((tmp_path / "tuned_gamma.txt").read_text())
    assert (tmp_path / "tune.tsv").read_text().splitlines()[0].startswith("epoch\tgamma")
    code, out, _ = run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
                       "--score", "reward:gamma=@tuned", "--beam", 3, "--out-dir", tmp_path)
    assert code == 0
    assert f"reward:gamma={gamma!r}" in out
    explicit = tmp_path / "explicit"
    run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
        "--score", f"reward:gamma={gamma!r}", "--beam", 3, "--out-dir", explicit)
    assert (explicit / "hyp.txt").read_bytes() == (tmp_path / "hyp.txt").read_bytes()


def test_tuned_without_file(data, tmp_path, capsys):
    code, _, err = run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
                       "--score", "reward:gamma=@tuned", "--out-dir", tmp_path)
    assert code == 1
    assert "no gamma file" in err


def test_missing_file_one_line_diagnostic(tmp_path, capsys):
    code, _, err = run(capsys, "decode", "--model", tmp_path / "nope.bin", "--src", tmp_path / "x")
    assert code == 1
    assert len(err.strip().splitlines()) == 1


def test_truncated_model(data, tmp_path, capsys):
    (tmp_path / "m.bin").write_bytes((data / "model.bin").read_bytes()[:20])
    code, _, err = run(capsys, "decode", "--model", tmp_path / "m.bin", "--src", data / "test.src",
                       "--out-dir", tmp_path)
    assert code == 1
    assert "unexpected end of model file" in err


def test_bad_score(data, capsys):
    code, _, err = run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
                       "--score", "loud")
    assert code == 1
    assert "bad scoring mode" in err


def test_evaluate_writes_report(data, tmp_path, capsys):
    code, out, _ = run(capsys, "evaluate", "--hyp", data / "test.tgt", "--ref", data / "test.tgt",
                       "--out-dir", tmp_path)
    assert code == 0
    assert "bleu\t100.00" in out
    assert (tmp_path / "report.tsv").read_text().startswith("# summary")


def test_demo_label_bias(tmp_path, capsys):
    code, out, _ = run(capsys, "demo-label-bias", "--out-dir", tmp_path)
    assert code == 0
    assert "FAIL" not in out
    assert (tmp_path / "label_bias_trace.tsv").is_file()


def _cell(table, fraction, mode, metric, beam):
    header = table[0]
    for row in table[1:]:
        if row[:3] == [fraction, mode, metric]:
            return row[header.index(beam)]
    raise KeyError((fraction, mode, metric))


def test_sweep_cells_reproducible_by_decode_and_evaluate(data, tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text(
        "[data]\nmodel = toy\n"
        f"train_src = {data / 'train.src'}\ntrain_tgt = {data / 'train.tgt'}\n"
        f"dev_src = {data / 'dev.src'}\ndev_tgt = {data / 'dev.tgt'}\n"
        f"test_src = {data / 'test.src'}\ntest_tgt = {data / 'test.tgt'}\n"
        f"out_dir = {tmp_path / 'sweep'}\n"
        "[decode]\nmodes = baseline,norm,reward\nbeams = 1,4\n"
        "[train]\nfractions = 0.5,1.0\n")
    code, out, _ = run(capsys, "sweep-beam", "--config", ini)
    assert code == 0
    table = [line.split("\t") for line in (tmp_path / "sweep" / "sweep_beam.tsv").read_text().splitlines()]
    assert table[0] == ["fraction", "mode", "metric", "1", "4"]
    modes_with_gamma = {row[1] for row in table[1:] if row[2] == "gamma"}
    assert modes_with_gamma == {"reward"}

    run(capsys, "decode", "--model", data / "model.bin", "--src", data / "test.src",
        "--score", "norm", "--beam", 4, "--out-dir", tmp_path / "single")
    run(capsys, "evaluate", "--hyp", tmp_path / "single" / "hyp.txt", "--ref", data / "test.tgt",
        "--out-dir", tmp_path / "single")
    report = dict(line.split("\t") for line in (tmp_path / "single" / "report.tsv").read_text()
                  .split("\n\n")[0].splitlines()[2:])
    assert _cell(table, "1", "norm", "bleu", "4") == report["bleu"]
    assert float(_cell(table, "1", "norm", "length", "4")) == pytest.approx(float(report["length_ratio"]), abs=6e-4)

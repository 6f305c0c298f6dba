"""Demos and sweeps: the label-bias automaton, the ``</s>`` budget demo, beam
and reward sweeps.  Every function writes TSV files under an output directory
and returns the numbers it wrote so tests can check them without reparsing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .config import BUILTIN_BUDGET, TOY, ExperimentConfig
from .corpus import (
    ParallelCorpus,
    SyntheticTaskConfig,
    generate_synthetic,
    gloss_table,
    load_parallel,
    write_parallel,
)
from .decoding import decode_corpus
from .evaluation import corpus_bleu, cumulative_bleu_by_length, length_report
from .model import BudgetModel, BudgetParams, figure1_model, load_any_model, save_model, train_toy
from .scoring import Baseline, ScoringMode, WordReward, parse_mode
from .search import DecodeResult, beam_decode, exhaustive_decode, greedy_decode
from .tuning import TunerConfig, evaluate_gamma_grid, timing_tsv, tune_word_reward, tuner_tsv, write_gamma

Log = Callable[[str], None]


def _quiet(_: str) -> None:
    pass


def _write(path: Path, lines: Sequence[str]) -> None:
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _f(x: float | None, digits: int = 4) -> str:
    if x is None:
        return "NA"
    return f"{x:.{digits}f}"


# ---------------------------------------------------------------------------
# label bias


@dataclass
class LabelBiasReport:
    text: str
    ok: bool


def demo_label_bias(out_dir: Path | None = None) -> LabelBiasReport:
    """Exhaustive, greedy and beam-2 decoding of the shipped two-word automaton."""
    model = figure1_model()
    src = model.src_vocab.encode("un hélicoptère".split())
    words = lambda h: " ".join(model.tgt_vocab.decode(h.tokens))  # noqa: E731
    lines = ["source: un hélicoptère", "", "exhaustive ranking:"]
    exhaustive = exhaustive_decode(model, Baseline(), src, max_len=3)
    for rank, h in enumerate(exhaustive.hypotheses, start=1):
        lines.append(f"  {rank}. {words(h):<16} p={math.exp(h.score):.4f}")
    greedy = greedy_decode(model, Baseline(), src).best
    lines += ["", f"greedy: {words(greedy)} p={math.exp(greedy.score):.4f}", "", "beam k=2 trace:"]
    beam = beam_decode(model, Baseline(), src, 2, trace=True)
    for step, snapshot in enumerate(beam.trace.steps, start=1):
        items = ", ".join(f"[{words(h)}{' </s>' if h.complete else ''}] {h.score:.4f}"
                          for h in snapshot)
        lines.append(f"  t={step}: {items}")
    lines.append(f"beam k=2 best: {words(beam.best)} p={math.exp(beam.best.score):.4f}")

    checks = [
        ("exhaustive best is 'an autogyro' with p=0.4",
         words(exhaustive.best) == "an autogyro" and abs(exhaustive.best.score - math.log(0.4)) <= 1e-12),
        ("greedy is 'a helicopter' with p=0.36",
         words(greedy) == "a helicopter" and abs(greedy.score - math.log(0.36)) <= 1e-12),
        ("beam k=2 best is 'an autogyro'", words(beam.best) == "an autogyro"),
    ]
    lines.append("")
    lines += [f"{'PASS' if ok else 'FAIL'}: {name}" for name, ok in checks]
    text = "\n".join(lines) + "\n"
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "label_bias.txt").write_text(text, encoding="utf-8")
        beam.trace.write_tsv(out_dir / "label_bias_trace.tsv", model.tgt_vocab)
    return LabelBiasReport(text, all(ok for _, ok in checks))


# ---------------------------------------------------------------------------
# </s> budget demo


def _budget_corpus() -> SyntheticTaskConfig:
    return SyntheticTaskConfig(n_pairs=300, src_vocab_size=40, tgt_vocab_size=100,
                               min_len=1, max_len=20, fertility={1: 1.0}, seed=11)


@dataclass
class BudgetDemo:
    corpus: SyntheticTaskConfig = field(default_factory=_budget_corpus)
    params: BudgetParams = field(default_factory=BudgetParams)
    n_dev: int = 100
    beams: tuple[int, ...] = (1, 2, 5, 10, 25, 50, 100)
    tune_beams: tuple[int, ...] = (1, 10, 100)
    trace_beam: int = 100
    thresholds: tuple[float, ...] = (5, 10, 15, 20, math.inf)


def build_budget_demo(demo: BudgetDemo = BudgetDemo()) -> tuple[BudgetModel, ParallelCorpus, ParallelCorpus]:
    """Budget model plus its dev set (first ``n_dev`` pairs) and test set (the rest)."""
    corpus = generate_synthetic(demo.corpus)
    fert = max(demo.corpus.fertility)
    gloss = {s: pair[:fert] for s, pair in gloss_table(demo.corpus).items()}
    model = BudgetModel(corpus.src_vocab, corpus.tgt_vocab, gloss, demo.params)
    dev = corpus.head(demo.n_dev)
    test = corpus.subset(range(demo.n_dev, len(corpus)))
    return model, dev, test


@dataclass
class CellResult:
    beam: int
    mode: str
    bleu: float
    length_ratio: float
    mean_sentence_ratio: float | None
    empty_fraction: float
    gamma: float | None = None
    hyps: list = field(default_factory=list, repr=False)


def _cell(results: Sequence[DecodeResult], refs, beam: int, mode: str,
          gamma: float | None = None) -> CellResult:
    hyps = [r.best.tokens for r in results]
    lengths = length_report(hyps, refs)
    return CellResult(beam, mode, corpus_bleu(hyps, refs).points, lengths.ratio,
                      lengths.mean_sentence_ratio, lengths.empty_fraction, gamma, hyps)


def _tuner_config(overrides: dict[str, float], beam: int, max_len, workers) -> TunerConfig:
    cfg = TunerConfig(beam=beam, max_len=max_len, workers=workers)
    for key, value in overrides.items():
        setattr(cfg, key, int(value) if key == "max_epochs" else value)
    return cfg


@dataclass
class BudgetDemoResult:
    baseline: list[CellResult]
    reward: list[CellResult]
    tuners: dict[int, object]
    empty_ranks: list[list[int | None]]
    cumulative: dict[str, list]


def run_budget_demo(out_dir: Path, workers: int | None = None, demo: BudgetDemo = BudgetDemo(),
                    log: Log = _quiet) -> BudgetDemoResult:
    out_dir.mkdir(parents=True, exist_ok=True)
    model, dev, test = build_budget_demo(demo)
    save_model(model, out_dir / "budget.bin")
    write_parallel(dev, out_dir / "dev.src", out_dir / "dev.tgt")
    write_parallel(test, out_dir / "test.src", out_dir / "test.tgt")
    refs = test.targets

    baseline = []
    traces = None
    for k in demo.beams:
        results = decode_corpus(model, Baseline(), test.sources, k, workers=workers,
                                trace=(k == demo.trace_beam))
        if k == demo.trace_beam:
            traces = [r.trace for r in results]
        baseline.append(_cell(results, refs, k, "baseline"))
        log(f"baseline k={k}: ratio={baseline[-1].length_ratio:.3f} "
            f"empty={baseline[-1].empty_fraction:.3f}")

    reward = []
    tuners = {}
    timing = ["beam\tepochs\tseconds"]
    for k in demo.tune_beams:
        state = tune_word_reward(model, dev, TunerConfig(beam=k, workers=workers))
        tuners[k] = state
        (out_dir / f"tune_k{k}.tsv").write_text(tuner_tsv(state), encoding="utf-8")
        (out_dir / f"tune_k{k}.timing.tsv").write_text(timing_tsv(state), encoding="utf-8")
        write_gamma(out_dir / f"tuned_gamma_k{k}.txt", state.gamma)
        timing.append(f"{k}\t{len(state.history)}\t{state.seconds:.3f}")
        results = decode_corpus(model, WordReward(state.gamma), test.sources, k, workers=workers)
        reward.append(_cell(results, refs, k, "reward", state.gamma))
        log(f"reward k={k}: gamma={state.gamma:.3f} ({state.stop_reason}) "
            f"ratio={reward[-1].length_ratio:.3f} empty={reward[-1].empty_fraction:.3f}")
    _write(out_dir / "budget_timing.tsv", timing)

    rows = ["mode\tbeam\tgamma\tbleu\tlength_ratio\tmean_sentence_ratio\tempty_fraction"]
    for c in baseline + reward:
        rows.append(f"{c.mode}\t{c.beam}\t{_f(c.gamma)}\t{_f(c.bleu, 2)}\t{_f(c.length_ratio)}\t"
                    f"{_f(c.mean_sentence_ratio)}\t{_f(c.empty_fraction)}")
    _write(out_dir / "budget_summary.tsv", rows)

    empty_ranks = [t.empty_rank for t in traces] if traces else []
    rows = ["sentence\tref_len\tstep\tempty_rank"]
    for i, ranks in enumerate(empty_ranks):
        for step, rank in enumerate(ranks, start=1):
            rows.append(f"{i}\t{len(refs[i])}\t{step}\t{'pruned' if rank is None else rank}")
            if rank is None:
                break
    _write(out_dir / "budget_empty_rank.tsv", rows)

    cumulative = {}
    rows = ["mode\tbeam\tmax_ref_len\tsentences\tbleu"]
    first, last = baseline[0], baseline[-1]
    for c in (first, last, *reward):
        curve = cumulative_bleu_by_length(c.hyps, refs, demo.thresholds)
        cumulative[f"{c.mode}_k{c.beam}"] = curve
        for limit, score, count in curve:
            rows.append(f"{c.mode}\t{c.beam}\t{limit:g}\t{count}\t"
                        f"{_f(score.points if score else None, 2)}")
    _write(out_dir / "budget_cumulative.tsv", rows)

    rows = ["mode\tbeam\tbin\tcount"]
    for c in (*baseline, *reward):
        for label, count in length_report(c.hyps, refs).histogram():
            rows.append(f"{c.mode}\t{c.beam}\t{label}\t{count}")
    _write(out_dir / "budget_histogram.tsv", rows)
    return BudgetDemoResult(baseline, reward, tuners, empty_ranks, cumulative)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class EvalSet:
    corpus: ParallelCorpus
    refs: list[list[str]]


@dataclass
class SweepModel:
    fraction: float
    model: object
    dev: EvalSet
    test: EvalSet


def _eval_set(corpus: ParallelCorpus) -> EvalSet:
    return EvalSet(corpus, [corpus.tgt_vocab.decode(t) for t in corpus.targets])


def _load_eval_set(src: str, tgt: str, model) -> EvalSet:
    corpus = load_parallel(src, tgt, model.src_vocab, model.tgt_vocab)
    refs = [line.split() for line in Path(tgt).read_text(encoding="utf-8").splitlines()
            if not line.startswith("# seed=")]
    return EvalSet(corpus, refs)


def prepare_models(cfg: ExperimentConfig, log: Log = _quiet) -> list[SweepModel]:
    paths = cfg.paths
    if cfg.model == BUILTIN_BUDGET:
        model, dev, test = build_budget_demo()
        dev_set, test_set = _eval_set(dev), _eval_set(test)
        if paths.get("dev_src"):
            dev_set = _load_eval_set(paths["dev_src"], paths["dev_tgt"], model)
        if paths.get("test_src"):
            test_set = _load_eval_set(paths["test_src"], paths["test_tgt"], model)
        return [SweepModel(1.0, model, dev_set, test_set)]
    for key in ("dev_src", "dev_tgt", "test_src", "test_tgt"):
        if not paths.get(key):
            raise ValueError(f"{key} is required unless model = {BUILTIN_BUDGET}")
    if cfg.model == TOY:
        train = load_parallel(paths["train_src"], paths["train_tgt"], min_count=cfg.min_count)
        out = []
        for fraction in cfg.fractions:
            n = max(1, round(fraction * len(train)))
            log(f"training toy transducer on {n} pairs ({fraction:g})")
            model = train_toy(train.head(n), cfg.lam, cfg.smoothing)
            out.append(SweepModel(fraction, model,
                                  _load_eval_set(paths["dev_src"], paths["dev_tgt"], model),
                                  _load_eval_set(paths["test_src"], paths["test_tgt"], model)))
        return out
    model = load_any_model(cfg.model)
    return [SweepModel(1.0, model, _load_eval_set(paths["dev_src"], paths["dev_tgt"], model),
                       _load_eval_set(paths["test_src"], paths["test_tgt"], model))]


def _decode_strings(model, mode: ScoringMode, es: EvalSet, k: int, cfg: ExperimentConfig):
    results = decode_corpus(model, mode, es.corpus.sources, k, cfg.max_len, cfg.workers)
    return [model.tgt_vocab.decode(r.best.tokens) for r in results]


def sweep_beam(cfg: ExperimentConfig, log: Log = _quiet) -> list[list[str]]:
    """Beam-size table: one row per (fraction, mode, metric), one column per beam."""
    out_dir = cfg.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["fraction", "mode", "metric"] + [str(k) for k in cfg.beams]
    table = [header]
    timing = ["fraction\tbeam\tepochs\tseconds"]
    for sm in prepare_models(cfg, log):
        for mode_text in cfg.modes:
            tuned = mode_text == "reward"
            metrics: dict[str, list[str]] = {m: [] for m in ("bleu", "length", "empty", "gamma")}
            for k in cfg.beams:
                if tuned:
                    state = tune_word_reward(sm.model, sm.dev.corpus,
                                             _tuner_config(cfg.tuner, k, cfg.max_len, cfg.workers))
                    tag = f"f{sm.fraction:g}_k{k}"
                    (out_dir / f"tune_{tag}.tsv").write_text(tuner_tsv(state), encoding="utf-8")
                    write_gamma(out_dir / f"tuned_gamma_{tag}.txt", state.gamma)
                    timing.append(f"{sm.fraction:g}\t{k}\t{len(state.history)}\t{state.seconds:.3f}")
                    mode = WordReward(state.gamma)
                else:
                    mode = parse_mode(mode_text, cfg.norm_partial)
                hyps = _decode_strings(sm.model, mode, sm.test, k, cfg)
                lengths = length_report(hyps, sm.test.refs)
                metrics["bleu"].append(_f(corpus_bleu(hyps, sm.test.refs).points, 2))
                metrics["length"].append(_f(lengths.ratio, 3))
                metrics["empty"].append(_f(lengths.empty_fraction, 3))
                metrics["gamma"].append(_f(mode.gamma) if mode.kind == "reward" else "")
                log(f"{mode_text} k={k}: bleu={metrics['bleu'][-1]} length={metrics['length'][-1]}")
            for metric, values in metrics.items():
                if metric == "gamma" and not any(values):
                    continue
                table.append([f"{sm.fraction:g}", mode_text, metric] + values)
    _write(out_dir / "sweep_beam.tsv", ["\t".join(r) for r in table])
    _write(out_dir / "sweep_beam.timing.tsv", timing)
    return table


def sweep_gamma(cfg: ExperimentConfig, log: Log = _quiet) -> list[list[str]]:
    """Reward sensitivity curve on the held-out set, plus the tuned reward for reference."""
    out_dir = cfg.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = cfg.gamma_grid
    table = [["fraction", "gamma", "bleu", "length_ratio", "empty_fraction"]]
    notes = []
    for sm in prepare_models(cfg, log):
        points = evaluate_gamma_grid(sm.model, sm.test.corpus, grid, cfg.gamma_beam,
                                     cfg.max_len, cfg.workers)
        for p in points:
            table.append([f"{sm.fraction:g}", f"{p.gamma:g}", _f(p.bleu, 2),
                          _f(p.length_ratio), _f(p.empty_fraction)])
        state = tune_word_reward(sm.model, sm.dev.corpus,
                                 _tuner_config(cfg.tuner, cfg.gamma_beam, cfg.max_len, cfg.workers))
        notes.append(f"# fraction={sm.fraction:g} beam={cfg.gamma_beam} "
                     f"tuned_gamma={state.gamma:.4f} stop={state.stop_reason}")
        log(notes[-1][2:])
    _write(out_dir / "sweep_gamma.tsv", ["\t".join(r) for r in table] + notes)
    return table


"""Command-line entry point: ``brevity <command> [options]``.

Every command writes under ``--out-dir`` with fixed file names and exits
nonzero with a one-line diagnostic on any error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import BUILTIN_BUDGET, ConfigError, default_config, dump_defaults, load_config
from .corpus import (
    CorpusError,
    SyntheticTaskConfig,
    _HEADER_RE,
    generate_synthetic,
    load_parallel,
    split,
    write_parallel,
)
from .decoding import decode_corpus
from .evaluation import plot_report, write_report
from .experiments import build_budget_demo, demo_label_bias, run_budget_demo, sweep_beam, sweep_gamma
from .model import ModelError, figure1_model, load_any_model, save_model, train_toy
from .scoring import WordReward, parse_mode
from .search import SearchError
from .tuning import TunerConfig, read_gamma, timing_tsv, tune_word_reward, tuner_tsv, write_gamma

BUILTIN_FIGURE1 = "builtin:figure1"
TUNED_GAMMA_FILE = "tuned_gamma.txt"


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_tokens(path: str | Path) -> list[list[str]]:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if lines and _HEADER_RE.match(lines[0]):
        lines = lines[1:]
    return [line.split() for line in lines]


def resolve_model(name: str):
    if name == BUILTIN_BUDGET:
        return build_budget_demo()[0]
    if name == BUILTIN_FIGURE1:
        return figure1_model()
    if not Path(name).is_file():
        raise UsageError(f"no such model file: {name}")
    return load_any_model(name)


def resolve_score(text: str, out_dir: Path, norm_partial: bool = True):
    """Parse ``--score``; ``reward:gamma=@tuned`` or ``@path`` reads a gamma file."""
    prefix = "reward:gamma=@"
    if text.startswith(prefix):
        ref = text[len(prefix):]
        path = out_dir / TUNED_GAMMA_FILE if ref == "tuned" else Path(ref)
        if not path.is_file():
            raise UsageError(f"no gamma file at {path}")
        return WordReward(read_gamma(path))
    return parse_mode(text, norm_partial)


# ---------------------------------------------------------------------------
# commands


def cmd_gen_data(args) -> int:
    fert = {}
    for item in args.fertility.split(","):
        n, p = item.split(":")
        fert[int(n)] = float(p)
    cfg = SyntheticTaskConfig(n_pairs=args.pairs, src_vocab_size=args.src_vocab,
                              tgt_vocab_size=args.tgt_vocab, min_len=args.min_len,
                              max_len=args.max_len, fertility=fert, seed=args.seed)
    corpus = generate_synthetic(cfg)
    fractions = [float(x) for x in args.split.split(",")]
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for name, part in zip(("train", "dev", "test"), split(corpus, fractions, args.seed)):
        write_parallel(part, out / f"{name}.src", out / f"{name}.tgt")
    corpus.src_vocab.save(out / "vocab.src")
    corpus.tgt_vocab.save(out / "vocab.tgt")
    print(f"wrote {len(corpus)} pairs to {out}")
    return 0


def cmd_train(args) -> int:
    corpus = load_parallel(args.train_src, args.train_tgt, min_count=args.min_count)
    if args.fraction < 1.0:
        corpus = corpus.head(max(1, round(args.fraction * len(corpus))))
    model = train_toy(corpus, args.lam, args.smoothing)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / "model.bin"
    save_model(model, path)
    print(f"trained on {len(corpus)} pairs; wrote {path}")
    return 0


def cmd_decode(args) -> int:
    model = resolve_model(args.model)
    mode = resolve_score(args.score, args.out_dir, not args.norm_whole)
    toks = _read_tokens(args.src)
    for i, t in enumerate(toks, start=1):
        if not t:
            raise UsageError(f"{args.src}: empty source sentence on line {i}")
    sources = [model.src_vocab.encode(t) for t in toks]
    results = decode_corpus(model, mode, sources, args.beam, args.max_len, args.workers,
                            trace=args.trace)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    out = args.out_dir / args.output
    out.write_text("".join(" ".join(model.tgt_vocab.decode(r.best.tokens)) + "\n"
                           for r in results), encoding="utf-8")
    if args.trace:
        for i, r in enumerate(results):
            r.trace.write_tsv(args.out_dir / f"{out.stem}.trace.{i}.tsv", model.tgt_vocab)
    print(f"decoded {len(results)} sentences with {mode} k={args.beam}; wrote {out}")
    return 0


def cmd_tune(args) -> int:
    model = resolve_model(args.model)
    dev = load_parallel(args.dev_src, args.dev_tgt, model.src_vocab, model.tgt_vocab)
    cfg = TunerConfig(gamma0=args.gamma0, eta=args.eta, clip=args.clip, tol=args.tol,
                      max_epochs=args.max_epochs, beam=args.beam, max_len=args.max_len,
                      workers=args.workers)
    state = tune_word_reward(model, dev, cfg, log=_log)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "tune.tsv").write_text(tuner_tsv(state), encoding="utf-8")
    (out / "tune.timing.tsv").write_text(timing_tsv(state), encoding="utf-8")
    write_gamma(out / TUNED_GAMMA_FILE, state.gamma)
    print(f"gamma={state.gamma:.6f} stop={state.stop_reason} epochs={len(state.history)}")
    return 0


def cmd_evaluate(args) -> int:
    hyps = _read_tokens(args.hyp)
    refs = _read_tokens(args.ref)
    if len(hyps) != len(refs):
        raise UsageError(f"line count mismatch {len(hyps)} vs {len(refs)}")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    text = write_report(args.out_dir / "report.tsv", hyps, refs)
    if args.plot:
        plot_report(args.out_dir / "report.svg", hyps, refs)
    sys.stdout.write(text.split("# histogram")[0])
    return 0


def _experiment_config(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.workers is not None:
        cfg.workers = args.workers
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _print_table(rows) -> None:
    for row in rows:
        print("\t".join(row))


def cmd_sweep_beam(args) -> int:
    _print_table(sweep_beam(_experiment_config(args), log=_log))
    return 0


def cmd_sweep_gamma(args) -> int:
    _print_table(sweep_gamma(_experiment_config(args), log=_log))
    return 0


def cmd_demo_label_bias(args) -> int:
    report = demo_label_bias(args.out_dir)
    sys.stdout.write(report.text)
    return 0 if report.ok else 1


def cmd_demo_budget(args) -> int:
    result = run_budget_demo(args.out_dir, args.workers, log=_log)
    print("mode\tbeam\tgamma\tlength_ratio\tempty_fraction\tbleu")
    for c in result.baseline + result.reward:
        gamma = "NA" if c.gamma is None else f"{c.gamma:.4f}"
        print(f"{c.mode}\t{c.beam}\t{gamma}\t{c.length_ratio:.3f}\t{c.empty_fraction:.3f}\t{c.bleu:.2f}")
    return 0


def cmd_config(args) -> int:
    if not args.dump_defaults:
        raise UsageError("config: nothing to do (try --dump-defaults)")
    sys.stdout.write(dump_defaults())
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brevity", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, out_default="out"):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out-dir", type=Path, default=None if out_default is None else Path(out_default))
        return p

    def workers(p):
        p.add_argument("--workers", type=_positive, default=None,
                       help="worker processes (default: $BREVITY_WORKERS or 1)")

    p = add("gen-data", cmd_gen_data, "write a synthetic train/dev/test corpus")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--pairs", type=_positive, default=1000)
    p.add_argument("--src-vocab", type=_positive, default=50)
    p.add_argument("--tgt-vocab", type=_positive, default=80)
    p.add_argument("--min-len", type=_positive, default=1)
    p.add_argument("--max-len", type=_positive, default=20)
    p.add_argument("--fertility", default="1:0.5,2:0.5", help="n:p pairs, e.g. 1:0.7,2:0.3")
    p.add_argument("--split", default="0.8,0.1,0.1", help="train,dev,test fractions")

    p = add("train", cmd_train, "train the count-based toy transducer")
    p.add_argument("--train-src", required=True)
    p.add_argument("--train-tgt", required=True)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--smoothing", type=float, default=0.1)
    p.add_argument("--min-count", type=_positive, default=1)
    p.add_argument("--fraction", type=float, default=1.0, help="train on this leading fraction")
    p.add_argument("--seed", type=int, default=None, help="accepted for uniformity; training is deterministic")

    p = add("decode", cmd_decode, "beam-decode a source file")
    p.add_argument("--model", required=True, help=f"model file, table spec, {BUILTIN_BUDGET} or {BUILTIN_FIGURE1}")
    p.add_argument("--src", required=True)
    p.add_argument("--score", default="baseline",
                   help="baseline|norm|gnmt:alpha=A|reward:gamma=G (G may be @tuned or @path)")
    p.add_argument("--beam", type=_positive, default=10)
    p.add_argument("--max-len", type=_positive, default=None, help="default 2|f|+5")
    p.add_argument("--norm-whole", action="store_true",
                   help="apply norm/gnmt only to finished hypotheses")
    p.add_argument("--trace", action="store_true", help="write one beam trace TSV per sentence")
    p.add_argument("--output", default="hyp.txt", help="file name inside --out-dir")
    p.add_argument("--seed", type=int, default=None, help="accepted for uniformity; decoding is deterministic")
    workers(p)

    p = add("tune", cmd_tune, "perceptron-tune the word reward on a dev set")
    p.add_argument("--model", required=True)
    p.add_argument("--dev-src", required=True)
    p.add_argument("--dev-tgt", required=True)
    defaults = TunerConfig()
    p.add_argument("--beam", type=_positive, default=defaults.beam)
    p.add_argument("--gamma0", type=float, default=defaults.gamma0)
    p.add_argument("--eta", type=float, default=defaults.eta)
    p.add_argument("--clip", type=float, default=defaults.clip)
    p.add_argument("--tol", type=float, default=defaults.tol)
    p.add_argument("--max-epochs", type=_positive, default=defaults.max_epochs)
    p.add_argument("--max-len", type=_positive, default=None)
    p.add_argument("--seed", type=int, default=None, help="accepted for uniformity; tuning is deterministic")
    workers(p)

    p = add("evaluate", cmd_evaluate, "BLEU and length report for a hypothesis file")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--plot", action="store_true", help="also write report.svg (needs matplotlib)")

    for name, func, help_ in (("sweep-beam", cmd_sweep_beam, "beam-size by scoring-mode table"),
                              ("sweep-gamma", cmd_sweep_gamma, "BLEU and length across word rewards")):
        p = add(name, func, help_, out_default=None)
        p.add_argument("--config", default=None, help="INI file (see `config --dump-defaults`)")
        p.add_argument("--seed", type=int, default=None)
        workers(p)

    p = add("demo-label-bias", cmd_demo_label_bias, "self-checking two-word automaton demo",
            out_default=None)

    p = add("demo-budget", cmd_demo_budget, "constant end-of-sentence budget demo")
    workers(p)

    p = sub.add_parser("config", help="configuration helpers")
    p.set_defaults(func=cmd_config)
    p.add_argument("--dump-defaults", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, CorpusError, ModelError, SearchError, ValueError,
            OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"brevity {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

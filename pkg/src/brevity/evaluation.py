"""Corpus BLEU and length statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

Tokens = Sequence


@dataclass
class BleuScore:
    score: float
    precisions: list[float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    @property
    def points(self) -> float:
        return 100.0 * self.score


def _ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hypotheses: Sequence[Tokens], references: Sequence[Tokens],
                max_order: int = 4) -> BleuScore:
    """Unsmoothed single-reference corpus BLEU."""
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            h, r = _ngrams(hyp, n), _ngrams(ref, n)
            matches[n - 1] += sum(min(c, r[g]) for g, c in h.items())
            totals[n - 1] += max(len(hyp) - n + 1, 0)
    precisions = [m / t if t else 0.0 for m, t in zip(matches, totals)]
    if hyp_len == 0:
        bp = 0.0
    else:
        bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / max_order)
    return BleuScore(score, precisions, bp, hyp_len, ref_len)


@dataclass
class LengthReport:
    ratio: float
    mean_sentence_ratio: float | None
    empty_fraction: float
    bin_width: float
    exact_zero: int = 0
    exact_one: int = 0
    # counts for the right-open intervals [i*w, (i+1)*w) up to 2.0
    bins: list[int] = field(default_factory=list)
    overflow: int = 0
    excluded: int = 0

    def histogram(self) -> list[tuple[str, int]]:
        rows = [("0.0", self.exact_zero)]
        for i, count in enumerate(self.bins):
            lo = i * self.bin_width
            rows.append((f"[{lo:.2f},{lo + self.bin_width:.2f})", count))
        rows.append(("1.0", self.exact_one))
        rows.append(("overflow", self.overflow))
        return rows

    def bin_count_at(self, lower: float) -> int:
        """Count of the interval bin whose lower edge is ``lower``."""
        return self.bins[round(lower / self.bin_width)]

    @property
    def total(self) -> int:
        return self.exact_zero + self.exact_one + sum(self.bins) + self.overflow


HISTOGRAM_MAX = 2


def length_report(hypotheses: Sequence[Tokens], references: Sequence[Tokens],
                  bin_width: float = 0.05) -> LengthReport:
    """Corpus length ratio plus a histogram of per-sentence ratios.

    Exact ratios 0 and 1 have their own bins; other ratios fall into
    right-open intervals of ``bin_width`` up to 2.0, with 2.0 itself in the
    last interval and anything larger in the overflow bin.  Sentences with an
    empty reference are excluded from the histogram only.
    """
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    width = Fraction(bin_width).limit_denominator(10**6)
    n_bins = int(HISTOGRAM_MAX / width)
    hyp_total = sum(len(h) for h in hypotheses)
    ref_total = sum(len(r) for r in references)
    n = len(hypotheses)
    report = LengthReport(
        ratio=hyp_total / ref_total if ref_total else (0.0 if hyp_total == 0 else math.inf),
        mean_sentence_ratio=None,
        empty_fraction=sum(1 for h in hypotheses if len(h) == 0) / n if n else 0.0,
        bin_width=bin_width,
        bins=[0] * n_bins,
    )
    ratios = []
    for hyp, ref in zip(hypotheses, references):
        if len(ref) == 0:
            report.excluded += 1
            continue
        r = Fraction(len(hyp), len(ref))
        ratios.append(r)
        if r == 0:
            report.exact_zero += 1
        elif r == 1:
            report.exact_one += 1
        elif r > HISTOGRAM_MAX:
            report.overflow += 1
        else:
            report.bins[min(int(r / width), n_bins - 1)] += 1
    if ratios:
        report.mean_sentence_ratio = float(sum(ratios) / len(ratios))
    return report


def cumulative_bleu_by_length(hypotheses: Sequence[Tokens], references: Sequence[Tokens],
                              thresholds: Sequence[float], max_order: int = 4
                              ) -> list[tuple[float, BleuScore | None, int]]:
    """BLEU over the pairs whose reference length is at most each threshold.

    Returns ``(threshold, score or None, number of sentences)``; the score is
    None when no sentence qualifies.
    """
    if list(thresholds) != sorted(thresholds):
        raise ValueError("thresholds must be ascending")
    curve = []
    for limit in thresholds:
        keep = [i for i, r in enumerate(references) if len(r) <= limit]
        if not keep:
            curve.append((limit, None, 0))
            continue
        score = corpus_bleu([hypotheses[i] for i in keep], [references[i] for i in keep], max_order)
        curve.append((limit, score, len(keep)))
    return curve


def _fmt(x: float | None, digits: int = 4) -> str:
    if x is None:
        return "NA"
    if math.isinf(x):
        return "inf"
    return f"{x:.{digits}f}"


def report_tsv(hypotheses: Sequence[Tokens], references: Sequence[Tokens],
               thresholds: Sequence[float] = (5, 10, 15, 20, math.inf),
               bin_width: float = 0.05) -> str:
    """Evaluation report as three TSV blocks separated by blank lines.

    ``# summary``: metric, value.  ``# histogram``: bin, count.
    ``# cumulative``: max_ref_len, sentences, bleu.
    """
    bleu = corpus_bleu(hypotheses, references)
    lengths = length_report(hypotheses, references, bin_width)
    out = ["# summary", "metric\tvalue",
           f"bleu\t{_fmt(bleu.points, 2)}",
           *(f"p{i}\t{_fmt(p)}" for i, p in enumerate(bleu.precisions, start=1)),
           f"brevity_penalty\t{_fmt(bleu.brevity_penalty)}",
           f"hyp_len\t{bleu.hyp_len}",
           f"ref_len\t{bleu.ref_len}",
           f"length_ratio\t{_fmt(lengths.ratio)}",
           f"mean_sentence_ratio\t{_fmt(lengths.mean_sentence_ratio)}",
           f"empty_fraction\t{_fmt(lengths.empty_fraction)}",
           f"sentences\t{len(hypotheses)}",
           f"excluded_empty_ref\t{lengths.excluded}",
           "", "# histogram", "bin\tcount"]
    out += [f"{label}\t{count}" for label, count in lengths.histogram()]
    out += ["", "# cumulative", "max_ref_len\tsentences\tbleu"]
    for limit, score, count in cumulative_bleu_by_length(hypotheses, references, thresholds):
        out.append(f"{_fmt(limit, 0)}\t{count}\t{_fmt(score.points if score else None, 2)}")
    return "\n".join(out) + "\n"


def write_report(path: str | Path, hypotheses, references, **kwargs) -> str:
    text = report_tsv(hypotheses, references, **kwargs)
    Path(path).write_text(text, encoding="utf-8")
    return text


def plot_report(path: str | Path, hypotheses, references,
                thresholds: Sequence[float] = (5, 10, 15, 20, math.inf)) -> None:
    """SVG rendering of the length histogram and the cumulative BLEU curve."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lengths = length_report(hypotheses, references)
    curve = cumulative_bleu_by_length(hypotheses, references, thresholds)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    hist = lengths.histogram()
    ax1.bar(range(len(hist)), [c for _, c in hist])
    ax1.set_xticks([0, len(hist) // 2, len(hist) - 2, len(hist) - 1],
                   ["0.0", hist[len(hist) // 2][0], "1.0", ">2"])
    ax1.set_xlabel("length ratio")
    ax1.set_ylabel("sentences")
    xs = [str(int(t)) if math.isfinite(t) else "all" for t, s, _ in curve if s is not None]
    ys = [s.points for _, s, _ in curve if s is not None]
    ax2.plot(xs, ys, marker="o")
    ax2.set_xlabel("max reference length")
    ax2.set_ylabel("BLEU")
    fig.tight_layout()
    plt.rcParams["svg.hashsalt"] = "brevity"
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

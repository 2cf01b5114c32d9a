"""Reference-based evaluation metrics and significance testing.

BLEU and chrF reproduce sacreBLEU v2.0.0 semantics for the pinned
configurations::

    BLEU|nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:2.0.0
    chrF2|nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:2.0.0

Both metrics are built on additive sufficient statistics so corpus scores
can be recomputed cheaply for changing candidate selections (reranker
tuning) and bootstrap resamples.  An ``external`` metric mode averages
per-sentence scores supplied by the caller, standing in for neural metrics
whose inference happens offline.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

BLEU_MAX_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_BETA = 2

BLEU_SIGNATURE = "BLEU|nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:2.0.0"
CHRF_SIGNATURE = "chrF2|nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:2.0.0"
EXTERNAL_SIGNATURE = "external|agg:mean"

METRIC_NAMES = ("bleu", "chrf", "external")

# Log-of-zero floor used by the mteval/sacreBLEU lineage: exp() of the
# floored sum underflows to exactly 0.0, so an unsmoothed zero precision
# zeroes the whole geometric mean.
_LOG_FLOOR = -9999999999.0


def _safe_log(value: float) -> float:
    if value == 0.0:
        return _LOG_FLOOR
    return math.log(value)


@dataclass(frozen=True)
class MetricScore:
    """A corpus-level score plus the signature pinning its configuration."""

    value: float
    signature: str

    def __str__(self) -> str:
        return f"{self.signature} = {self.value:.2f}"


# ---------------------------------------------------------------------------
# mteval-v13a tokenization


_13A_RULES = (
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
)


def tokenize_13a(text: str) -> list[str]:
    """Tokenize per mteval-v13a: entity unescaping, non-alnum padding,
    whitespace split.  Case is preserved."""
    norm = text.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    if "&" in norm:
        norm = norm.replace("&quot;", '"')
        norm = norm.replace("&amp;", "&")
        norm = norm.replace("&lt;", "<")
        norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    for pattern, repl in _13A_RULES:
        norm = pattern.sub(repl, norm)
    return norm.split()


# ---------------------------------------------------------------------------
# BLEU


@dataclass(frozen=True)
class BleuStats:
    """Clipped n-gram matches and totals for n=1..4 plus lengths."""

    correct: tuple[int, ...]
    total: tuple[int, ...]
    hyp_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.correct, other.correct)),
            tuple(a + b for a, b in zip(self.total, other.total)),
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    @staticmethod
    def zero() -> "BleuStats":
        zeros = (0,) * BLEU_MAX_ORDER
        return BleuStats(zeros, zeros, 0, 0)

    def to_array(self) -> np.ndarray:
        return np.array(
            self.correct + self.total + (self.hyp_len, self.ref_len),
            dtype=np.int64,
        )

    @staticmethod
    def from_array(values: np.ndarray) -> "BleuStats":
        values = [int(v) for v in values]
        k = BLEU_MAX_ORDER
        return BleuStats(
            tuple(values[:k]), tuple(values[k : 2 * k]), values[2 * k], values[2 * k + 1]
        )


def _word_ngrams(tokens: Sequence[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def bleu_stats(hyp: str, ref: str) -> BleuStats:
    """Sufficient statistics of one sentence pair (13a-tokenized)."""
    hyp_tokens = tokenize_13a(hyp)
    ref_tokens = tokenize_13a(ref)
    hyp_ngrams = _word_ngrams(hyp_tokens, BLEU_MAX_ORDER)
    ref_ngrams = _word_ngrams(ref_tokens, BLEU_MAX_ORDER)
    correct = [0] * BLEU_MAX_ORDER
    total = [0] * BLEU_MAX_ORDER
    for ngram, count in hyp_ngrams.items():
        n = len(ngram)
        total[n - 1] += count
        if ngram in ref_ngrams:
            correct[n - 1] += min(count, ref_ngrams[ngram])
    return BleuStats(tuple(correct), tuple(total), len(hyp_tokens), len(ref_tokens))


def bleu_score(stats: BleuStats, effective_order: bool = False) -> MetricScore:
    """Corpus BLEU with exponential smoothing of zero precisions.

    ``effective_order`` shortens the geometric mean to the highest order
    with any hypothesis n-grams (used for sentence-level scoring only; the
    corpus configuration is eff:no).
    """
    if stats.ref_len == 0:
        raise DataError("empty reference corpus")
    precisions = [0.0] * BLEU_MAX_ORDER
    smooth = 1.0
    eff_order = BLEU_MAX_ORDER
    for n in range(1, BLEU_MAX_ORDER + 1):
        if stats.total[n - 1] == 0:
            break
        if effective_order:
            eff_order = n
        if stats.correct[n - 1] == 0:
            smooth *= 2.0
            precisions[n - 1] = 100.0 / (smooth * stats.total[n - 1])
        else:
            precisions[n - 1] = 100.0 * stats.correct[n - 1] / stats.total[n - 1]
    if stats.hyp_len < stats.ref_len:
        brevity = (
            math.exp(1.0 - stats.ref_len / stats.hyp_len)
            if stats.hyp_len > 0
            else 0.0
        )
    else:
        brevity = 1.0
    value = brevity * math.exp(
        sum(_safe_log(p) for p in precisions[:eff_order]) / eff_order
    )
    return MetricScore(value, BLEU_SIGNATURE)


def sentence_bleu(hyp: str, ref: str) -> float:
    """Smoothed sentence BLEU (exponential smoothing, effective order)."""
    return bleu_score(bleu_stats(hyp, ref), effective_order=True).value


# ---------------------------------------------------------------------------
# chrF


@dataclass(frozen=True)
class ChrfStats:
    """Character n-gram hypothesis/reference/match counts for n=1..6."""

    hyp_counts: tuple[int, ...]
    ref_counts: tuple[int, ...]
    match_counts: tuple[int, ...]

    def __add__(self, other: "ChrfStats") -> "ChrfStats":
        return ChrfStats(
            tuple(a + b for a, b in zip(self.hyp_counts, other.hyp_counts)),
            tuple(a + b for a, b in zip(self.ref_counts, other.ref_counts)),
            tuple(a + b for a, b in zip(self.match_counts, other.match_counts)),
        )

    @staticmethod
    def zero() -> "ChrfStats":
        zeros = (0,) * CHRF_CHAR_ORDER
        return ChrfStats(zeros, zeros, zeros)

    def to_array(self) -> np.ndarray:
        return np.array(
            self.hyp_counts + self.ref_counts + self.match_counts, dtype=np.int64
        )

    @staticmethod
    def from_array(values: np.ndarray) -> "ChrfStats":
        values = [int(v) for v in values]
        k = CHRF_CHAR_ORDER
        return ChrfStats(
            tuple(values[:k]), tuple(values[k : 2 * k]), tuple(values[2 * k :])
        )


def chrf_profile(text: str) -> tuple[Counter, ...]:
    """Per-order character n-gram counts with whitespace removed.

    Profiles are reusable across many pairings of the same string, which
    is the common case in MBR utility matrices.
    """
    chars = "".join(text.split())
    profile = []
    for n in range(1, CHRF_CHAR_ORDER + 1):
        profile.append(Counter(chars[i : i + n] for i in range(len(chars) - n + 1)))
    return tuple(profile)


def chrf_stats_from_profiles(
    hyp_profile: tuple[Counter, ...], ref_profile: tuple[Counter, ...]
) -> ChrfStats:
    hyp_counts = []
    ref_counts = []
    match_counts = []
    for hyp_ngrams, ref_ngrams in zip(hyp_profile, ref_profile):
        if len(hyp_ngrams) > len(ref_ngrams):
            smaller, larger = ref_ngrams, hyp_ngrams
        else:
            smaller, larger = hyp_ngrams, ref_ngrams
        match = 0
        for ngram, count in smaller.items():
            other = larger.get(ngram)
            if other is not None:
                match += min(count, other)
        hyp_counts.append(sum(hyp_ngrams.values()))
        ref_counts.append(sum(ref_ngrams.values()))
        match_counts.append(match)
    return ChrfStats(tuple(hyp_counts), tuple(ref_counts), tuple(match_counts))


def chrf_stats(hyp: str, ref: str) -> ChrfStats:
    return chrf_stats_from_profiles(chrf_profile(hyp), chrf_profile(ref))


def chrf_score(stats: ChrfStats) -> MetricScore:
    """chrF2 from summed statistics: mean per-order F-score over effective
    orders (orders present on both sides), eps-smoothed like chrF++.py."""
    eps = 1e-16
    beta_sq = CHRF_BETA**2
    total_f = 0.0
    effective_order = 0
    for n_hyp, n_ref, n_match in zip(
        stats.hyp_counts, stats.ref_counts, stats.match_counts
    ):
        prec = n_match / n_hyp if n_hyp > 0 else eps
        rec = n_match / n_ref if n_ref > 0 else eps
        denom = beta_sq * prec + rec
        total_f += ((1 + beta_sq) * prec * rec / denom) if denom > 0 else eps
        if n_hyp > 0 and n_ref > 0:
            effective_order += 1
    if effective_order == 0:
        return MetricScore(0.0, CHRF_SIGNATURE)
    return MetricScore(100.0 * total_f / effective_order, CHRF_SIGNATURE)


def sentence_chrf(hyp: str, ref: str) -> float:
    return chrf_score(chrf_stats(hyp, ref)).value


# ---------------------------------------------------------------------------
# Corpus-level dispatch


@dataclass(frozen=True)
class CorpusMetricResult:
    score: MetricScore
    sentence_stats: tuple


def _check_lengths(hyps: Sequence, refs: Sequence):
    if len(hyps) != len(refs):
        raise DataError(
            f"corpus sides have different lengths: {len(hyps)} vs {len(refs)}"
        )
    if len(refs) == 0:
        raise DataError("empty reference corpus")


def corpus_metric(
    name: str,
    hyps: Sequence[str],
    refs: Sequence[str],
    external_scores: Sequence[float] | None = None,
) -> CorpusMetricResult:
    """Score a corpus with ``bleu``, ``chrf``, or ``external``.

    ``external`` averages caller-supplied per-sentence scores (one per
    segment, any scale); ``hyps``/``refs`` are only length-checked in that
    mode.  Per-sentence sufficient statistics are returned for reuse.
    """
    _check_lengths(hyps, refs)
    if name == "bleu":
        stats = tuple(bleu_stats(h, r) for h, r in zip(hyps, refs))
        total = BleuStats.zero()
        for s in stats:
            total = total + s
        return CorpusMetricResult(bleu_score(total), stats)
    if name == "chrf":
        stats = tuple(chrf_stats(h, r) for h, r in zip(hyps, refs))
        total = ChrfStats.zero()
        for s in stats:
            total = total + s
        return CorpusMetricResult(chrf_score(total), stats)
    if name == "external":
        if external_scores is None:
            raise DataError("external metric requires per-sentence scores")
        if len(external_scores) != len(hyps):
            raise DataError(
                f"external score count {len(external_scores)} does not match "
                f"corpus size {len(hyps)}"
            )
        scores = tuple(float(s) for s in external_scores)
        mean = sum(scores) / len(scores)
        return CorpusMetricResult(MetricScore(mean, EXTERNAL_SIGNATURE), scores)
    raise DataError(f"unknown metric {name!r}")


def parse_external_scores(stream: Iterable[str] | str) -> list[float]:
    """Read one real per line (aligned with the corpus)."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    scores = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            scores.append(float(line.strip()))
        except ValueError:
            raise DataError(f"line {i}: bad score {line!r}") from None
    return scores


# ---------------------------------------------------------------------------
# Paired bootstrap resampling


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    score_a: MetricScore
    score_b: MetricScore
    trials: int

    def __str__(self) -> str:
        return (
            f"A: {self.score_a.value:.2f}  B: {self.score_b.value:.2f}  "
            f"p = {self.p_value:.4f} ({self.trials} trials)"
        )


def _stats_matrix(name: str, sentence_stats: tuple) -> np.ndarray:
    return np.stack([s.to_array() for s in sentence_stats])


def _score_from_summed(name: str, summed: np.ndarray) -> float:
    if name == "bleu":
        return bleu_score(BleuStats.from_array(summed)).value
    return chrf_score(ChrfStats.from_array(summed)).value


def paired_bootstrap(
    sys_a: Sequence[str],
    sys_b: Sequence[str],
    refs: Sequence[str],
    metric: str = "bleu",
    trials: int = 1000,
    seed: int = 0,
    scores_a: Sequence[float] | None = None,
    scores_b: Sequence[float] | None = None,
) -> BootstrapResult:
    """Paired bootstrap significance test between two systems.

    Segments are resampled with replacement at full corpus size; the
    p-value is the fraction of resamples in which the full-corpus winner
    fails to score strictly higher.  Identical corpus scores short-circuit
    to p = 1.0.  Deterministic for a fixed seed.
    """
    if trials < 1:
        raise DataError("trials must be >= 1")
    _check_lengths(sys_a, refs)
    _check_lengths(sys_b, refs)
    result_a = corpus_metric(metric, sys_a, refs, scores_a)
    result_b = corpus_metric(metric, sys_b, refs, scores_b)
    full_a = result_a.score.value
    full_b = result_b.score.value
    if full_a == full_b:
        return BootstrapResult(1.0, result_a.score, result_b.score, trials)

    n = len(refs)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, n, size=(trials, n))
    if metric == "external":
        arr_a = np.asarray(result_a.sentence_stats, dtype=np.float64)
        arr_b = np.asarray(result_b.sentence_stats, dtype=np.float64)
        trial_a = arr_a[indices].mean(axis=1)
        trial_b = arr_b[indices].mean(axis=1)
    else:
        mat_a = _stats_matrix(metric, result_a.sentence_stats)
        mat_b = _stats_matrix(metric, result_b.sentence_stats)
        trial_a = np.empty(trials)
        trial_b = np.empty(trials)
        for t in range(trials):
            idx = indices[t]
            trial_a[t] = _score_from_summed(metric, mat_a[idx].sum(axis=0))
            trial_b[t] = _score_from_summed(metric, mat_b[idx].sum(axis=0))
    if full_a > full_b:
        losses = int(np.count_nonzero(trial_a <= trial_b))
    else:
        losses = int(np.count_nonzero(trial_b <= trial_a))
    return BootstrapResult(losses / trials, result_a.score, result_b.score, trials)

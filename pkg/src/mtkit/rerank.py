"""Linear n-best reranking, MERT weight tuning, and ensemble grid search.

MERT runs coordinate-wise exact line search: per segment, the candidates'
scores along one weight coordinate are affine functions of the step, so
the 1-best as a function of the step is given by the upper envelope of a
line set.  The corpus metric is evaluated once per envelope interval from
summed sufficient statistics (or per-hypothesis external scores) and the
best interval midpoint is taken.  Only strictly improving steps are
accepted, so the tuned weights never score below the initialization.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, MissingFeatureError
from .metrics import (
    BleuStats,
    ChrfStats,
    bleu_score,
    bleu_stats,
    chrf_score,
    chrf_stats,
)
from .nbest import Hypothesis, NBestList, WeightVector


@dataclass(frozen=True)
class TuningSet:
    """N-best lists with references, the input of weight optimization."""

    lists: tuple[NBestList, ...]
    references: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "lists", tuple(self.lists))
        object.__setattr__(self, "references", tuple(self.references))
        if not self.lists:
            raise DataError("empty tuning set")
        if len(self.lists) != len(self.references):
            raise DataError(
                f"{len(self.lists)} n-best lists but "
                f"{len(self.references)} references"
            )
        for nbest in self.lists:
            if len(nbest) == 0:
                raise DataError(
                    f"segment {nbest.segment_id} has no hypotheses"
                )


@dataclass(frozen=True)
class Envelope:
    """Upper envelope of a line set: maximal intervals with their argmax.

    ``intervals`` holds (lower_boundary, line_index) pairs; the first lower
    boundary is -inf and boundaries increase strictly.
    """

    intervals: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if not self.intervals:
            raise DataError("empty envelope")
        if self.intervals[0][0] != -math.inf:
            raise DataError("first envelope interval must be unbounded")
        for (left, idx), (right, jdx) in zip(self.intervals, self.intervals[1:]):
            if not right > left:
                raise DataError("envelope boundaries must increase strictly")
            if idx == jdx:
                raise DataError("adjacent envelope intervals share an argmax")

    @property
    def boundaries(self) -> tuple[float, ...]:
        return tuple(left for left, _ in self.intervals[1:])

    def argmax_at(self, gamma: float) -> int:
        lows = [left for left, _ in self.intervals]
        pos = bisect.bisect_right(lows, gamma) - 1
        return self.intervals[pos][1]


@dataclass(frozen=True)
class EnsembleComponent:
    model_label: str
    multiplicity: int
    weight: float

    def __post_init__(self):
        if self.multiplicity < 1:
            raise DataError(
                f"component {self.model_label!r}: multiplicity must be >= 1"
            )
        if not math.isfinite(self.weight):
            raise DataError(f"component {self.model_label!r}: non-finite weight")


@dataclass(frozen=True)
class EnsembleSpec:
    """Weighted model combination; multiplicity scales the weight."""

    components: tuple[EnsembleComponent, ...]

    def combine(self, scores: Mapping[str, float]) -> float:
        return sum(
            c.weight * c.multiplicity * scores[c.model_label]
            for c in self.components
        )

    def describe(self) -> str:
        parts = []
        for c in self.components:
            inner = (
                f"{c.multiplicity}x{c.model_label}"
                if c.multiplicity > 1
                else c.model_label
            )
            parts.append(f"{c.weight:g} * ({inner})")
        return " + ".join(parts)


def _feature_value(hyp: Hypothesis, name: str) -> float:
    try:
        return hyp.features[name]
    except KeyError:
        raise MissingFeatureError(
            f"hypothesis {hyp.text!r} (segment {hyp.segment_id}) lacks "
            f"feature {name!r}"
        ) from None


def rescore(nbest: NBestList, weights: WeightVector) -> NBestList:
    """Set combined scores to the weighted feature sum and re-sort.

    Sorting is stable on the original rank, so score ties keep their
    incoming order.
    """
    rescored = [
        hyp.with_score(
            sum(w * _feature_value(hyp, name) for name, w in weights.weights.items())
        )
        for hyp in nbest
    ]
    rescored.sort(key=lambda h: -h.combined_score)
    return NBestList(nbest.segment_id, tuple(rescored))


def prune_topk(nbest: NBestList, weights: WeightVector, k: int) -> NBestList:
    """Rescore and keep the best min(k, len) hypotheses."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    scored = rescore(nbest, weights)
    return NBestList(nbest.segment_id, scored.hypotheses[:k])


def envelope_of_lines(slopes: Sequence[float], intercepts: Sequence[float]) -> Envelope:
    """Upper envelope of lines y_i = slopes[i] * x + intercepts[i]."""
    if not slopes or len(slopes) != len(intercepts):
        raise DataError("envelope needs matching non-empty slopes/intercepts")
    order = sorted(
        range(len(slopes)), key=lambda i: (slopes[i], -intercepts[i], i)
    )
    # one line per distinct slope: the highest intercept dominates
    pruned: list[int] = []
    for i in order:
        if pruned and slopes[i] == slopes[pruned[-1]]:
            continue
        pruned.append(i)
    hull: list[tuple[float, int]] = []  # (left boundary, line index)
    hull_lines: list[int] = []
    for i in pruned:
        left = -math.inf
        while hull_lines:
            j = hull_lines[-1]
            crossing = (intercepts[j] - intercepts[i]) / (slopes[i] - slopes[j])
            if crossing <= hull[-1][0]:
                hull.pop()
                hull_lines.pop()
                continue
            left = crossing
            break
        hull.append((left, i))
        hull_lines.append(i)
    return Envelope(tuple(hull))


def line_envelope(
    nbest: NBestList, weights: WeightVector, direction_feature: str
) -> Envelope:
    """Envelope of per-hypothesis scores along one feature direction.

    Hypothesis i contributes the line ``dot(weights, features_i) + gamma *
    features_i[direction_feature]``; the envelope maps each gamma range to
    the 1-best hypothesis index.
    """
    slopes = [_feature_value(hyp, direction_feature) for hyp in nbest]
    intercepts = [
        sum(w * _feature_value(hyp, name) for name, w in weights.weights.items())
        for hyp in nbest
    ]
    return envelope_of_lines(slopes, intercepts)


@dataclass(frozen=True)
class MertStep:
    restart: int
    round: int
    feature: str
    gamma: float
    score: float


@dataclass(frozen=True)
class MertResult:
    weights: WeightVector
    score: float
    history: tuple[MertStep, ...]

    def report_tsv(self) -> str:
        lines = ["restart\tround\tfeature\tgamma\tscore"]
        lines += [
            f"{s.restart}\t{s.round}\t{s.feature}\t{s.gamma!r}\t{s.score!r}"
            for s in self.history
        ]
        return "\n".join(lines) + "\n"


class _Evaluator:
    """Corpus metric over per-segment 1-best selections, via sufficient
    statistics for bleu/chrf or per-hypothesis scores for external."""

    def __init__(self, ts: TuningSet, metric: str, external_scores):
        self.metric = metric
        if metric in ("bleu", "chrf"):
            stats_fn = bleu_stats if metric == "bleu" else chrf_stats
            self.stat_arrays = [
                np.stack(
                    [stats_fn(hyp.text, ref).to_array() for hyp in nbest]
                )
                for nbest, ref in zip(ts.lists, ts.references)
            ]
        elif metric == "external":
            if external_scores is None:
                raise DataError(
                    "external metric requires per-hypothesis scores"
                )
            if len(external_scores) != len(ts.lists):
                raise DataError(
                    f"external scores cover {len(external_scores)} segments, "
                    f"tuning set has {len(ts.lists)}"
                )
            self.ext = []
            for nbest, seg_scores in zip(ts.lists, external_scores):
                if len(seg_scores) != len(nbest):
                    raise DataError(
                        f"segment {nbest.segment_id}: {len(seg_scores)} "
                        f"external scores for {len(nbest)} hypotheses"
                    )
                self.ext.append(np.asarray(seg_scores, dtype=np.float64))
        else:
            raise DataError(f"unknown metric {metric!r}")

    def value(self, selection: Sequence[int]) -> float:
        if self.metric == "external":
            return float(
                sum(ext[i] for ext, i in zip(self.ext, selection))
                / len(selection)
            )
        summed = sum(
            (arr[i] for arr, i in zip(self.stat_arrays, selection)),
            start=np.zeros_like(self.stat_arrays[0][0]),
        )
        if self.metric == "bleu":
            return bleu_score(BleuStats.from_array(summed)).value
        return chrf_score(ChrfStats.from_array(summed)).value


def _candidate_gammas(boundaries: list[float], step: float) -> list[float]:
    """Interval midpoints, plus points just beyond the extreme boundaries."""
    if not boundaries:
        return [0.0]
    uniq = sorted(set(boundaries))
    candidates = [uniq[0] - step]
    candidates += [(a + b) / 2.0 for a, b in zip(uniq, uniq[1:])]
    candidates.append(uniq[-1] + step)
    candidates.append(0.0)
    return candidates


def mert_tune(
    ts: TuningSet,
    metric: str,
    init: WeightVector,
    restarts: int = 1,
    seed: int = 0,
    external_scores: Sequence[Sequence[float]] | None = None,
    tolerance: float = 1e-4,
    max_rounds: int = 30,
    unbounded_step: float = 1.0,
) -> MertResult:
    """Coordinate-descent MERT maximizing a corpus metric.

    Restart 0 starts from ``init``; further restarts draw uniform weights
    in [-1, 1] from a seeded generator.  Returns the best restart.
    """
    if restarts < 1:
        raise DataError("restarts must be >= 1")
    features = init.names()
    feat_matrices = [
        np.array(
            [[_feature_value(hyp, name) for name in features] for hyp in nbest],
            dtype=np.float64,
        )
        for nbest in ts.lists
    ]
    evaluator = _Evaluator(ts, metric, external_scores)
    rng = np.random.default_rng(seed)
    inits = [np.array([init.weights[name] for name in features], dtype=np.float64)]
    inits += [
        rng.uniform(-1.0, 1.0, size=len(features)) for _ in range(restarts - 1)
    ]

    def selection_for(weights: np.ndarray) -> list[int]:
        return [int(np.argmax(feats @ weights)) for feats in feat_matrices]

    best_weights: np.ndarray | None = None
    best_value = -math.inf
    history: list[MertStep] = []
    for restart, start in enumerate(inits):
        w = start.copy()
        current = evaluator.value(selection_for(w))
        for round_index in range(max_rounds):
            improved = False
            for d, feature in enumerate(features):
                envelopes = []
                boundaries: list[float] = []
                for feats in feat_matrices:
                    env = envelope_of_lines(
                        feats[:, d].tolist(), (feats @ w).tolist()
                    )
                    envelopes.append(env)
                    boundaries.extend(env.boundaries)
                # gamma = 0 keeps the current weights and metric; ties on
                # the metric prefer the smallest move
                best_gamma = 0.0
                best_gamma_value = current
                for gamma in _candidate_gammas(boundaries, unbounded_step):
                    value = evaluator.value(
                        [env.argmax_at(gamma) for env in envelopes]
                    )
                    if value > best_gamma_value or (
                        value == best_gamma_value
                        and (abs(gamma), gamma) < (abs(best_gamma), best_gamma)
                    ):
                        best_gamma_value = value
                        best_gamma = gamma
                if best_gamma_value > current + tolerance:
                    w[d] += best_gamma
                    current = best_gamma_value
                    improved = True
                    history.append(
                        MertStep(restart, round_index, feature, best_gamma, current)
                    )
            if not improved:
                break
        if current > best_value:
            best_value = current
            best_weights = w.copy()
    assert best_weights is not None
    return MertResult(
        WeightVector(dict(zip(features, best_weights.tolist()))),
        best_value,
        tuple(history),
    )


def grid_search_weights(
    score_columns: Mapping[str, Sequence[Sequence[float]]],
    grids: Mapping[str, Sequence[float]],
    ts: TuningSet,
    metric: str,
    multiplicities: Mapping[str, int] | None = None,
    external_scores: Sequence[Sequence[float]] | None = None,
) -> tuple[EnsembleSpec, float]:
    """Exhaustive weight search over per-model hypothesis score columns.

    Evaluates every weight tuple from the per-model grids (in the given
    order) on the 1-best selections it induces and returns the maximizing
    combination; ties keep the first tuple in enumeration order.
    """
    labels = list(score_columns.keys())
    if not labels:
        raise DataError("no score columns given")
    for label in labels:
        if label not in grids or not grids[label]:
            raise DataError(f"no grid values for model {label!r}")
    mult = {label: 1 for label in labels}
    if multiplicities:
        mult.update(multiplicities)
    columns = {}
    for label, per_segment in score_columns.items():
        if len(per_segment) != len(ts.lists):
            raise DataError(
                f"model {label!r}: {len(per_segment)} segments of scores, "
                f"tuning set has {len(ts.lists)}"
            )
        arrays = []
        for nbest, seg_scores in zip(ts.lists, per_segment):
            if len(seg_scores) != len(nbest):
                raise DataError(
                    f"model {label!r}, segment {nbest.segment_id}: "
                    f"{len(seg_scores)} scores for {len(nbest)} hypotheses"
                )
            arrays.append(np.asarray(seg_scores, dtype=np.float64))
        columns[label] = arrays
    evaluator = _Evaluator(ts, metric, external_scores)

    best_tuple: tuple[float, ...] | None = None
    best_value = -math.inf
    for weights in product(*(grids[label] for label in labels)):
        selection = []
        for seg_index in range(len(ts.lists)):
            combined = sum(
                (
                    weight * mult[label] * columns[label][seg_index]
                    for label, weight in zip(labels, weights)
                ),
                start=np.zeros(len(ts.lists[seg_index])),
            )
            selection.append(int(np.argmax(combined)))
        value = evaluator.value(selection)
        if value > best_value:
            best_value = value
            best_tuple = weights
    assert best_tuple is not None
    spec = EnsembleSpec(
        tuple(
            EnsembleComponent(label, mult[label], weight)
            for label, weight in zip(labels, best_tuple)
        )
    )
    return spec, best_value

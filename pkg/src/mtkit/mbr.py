"""Minimum Bayes risk decoding and the two-stage prune-then-MBR pipeline.

A candidate's expected utility is the plain mean of a sentence-level
utility against every pseudo-reference sample; the decoder returns the
candidate maximizing it.  Utilities are computed with plain left-to-right
float summation so results are bit-reproducible across runs and equal to
a naive double-loop evaluation, regardless of any caching.

Ties on expected utility keep the earliest (best-ranked) candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError
from .metrics import chrf_profile, chrf_score, chrf_stats_from_profiles, sentence_bleu
from .nbest import Hypothesis, NBestList, WeightVector, merge_nbest
from .rerank import prune_topk


@dataclass(frozen=True)
class PseudoReferenceSet:
    """Sample translations standing in for draws from the model."""

    segment_id: int
    samples: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) < 1:
            raise DataError(
                f"segment {self.segment_id}: pseudo-reference set is empty"
            )

    @property
    def size(self) -> int:
        return len(self.samples)


class UtilityFunction:
    """Sentence-level similarity u(sample, candidate)."""

    name = "custom"

    def pairwise(self, sample: str, candidate: str) -> float:
        raise NotImplementedError

    def matrix(
        self, candidates: Sequence[str], samples: Sequence[str]
    ) -> list[list[float]]:
        return [[self.pairwise(s, c) for s in samples] for c in candidates]


class ChrfUtility(UtilityFunction):
    """Sentence chrF; identity-maximal and model-free.

    The matrix path caches one n-gram profile per distinct string, which
    pays off on merged n-best lists full of duplicate texts; results are
    bit-identical to the uncached pairwise path.
    """

    name = "chrf"

    def pairwise(self, sample: str, candidate: str) -> float:
        return chrf_score(
            chrf_stats_from_profiles(chrf_profile(candidate), chrf_profile(sample))
        ).value

    def matrix(self, candidates, samples):
        profiles: dict[str, tuple] = {}
        for text in list(candidates) + list(samples):
            if text not in profiles:
                profiles[text] = chrf_profile(text)
        return [
            [
                chrf_score(
                    chrf_stats_from_profiles(profiles[cand], profiles[samp])
                ).value
                for samp in samples
            ]
            for cand in candidates
        ]


class SentenceBleuUtility(UtilityFunction):
    """Smoothed sentence BLEU (effective order)."""

    name = "bleu-sentence"

    def pairwise(self, sample: str, candidate: str) -> float:
        return sentence_bleu(candidate, sample)


class MatrixUtility(UtilityFunction):
    """Pass-through for an externally computed utility matrix.

    The stored matrix must be |candidates| x |samples| for the decode it
    is used with; it is returned verbatim.
    """

    name = "external-matrix"

    def __init__(self, values: Sequence[Sequence[float]]):
        self.values = [[float(v) for v in row] for row in values]

    def pairwise(self, sample: str, candidate: str) -> float:
        raise DataError(
            "external-matrix utility has no pairwise form; use the matrix"
        )

    def matrix(self, candidates, samples):
        if len(self.values) != len(candidates) or any(
            len(row) != len(samples) for row in self.values
        ):
            raise DataError(
                f"utility matrix is {len(self.values)}x"
                f"{len(self.values[0]) if self.values else 0}, decode needs "
                f"{len(candidates)}x{len(samples)}"
            )
        return self.values


def make_utility(name: str, matrix: Sequence[Sequence[float]] | None = None) -> UtilityFunction:
    if name == "chrf":
        return ChrfUtility()
    if name == "bleu-sentence":
        return SentenceBleuUtility()
    if name == "external-matrix":
        if matrix is None:
            raise DataError("external-matrix utility requires matrix values")
        return MatrixUtility(matrix)
    raise DataError(f"unknown utility {name!r}")


def utility_matrix(
    candidates: Sequence[str], samples: Sequence[str], utility: UtilityFunction
) -> list[list[float]]:
    """Entry (i, j) = u(samples[j], candidates[i])."""
    if not candidates or not samples:
        raise DataError("utility matrix needs candidates and samples")
    return utility.matrix(candidates, samples)


@dataclass(frozen=True)
class MbrResult:
    best: Hypothesis
    best_index: int
    expected_utilities: tuple[float, ...]


def mbr_decode(
    candidates: NBestList,
    prefs: PseudoReferenceSet,
    utility: UtilityFunction,
) -> MbrResult:
    """Pick the candidate with the highest mean utility over the samples."""
    if len(candidates) == 0:
        raise DataError(
            f"segment {candidates.segment_id}: no candidates to decode"
        )
    matrix = utility_matrix(
        [h.text for h in candidates], list(prefs.samples), utility
    )
    m = prefs.size
    expected = tuple(sum(row) / m for row in matrix)
    best_index = max(range(len(expected)), key=lambda i: (expected[i], -i))
    return MbrResult(candidates[best_index], best_index, expected)


def two_stage_decode(
    ensemble_nbest: NBestList,
    doc_nbest: NBestList,
    weights: WeightVector,
    k: int,
    utility: UtilityFunction,
    dedupe: bool = False,
) -> MbrResult:
    """Merge two candidate lists, prune to the k best by the tuned linear
    model, then MBR-decode with the survivors as both candidates and
    pseudo-references."""
    merged = merge_nbest(ensemble_nbest, doc_nbest, dedupe)
    pruned = prune_topk(merged, weights, k)
    prefs = PseudoReferenceSet(pruned.segment_id, tuple(h.text for h in pruned))
    return mbr_decode(pruned, prefs, utility)


def parse_utility_matrix(stream: Iterable[str] | str) -> list[list[float]]:
    """Read a matrix file: header ``<rows> <cols>``, then row-major reals."""
    if isinstance(stream, str):
        tokens = stream.split()
    else:
        tokens = "".join(stream).split()
    if len(tokens) < 2:
        raise DataError("utility matrix file lacks a dimension header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = [float(t) for t in tokens[2:]]
    except ValueError as exc:
        raise DataError(f"bad utility matrix file: {exc}") from None
    if rows < 1 or cols < 1 or len(values) != rows * cols:
        raise DataError(
            f"utility matrix header says {rows}x{cols} but file has "
            f"{len(values)} values"
        )
    return [values[r * cols : (r + 1) * cols] for r in range(rows)]


def write_utility_matrix(matrix: Sequence[Sequence[float]]) -> str:
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    lines = [f"{rows} {cols}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in matrix]
    return "\n".join(lines) + "\n"

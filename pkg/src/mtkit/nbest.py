"""Data model and I/O for n-best lists, weight files, and parallel corpora.

The n-best wire format follows the Moses/Marian ``|||`` convention::

    <segment_id> ||| <text> ||| <name>= <value> ... ||| <combined_score>

one hypothesis per line, UTF-8, LF line endings, segment ids non-decreasing.
Weight files carry one ``name<TAB>value`` per line.  Parallel corpora are
two aligned text files or a single ``source<TAB>target`` TSV.

All types here are immutable values after construction and safe to share
between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError, ParseError

ORIGIN_ENSEMBLE = "ensemble"
ORIGIN_DOCUMENT = "document"
ORIGIN_OTHER = "other"
ORIGINS = frozenset((ORIGIN_ENSEMBLE, ORIGIN_DOCUMENT, ORIGIN_OTHER))

FIELD_SEP = " ||| "

# Dedupe tie-break on equal scores prefers ensemble-originated hypotheses.
_ORIGIN_PRIORITY = {ORIGIN_ENSEMBLE: 0, ORIGIN_DOCUMENT: 1, ORIGIN_OTHER: 2}


def _format_float(value: float) -> str:
    """Shortest representation that parses back to the same float."""
    return repr(float(value))


def _parse_float(token: str, line_number: int | None, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric {what}: {token!r}", line_number) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what}: {token!r}", line_number)
    return value


@dataclass(frozen=True)
class Segment:
    """One source segment, optionally with its reference translation."""

    id: int
    source_text: str
    reference_text: str | None = None

    def __post_init__(self):
        if self.id < 0:
            raise DataError(f"segment id must be >= 0, got {self.id}")
        if not self.source_text.strip():
            raise DataError(f"segment {self.id}: empty source text")


@dataclass(frozen=True)
class Hypothesis:
    """One candidate translation with named feature scores."""

    segment_id: int
    text: str
    features: dict[str, float] = field(default_factory=dict)
    combined_score: float = 0.0
    origin: str = ORIGIN_OTHER

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise DataError(f"unknown origin {self.origin!r}")
        if not math.isfinite(self.combined_score):
            raise DataError(
                f"segment {self.segment_id}: non-finite combined score"
            )

    def with_score(self, score: float) -> "Hypothesis":
        return replace(self, combined_score=score)


@dataclass(frozen=True)
class NBestList:
    """Ordered candidate translations for one source segment."""

    segment_id: int
    hypotheses: tuple[Hypothesis, ...]

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        for hyp in self.hypotheses:
            if hyp.segment_id != self.segment_id:
                raise DataError(
                    f"hypothesis segment id {hyp.segment_id} does not match "
                    f"list segment id {self.segment_id}"
                )

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.hypotheses)

    def __getitem__(self, index: int) -> Hypothesis:
        return self.hypotheses[index]


@dataclass(frozen=True)
class WeightVector:
    """Named feature weights for linear combination."""

    weights: dict[str, float]

    def __post_init__(self):
        if not self.weights:
            raise DataError("weight vector is empty")
        for name, value in self.weights.items():
            if not math.isfinite(value):
                raise DataError(f"non-finite weight for {name!r}")
        if all(value == 0.0 for value in self.weights.values()):
            raise DataError("weight vector has no non-zero weight")

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self.weights))

    def __getitem__(self, name: str) -> float:
        return self.weights[name]


@dataclass(frozen=True)
class ParallelCorpus:
    """Aligned (source, target) sentence pairs, optionally grouped into documents.

    Boundary ranges, when present, must partition the pair sequence.  Empty
    strings are tolerated here so that dirty corpora can be loaded and then
    cleaned by the filtering operations.
    """

    pairs: tuple[tuple[str, str], ...]
    boundaries: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if self.boundaries is not None:
            spans = tuple(tuple(b) for b in self.boundaries)
            object.__setattr__(self, "boundaries", spans)
            expected_start = 0
            for start, end in spans:
                if start != expected_start or start >= end:
                    raise DataError(
                        f"document boundaries do not partition the corpus "
                        f"(bad range {start}..{end})"
                    )
                expected_start = end
            if expected_start != len(self.pairs):
                raise DataError(
                    "document boundaries do not cover the whole corpus"
                )

    def __len__(self) -> int:
        return len(self.pairs)

    def documents(self) -> Iterator[tuple[tuple[str, str], ...]]:
        """Yield pairs grouped by document (one group if no boundaries)."""
        if self.boundaries is None:
            yield self.pairs
        else:
            for start, end in self.boundaries:
                yield self.pairs[start:end]


def _iter_lines(stream: Iterable[str] | str) -> Iterator[str]:
    if isinstance(stream, str):
        yield from stream.splitlines()
    else:
        for line in stream:
            yield line.rstrip("\n")


def parse_nbest(
    stream: Iterable[str] | str, origin: str = ORIGIN_OTHER
) -> list[NBestList]:
    """Parse a Moses-style n-best stream into per-segment lists.

    Hypotheses are grouped by segment id; input order is preserved within
    each group.  Segment ids must be non-decreasing.
    """
    if origin not in ORIGINS:
        raise DataError(f"unknown origin {origin!r}")
    lists: list[NBestList] = []
    current_id: int | None = None
    current: list[Hypothesis] = []

    def flush():
        if current_id is not None:
            lists.append(NBestList(current_id, tuple(current)))

    for line_number, line in enumerate(_iter_lines(stream), start=1):
        if line == "":
            continue
        fields = line.split(FIELD_SEP)
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 '|||'-separated fields, found {len(fields)}",
                line_number,
            )
        id_token, text, feature_field, score_token = fields
        try:
            segment_id = int(id_token)
        except ValueError:
            raise ParseError(
                f"bad segment id: {id_token!r}", line_number
            ) from None
        features: dict[str, float] = {}
        tokens = feature_field.split()
        if len(tokens) % 2 != 0:
            raise ParseError(
                f"feature field does not alternate name/value: "
                f"{feature_field!r}",
                line_number,
            )
        for name_token, value_token in zip(tokens[::2], tokens[1::2]):
            if not name_token.endswith("=") or len(name_token) == 1:
                raise ParseError(
                    f"bad feature name token: {name_token!r}", line_number
                )
            name = name_token[:-1]
            if name in features:
                raise ParseError(
                    f"duplicate feature name: {name!r}", line_number
                )
            features[name] = _parse_float(
                value_token, line_number, f"value for feature {name!r}"
            )
        combined = _parse_float(score_token, line_number, "combined score")
        if current_id is not None and segment_id < current_id:
            raise ParseError(
                f"segment id {segment_id} decreases after {current_id}",
                line_number,
            )
        if segment_id != current_id:
            flush()
            current_id = segment_id
            current = []
        current.append(
            Hypothesis(segment_id, text, features, combined, origin)
        )
    flush()
    return lists


def write_nbest(lists: Sequence[NBestList]) -> str:
    """Serialize n-best lists; inverse of :func:`parse_nbest`."""
    out: list[str] = []
    for nbest in lists:
        for hyp in nbest:
            feature_field = " ".join(
                f"{name}= {_format_float(value)}"
                for name, value in hyp.features.items()
            )
            out.append(
                FIELD_SEP.join(
                    (
                        str(hyp.segment_id),
                        hyp.text,
                        feature_field,
                        _format_float(hyp.combined_score),
                    )
                )
            )
    if not out:
        return ""
    return "\n".join(out) + "\n"


def merge_nbest(a: NBestList, b: NBestList, dedupe: bool = False) -> NBestList:
    """Union of two candidate lists for the same segment.

    With ``dedupe``, hypotheses with identical text are collapsed to the one
    with the higher combined score; score ties keep the ensemble-originated
    hypothesis, then the earlier position.  Surviving hypotheses keep the
    position of the earliest duplicate.
    """
    if a.segment_id != b.segment_id:
        raise DataError(
            f"cannot merge lists for segments {a.segment_id} and "
            f"{b.segment_id}"
        )
    combined = list(a) + list(b)
    if not dedupe:
        return NBestList(a.segment_id, tuple(combined))
    best_by_text: dict[str, tuple[float, int, int]] = {}
    for position, hyp in enumerate(combined):
        key = (
            -hyp.combined_score,
            _ORIGIN_PRIORITY[hyp.origin],
            position,
        )
        incumbent = best_by_text.get(hyp.text)
        if incumbent is None or key < incumbent[0]:
            first_pos = position if incumbent is None else incumbent[1]
            best_by_text[hyp.text] = (key, first_pos, position)
        # else keep incumbent; its first_pos already recorded
    slots = {
        first_pos: combined[winner_pos]
        for _, first_pos, winner_pos in best_by_text.values()
    }
    survivors = tuple(slots[pos] for pos in sorted(slots))
    return NBestList(a.segment_id, survivors)


def parse_weights(stream: Iterable[str] | str) -> WeightVector:
    """Parse a ``name<TAB>value`` weights file."""
    weights: dict[str, float] = {}
    for line_number, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected 'name<TAB>value', got {line!r}", line_number
            )
        name, value_token = parts
        if name in weights:
            raise ParseError(f"duplicate weight name {name!r}", line_number)
        weights[name] = _parse_float(value_token, line_number, "weight")
    return WeightVector(weights)


def write_weights(weights: WeightVector) -> str:
    return "".join(
        f"{name}\t{_format_float(value)}\n"
        for name, value in sorted(weights.weights.items())
    )


def read_parallel_tsv(stream: Iterable[str] | str) -> ParallelCorpus:
    """Read a ``source<TAB>target`` TSV into a corpus."""
    pairs: list[tuple[str, str]] = []
    for line_number, line in enumerate(_iter_lines(stream), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected 'source<TAB>target', got {line!r}", line_number
            )
        pairs.append((parts[0], parts[1]))
    return ParallelCorpus(tuple(pairs))


def read_parallel_files(
    source_lines: Iterable[str] | str, target_lines: Iterable[str] | str
) -> ParallelCorpus:
    """Pair up two aligned text files into a corpus."""
    sources = list(_iter_lines(source_lines))
    targets = list(_iter_lines(target_lines))
    if len(sources) != len(targets):
        raise DataError(
            f"side lengths differ: {len(sources)} source lines vs "
            f"{len(targets)} target lines"
        )
    return ParallelCorpus(tuple(zip(sources, targets)))


def write_parallel_tsv(corpus: ParallelCorpus) -> str:
    return "".join(f"{src}\t{tgt}\n" for src, tgt in corpus.pairs)


def parse_boundaries(stream: Iterable[str] | str) -> tuple[tuple[int, int], ...]:
    """Read a document-boundary file: one ``start end`` range per line."""
    spans: list[tuple[int, int]] = []
    for line_number, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(
                f"expected 'start end', got {line!r}", line_number
            )
        try:
            spans.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"bad boundary range {line!r}", line_number) from None
    return tuple(spans)

"""Source factors: per-token named-entity labels and subword propagation.

Seven labels: ``p0`` for normal tokens, ``p1``..``p6`` for the PER, LOC,
ORG, MISC, PRO, EVT entity categories.  A whole entity span shares one
label; inside/outside/beginning positions are not distinguished.  The
serialized form is ``surface|pN``, space-separated, one sentence per line.

Entity spans come from standoff annotations (``sent_id start end CATEGORY``
per line) or from a small exact-match gazetteer tagger, so the pipeline
runs without any NER model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import AlignmentError, DataError, ParseError

NORMAL_LABEL = "p0"
CATEGORIES = ("PER", "LOC", "ORG", "MISC", "PRO", "EVT")
FACTOR_LABELS = ("p0", "p1", "p2", "p3", "p4", "p5", "p6")

LABEL_FOR_CATEGORY = {cat: f"p{i + 1}" for i, cat in enumerate(CATEGORIES)}
CATEGORY_FOR_LABEL = {label: cat for cat, label in LABEL_FOR_CATEGORY.items()}

# Word-initial subword marker; SentencePiece-style lower one eighth block.
DEFAULT_MARKER = "▁"


@dataclass(frozen=True)
class FactoredToken:
    surface: str
    factor: str

    def __post_init__(self):
        if not self.surface:
            raise DataError("empty token surface")
        if "|" in self.surface or any(c.isspace() for c in self.surface):
            raise DataError(
                f"token surface {self.surface!r} contains '|' or whitespace"
            )
        if self.factor not in FACTOR_LABELS:
            raise DataError(f"unknown factor label {self.factor!r}")


@dataclass(frozen=True)
class EntitySpan:
    """Token range [start_token, end_token) carrying one entity category."""

    start_token: int
    end_token: int
    category: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise DataError(f"unknown entity category {self.category!r}")
        if not 0 <= self.start_token < self.end_token:
            raise DataError(
                f"bad span {self.start_token}..{self.end_token}"
            )


def attach_factors(
    tokens: Sequence[str], spans: Sequence[EntitySpan]
) -> tuple[FactoredToken, ...]:
    """Label span tokens with their category, everything else with p0."""
    ordered = sorted(spans, key=lambda s: s.start_token)
    previous_end = 0
    for span in ordered:
        if span.end_token > len(tokens):
            raise DataError(
                f"span {span.start_token}..{span.end_token} exceeds "
                f"{len(tokens)} tokens"
            )
        if span.start_token < previous_end:
            raise DataError(
                f"span {span.start_token}..{span.end_token} overlaps a "
                f"previous span"
            )
        previous_end = span.end_token
    labels = [NORMAL_LABEL] * len(tokens)
    for span in ordered:
        for i in range(span.start_token, span.end_token):
            labels[i] = LABEL_FOR_CATEGORY[span.category]
    return tuple(
        FactoredToken(surface, label) for surface, label in zip(tokens, labels)
    )


def propagate_to_subwords(
    factored: Sequence[FactoredToken],
    subwords: Sequence[str],
    marker: str = DEFAULT_MARKER,
) -> tuple[FactoredToken, ...]:
    """Carry each token's factor onto the subwords it decomposes into.

    The subwords must re-compose into the token sequence exactly; a
    ``marker`` prefix flags subwords that begin a whitespace-separated
    word and is kept on the output surfaces.  Punctuation-like subwords
    may start a token without the marker.
    """
    if not marker:
        raise DataError("subword marker must be non-empty")
    out: list[FactoredToken] = []
    token_index = 0
    pos = 0
    for k, subword in enumerate(subwords):
        if subword == "":
            raise AlignmentError("empty subword", k)
        if factored and pos == len(factored[token_index].surface):
            token_index += 1
            pos = 0
        if token_index >= len(factored):
            raise AlignmentError(
                f"subword {subword!r} continues past the final token", k
            )
        piece = subword
        if piece.startswith(marker):
            if pos != 0:
                raise AlignmentError(
                    f"word-initial marker inside token "
                    f"{factored[token_index].surface!r}",
                    k,
                )
            piece = piece[len(marker):]
        surface = factored[token_index].surface
        if len(piece) > len(surface) - pos or surface[pos : pos + len(piece)] != piece:
            raise AlignmentError(
                f"subword {subword!r} does not match token {surface!r} "
                f"at offset {pos}",
                k,
            )
        pos += len(piece)
        out.append(FactoredToken(subword, factored[token_index].factor))
    if factored:
        if token_index != len(factored) - 1 or pos != len(
            factored[token_index].surface
        ):
            raise AlignmentError(
                "subwords end before covering the token sequence",
                len(subwords),
            )
    elif subwords:
        raise AlignmentError("subwords given for an empty token sequence", 0)
    return tuple(out)


def parse_factored(line: str) -> tuple[FactoredToken, ...]:
    """Parse one ``surface|pN`` sentence line."""
    tokens = []
    for field in line.split():
        surface, sep, label = field.rpartition("|")
        if not sep or label not in FACTOR_LABELS:
            raise ParseError(f"token {field!r} lacks a '|pN' factor suffix")
        if not surface:
            raise ParseError(f"token {field!r} has an empty surface")
        tokens.append(FactoredToken(surface, label))
    return tuple(tokens)


def write_factored(tokens: Sequence[FactoredToken]) -> str:
    return " ".join(f"{t.surface}|{t.factor}" for t in tokens)


def count_categories(
    corpus: Iterable[Sequence[FactoredToken]],
) -> dict[str, int]:
    """Count entity occurrences as maximal same-label runs per sentence.

    Without inside/outside/beginning structure, adjacent entities of the
    same category merge into one run and count once.
    """
    counts = {category: 0 for category in CATEGORIES}
    for sentence in corpus:
        previous = NORMAL_LABEL
        for token in sentence:
            if token.factor != NORMAL_LABEL and token.factor != previous:
                counts[CATEGORY_FOR_LABEL[token.factor]] += 1
            previous = token.factor
    return counts


def gazetteer_spans(
    tokens: Sequence[str],
    gazetteer: Sequence[tuple[tuple[str, ...], str]],
) -> tuple[EntitySpan, ...]:
    """Exact-match phrase tagging: longest match first, left to right,
    non-overlapping."""
    by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
    for phrase, category in gazetteer:
        if not phrase:
            raise DataError("empty gazetteer phrase")
        by_first.setdefault(phrase[0], []).append((phrase, category))
    for entries in by_first.values():
        entries.sort(key=lambda e: -len(e[0]))
    spans = []
    i = 0
    while i < len(tokens):
        matched = False
        for phrase, category in by_first.get(tokens[i], ()):
            if tuple(tokens[i : i + len(phrase)]) == phrase:
                spans.append(EntitySpan(i, i + len(phrase), category))
                i += len(phrase)
                matched = True
                break
        if not matched:
            i += 1
    return tuple(spans)


def parse_gazetteer(
    stream: Iterable[str] | str,
) -> tuple[tuple[tuple[str, ...], str], ...]:
    """Read a ``phrase<TAB>CATEGORY`` gazetteer file."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    entries = []
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected 'phrase<TAB>CATEGORY', got {line!r}", line_number
            )
        phrase, category = parts
        if category not in CATEGORIES:
            raise ParseError(f"unknown category {category!r}", line_number)
        entries.append((tuple(phrase.split()), category))
    return tuple(entries)


def parse_standoff(
    stream: Iterable[str] | str,
) -> dict[int, list[EntitySpan]]:
    """Read standoff annotations: ``sent_id start end CATEGORY`` per line."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    spans: dict[int, list[EntitySpan]] = {}
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(
                f"expected 'sent_id start end CATEGORY', got {line!r}",
                line_number,
            )
        try:
            sent_id, start, end = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"bad span line {line!r}", line_number) from None
        if parts[3] not in CATEGORIES:
            raise ParseError(f"unknown category {parts[3]!r}", line_number)
        spans.setdefault(sent_id, []).append(EntitySpan(start, end, parts[3]))
    return spans

"""Corpus filtering heuristics and document-level dataset construction.

Filtering applies punctuation normalization, length and length-ratio
bounds on whitespace tokens, and exact-duplicate removal, reporting how
many pairs each rule removed.

Document datasets join consecutive same-document sentences with a literal
``<SEP>`` tag (single spaces around it) in six modes: sentence-level,
previous+current context, and greedy token windows of 50/100/250/500
source tokens.  Windows never split a sentence and never cross document
boundaries; a single sentence over the budget is emitted alone and
logged, never dropped.
"""

from __future__ import annotations

import logging
import random
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import DataError, SeparatorCountError
from .nbest import ParallelCorpus

logger = logging.getLogger(__name__)

SEPARATOR = "<SEP>"

DOC_MODES = (
    "curr",
    "prev_curr",
    "window_50t",
    "window_100t",
    "window_250t",
    "window_500t",
)

WINDOW_BUDGETS = {
    "window_50t": 50,
    "window_100t": 100,
    "window_250t": 250,
    "window_500t": 500,
}


def whitespace_tokens(text: str) -> int:
    return len(text.split())


# ---------------------------------------------------------------------------
# Text normalization

_QUOTE_MAP = {c: '"' for c in "„“”‟«»″"}
_QUOTE_MAP.update({c: "'" for c in "‚‘’‛‹›`´"})
_DASH_MAP = {c: "-" for c in "–—―−‐‑"}
_CHAR_MAP = str.maketrans({**_QUOTE_MAP, **_DASH_MAP, "…": "..."})

_WS_RUN = re.compile(r"\s+")
_KEEP_CONTROLS = frozenset("\t\n\r\x0b\x0c")


def strip_nonprinting(text: str) -> str:
    """Delete control and format characters (zero-width joiners, BOMs,
    soft hyphens, ...); ordinary whitespace controls are kept for the
    whitespace pass."""
    return "".join(
        c
        for c in text
        if c in _KEEP_CONTROLS or unicodedata.category(c) not in ("Cc", "Cf")
    )


def normalize_punct(text: str) -> str:
    """Fixed normalization rule list, idempotent:

    1. curly/angled quotes to ASCII ``"`` and ``'``;
    2. en/em/horizontal-bar dashes and the minus sign to ``-``;
    3. the ellipsis character to ``...``;
    4. non-printing character removal;
    5. whitespace runs collapsed to single spaces, ends trimmed.
    """
    text = text.translate(_CHAR_MAP)
    text = strip_nonprinting(text)
    return _WS_RUN.sub(" ", text).strip()


# ---------------------------------------------------------------------------
# Filtering


@dataclass(frozen=True)
class FilterConfig:
    min_len: int = 1
    max_len: int = 200
    max_ratio: float = 9.0
    dedupe: bool = True
    normalize_punct: bool = True
    strip_nonprinting: bool = True

    def __post_init__(self):
        if not 0 < self.min_len <= self.max_len:
            raise DataError(
                f"need 0 < min_len <= max_len, got {self.min_len}..{self.max_len}"
            )
        if self.max_ratio < 1:
            raise DataError(f"max_ratio must be >= 1, got {self.max_ratio}")


@dataclass
class FilterReport:
    total: int = 0
    kept: int = 0
    removed: dict[str, int] = field(
        default_factory=lambda: {"too_short": 0, "too_long": 0, "ratio": 0, "duplicate": 0}
    )

    def as_lines(self) -> str:
        lines = [f"total={self.total}", f"kept={self.kept}"]
        lines += [f"removed_{rule}={n}" for rule, n in self.removed.items()]
        return "\n".join(lines) + "\n"


def filter_corpus(
    corpus: ParallelCorpus, cfg: FilterConfig
) -> tuple[ParallelCorpus, FilterReport]:
    """Order-preserving cleanup; each dropped pair is attributed to the
    first rule that rejects it.  Document boundaries are remapped onto the
    surviving pairs (documents left empty are dropped)."""
    report = FilterReport(total=len(corpus.pairs))
    seen: set[tuple[str, str]] = set()
    kept_pairs: list[tuple[str, str]] = []
    kept_flags: list[bool] = []
    for src, tgt in corpus.pairs:
        if cfg.normalize_punct:
            src, tgt = normalize_punct(src), normalize_punct(tgt)
        elif cfg.strip_nonprinting:
            src, tgt = strip_nonprinting(src), strip_nonprinting(tgt)
        len_src = whitespace_tokens(src)
        len_tgt = whitespace_tokens(tgt)
        rule = None
        if len_src < cfg.min_len or len_tgt < cfg.min_len:
            rule = "too_short"
        elif len_src > cfg.max_len or len_tgt > cfg.max_len:
            rule = "too_long"
        elif max(len_src, len_tgt) / min(len_src, len_tgt) > cfg.max_ratio:
            rule = "ratio"
        elif cfg.dedupe:
            if (src, tgt) in seen:
                rule = "duplicate"
            else:
                seen.add((src, tgt))
        if rule is None:
            kept_pairs.append((src, tgt))
            kept_flags.append(True)
        else:
            report.removed[rule] += 1
            kept_flags.append(False)
    report.kept = len(kept_pairs)
    boundaries = None
    if corpus.boundaries is not None:
        boundaries = []
        position = 0
        for start, end in corpus.boundaries:
            kept_here = sum(kept_flags[start:end])
            if kept_here:
                boundaries.append((position, position + kept_here))
                position += kept_here
        boundaries = tuple(boundaries)
    return ParallelCorpus(tuple(kept_pairs), boundaries), report


# ---------------------------------------------------------------------------
# Document-level datasets


@dataclass(frozen=True)
class DocSample:
    """One training sample of ``<SEP>``-joined sentences."""

    source: str
    target: str
    sentence_count: int

    def __post_init__(self):
        if self.sentence_count < 1:
            raise DataError("sample must contain at least one sentence")
        expected = self.sentence_count - 1
        for side, text in (("source", self.source), ("target", self.target)):
            if text.count(SEPARATOR) != expected:
                raise DataError(
                    f"{side} side has {text.count(SEPARATOR)} separators, "
                    f"expected {expected}"
                )


def join_sentences(sentences: Sequence[str]) -> str:
    return f" {SEPARATOR} ".join(sentences)


def split_doc_hypothesis(text: str, expected: int) -> list[str]:
    """Invert :func:`join_sentences`; errors carry the actual count so
    callers can drop mismatched hypotheses and account for them."""
    if expected < 1:
        raise DataError("expected sentence count must be >= 1")
    parts = [part.strip(" ") for part in text.split(SEPARATOR)]
    if len(parts) != expected:
        raise SeparatorCountError(expected, len(parts), text)
    return parts


def _pack_windows(
    doc: Sequence[tuple[str, str]],
    budget: int,
    token_counter: Callable[[str], int],
) -> Iterable[DocSample]:
    window: list[tuple[str, str]] = []
    window_tokens = 0
    for src, tgt in doc:
        src_tokens = token_counter(src)
        if window and window_tokens + 1 + src_tokens > budget:
            yield _emit(window)
            window, window_tokens = [], 0
        if not window and src_tokens > budget:
            logger.warning(
                "sentence of %d source tokens exceeds the %d-token window; "
                "emitted alone",
                src_tokens,
                budget,
            )
            yield _emit([(src, tgt)])
            continue
        window_tokens += src_tokens if not window else src_tokens + 1
        window.append((src, tgt))
    if window:
        yield _emit(window)


def _emit(window: Sequence[tuple[str, str]]) -> DocSample:
    return DocSample(
        join_sentences([src for src, _ in window]),
        join_sentences([tgt for _, tgt in window]),
        len(window),
    )


def build_doc_dataset(
    corpus: ParallelCorpus,
    mode: str,
    token_counter: Callable[[str], int] = whitespace_tokens,
    synthetic_shuffle: bool = False,
    seed: int = 0,
) -> list[DocSample]:
    """Build one dataset mode.  The token budget binds on the source side:
    per-sentence counts from ``token_counter`` plus one per separator.

    ``synthetic_shuffle`` reproduces the synthetic long-sequence regime:
    sentences are shuffled with the seeded RNG and packed as one stream,
    ignoring document boundaries.
    """
    if mode not in DOC_MODES:
        raise DataError(f"unknown dataset mode {mode!r}")
    if synthetic_shuffle:
        pairs = list(corpus.pairs)
        random.Random(seed).shuffle(pairs)
        documents: Iterable[Sequence[tuple[str, str]]] = [pairs]
    else:
        documents = corpus.documents()
    samples: list[DocSample] = []
    for doc in documents:
        if mode == "curr":
            samples.extend(DocSample(src, tgt, 1) for src, tgt in doc)
        elif mode == "prev_curr":
            previous: tuple[str, str] | None = None
            for src, tgt in doc:
                if previous is None:
                    samples.append(DocSample(src, tgt, 1))
                else:
                    samples.append(
                        DocSample(
                            join_sentences([previous[0], src]),
                            join_sentences([previous[1], tgt]),
                            2,
                        )
                    )
                previous = (src, tgt)
        else:
            samples.extend(
                _pack_windows(doc, WINDOW_BUDGETS[mode], token_counter)
            )
    return samples


def build_merged_dataset(
    corpus: ParallelCorpus,
    token_counter: Callable[[str], int] = whitespace_tokens,
    seed: int = 0,
) -> list[DocSample]:
    """All six modes concatenated and shuffled with the seeded RNG."""
    samples: list[DocSample] = []
    for mode in DOC_MODES:
        samples.extend(build_doc_dataset(corpus, mode, token_counter))
    random.Random(seed).shuffle(samples)
    return samples


def sample_source_tokens(
    sample: DocSample, token_counter: Callable[[str], int] = whitespace_tokens
) -> int:
    """Source-side size of a sample under the packing convention."""
    sentences = split_doc_hypothesis(sample.source, sample.sentence_count)
    return sum(token_counter(s) for s in sentences) + sample.sentence_count - 1

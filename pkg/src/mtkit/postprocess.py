"""Deterministic post-editing of final translations.

Seven rules run in a fixed order, each conditioned on the source sentence
and the target language; every rule is individually idempotent, and the
inputs never get touched:

  r1  transfer emojis missing from the hypothesis
  r2  language-appropriate quotation marks
  r3  capitalization restoration
  r4  terminal punctuation restoration (. ! ?)
  r5  three dots to an ellipsis character
  r6  leading bullet / enumeration restoration
  r7  collapse consecutively repeated tokens

Emoji placement uses a token alignment when one is supplied and falls
back to the proportional character position otherwise.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .emoji_data import is_emoji
from .errors import DataError, ParseError

RULE_IDS = ("r1", "r2", "r3", "r4", "r5", "r6", "r7")

RULE_NAMES = {
    "r1": "emoji-transfer",
    "r2": "quotation-marks",
    "r3": "capitalization",
    "r4": "terminal-punctuation",
    "r5": "ellipsis",
    "r6": "bullet",
    "r7": "repeated-words",
}

TARGET_LANGUAGES = ("cs", "uk", "other")

_QUOTE_STYLES = {"cs": ("„", "“"), "uk": ("«", "»")}

_TERMINALS = ".!?"

_BULLET_RE = re.compile(r"^\s*([-•*]|\d+[.)])\s+")

_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class PostprocessConfig:
    target_language: str = "other"
    enabled_rules: frozenset[str] = frozenset(RULE_IDS)
    alignment: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.target_language not in TARGET_LANGUAGES:
            raise DataError(
                f"unknown target language {self.target_language!r}"
            )
        object.__setattr__(self, "enabled_rules", frozenset(self.enabled_rules))
        unknown = self.enabled_rules - set(RULE_IDS)
        if unknown:
            raise DataError(f"unknown rule ids: {sorted(unknown)}")
        if self.alignment is not None:
            object.__setattr__(
                self, "alignment", tuple(tuple(p) for p in self.alignment)
            )


def _token_boundaries(text: str) -> list[int]:
    """Character offsets where a new token may be inserted: the start of
    the string and the end of every token."""
    boundaries = [0]
    boundaries += [m.end() for m in _TOKEN_RE.finditer(text)]
    return boundaries


def _insert_token(text: str, boundary: int, token: str) -> str:
    if not text:
        return token
    if boundary <= 0:
        return f"{token} {text}"
    if boundary >= len(text):
        return f"{text} {token}"
    return f"{text[:boundary]} {token}{text[boundary:]}"


def _source_token_index(source: str, char_offset: int) -> int | None:
    for index, match in enumerate(_TOKEN_RE.finditer(source)):
        if match.start() <= char_offset < match.end():
            return index
    return None


def _rule_emoji(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    occurrences = [(i, c) for i, c in enumerate(source) if is_emoji(c)]
    if not occurrences:
        return hyp
    remaining = Counter(c for c in hyp if is_emoji(c))
    missing: list[tuple[int, str]] = []
    for offset, char in occurrences:
        if remaining[char] > 0:
            remaining[char] -= 1
        else:
            missing.append((offset, char))
    for offset, char in missing:
        boundary = None
        if cfg.alignment is not None:
            src_token = _source_token_index(source, offset)
            aligned = sorted(
                j for i, j in cfg.alignment if i == src_token
            )
            if aligned:
                hyp_ends = [m.end() for m in _TOKEN_RE.finditer(hyp)]
                if aligned[0] < len(hyp_ends):
                    boundary = hyp_ends[aligned[0]]
        if boundary is None:
            target = offset / max(len(source), 1) * len(hyp)
            boundary = min(
                _token_boundaries(hyp), key=lambda b: (abs(b - target), b)
            )
        hyp = _insert_token(hyp, boundary, char)
    return hyp


def _rule_quotes(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    style = _QUOTE_STYLES.get(cfg.target_language)
    if style is None:
        return hyp
    opening, closing = style
    total = hyp.count('"')
    paired = total - (total % 2)
    out = []
    seen = 0
    for char in hyp:
        if char == '"' and seen < paired:
            out.append(opening if seen % 2 == 0 else closing)
            seen += 1
        else:
            out.append(char)
    return "".join(out)


def _rule_capitalization(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    letters = [c for c in source if c.isalpha()]
    if letters and all(c.isupper() for c in letters):
        return hyp.upper()
    first_source = letters[0] if letters else None
    if first_source is None or not first_source.isupper():
        return hyp
    for index, char in enumerate(hyp):
        if char.isalpha():
            if char.islower():
                return hyp[:index] + char.upper() + hyp[index + 1 :]
            break
    return hyp


def _terminal_mark(char: str) -> str | None:
    # the ellipsis character stands in for a period, keeping this rule
    # stable when it runs again after the ellipsis rule
    if char == "…":
        return "."
    return char if char in _TERMINALS else None


def _rule_terminal(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    src = source.rstrip()
    if not src:
        return hyp
    source_mark = _terminal_mark(src[-1])
    if source_mark is None:
        return hyp
    body = hyp.rstrip()
    tail = hyp[len(body):]
    if not body:
        return source_mark + tail
    hyp_mark = _terminal_mark(body[-1])
    if hyp_mark == source_mark:
        return hyp
    if hyp_mark is not None:
        return body[:-1] + source_mark + tail
    return body + source_mark + tail


def _rule_ellipsis(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    return hyp.replace("...", "…")


def _rule_bullet(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    match = _BULLET_RE.match(source)
    if match is None:
        return hyp
    prefix = match.group(1)
    stripped = hyp.lstrip()
    if stripped.startswith(prefix):
        return hyp
    return f"{prefix} {stripped}"


def _rule_repeats(source: str, hyp: str, cfg: PostprocessConfig) -> str:
    pieces = re.split(r"(\s+)", hyp)
    out: list[str] = []
    last_token = None
    for index, piece in enumerate(pieces):
        if index % 2 == 1:
            out.append(piece)
            continue
        if piece and piece == last_token:
            if out:
                out.pop()
            continue
        out.append(piece)
        if piece:
            last_token = piece
    return "".join(out)


_RULES = {
    "r1": _rule_emoji,
    "r2": _rule_quotes,
    "r3": _rule_capitalization,
    "r4": _rule_terminal,
    "r5": _rule_ellipsis,
    "r6": _rule_bullet,
    "r7": _rule_repeats,
}


def rule_trace(
    source: str, hypothesis: str, cfg: PostprocessConfig
) -> list[tuple[str, str, str]]:
    """Run the enabled rules in order, recording each rule's effect."""
    trace = []
    current = hypothesis
    for rule_id in RULE_IDS:
        if rule_id not in cfg.enabled_rules:
            continue
        after = _RULES[rule_id](source, current, cfg)
        trace.append((rule_id, current, after))
        current = after
    return trace


def apply_rules(source: str, hypothesis: str, cfg: PostprocessConfig) -> str:
    current = hypothesis
    for rule_id in RULE_IDS:
        if rule_id in cfg.enabled_rules:
            current = _RULES[rule_id](source, current, cfg)
    return current


def parse_alignments(
    stream: Iterable[str] | str,
) -> list[tuple[tuple[int, int], ...]]:
    """Per sentence line: space-separated ``i-j`` token index pairs."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    alignments = []
    for line_number, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        pairs = []
        for token in line.split():
            left, sep, right = token.partition("-")
            if not sep:
                raise ParseError(f"bad alignment pair {token!r}", line_number)
            try:
                pairs.append((int(left), int(right)))
            except ValueError:
                raise ParseError(
                    f"bad alignment pair {token!r}", line_number
                ) from None
        alignments.append(tuple(pairs))
    return alignments

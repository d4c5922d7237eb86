"""Dialogue-driven coarse segmentation.

Long silences are where scene changes tend to hide, so the transcript is
first annotated: wherever the gap between one line's end and the next line's
start strictly exceeds the threshold (default 2.0 s), a numbered separator
marker is inserted, anchored at the earlier line's end time. A gap of
exactly the threshold does not produce a marker, and markers never lead or
trail the transcript.

The reasoner then picks which markers are real topic boundaries; boundaries
may only sit at markers (closed vocabulary, which keeps parsing robust). An
unparseable reply gets one repair round-trip, and if that also fails the
split falls back to cutting at every marker. The outcome records whether
the fallback fired so downstream artifacts can carry that provenance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import UnorderedInput
from .parsing import extract_int_list
from .perception import DialogueLine
from .providers import Part, ProviderClient

SEPARATOR_TOKEN = "[SCENE BREAK?]"
DEFAULT_GAP = 2.0


@dataclass(frozen=True)
class SeparatorMarker:
    number: int  # 1-based, in order of appearance
    time: float  # end of the line before the gap
    gap: float


@dataclass(frozen=True)
class MarkedTranscript:
    """Dialogue lines and separator markers interleaved in time order."""

    items: tuple[DialogueLine | SeparatorMarker, ...]
    separator_token: str = SEPARATOR_TOKEN

    @property
    def lines(self) -> tuple[DialogueLine, ...]:
        return tuple(item for item in self.items if isinstance(item, DialogueLine))

    @property
    def separators(self) -> tuple[SeparatorMarker, ...]:
        return tuple(item for item in self.items if isinstance(item, SeparatorMarker))


@dataclass(frozen=True)
class CoarseSegment:
    """A run of dialogue lines between confirmed separators.

    Spans are [first line start, latest line end); they are disjoint as long
    as no line reaches across a separator gap.
    """

    segment_id: int
    start: float
    end: float
    lines: tuple[DialogueLine, ...]


@dataclass(frozen=True)
class SplitOutcome:
    segments: tuple[CoarseSegment, ...]
    used_fallback: bool


def order_transcript(lines: Iterable[DialogueLine]) -> tuple[DialogueLine, ...]:
    """Sort by start, ties by end; equal spans keep their original order."""
    return tuple(sorted(lines, key=lambda line: (line.start, line.end)))


def insert_separators(
    lines: Sequence[DialogueLine],
    gap_threshold: float = DEFAULT_GAP,
    token: str = SEPARATOR_TOKEN,
) -> MarkedTranscript:
    """Mark every inter-line silence strictly longer than ``gap_threshold``."""
    lines = tuple(lines)
    starts = [line.start for line in lines]
    if starts != sorted(starts):
        raise UnorderedInput("dialogue lines must be ordered by start time")
    items: list[DialogueLine | SeparatorMarker] = []
    number = 0
    for i, line in enumerate(lines):
        if i:
            silence = line.start - lines[i - 1].end
            if silence > gap_threshold:
                number += 1
                items.append(SeparatorMarker(number=number, time=lines[i - 1].end, gap=silence))
        items.append(line)
    return MarkedTranscript(items=tuple(items), separator_token=token)


def render_line(line: DialogueLine) -> str:
    speaker = line.speaker or "Speaker"
    return f"[{line.start:.1f}s-{line.end:.1f}s] {speaker}: {line.text}"


def render_marked(marked: MarkedTranscript) -> str:
    out = []
    for item in marked.items:
        if isinstance(item, SeparatorMarker):
            out.append(f"{marked.separator_token} <#{item.number}>")
        else:
            out.append(render_line(item))
    return "\n".join(out)


def _segments_at(marked: MarkedTranscript, chosen: Iterable[int]) -> tuple[CoarseSegment, ...]:
    """Cut the transcript at the chosen markers (1-based numbers)."""
    chosen = set(chosen)
    groups: list[list[DialogueLine]] = [[]]
    for item in marked.items:
        if isinstance(item, SeparatorMarker):
            if item.number in chosen:
                groups.append([])
        else:
            groups[-1].append(item)
    segments = []
    for group in groups:
        if not group:  # unreachable for valid transcripts; markers never abut
            continue
        segments.append(
            CoarseSegment(
                segment_id=len(segments),
                start=group[0].start,
                end=max(line.end for line in group),
                lines=tuple(group),
            )
        )
    return tuple(segments)


def _parse_marker_numbers(reply: str, valid: set[int]) -> list[int]:
    numbers = extract_int_list(reply)
    if numbers is None:
        raise ValueError("reply is not a list of integers")
    bad = [n for n in numbers if n not in valid]
    if bad:
        raise ValueError(f"unknown marker numbers {bad}; valid: {sorted(valid)}")
    return sorted(set(numbers))


def coarse_split(
    marked: MarkedTranscript,
    client: ProviderClient,
    templates,
) -> SplitOutcome:
    """Split the transcript at the markers the reasoner confirms.

    No dialogue means nothing to split (zero segments); no markers means a
    single segment without consulting the model. An unusable model reply is
    repaired once; if that reply is also unusable, every marker becomes a
    boundary and the outcome is flagged as a fallback. Provider outages
    propagate; the fallback covers bad output, not a dead backend.
    """
    if not marked.lines:
        return SplitOutcome(segments=(), used_fallback=False)
    if not marked.separators:
        return SplitOutcome(segments=_segments_at(marked, ()), used_fallback=False)
    prompt = templates.get("coarse_split").render(
        separator_token=marked.separator_token,
        marked_transcript=render_marked(marked),
    )
    valid = {marker.number for marker in marked.separators}
    reply = client.complete([Part.from_text(prompt)])
    try:
        chosen = _parse_marker_numbers(reply, valid)
    except ValueError as first_error:
        repair = templates.get("repair").render(original_prompt=prompt, error=str(first_error))
        retry = client.complete([Part.from_text(repair)])
        try:
            chosen = _parse_marker_numbers(retry, valid)
        except ValueError:
            return SplitOutcome(segments=_segments_at(marked, valid), used_fallback=True)
    return SplitOutcome(segments=_segments_at(marked, chosen), used_fallback=False)

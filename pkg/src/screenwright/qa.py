"""Question answering over a finished screenplay.

Global questions see the whole screenplay as narrative text. Breakpoint
questions see all scene summaries plus the full content of scenes near
the asked timestamp; if the first answer is empty or hedges with a
negative keyword, the video is re-opened exactly once to caption a few
frames around the timestamp, and the question is asked again with those
fresh captions attached. There is no second retry.

Answering never mutates the screenplay; the document and its digest are
the same before and after.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PartialFailure, TimestampOutOfRange
from .media import DecoderAdapter, extract_frames, pick_adapter
from .perception import CaptionedFrame, caption_images
from .providers import Part, ProviderClient, ProviderProfile, make_clients
from .screenplay import Screenplay, render_text

log = logging.getLogger(__name__)

DEFAULT_NEGATIVE_KEYWORDS = (
    "cannot",
    "can't",
    "don't know",
    "do not know",
    "unable to",
    "not sure",
    "no information",
)

DEFAULT_WINDOW_RADIUS = 60.0  # seconds of screenplay detail around a breakpoint
DEFAULT_LOOK_BACK_WINDOW = 5.0  # seconds either side of the breakpoint
DEFAULT_LOOK_BACK_COUNT = 8

LOOK_BACK_SHOT_ID = -1  # look-back captions are not tied to the shot table


@dataclass(frozen=True)
class Question:
    text: str
    mode: str = "global"  # global | breakpoint
    timestamp: float | None = None


@dataclass(frozen=True)
class Validity:
    verdict: str  # valid | empty | negative_keyword
    matched_keyword: str | None = None


@dataclass(frozen=True)
class Answer:
    text: str
    question: Question
    validity: Validity
    provenance: str  # screenplay | look_back
    look_back_frames: tuple[CaptionedFrame, ...] = ()


def validate_answer(
    text: str, keywords: Sequence[str] = DEFAULT_NEGATIVE_KEYWORDS
) -> Validity:
    """Classify an answer as valid, empty, or hedging.

    Keyword matching is a case-insensitive substring scan; the first
    keyword in list order that appears anywhere in the text wins.
    """
    if not text.strip():
        return Validity(verdict="empty")
    lowered = text.lower()
    for keyword in keywords:
        if keyword.lower() in lowered:
            return Validity(verdict="negative_keyword", matched_keyword=keyword)
    return Validity(verdict="valid")


def look_back_timestamps(
    t: float,
    duration: float,
    *,
    window: float = DEFAULT_LOOK_BACK_WINDOW,
    count: int = DEFAULT_LOOK_BACK_COUNT,
) -> list[float]:
    """Evenly spaced sampling times across [t - window, t + window].

    Count must be even (and at least 2) so the breakpoint itself is never
    sampled; the answer should come from context around the moment, not a
    single frame at it. Times are clamped to [0, duration] and deduped.
    """
    if count < 2 or count % 2 != 0:
        raise ValueError(f"count must be an even number >= 2, got {count}")
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    raw = np.linspace(t - window, t + window, count)
    clamped = np.clip(raw, 0.0, duration)
    out: list[float] = []
    for value in clamped.tolist():
        if not out or value > out[-1]:
            out.append(value)
    return out


def look_back(
    source: str,
    t: float,
    duration: float,
    vision: ProviderClient,
    templates,
    *,
    window: float = DEFAULT_LOOK_BACK_WINDOW,
    count: int = DEFAULT_LOOK_BACK_COUNT,
    adapter: DecoderAdapter | None = None,
) -> tuple[CaptionedFrame, ...]:
    """Re-open the video and caption frames around t.

    Frames that fail to caption are dropped with a warning; only a total
    vision outage propagates.
    """
    adapter = adapter or pick_adapter(source)
    times = look_back_timestamps(t, duration, window=window, count=count)
    images = extract_frames(source, times, adapter=adapter)
    try:
        captions = caption_images(images, vision, templates)
        kept = list(zip(times, captions))
    except PartialFailure as exc:
        log.warning("look-back captioning: %s", exc)
        kept = [(times[i], text) for i, text in zip(exc.ok_indices, exc.captioned)]
    return tuple(
        CaptionedFrame(timestamp=time, shot_id=LOOK_BACK_SHOT_ID, caption=text)
        for time, text in kept
    )


def _render_captions(frames: Sequence[CaptionedFrame]) -> str:
    return "\n".join(f"[{f.timestamp:.1f}s] {f.caption}" for f in frames)


def answer_global(
    screenplay: Screenplay,
    question: Question,
    client: ProviderClient,
    templates,
    keywords: Sequence[str] = DEFAULT_NEGATIVE_KEYWORDS,
) -> Answer:
    """Answer a question about the video as a whole. No fallback: the
    screenplay is all the context there is."""
    prompt = templates.get("global").render(
        screenplay=render_text(screenplay, "global_context"), question=question.text
    )
    reply = client.complete([Part.from_text(prompt)])
    return Answer(
        text=reply,
        question=question,
        validity=validate_answer(reply, keywords),
        provenance="screenplay",
    )


def answer_breakpoint(
    screenplay: Screenplay,
    source: str,
    question: Question,
    profile: ProviderProfile,
    *,
    templates=None,
    radius: float = DEFAULT_WINDOW_RADIUS,
    window: float = DEFAULT_LOOK_BACK_WINDOW,
    count: int = DEFAULT_LOOK_BACK_COUNT,
    keywords: Sequence[str] = DEFAULT_NEGATIVE_KEYWORDS,
    allow_look_back: bool = True,
    look_back_mode: str = "captions",
    adapter: DecoderAdapter | None = None,
) -> Answer:
    """Answer a question about a specific moment.

    First pass uses the windowed screenplay alone. A non-valid answer
    triggers at most one look-back pass; with ``allow_look_back=False``
    (the ablated baseline) the first answer is returned however it came
    out. ``look_back_mode="direct"`` attaches the raw frames to the
    reasoner prompt instead of captioning them first.
    """
    if question.timestamp is None:
        raise TimestampOutOfRange("breakpoint question has no timestamp")
    t = question.timestamp
    duration = screenplay.media.duration
    if not 0.0 <= t <= duration:
        raise TimestampOutOfRange(
            f"timestamp {t} outside the video's [0, {duration}] range"
        )
    if look_back_mode not in ("captions", "direct"):
        raise ValueError(f"unknown look_back_mode {look_back_mode!r}")
    templates = templates or _default_templates()
    clients = make_clients(profile)
    window_text = render_text(screenplay, "window", t=t, radius=radius)
    prompt = templates.get("breakpoint").render(
        timestamp=f"{t:.1f}", screenplay_window=window_text, question=question.text
    )
    reply = clients["reasoner"].complete([Part.from_text(prompt)])
    validity = validate_answer(reply, keywords)
    if validity.verdict == "valid" or not allow_look_back:
        return Answer(text=reply, question=question, validity=validity,
                      provenance="screenplay")
    log.info("breakpoint answer at t=%.1f was %s; looking back", t, validity.verdict)
    if look_back_mode == "captions":
        frames = look_back(source, t, duration, clients["vision"], templates,
                           window=window, count=count, adapter=adapter)
        caption_text = _render_captions(frames)
        parts = [Part.from_text(templates.get("breakpoint_lookback").render(
            timestamp=f"{t:.1f}", frame_captions=caption_text,
            screenplay_window=window_text, question=question.text,
        ))]
    else:
        chosen = pick_adapter(source) if adapter is None else adapter
        times = look_back_timestamps(t, duration, window=window, count=count)
        images = extract_frames(source, times, adapter=chosen)
        frames = ()
        parts = [Part.from_text(templates.get("breakpoint_lookback").render(
            timestamp=f"{t:.1f}", frame_captions="(frames attached below)",
            screenplay_window=window_text, question=question.text,
        ))]
        parts.extend(Part.from_image(image) for image in images)
    retry = clients["reasoner"].complete(parts)
    return Answer(
        text=retry,
        question=question,
        validity=validate_answer(retry, keywords),
        provenance="look_back",
        look_back_frames=tuple(frames),
    )


def _default_templates():
    from .templates import TemplateSet

    return TemplateSet.load()

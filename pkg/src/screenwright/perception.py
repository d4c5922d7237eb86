"""Multi-modal perception: frame captions, dialogue and audio events.

Everything here turns raw media into timestamped text via the provider
clients. Captioning fans out one request per frame, bounded by the vision
client's ``max_parallel``; inside :func:`perceive` the three provider
branches (captions, speech, audio events) themselves run concurrently.

Failure policy: a caption batch where some frames fail raises
:class:`PartialFailure` carrying the successful captions, so callers can
choose between aborting and degrading; a batch where every frame failed
because the provider was down raises ProviderUnavailable outright. A video
without an audio track makes :func:`transcribe` and
:func:`localize_audio_events` raise NoAudioTrack; :func:`perceive` downgrades
that to empty dialogue/events and flags the bundle.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    InconsistentInputs,
    PartialFailure,
    ProviderMalformedOutput,
    ProviderRejected,
    ProviderUnavailable,
)
from .media import (
    DEFAULT_BINS,
    DEFAULT_CAPTION_INTERVAL,
    DEFAULT_CUT_THRESHOLD,
    DEFAULT_STAT_RATE,
    DecoderAdapter,
    MediaInfo,
    Shot,
    detect_shots,
    extract_frames,
    frame_stats,
    pick_adapter,
    probe,
    read_audio,
    with_sampled_timestamps,
)
from .parsing import extract_json_array
from .providers import Part, ProviderClient, ProviderProfile, make_clients
from .telemetry import PERCEIVE_RUNS, counters

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaptionedFrame:
    timestamp: float
    shot_id: int
    caption: str


@dataclass(frozen=True)
class DialogueLine:
    start: float
    end: float
    text: str
    speaker: str | None = None


@dataclass(frozen=True)
class AudioEvent:
    start: float
    end: float
    label: str


@dataclass(frozen=True)
class PerceptionBundle:
    media: MediaInfo
    shots: tuple[Shot, ...]
    frames: tuple[CaptionedFrame, ...]
    dialogue: tuple[DialogueLine, ...]
    events: tuple[AudioEvent, ...]
    audio_missing: bool = False  # true when dialogue/events are empty only
    # because the media has no audio track


def validate_bundle(bundle: PerceptionBundle) -> None:
    """Check sortedness, reference integrity and span containment."""
    shot_spans = {shot.shot_id: (shot.start, shot.end) for shot in bundle.shots}
    last = float("-inf")
    for frame in bundle.frames:
        if frame.timestamp < last:
            raise InconsistentInputs("captioned frames not sorted by timestamp")
        last = frame.timestamp
        if frame.shot_id not in shot_spans:
            raise InconsistentInputs(f"caption references unknown shot {frame.shot_id}")
        start, end = shot_spans[frame.shot_id]
        if not start <= frame.timestamp < end:
            raise InconsistentInputs(
                f"caption at {frame.timestamp} outside shot {frame.shot_id} [{start}, {end})"
            )
        if not frame.caption:
            raise InconsistentInputs(f"caption at {frame.timestamp} is empty")
    starts = [line.start for line in bundle.dialogue]
    if starts != sorted(starts):
        raise InconsistentInputs("dialogue not sorted by start")
    for line in bundle.dialogue:
        if line.end < line.start:
            raise InconsistentInputs(f"dialogue line ends before it starts: {line}")
    for event in bundle.events:
        if event.end <= event.start:
            raise InconsistentInputs(f"audio event with empty span: {event}")


_PROVIDER_ERRORS = (ProviderUnavailable, ProviderRejected, ProviderMalformedOutput)


def caption_images(images: Sequence[bytes], client: ProviderClient, templates) -> list[str]:
    """Caption PNG images with bounded fan-out; one caption per image.

    Per-image provider failures aggregate into PartialFailure carrying the
    captions that survived. A batch where every image failed with
    ProviderUnavailable raises ProviderUnavailable (the backend is down,
    nothing partial about it).
    """
    prompt = templates.get("caption").render()

    def worker(image: bytes) -> str:
        reply = " ".join(
            client.complete([Part.from_text(prompt), Part.from_image(image)]).split()
        )
        if not reply:
            raise ProviderMalformedOutput("empty caption")
        return reply

    results: list[str | None] = [None] * len(images)
    causes: dict[int, Exception] = {}
    with ThreadPoolExecutor(max_workers=max(1, client.max_parallel)) as pool:
        futures = {pool.submit(worker, image): i for i, image in enumerate(images)}
        for future in as_completed(futures):
            index = futures[future]
            try:
                results[index] = future.result()
            except _PROVIDER_ERRORS as exc:
                causes[index] = exc
    if causes:
        if len(causes) == len(images) and all(
            isinstance(exc, ProviderUnavailable) for exc in causes.values()
        ):
            raise ProviderUnavailable(f"vision backend down for all {len(images)} frames")
        ok = [i for i in range(len(images)) if i not in causes]
        failed = sorted(causes)
        raise PartialFailure([results[i] for i in ok], ok, failed, [causes[i] for i in failed])
    return [r for r in results if r is not None]


def caption_frames(
    images: Sequence[bytes],
    timestamps: Sequence[float],
    shot_ids: Sequence[int],
    client: ProviderClient,
    templates,
) -> list[CaptionedFrame]:
    """Caption already-extracted frames; order preserved.

    On partial failure the raised PartialFailure carries CaptionedFrame
    objects (not bare strings) so degrading callers keep the time anchors.
    """
    if not len(images) == len(timestamps) == len(shot_ids):
        raise InconsistentInputs(
            f"got {len(images)} images, {len(timestamps)} timestamps, {len(shot_ids)} shot ids"
        )
    try:
        captions = caption_images(images, client, templates)
    except PartialFailure as exc:
        framed = [
            CaptionedFrame(timestamp=timestamps[i], shot_id=shot_ids[i], caption=text)
            for i, text in zip(exc.ok_indices, exc.captioned)
        ]
        raise PartialFailure(framed, exc.ok_indices, exc.failed_indices, exc.causes) from exc
    return [
        CaptionedFrame(timestamp=t, shot_id=shot_id, caption=caption)
        for t, shot_id, caption in zip(timestamps, shot_ids, captions)
    ]


def _require_number(record: dict, key: str, where: str) -> float:
    value = record.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProviderMalformedOutput(f"{where}: {key!r} must be a number, got {value!r}")
    if value < 0:
        raise ProviderMalformedOutput(f"{where}: {key!r} must be non-negative")
    return float(value)


def _require_text(record: dict, key: str, where: str) -> str:
    value = record.get(key)
    if not isinstance(value, str) or not value.strip():
        raise ProviderMalformedOutput(f"{where}: {key!r} must be a non-empty string")
    return value.strip()


def transcribe(
    source,
    client: ProviderClient,
    templates,
    adapter: DecoderAdapter | None = None,
) -> list[DialogueLine]:
    """Transcribe the audio track into dialogue lines sorted by start.

    Overlapping lines are permitted (cross-talk). Raises NoAudioTrack when
    the media has no audio at all.
    """
    audio = read_audio(source, adapter)
    prompt = templates.get("asr").render()
    reply = client.complete([Part.from_text(prompt), Part.from_audio(audio)])
    records = extract_json_array(reply)
    if records is None:
        raise ProviderMalformedOutput(f"asr reply is not a JSON array: {reply[:120]!r}")
    lines = []
    for i, record in enumerate(records):
        where = f"asr utterance {i}"
        if not isinstance(record, dict):
            raise ProviderMalformedOutput(f"{where}: expected an object")
        start = _require_number(record, "start", where)
        end = _require_number(record, "end", where)
        if end < start:
            raise ProviderMalformedOutput(f"{where}: end {end} before start {start}")
        speaker = record.get("speaker")
        if speaker is not None and not isinstance(speaker, str):
            raise ProviderMalformedOutput(f"{where}: 'speaker' must be a string or null")
        lines.append(DialogueLine(start=start, end=end,
                                  text=_require_text(record, "text", where),
                                  speaker=speaker))
    lines.sort(key=lambda line: (line.start, line.end))
    return lines


def localize_audio_events(
    source,
    client: ProviderClient,
    templates,
    adapter: DecoderAdapter | None = None,
) -> list[AudioEvent]:
    """Locate notable non-speech sounds, sorted by start.

    Raises NoAudioTrack when the media has no audio at all.
    """
    audio = read_audio(source, adapter)
    prompt = templates.get("audio_events").render()
    reply = client.complete([Part.from_text(prompt), Part.from_audio(audio)])
    records = extract_json_array(reply)
    if records is None:
        raise ProviderMalformedOutput(f"audio events reply is not a JSON array: {reply[:120]!r}")
    events = []
    for i, record in enumerate(records):
        where = f"audio event {i}"
        if not isinstance(record, dict):
            raise ProviderMalformedOutput(f"{where}: expected an object")
        start = _require_number(record, "start", where)
        end = _require_number(record, "end", where)
        if end <= start:
            raise ProviderMalformedOutput(f"{where}: span [{start}, {end}) is empty")
        events.append(AudioEvent(start=start, end=end,
                                 label=_require_text(record, "label", where)))
    events.sort(key=lambda event: (event.start, event.end))
    return events


def perceive(
    source,
    profile: ProviderProfile,
    *,
    templates=None,
    stat_rate: float = DEFAULT_STAT_RATE,
    bins: int = DEFAULT_BINS,
    cut_threshold: float = DEFAULT_CUT_THRESHOLD,
    caption_interval: float = DEFAULT_CAPTION_INTERVAL,
    adapter: DecoderAdapter | None = None,
) -> PerceptionBundle:
    """Run the full perception pass over one video.

    Shot detection happens first (captioning needs the shots); the caption,
    transcription and audio-event branches then run concurrently. The
    returned bundle is validated before it leaves.
    """
    from .templates import TemplateSet

    counters.increment(PERCEIVE_RUNS)
    templates = templates or TemplateSet.load()
    adapter = adapter or pick_adapter(source)
    clients = make_clients(profile)
    info = probe(source, adapter)
    stats = frame_stats(source, stat_rate, bins, adapter)
    shots = with_sampled_timestamps(
        detect_shots(stats, cut_threshold, end_time=info.duration), caption_interval
    )
    timestamps = [t for shot in shots for t in shot.sampled_timestamps]
    shot_ids = [shot.shot_id for shot in shots for _ in shot.sampled_timestamps]
    images = extract_frames(source, timestamps, adapter)
    if not info.has_audio:
        log.warning("%s has no audio track; dialogue and events will be empty", source)
    with ThreadPoolExecutor(max_workers=3) as pool:
        caption_future = pool.submit(
            caption_frames, images, timestamps, shot_ids, clients["vision"], templates
        )
        dialogue_future = None
        events_future = None
        if info.has_audio:
            dialogue_future = pool.submit(transcribe, source, clients["asr"], templates, adapter)
            events_future = pool.submit(
                localize_audio_events, source, clients["audio_events"], templates, adapter
            )
        dialogue = dialogue_future.result() if dialogue_future else []
        events = events_future.result() if events_future else []
        frames = caption_future.result()
    bundle = PerceptionBundle(
        media=info,
        shots=tuple(shots),
        frames=tuple(frames),
        dialogue=tuple(dialogue),
        events=tuple(events),
        audio_missing=not info.has_audio,
    )
    validate_bundle(bundle)
    return bundle

"""Interleaved script assembly, scene refinement and the screenplay document.

The interleaved script is the bridge between perception and scenes: every
dialogue line, frame caption and audio event becomes a time-sorted block,
with separator blocks retained at coarse-segment boundaries. Ties at equal
timestamps order as frame_caption, audio_event, separator, dialogue, so a
caption describing the moment a line starts reads before the line.

Scene refinement asks the reasoner to merge contiguous shots into scenes
(a scene is always a run of whole shots; boundaries can only move at shot
granularity). Unusable replies get one repair round-trip, then the
deterministic fallback cuts one scene per coarse segment: for each segment
boundary time b, the next scene starts at the first shot whose start lies
after b.

Screenplays serialize to a versioned JSON document; the cache module stores
those bytes keyed by content hash, provider profile and template versions.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

from .errors import (
    EmptyInput,
    InconsistentInputs,
    MalformedDocument,
    UnsupportedVersion,
)
from .media import MediaInfo, Shot
from .parsing import canonical_json, extract_json_array
from .perception import AudioEvent, CaptionedFrame, DialogueLine, PerceptionBundle
from .providers import Part, ProviderClient, ProviderProfile, make_clients
from .segmentation import (
    DEFAULT_GAP,
    SEPARATOR_TOKEN,
    CoarseSegment,
    coarse_split,
    insert_separators,
    order_transcript,
    render_line,
)

SCHEMA_VERSION = "1.0"
SUPPORTED_MAJOR = 1
DEFAULT_SUMMARY_BUDGET = 200  # words per scene summary

BLOCK_RANKS = {"frame_caption": 0, "audio_event": 1, "separator": 2, "dialogue": 3}

_SPAN_TOLERANCE = 1e-6
_DIALOGUE_OVERHANG = 0.5  # seconds of ASR jitter a line may stick out of its scene


@dataclass(frozen=True)
class Block:
    """One line of the interleaved script."""

    kind: str  # frame_caption | audio_event | separator | dialogue
    time: float
    end: float | None = None
    text: str = ""
    speaker: str | None = None
    shot_id: int | None = None
    source_index: int = 0  # index within the source sequence / boundary ordinal


@dataclass(frozen=True)
class InterleavedScript:
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class Scene:
    scene_id: int
    start: float
    end: float
    first_shot: int
    last_shot: int
    summary: str
    dialogue: tuple[DialogueLine, ...] = ()
    frame_captions: tuple[CaptionedFrame, ...] = ()
    events: tuple[AudioEvent, ...] = ()

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "start": self.start,
            "end": self.end,
            "first_shot": self.first_shot,
            "last_shot": self.last_shot,
            "summary": self.summary,
            "dialogue": [
                {"start": d.start, "end": d.end, "speaker": d.speaker, "text": d.text}
                for d in self.dialogue
            ],
            "frame_captions": [
                {"timestamp": c.timestamp, "shot_id": c.shot_id, "caption": c.caption}
                for c in self.frame_captions
            ],
            "events": [
                {"start": e.start, "end": e.end, "label": e.label} for e in self.events
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "Scene":
        try:
            return Scene(
                scene_id=int(data["scene_id"]),
                start=float(data["start"]),
                end=float(data["end"]),
                first_shot=int(data["first_shot"]),
                last_shot=int(data["last_shot"]),
                summary=str(data["summary"]),
                dialogue=tuple(
                    DialogueLine(
                        start=float(d["start"]),
                        end=float(d["end"]),
                        text=str(d["text"]),
                        speaker=None if d.get("speaker") is None else str(d["speaker"]),
                    )
                    for d in data["dialogue"]
                ),
                frame_captions=tuple(
                    CaptionedFrame(
                        timestamp=float(c["timestamp"]),
                        shot_id=int(c["shot_id"]),
                        caption=str(c["caption"]),
                    )
                    for c in data["frame_captions"]
                ),
                events=tuple(
                    AudioEvent(
                        start=float(e["start"]), end=float(e["end"]), label=str(e["label"])
                    )
                    for e in data["events"]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(f"bad scene record: {exc}") from exc


@dataclass(frozen=True)
class GeneratorMetadata:
    profile_digest: str
    template_versions: Mapping[str, str] = field(default_factory=dict)
    created_at: str = ""
    separator_token: str = SEPARATOR_TOKEN
    gap_threshold: float = DEFAULT_GAP
    summary_budget: int = DEFAULT_SUMMARY_BUDGET
    merge_scenes: bool = True
    split_used_fallback: bool = False
    refine_used_fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "profile_digest": self.profile_digest,
            "template_versions": dict(self.template_versions),
            "created_at": self.created_at,
            "separator_token": self.separator_token,
            "gap_threshold": self.gap_threshold,
            "summary_budget": self.summary_budget,
            "merge_scenes": self.merge_scenes,
            "split_used_fallback": self.split_used_fallback,
            "refine_used_fallback": self.refine_used_fallback,
        }

    @staticmethod
    def from_dict(data: dict) -> "GeneratorMetadata":
        try:
            return GeneratorMetadata(
                profile_digest=str(data["profile_digest"]),
                template_versions={
                    str(k): str(v) for k, v in dict(data["template_versions"]).items()
                },
                created_at=str(data["created_at"]),
                separator_token=str(data.get("separator_token", SEPARATOR_TOKEN)),
                gap_threshold=float(data.get("gap_threshold", DEFAULT_GAP)),
                summary_budget=int(data.get("summary_budget", DEFAULT_SUMMARY_BUDGET)),
                merge_scenes=bool(data.get("merge_scenes", True)),
                split_used_fallback=bool(data.get("split_used_fallback", False)),
                refine_used_fallback=bool(data.get("refine_used_fallback", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedDocument(f"bad generator metadata: {exc}") from exc


@dataclass(frozen=True)
class Screenplay:
    media: MediaInfo
    scenes: tuple[Scene, ...]
    generator_metadata: GeneratorMetadata
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "media": self.media.to_dict(),
            "scenes": [scene.to_dict() for scene in self.scenes],
            "generator_metadata": self.generator_metadata.to_dict(),
        }


@dataclass(frozen=True)
class RefineOutcome:
    scenes: tuple[Scene, ...]
    used_fallback: bool


def interleave(
    segments: Sequence[CoarseSegment], bundle: PerceptionBundle
) -> InterleavedScript:
    """Merge captions and audio events into the segmented transcript.

    Segments must partition the bundle's dialogue exactly; a separator block
    marks each boundary between consecutive segments, anchored at the earlier
    segment's end time.
    """
    segment_lines = [line for segment in segments for line in segment.lines]
    if Counter(segment_lines) != Counter(bundle.dialogue):
        raise InconsistentInputs("segments do not partition the bundle's dialogue")
    blocks: list[Block] = []
    for i, cap in enumerate(bundle.frames):
        blocks.append(Block(kind="frame_caption", time=cap.timestamp, text=cap.caption,
                            shot_id=cap.shot_id, source_index=i))
    for i, event in enumerate(bundle.events):
        blocks.append(Block(kind="audio_event", time=event.start, end=event.end,
                            text=event.label, source_index=i))
    for i, line in enumerate(bundle.dialogue):
        blocks.append(Block(kind="dialogue", time=line.start, end=line.end,
                            text=line.text, speaker=line.speaker, source_index=i))
    for j in range(1, len(segments)):
        blocks.append(Block(kind="separator", time=segments[j - 1].end, source_index=j))
    blocks.sort(key=lambda block: (block.time, BLOCK_RANKS[block.kind]))
    return InterleavedScript(blocks=tuple(blocks))


def render_block(block: Block, token: str = SEPARATOR_TOKEN) -> str:
    if block.kind == "frame_caption":
        return f"[{block.time:.1f}s] FRAME: {block.text}"
    if block.kind == "audio_event":
        return f"[{block.time:.1f}s-{block.end:.1f}s] SOUND: {block.text}"
    if block.kind == "separator":
        return token
    return render_line(
        DialogueLine(start=block.time, end=block.end or block.time,
                     text=block.text, speaker=block.speaker)
    )


def render_script(script: InterleavedScript, token: str = SEPARATOR_TOKEN) -> str:
    return "\n".join(render_block(block, token) for block in script.blocks)


def _truncate_words(text: str, budget: int) -> str:
    words = text.split()
    if len(words) <= budget:
        return " ".join(words)
    return " ".join(words[:budget])


def _best_scene(spans: Sequence[tuple[float, float]], start: float, end: float) -> int:
    """Pick the span with maximum overlap; ties and misses snap earlier."""
    best, best_overlap = None, 0.0
    for i, (a, b) in enumerate(spans):
        overlap = min(end, b) - max(start, a)
        if overlap > best_overlap:
            best, best_overlap = i, overlap
    if best is not None:
        return best
    for i, (a, b) in enumerate(spans):
        if a <= start < b:
            return i
    for i in reversed(range(len(spans))):
        if spans[i][0] <= start:
            return i
    return 0


def _assemble_scenes(
    ranges: Sequence[tuple[int, int]],
    shots: Sequence[Shot],
    script: InterleavedScript,
    summaries: Sequence[str] | None,
    summary_budget: int,
) -> tuple[Scene, ...]:
    """Build Scene objects for the given shot ranges, assigning content.

    Captions follow their shot; dialogue and events go to the scene they
    overlap most. When ``summaries`` is None each summary is synthesized by
    concatenating the scene's block texts, truncated to the budget.
    """
    spans = [(shots[a].start, shots[b].end) for a, b in ranges]
    shot_to_scene = {}
    for index, (a, b) in enumerate(ranges):
        for shot_id in range(a, b + 1):
            shot_to_scene[shot_id] = index
    captions: list[list[CaptionedFrame]] = [[] for _ in ranges]
    dialogue: list[list[DialogueLine]] = [[] for _ in ranges]
    events: list[list[AudioEvent]] = [[] for _ in ranges]
    texts: list[list[str]] = [[] for _ in ranges]
    for block in script.blocks:
        if block.kind == "separator":
            continue
        if block.kind == "frame_caption":
            index = shot_to_scene[block.shot_id]
            captions[index].append(
                CaptionedFrame(timestamp=block.time, shot_id=block.shot_id, caption=block.text)
            )
        elif block.kind == "dialogue":
            index = _best_scene(spans, block.time, block.end or block.time)
            dialogue[index].append(
                DialogueLine(start=block.time, end=block.end or block.time,
                             text=block.text, speaker=block.speaker)
            )
        else:
            index = _best_scene(spans, block.time, block.end or block.time)
            events[index].append(
                AudioEvent(start=block.time, end=block.end or block.time, label=block.text)
            )
        texts[index].append(block.text)
    scenes = []
    for index, (a, b) in enumerate(ranges):
        if summaries is None:
            summary = _truncate_words(" ".join(texts[index]), summary_budget) or "(no content)"
        else:
            summary = _truncate_words(summaries[index], summary_budget)
        scenes.append(
            Scene(
                scene_id=index,
                start=spans[index][0],
                end=spans[index][1],
                first_shot=a,
                last_shot=b,
                summary=summary,
                dialogue=tuple(dialogue[index]),
                frame_captions=tuple(captions[index]),
                events=tuple(events[index]),
            )
        )
    return tuple(scenes)


def _fallback_ranges(shots: Sequence[Shot], script: InterleavedScript) -> list[tuple[int, int]]:
    """One scene per coarse segment: cut before the first shot past each
    separator anchor. Boundaries that land in the same shot collapse."""
    cuts = set()
    for block in script.blocks:
        if block.kind != "separator":
            continue
        for shot in shots:
            if shot.start > block.time:
                cuts.add(shot.shot_id)
                break
    edges = [0, *sorted(cuts), len(shots)]
    return [
        (edges[i], edges[i + 1] - 1)
        for i in range(len(edges) - 1)
        if edges[i] <= edges[i + 1] - 1
    ]


def _parse_scene_ranges(reply: str, shot_count: int) -> tuple[list[tuple[int, int]], list[str]]:
    records = extract_json_array(reply)
    if records is None:
        raise ValueError("reply is not a JSON array")
    ranges: list[tuple[int, int]] = []
    summaries: list[str] = []
    expected_first = 0
    for i, record in enumerate(records):
        if not isinstance(record, dict):
            raise ValueError(f"scene {i} is not an object")
        shots_field = record.get("shots")
        if (
            not isinstance(shots_field, list)
            or len(shots_field) != 2
            or any(isinstance(v, bool) or not isinstance(v, int) for v in shots_field)
        ):
            raise ValueError(f"scene {i}: 'shots' must be [first, last] integers")
        first, last = shots_field
        if first != expected_first:
            raise ValueError(f"scene {i}: expected first shot {expected_first}, got {first}")
        if last < first or last >= shot_count:
            raise ValueError(f"scene {i}: bad shot range [{first}, {last}]")
        summary = record.get("summary")
        if not isinstance(summary, str) or not summary.strip():
            raise ValueError(f"scene {i}: 'summary' must be a non-empty string")
        ranges.append((first, last))
        summaries.append(summary.strip())
        expected_first = last + 1
    if expected_first != shot_count:
        raise ValueError(f"scenes cover shots 0..{expected_first - 1}, video has {shot_count}")
    return ranges, summaries


def _shot_table(shots: Sequence[Shot]) -> str:
    return "\n".join(f"shot {s.shot_id}: {s.start:.1f}s-{s.end:.1f}s" for s in shots)


def refine_scenes(
    script: InterleavedScript,
    shots: Sequence[Shot],
    client: ProviderClient,
    templates,
    *,
    separator_token: str = SEPARATOR_TOKEN,
    summary_budget: int = DEFAULT_SUMMARY_BUDGET,
) -> RefineOutcome:
    """Merge shots into scenes as the reasoner directs.

    The reply must cover every shot exactly once with contiguous ranges; a
    bad reply gets one repair round-trip and then the coarse-segment
    fallback. A single-shot video is one scene by definition, so no model
    is consulted for it.
    """
    if not shots:
        raise EmptyInput("no shots to refine")
    if len(shots) == 1:
        ranges = [(0, 0)]
        return RefineOutcome(
            scenes=_assemble_scenes(ranges, shots, script, None, summary_budget),
            used_fallback=False,
        )
    prompt = templates.get("refine_scenes").render(
        separator_token=separator_token,
        shot_table=_shot_table(shots),
        script=render_script(script, separator_token),
    )
    reply = client.complete([Part.from_text(prompt)])
    try:
        ranges, summaries = _parse_scene_ranges(reply, len(shots))
    except ValueError as first_error:
        repair = templates.get("repair").render(original_prompt=prompt, error=str(first_error))
        retry = client.complete([Part.from_text(repair)])
        try:
            ranges, summaries = _parse_scene_ranges(retry, len(shots))
        except ValueError:
            fallback = _fallback_ranges(shots, script)
            return RefineOutcome(
                scenes=_assemble_scenes(fallback, shots, script, None, summary_budget),
                used_fallback=True,
            )
    return RefineOutcome(
        scenes=_assemble_scenes(ranges, shots, script, summaries, summary_budget),
        used_fallback=False,
    )


def build_screenplay(
    bundle: PerceptionBundle,
    profile: ProviderProfile,
    *,
    templates=None,
    gap_threshold: float = DEFAULT_GAP,
    separator_token: str = SEPARATOR_TOKEN,
    summary_budget: int = DEFAULT_SUMMARY_BUDGET,
    merge_scenes: bool = True,
    created_at: str | None = None,
) -> Screenplay:
    """Assemble, refine and validate the screenplay for one perception pass.

    ``merge_scenes=False`` is the module-ablated baseline: one scene per
    shot, no coarse split and no reasoner involvement.
    """
    from .templates import TemplateSet

    templates = templates or TemplateSet.load()
    ordered = order_transcript(bundle.dialogue)
    marked = insert_separators(ordered, gap_threshold, separator_token)
    split_used_fallback = False
    refine_used_fallback = False
    if merge_scenes:
        reasoner = make_clients(profile)["reasoner"]
        split = coarse_split(marked, reasoner, templates)
        split_used_fallback = split.used_fallback
        script = interleave(split.segments, bundle)
        refined = refine_scenes(
            script, bundle.shots, reasoner, templates,
            separator_token=separator_token, summary_budget=summary_budget,
        )
        scenes = refined.scenes
        refine_used_fallback = refined.used_fallback
    else:
        # Shot-level baseline: the whole transcript is one pseudo-segment
        # (no separators survive), and every shot becomes its own scene.
        lines = marked.lines
        segments = (
            (CoarseSegment(segment_id=0, start=lines[0].start,
                           end=max(line.end for line in lines), lines=lines),)
            if lines else ()
        )
        script = interleave(segments, bundle)
        ranges = [(shot.shot_id, shot.shot_id) for shot in bundle.shots]
        scenes = _assemble_scenes(ranges, bundle.shots, script, None, summary_budget)
    metadata = GeneratorMetadata(
        profile_digest=profile.digest(),
        template_versions=templates.versions(),
        created_at=created_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        separator_token=separator_token,
        gap_threshold=gap_threshold,
        summary_budget=summary_budget,
        merge_scenes=merge_scenes,
        split_used_fallback=split_used_fallback,
        refine_used_fallback=refine_used_fallback,
    )
    screenplay = Screenplay(media=bundle.media, scenes=scenes, generator_metadata=metadata)
    validate_screenplay(screenplay)
    return screenplay


def validate_screenplay(screenplay: Screenplay) -> None:
    """Check the scene partition and content containment invariants."""
    scenes = screenplay.scenes
    if not scenes:
        raise InconsistentInputs("screenplay has no scenes")
    if abs(scenes[0].start) > _SPAN_TOLERANCE:
        raise InconsistentInputs(f"first scene starts at {scenes[0].start}, not 0")
    expected_first = 0
    for position, scene in enumerate(scenes):
        if scene.scene_id != position:
            raise InconsistentInputs(
                f"scene at position {position} has id {scene.scene_id}"
            )
        if scene.first_shot != expected_first:
            raise InconsistentInputs(
                f"scene {scene.scene_id} starts at shot {scene.first_shot}, "
                f"expected {expected_first}"
            )
        if scene.last_shot < scene.first_shot:
            raise InconsistentInputs(f"scene {scene.scene_id} has an empty shot range")
        expected_first = scene.last_shot + 1
        if scene.end <= scene.start:
            raise InconsistentInputs(f"scene {scene.scene_id} has an empty span")
        if not scene.summary:
            raise InconsistentInputs(f"scene {scene.scene_id} has an empty summary")
        for cap in scene.frame_captions:
            if not scene.first_shot <= cap.shot_id <= scene.last_shot:
                raise InconsistentInputs(
                    f"scene {scene.scene_id} holds a caption from shot {cap.shot_id}"
                )
            if not scene.start - _SPAN_TOLERANCE <= cap.timestamp < scene.end + _SPAN_TOLERANCE:
                raise InconsistentInputs(
                    f"caption at {cap.timestamp} outside scene {scene.scene_id}"
                )
        for line in scene.dialogue:
            if (scene.start - line.start > _DIALOGUE_OVERHANG + _SPAN_TOLERANCE
                    or line.end - scene.end > _DIALOGUE_OVERHANG + _SPAN_TOLERANCE):
                raise InconsistentInputs(
                    f"dialogue [{line.start}, {line.end}] overhangs scene "
                    f"{scene.scene_id} [{scene.start}, {scene.end}) by more than "
                    f"{_DIALOGUE_OVERHANG}s"
                )
        for event in scene.events:
            if (event.start < scene.start - _SPAN_TOLERANCE
                    or event.end > scene.end + _SPAN_TOLERANCE
                    or event.end <= event.start):
                raise InconsistentInputs(
                    f"audio event [{event.start}, {event.end}] outside scene "
                    f"{scene.scene_id}"
                )
    for prev, nxt in zip(scenes, scenes[1:]):
        if abs(nxt.start - prev.end) > _SPAN_TOLERANCE:
            raise InconsistentInputs(
                f"gap between scene {prev.scene_id} end {prev.end} and "
                f"scene {nxt.scene_id} start {nxt.start}"
            )
    if abs(scenes[-1].end - screenplay.media.duration) > _SPAN_TOLERANCE:
        raise InconsistentInputs(
            f"last scene ends at {scenes[-1].end}, media lasts {screenplay.media.duration}"
        )


def serialize(screenplay: Screenplay) -> bytes:
    """Deterministic UTF-8 JSON document bytes."""
    return canonical_json(screenplay.to_dict()).encode("utf-8")


def deserialize(data: bytes | str) -> Screenplay:
    """Parse and fully validate a screenplay document.

    Rejects anything that is not valid JSON or violates the schema with
    MalformedDocument, and any unknown major schema version with
    UnsupportedVersion.
    """
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"not a JSON document: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument("document root must be an object")
    version = raw.get("schema_version")
    if not isinstance(version, str):
        raise MalformedDocument("missing schema_version")
    major_text = version.split(".", 1)[0]
    if not major_text.isdigit():
        raise MalformedDocument(f"unparseable schema_version {version!r}")
    if int(major_text) != SUPPORTED_MAJOR:
        raise UnsupportedVersion(
            f"document version {version} not supported (major {SUPPORTED_MAJOR} only)"
        )
    try:
        screenplay = Screenplay(
            media=MediaInfo.from_dict(raw["media"]),
            scenes=tuple(Scene.from_dict(s) for s in raw["scenes"]),
            generator_metadata=GeneratorMetadata.from_dict(raw["generator_metadata"]),
            schema_version=version,
        )
    except (KeyError, TypeError) as exc:
        raise MalformedDocument(f"incomplete document: {exc}") from exc
    try:
        validate_screenplay(screenplay)
    except InconsistentInputs as exc:
        raise MalformedDocument(f"document violates screenplay invariants: {exc}") from exc
    return screenplay


def screenplay_digest(screenplay: Screenplay, *, include_creation_time: bool = True) -> str:
    """sha256 of the serialized document; creation time excludable so two
    otherwise-identical builds can be compared."""
    if include_creation_time:
        return hashlib.sha256(serialize(screenplay)).hexdigest()
    doc = screenplay.to_dict()
    doc["generator_metadata"]["created_at"] = ""
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


def _scene_content_lines(scene: Scene) -> list[str]:
    entries: list[tuple[float, int, str]] = []
    for cap in scene.frame_captions:
        entries.append((cap.timestamp, BLOCK_RANKS["frame_caption"],
                        f"[{cap.timestamp:.1f}s] FRAME: {cap.caption}"))
    for event in scene.events:
        entries.append((event.start, BLOCK_RANKS["audio_event"],
                        f"[{event.start:.1f}s-{event.end:.1f}s] SOUND: {event.label}"))
    for line in scene.dialogue:
        entries.append((line.start, BLOCK_RANKS["dialogue"], render_line(line)))
    entries.sort(key=lambda entry: (entry[0], entry[1]))
    return [text for _, _, text in entries]


def _render_scene(scene: Scene, *, with_shots: bool) -> list[str]:
    header = f"SCENE {scene.scene_id} [{scene.start:.1f}s-{scene.end:.1f}s]"
    if with_shots:
        header += f" (shots {scene.first_shot}-{scene.last_shot})"
    out = [header, f"Summary: {scene.summary}"]
    out.extend(f"  {line}" for line in _scene_content_lines(scene))
    return out


def render_text(
    screenplay: Screenplay,
    mode: str = "full",
    *,
    t: float | None = None,
    radius: float = 60.0,
) -> str:
    """Render the screenplay for prompts and humans.

    ``full`` includes the media header and shot ranges; ``global_context``
    is the same narrative without the technical plumbing; ``window`` keeps
    every scene's summary but expands content only for scenes intersecting
    [t - radius, t + radius], so the plot stays globally visible while the
    neighborhood of t is detailed.
    """
    scenes = screenplay.scenes
    if mode == "full":
        out = [
            f"VIDEO: {screenplay.media.duration:.1f}s, "
            f"{len(scenes)} scene{'s' if len(scenes) != 1 else ''}",
            "",
        ]
        for scene in scenes:
            out.extend(_render_scene(scene, with_shots=True))
            out.append("")
        return "\n".join(out).rstrip() + "\n"
    if mode == "global_context":
        out = []
        for scene in scenes:
            out.extend(_render_scene(scene, with_shots=False))
            out.append("")
        return "\n".join(out).rstrip() + "\n"
    if mode == "window":
        if t is None:
            raise ValueError("window mode needs t")
        lo, hi = t - radius, t + radius
        out = []
        for scene in scenes:
            if scene.start <= hi and scene.end > lo:
                out.extend(_render_scene(scene, with_shots=False))
            else:
                out.append(
                    f"SCENE {scene.scene_id} [{scene.start:.1f}s-{scene.end:.1f}s] "
                    f"Summary: {scene.summary}"
                )
            out.append("")
        return "\n".join(out).rstrip() + "\n"
    raise ValueError(f"unknown render mode {mode!r}")

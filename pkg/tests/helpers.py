"""Shared test data builders."""

from __future__ import annotations

import random

from screenwright.media import MediaInfo, Shot
from screenwright.perception import AudioEvent, CaptionedFrame, DialogueLine
from screenwright.screenplay import GeneratorMetadata, Scene, Screenplay

WORDS = (
    "night kitchen window storm letter photograph engine tide whisper door "
    "lantern bridge signal harbor static thunder ribbon mirror"
).split()


def random_sentence(rng: random.Random, n=None) -> str:
    n = n or rng.randint(2, 8)
    return " ".join(rng.choice(WORDS) for _ in range(n)) + "."


def random_screenplay(rng: random.Random) -> Screenplay:
    """A structurally valid random document for round-trip exercises."""
    shot_count = rng.randint(1, 8)
    edges = [0.0]
    for _ in range(shot_count):
        edges.append(edges[-1] + rng.uniform(1.0, 9.0))
    shots = [Shot(shot_id=i, start=edges[i], end=edges[i + 1]) for i in range(shot_count)]
    duration = edges[-1]
    cut_candidates = list(range(1, shot_count))
    cuts = sorted(rng.sample(cut_candidates, rng.randint(0, len(cut_candidates))))
    bounds = [0, *cuts, shot_count]
    scenes = []
    for index in range(len(bounds) - 1):
        first, last = bounds[index], bounds[index + 1] - 1
        start, end = shots[first].start, shots[last].end
        dialogue = []
        t = start
        for _ in range(rng.randint(0, 3)):
            a = rng.uniform(start, max(start, end - 0.2))
            b = min(end, a + rng.uniform(0.1, 1.5))
            dialogue.append(DialogueLine(start=a, end=b, text=random_sentence(rng),
                                         speaker=rng.choice([None, "Ann", "Ben"])))
        dialogue.sort(key=lambda line: (line.start, line.end))
        captions = [
            CaptionedFrame(timestamp=shots[s].start, shot_id=s, caption=random_sentence(rng))
            for s in range(first, last + 1)
            if rng.random() < 0.8
        ]
        events = []
        if rng.random() < 0.3 and end - start > 1.0:
            a = rng.uniform(start, end - 0.5)
            events.append(AudioEvent(start=a, end=a + 0.4, label=rng.choice(WORDS)))
        scenes.append(
            Scene(
                scene_id=index,
                start=start,
                end=end,
                first_shot=first,
                last_shot=last,
                summary=random_sentence(rng, rng.randint(4, 30)),
                dialogue=tuple(dialogue),
                frame_captions=tuple(captions),
                events=tuple(events),
            )
        )
    media = MediaInfo(
        duration=duration,
        frame_rate=rng.choice([8.0, 24.0, 30.0]),
        has_audio=rng.random() < 0.8,
        content_hash="".join(rng.choice("0123456789abcdef") for _ in range(64)),
    )
    metadata = GeneratorMetadata(
        profile_digest="".join(rng.choice("0123456789abcdef") for _ in range(64)),
        template_versions={"judge": "abc123def456", "caption": "0011aabbccdd"},
        created_at="2026-08-17T12:00:00+00:00",
        gap_threshold=rng.choice([1.5, 2.0]),
        summary_budget=rng.choice([100, 200]),
        merge_scenes=rng.random() < 0.9,
        split_used_fallback=rng.random() < 0.2,
        refine_used_fallback=rng.random() < 0.2,
    )
    return Screenplay(media=media, scenes=tuple(scenes), generator_metadata=metadata)

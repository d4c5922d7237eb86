"""Regenerate the committed demo fixtures.

The clip is 12 seconds at 8 fps with hard cuts at 4s and 8s
(black / white / black), a 440 Hz audio sidecar, four dialogue lines and
one door slam. Long silences after 3.5s and 7.0s line up with the cuts,
so the whole pipeline lands on three scenes.

Run from the repository root:

    python3 fixtures/generate.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from screenwright.media import write_raw_fixture

HERE = Path(__file__).resolve().parent

WIDTH, HEIGHT = 16, 12
FPS = 8.0
DURATION = 12.0
AUDIO_RATE = 16000

DIALOGUE = [
    {"start": 0.5, "end": 1.5, "speaker": "Ann", "text": "Did you hear that?"},
    {"start": 2.0, "end": 3.5, "speaker": "Ben", "text": "Probably just the wind."},
    {"start": 5.8, "end": 7.0, "speaker": "Ann", "text": "The lights went out."},
    {"start": 9.5, "end": 11.0, "speaker": "Ben", "text": "Stay close to me."},
]

EVENTS = [{"start": 4.0, "end": 4.5, "label": "door slam"}]

# One judgment per manifest item, in manifest order.
JUDGMENTS = [
    {"correct": "yes", "score": 5},
    {"correct": "yes", "score": 4},
    {"correct": "no", "score": 1},
    {"correct": "yes", "score": 4},
    {"correct": "yes", "score": 4},
    {"correct": "no", "score": 2},
]

MANIFEST = [
    {"id": "g1", "mode": "global", "question": "What interrupts the conversation?",
     "gold": "A door slams and the lights go out."},
    {"id": "g2", "mode": "global", "question": "How many people speak?",
     "gold": "Two people speak."},
    {"id": "g3", "mode": "global", "question": "Where does the story take place?",
     "gold": "Inside a house at night."},
    {"id": "g4", "mode": "global", "question": "How does the video end?",
     "gold": "Ben tells Ann to stay close."},
    {"id": "b1", "mode": "breakpoint", "timestamp": 5.0,
     "question": "What just happened?", "gold": "A door slammed shut."},
    {"id": "b2", "mode": "breakpoint", "timestamp": 9.8,
     "question": "What is Ben doing?", "gold": "Telling Ann to stay close."},
]

CONFIG = """\
# Hermetic demo configuration: every provider is a scripted mock.

[providers.asr]
kind = "mock"
script = "mocks.json"

[providers.audio_events]
kind = "mock"
script = "mocks.json"

[providers.judge]
kind = "mock"
script = "mocks.json"

[providers.vision]
kind = "mock"

[providers.reasoner]
kind = "mock"

[cache]
directory = ".screenwright-cache"
"""


def make_frames() -> list[np.ndarray]:
    frames = []
    for k in range(int(DURATION * FPS)):
        t = k / FPS
        level = 235 if 4.0 <= t < 8.0 else 16
        frames.append(np.full((HEIGHT, WIDTH), level, dtype=np.uint8))
    return frames


def make_audio() -> np.ndarray:
    t = np.arange(int(DURATION * AUDIO_RATE)) / AUDIO_RATE
    return (0.2 * 32767 * np.sin(2 * np.pi * 440.0 * t)).astype(np.int16)


def main() -> None:
    write_raw_fixture(HERE / "clip.rawvid", make_frames(), FPS, (make_audio(), AUDIO_RATE))
    rules = [
        {"role": "asr", "match": {"ordinal": 0}, "response": DIALOGUE},
        {"role": "audio_events", "match": {"ordinal": 0}, "response": EVENTS},
    ]
    rules.extend(
        {"role": "judge", "match": {"ordinal": i}, "response": judgment}
        for i, judgment in enumerate(JUDGMENTS)
    )
    (HERE / "mocks.json").write_text(json.dumps(rules, indent=2) + "\n", encoding="utf-8")
    lines = []
    for item in MANIFEST:
        record = {"id": item["id"], "video": "clip.rawvid", "mode": item["mode"],
                  "question": item["question"], "gold": item["gold"]}
        if "timestamp" in item:
            record["timestamp"] = item["timestamp"]
        lines.append(json.dumps(record))
    (HERE / "qa_manifest.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (HERE / "offline.toml").write_text(CONFIG, encoding="utf-8")
    print(f"wrote fixtures to {HERE}")


if __name__ == "__main__":
    main()

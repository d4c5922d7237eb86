"""Evaluation harness: run a QA dataset end to end and grade the answers.

Datasets are JSONL, one item per line, each naming a video, a question
(global or breakpoint with a timestamp) and the gold answer. The harness
builds one screenplay per distinct video for the run, answers every
question, and asks the judge model to grade each prediction against gold
as a yes/no correctness call plus a 0-5 quality score.

A failing item (provider outage, bad video, judge breakdown) is recorded
with its error and the run continues; aggregates are computed over the
items that were actually judged. Aggregates for a mode with no judged
items are None, and render as "-" in the report table rather than a
misleading zero.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import JudgeFailure, MalformedManifest, ScreenwrightError
from .media import (
    DEFAULT_BINS,
    DEFAULT_CAPTION_INTERVAL,
    DEFAULT_CUT_THRESHOLD,
    DEFAULT_STAT_RATE,
    DecoderAdapter,
)
from .parsing import canonical_json, extract_json_object
from .perception import perceive
from .providers import Part, ProviderClient, ProviderProfile, make_clients
from .qa import (
    DEFAULT_LOOK_BACK_COUNT,
    DEFAULT_LOOK_BACK_WINDOW,
    DEFAULT_NEGATIVE_KEYWORDS,
    DEFAULT_WINDOW_RADIUS,
    Answer,
    Question,
    answer_breakpoint,
    answer_global,
)
from .screenplay import (
    DEFAULT_SUMMARY_BUDGET,
    Screenplay,
    build_screenplay,
)
from .segmentation import DEFAULT_GAP, SEPARATOR_TOKEN

log = logging.getLogger(__name__)

MODES = ("global", "breakpoint")


@dataclass(frozen=True)
class QAItem:
    item_id: str
    video: str
    question: Question
    gold: str


@dataclass(frozen=True)
class Judgment:
    correct: bool
    score: int  # 0 (worthless) to 5 (matches gold)


@dataclass(frozen=True)
class ItemResult:
    item: QAItem
    answer: Answer | None = None
    judgment: Judgment | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "item_id": self.item.item_id,
            "video": self.item.video,
            "mode": self.item.question.mode,
            "question": self.item.question.text,
            "timestamp": self.item.question.timestamp,
            "gold": self.item.gold,
            "answer": None if self.answer is None else self.answer.text,
            "validity": None if self.answer is None else self.answer.validity.verdict,
            "provenance": None if self.answer is None else self.answer.provenance,
            "correct": None if self.judgment is None else self.judgment.correct,
            "score": None if self.judgment is None else self.judgment.score,
            "error": self.error,
        }


@dataclass(frozen=True)
class Report:
    ssgm_on: bool
    lbdm_on: bool
    profile_digest: str
    results: tuple[ItemResult, ...] = ()
    global_accuracy: float | None = None
    global_score: float | None = None
    breakpoint_accuracy: float | None = None
    breakpoint_score: float | None = None

    def to_dict(self) -> dict:
        return {
            "ssgm_on": self.ssgm_on,
            "lbdm_on": self.lbdm_on,
            "profile_digest": self.profile_digest,
            "results": [result.to_dict() for result in self.results],
            "global_accuracy": self.global_accuracy,
            "global_score": self.global_score,
            "breakpoint_accuracy": self.breakpoint_accuracy,
            "breakpoint_score": self.breakpoint_score,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()


def _cell(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def render_table(reports: Sequence[Report]) -> str:
    """Fixed-width ablation table, one row per report."""
    header = ("SSGM", "LBDM", "G-Acc", "G-Score", "B-Acc", "B-Score")
    rows = [header]
    for report in reports:
        rows.append((
            "on" if report.ssgm_on else "off",
            "on" if report.lbdm_on else "off",
            _cell(report.global_accuracy),
            _cell(report.global_score),
            _cell(report.breakpoint_accuracy),
            _cell(report.breakpoint_score),
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    return "\n".join(lines)


def load_dataset(path: str | Path) -> list[QAItem]:
    """Read a JSONL question manifest, rejecting bad lines by name."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedManifest(f"cannot read {path}: {exc}") from exc
    items: list[QAItem] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path.name} line {line_no}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedManifest(f"{where}: not valid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise MalformedManifest(f"{where}: expected an object")
        item_id = record.get("id")
        if not isinstance(item_id, str) or not item_id:
            raise MalformedManifest(f"{where}: missing item id")
        where = f"{path.name} item {item_id!r}"
        if item_id in seen_ids:
            raise MalformedManifest(f"{where}: duplicate id")
        seen_ids.add(item_id)
        video = record.get("video")
        if not isinstance(video, str) or not video:
            raise MalformedManifest(f"{where}: missing video path")
        mode = record.get("mode")
        if mode not in MODES:
            raise MalformedManifest(f"{where}: mode must be one of {MODES}, got {mode!r}")
        question = record.get("question")
        if not isinstance(question, str) or not question.strip():
            raise MalformedManifest(f"{where}: missing question text")
        gold = record.get("gold")
        if not isinstance(gold, str) or not gold.strip():
            raise MalformedManifest(f"{where}: missing gold answer")
        timestamp = record.get("timestamp")
        if mode == "breakpoint":
            if isinstance(timestamp, bool) or not isinstance(timestamp, (int, float)):
                raise MalformedManifest(f"{where}: breakpoint items need a numeric timestamp")
            if timestamp < 0:
                raise MalformedManifest(f"{where}: negative timestamp {timestamp}")
            timestamp = float(timestamp)
        elif timestamp is not None:
            raise MalformedManifest(f"{where}: global items must not carry a timestamp")
        items.append(
            QAItem(
                item_id=item_id,
                video=video,
                question=Question(text=question, mode=mode, timestamp=timestamp),
                gold=gold,
            )
        )
    return items


def _parse_judgment(reply: str) -> Judgment:
    record = extract_json_object(reply)
    if record is None:
        raise ValueError("reply is not a JSON object")
    correct = record.get("correct")
    if not isinstance(correct, str) or correct.strip().lower() not in ("yes", "no"):
        raise ValueError(f"'correct' must be \"yes\" or \"no\", got {correct!r}")
    score = record.get("score")
    if isinstance(score, bool):
        raise ValueError("'score' must be a number")
    if isinstance(score, float) and score.is_integer():
        score = int(score)
    if not isinstance(score, int) or not 0 <= score <= 5:
        raise ValueError(f"'score' must be an integer 0-5, got {score!r}")
    return Judgment(correct=correct.strip().lower() == "yes", score=score)


def judge(
    question: Question,
    gold: str,
    predicted: str,
    client: ProviderClient,
    templates,
) -> Judgment:
    """Grade a prediction against gold. One repair round-trip; a second
    unusable reply is JudgeFailure, never a made-up grade."""
    prompt = templates.get("judge").render(
        question=question.text, gold=gold, predicted=predicted
    )
    reply = client.complete([Part.from_text(prompt)])
    try:
        return _parse_judgment(reply)
    except ValueError as first_error:
        repair = templates.get("repair").render(original_prompt=prompt, error=str(first_error))
        retry = client.complete([Part.from_text(repair)])
        try:
            return _parse_judgment(retry)
        except ValueError as exc:
            raise JudgeFailure(f"judge reply unusable after repair: {exc}") from exc


def _aggregate(results: Sequence[ItemResult], mode: str) -> tuple[float | None, float | None]:
    judged = [r for r in results if r.judgment is not None and r.item.question.mode == mode]
    if not judged:
        return None, None
    accuracy = 100.0 * sum(r.judgment.correct for r in judged) / len(judged)
    score = sum(r.judgment.score for r in judged) / len(judged)
    return accuracy, score


def run_eval(
    items: Sequence[QAItem],
    profile: ProviderProfile,
    *,
    templates=None,
    ssgm_on: bool = True,
    lbdm_on: bool = True,
    stat_rate: float = DEFAULT_STAT_RATE,
    bins: int = DEFAULT_BINS,
    cut_threshold: float = DEFAULT_CUT_THRESHOLD,
    caption_interval: float = DEFAULT_CAPTION_INTERVAL,
    gap_threshold: float = DEFAULT_GAP,
    separator_token: str = SEPARATOR_TOKEN,
    summary_budget: int = DEFAULT_SUMMARY_BUDGET,
    radius: float = DEFAULT_WINDOW_RADIUS,
    window: float = DEFAULT_LOOK_BACK_WINDOW,
    count: int = DEFAULT_LOOK_BACK_COUNT,
    keywords: Sequence[str] = DEFAULT_NEGATIVE_KEYWORDS,
    adapter: DecoderAdapter | None = None,
) -> Report:
    """Evaluate a dataset under one module configuration.

    ssgm_on controls scene merging (off = one scene per shot); lbdm_on
    controls the breakpoint look-back fallback. Screenplays are built once
    per distinct video within the run and kept in memory; the disk cache
    is not consulted because its key does not include the ablation flags.
    """
    from .templates import TemplateSet

    templates = templates or TemplateSet.load()
    clients = make_clients(profile)
    screenplays: dict[str, Screenplay] = {}
    errors: dict[str, str] = {}
    results: list[ItemResult] = []
    for item in items:
        if item.video in errors:
            results.append(ItemResult(item=item, error=errors[item.video]))
            continue
        if item.video not in screenplays:
            try:
                bundle = perceive(
                    item.video, profile, templates=templates, stat_rate=stat_rate,
                    bins=bins, cut_threshold=cut_threshold,
                    caption_interval=caption_interval, adapter=adapter,
                )
                screenplays[item.video] = build_screenplay(
                    bundle, profile, templates=templates,
                    gap_threshold=gap_threshold, separator_token=separator_token,
                    summary_budget=summary_budget, merge_scenes=ssgm_on,
                )
            except ScreenwrightError as exc:
                message = f"screenplay build failed: {exc}"
                log.warning("%s: %s", item.video, message)
                errors[item.video] = message
                results.append(ItemResult(item=item, error=message))
                continue
        screenplay = screenplays[item.video]
        try:
            if item.question.mode == "global":
                answer = answer_global(
                    screenplay, item.question, clients["reasoner"], templates, keywords
                )
            else:
                answer = answer_breakpoint(
                    screenplay, item.video, item.question, profile,
                    templates=templates, radius=radius, window=window, count=count,
                    keywords=keywords, allow_look_back=lbdm_on, adapter=adapter,
                )
        except ScreenwrightError as exc:
            results.append(ItemResult(item=item, error=f"answering failed: {exc}"))
            continue
        try:
            judgment = judge(item.question, item.gold, answer.text, clients["judge"], templates)
        except ScreenwrightError as exc:
            results.append(
                ItemResult(item=item, answer=answer, error=f"judging failed: {exc}")
            )
            continue
        results.append(ItemResult(item=item, answer=answer, judgment=judgment))
    global_accuracy, global_score = _aggregate(results, "global")
    breakpoint_accuracy, breakpoint_score = _aggregate(results, "breakpoint")
    return Report(
        ssgm_on=ssgm_on,
        lbdm_on=lbdm_on,
        profile_digest=profile.digest(),
        results=tuple(results),
        global_accuracy=global_accuracy,
        global_score=global_score,
        breakpoint_accuracy=breakpoint_accuracy,
        breakpoint_score=breakpoint_score,
    )

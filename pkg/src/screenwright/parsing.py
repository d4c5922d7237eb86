"""Salvage parsing for model output (code fences, embedded JSON)."""

from __future__ import annotations

import json
import re
from typing import Any


def strip_code_fences(text: str) -> str:
    cleaned = (text or "").strip()
    if cleaned.startswith("```"):
        cleaned = re.sub(r"^```[a-zA-Z0-9]*\s*", "", cleaned)
        cleaned = re.sub(r"\s*```$", "", cleaned)
    return cleaned.strip()


def _slice_between(text: str, open_ch: str, close_ch: str) -> str | None:
    start = text.find(open_ch)
    end = text.rfind(close_ch)
    if start == -1 or end == -1 or end <= start:
        return None
    return text[start:end + 1]


def extract_json_array(text: str) -> list | None:
    """Best-effort extraction of a JSON array from model output."""
    cleaned = strip_code_fences(text)
    for candidate in (cleaned, _slice_between(cleaned, "[", "]")):
        if not candidate:
            continue
        try:
            value = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(value, list):
            return value
    return None


def extract_json_object(text: str) -> dict | None:
    """Best-effort extraction of a JSON object from model output."""
    cleaned = strip_code_fences(text)
    for candidate in (cleaned, _slice_between(cleaned, "{", "}")):
        if not candidate:
            continue
        try:
            value = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if isinstance(value, dict):
            return value
    return None


def extract_int_list(text: str) -> list[int] | None:
    """Parse a list of integers from JSON or loose "1, 2" style output."""
    value = extract_json_array(text)
    if value is not None:
        out: list[int] = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, int):
                return None
            out.append(item)
        return out
    cleaned = strip_code_fences(text)
    tokens = re.split(r"[,\s]+", cleaned.strip())
    tokens = [t for t in tokens if t]
    if not tokens:
        return None
    out = []
    for token in tokens:
        if not re.fullmatch(r"[+-]?\d+", token):
            return None
        out.append(int(token))
    return out


def canonical_json(value: Any) -> str:
    """Deterministic compact JSON used for digests and documents."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"))

"""Process-wide instrumentation counters.

Used by tests and the CLI to prove properties like "N questions against a
cached screenplay trigger zero perception runs". Counters never influence
pipeline output.
"""

from __future__ import annotations

import threading


class Counters:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._counts: dict[str, int] = {}

    def increment(self, name: str, amount: int = 1) -> None:
        with self._lock:
            self._counts[name] = self._counts.get(name, 0) + amount

    def get(self, name: str) -> int:
        with self._lock:
            return self._counts.get(name, 0)

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()


counters = Counters()

PERCEIVE_RUNS = "perception.perceive_runs"
FRAME_EXTRACTIONS = "media.frame_extractions"
PROVIDER_CALLS = "providers.calls"
CACHE_HITS = "cache.hits"
CACHE_MISSES = "cache.misses"

"""Disk cache for finished screenplays.

An entry is valid for the exact combination of video bytes, provider
profile and prompt templates that produced it, so the key digests all
three. Entries are whole serialized documents written atomically (temp
file then os.replace); a corrupt or unreadable entry is treated as a
miss, never an error. Nothing is ever evicted.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Mapping

from .errors import MalformedDocument, UnsupportedVersion
from .screenplay import Screenplay, deserialize, serialize
from .telemetry import CACHE_HITS, CACHE_MISSES, counters


def cache_key(
    content_hash: str, profile_digest: str, template_versions: Mapping[str, str]
) -> str:
    hasher = hashlib.sha256()
    hasher.update(content_hash.encode("utf-8"))
    hasher.update(b"\x00")
    hasher.update(profile_digest.encode("utf-8"))
    for name in sorted(template_versions):
        hasher.update(b"\x00")
        hasher.update(name.encode("utf-8"))
        hasher.update(b"=")
        hasher.update(template_versions[name].encode("utf-8"))
    return hasher.hexdigest()


class ScreenplayCache:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(
        self,
        content_hash: str,
        profile_digest: str,
        template_versions: Mapping[str, str],
    ) -> Screenplay | None:
        path = self._path(cache_key(content_hash, profile_digest, template_versions))
        try:
            data = path.read_bytes()
        except OSError:
            counters.increment(CACHE_MISSES)
            return None
        try:
            screenplay = deserialize(data)
        except (MalformedDocument, UnsupportedVersion):
            counters.increment(CACHE_MISSES)
            return None
        counters.increment(CACHE_HITS)
        return screenplay

    def put(self, screenplay: Screenplay) -> str:
        """Store the screenplay under its derived key; returns the key."""
        meta = screenplay.generator_metadata
        key = cache_key(
            screenplay.media.content_hash, meta.profile_digest, meta.template_versions
        )
        payload = serialize(screenplay)
        fd, temp_name = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(temp_name, self._path(key))
        except BaseException:
            try:
                os.unlink(temp_name)
            except OSError:
                pass
            raise
        return key

    def entries(self) -> list[str]:
        return sorted(path.stem for path in self.directory.glob("*.json"))

    def clear(self) -> int:
        removed = 0
        for path in self.directory.glob("*.json"):
            path.unlink(missing_ok=True)
            removed += 1
        return removed

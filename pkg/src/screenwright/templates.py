"""Versioned prompt templates.

Templates are plain-text files with ``{{placeholder}}`` slots. Each template's
version is the first 12 hex chars of its content digest, so any edit changes
the version, which in turn changes screenplay cache keys. A config-supplied
template directory overlays the packaged defaults file by file.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import TemplateError

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")

REQUIRED_TEMPLATES = (
    "caption",
    "asr",
    "audio_events",
    "coarse_split",
    "refine_scenes",
    "global",
    "breakpoint",
    "breakpoint_lookback",
    "judge",
    "repair",
)


@dataclass(frozen=True)
class Template:
    name: str
    text: str
    version: str

    def render(self, **values: str) -> str:
        def substitute(match: re.Match) -> str:
            key = match.group(1)
            if key not in values:
                raise TemplateError(f"template {self.name!r}: no value for {{{{{key}}}}}")
            return str(values[key])

        return _PLACEHOLDER.sub(substitute, self.text)


class TemplateSet:
    def __init__(self, templates: dict[str, Template]):
        missing = [name for name in REQUIRED_TEMPLATES if name not in templates]
        if missing:
            raise TemplateError(f"missing templates: {', '.join(missing)}")
        self._templates = dict(templates)

    def get(self, name: str) -> Template:
        try:
            return self._templates[name]
        except KeyError:
            raise TemplateError(f"unknown template {name!r}") from None

    def versions(self) -> dict[str, str]:
        return {name: tpl.version for name, tpl in sorted(self._templates.items())}

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "TemplateSet":
        """Load packaged templates, overlaying any files found in *directory*."""
        templates: dict[str, Template] = {}
        package_dir = resources.files(__package__) / "templates"
        for entry in package_dir.iterdir():
            if entry.name.endswith(".tmpl"):
                templates[entry.name[:-5]] = _make_template(entry.name[:-5], entry.read_text("utf-8"))
        if directory:
            override_dir = Path(directory)
            if not override_dir.is_dir():
                raise TemplateError(f"template directory not found: {override_dir}")
            for path in sorted(override_dir.glob("*.tmpl")):
                templates[path.stem] = _make_template(path.stem, path.read_text("utf-8"))
        return cls(templates)


def _make_template(name: str, text: str) -> Template:
    version = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    return Template(name=name, text=text, version=version)

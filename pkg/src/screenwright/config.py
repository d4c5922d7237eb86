"""Configuration: a small TOML file plus env vars for secrets.

Layout:

    [providers.vision]          # one table per role; all optional
    kind = "http"               # or "mock"
    model = "some-vlm"
    endpoint = "https://..."
    api_key_env = "SW_API_KEY_VISION"

    [pipeline]
    cut_threshold = 0.4
    ...

    [qa]
    look_back = true
    ...

    [cache]
    directory = ".screenwright-cache"

API keys are read from the environment at call time, from the variable
named by ``api_key_env`` (default ``SW_API_KEY_<ROLE>``). They are never
stored in, read from, or written to the config file.

``--offline`` / ``load_config(offline=True)`` forces every role onto the
mock backend whatever the file says, keeping any seed and script the file
configured for it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

from . import minitoml
from .errors import ConfigError
from .media import (
    DEFAULT_BINS,
    DEFAULT_CAPTION_INTERVAL,
    DEFAULT_CUT_THRESHOLD,
    DEFAULT_STAT_RATE,
)
from .parsing import canonical_json
from .providers import ROLES, BackendConfig, ProviderProfile
from .qa import (
    DEFAULT_LOOK_BACK_COUNT,
    DEFAULT_LOOK_BACK_WINDOW,
    DEFAULT_NEGATIVE_KEYWORDS,
    DEFAULT_WINDOW_RADIUS,
)
from .screenplay import DEFAULT_SUMMARY_BUDGET
from .segmentation import DEFAULT_GAP, SEPARATOR_TOKEN

DEFAULT_CACHE_DIR = ".screenwright-cache"


@dataclass(frozen=True)
class PipelineConfig:
    stat_rate: float = DEFAULT_STAT_RATE
    histogram_bins: int = DEFAULT_BINS
    cut_threshold: float = DEFAULT_CUT_THRESHOLD
    caption_interval: float = DEFAULT_CAPTION_INTERVAL
    gap_threshold: float = DEFAULT_GAP
    separator_token: str = SEPARATOR_TOKEN
    summary_budget: int = DEFAULT_SUMMARY_BUDGET
    merge_scenes: bool = True


@dataclass(frozen=True)
class QAConfig:
    window_radius: float = DEFAULT_WINDOW_RADIUS
    look_back: bool = True
    look_back_window: float = DEFAULT_LOOK_BACK_WINDOW
    look_back_count: int = DEFAULT_LOOK_BACK_COUNT
    look_back_mode: str = "captions"  # captions | direct
    negative_keywords: tuple[str, ...] = DEFAULT_NEGATIVE_KEYWORDS


@dataclass(frozen=True)
class CacheConfig:
    directory: str = DEFAULT_CACHE_DIR
    enabled: bool = True


@dataclass(frozen=True)
class Config:
    providers: ProviderProfile = field(default_factory=ProviderProfile.offline)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    qa: QAConfig = field(default_factory=QAConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)

    def to_dict(self) -> dict:
        return {
            "providers": self.providers.to_dict(),
            "pipeline": _section_dict(self.pipeline),
            "qa": _section_dict(self.qa),
            "cache": _section_dict(self.cache),
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()


def _section_dict(section) -> dict:
    out = {}
    for spec in fields(section):
        value = getattr(section, spec.name)
        out[spec.name] = list(value) if isinstance(value, tuple) else value
    return out


def _build_section(cls, table: dict, where: str):
    known = {spec.name: spec for spec in fields(cls)}
    values = {}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"{where}.{key}: unknown option")
        default = getattr(cls(), key)
        values[key] = _coerce(value, default, f"{where}.{key}")
    return cls(**values)


def _coerce(value, default, where: str):
    """Match the configured value to the default's type, strictly enough to
    catch a quoted number or a bare string where a list belongs."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            raise ConfigError(f"{where}: expected an array of strings")
        return tuple(value)
    raise ConfigError(f"{where}: unsupported option type")


def _build_profile(table: dict, offline: bool, base: Path | None) -> ProviderProfile:
    backends = {}
    for role in ROLES:
        entry = table.get(role, {})
        if not isinstance(entry, dict):
            raise ConfigError(f"providers.{role}: expected a table")
        known = {spec.name for spec in fields(BackendConfig)}
        values = {}
        for key, value in entry.items():
            if key not in known:
                raise ConfigError(f"providers.{role}.{key}: unknown option")
            values[key] = _coerce(
                value, getattr(BackendConfig(), key), f"providers.{role}.{key}"
            )
        backend = BackendConfig(**values)
        if offline and backend.kind != "mock":
            backend = replace(backend, kind="mock")
        if backend.script and base is not None and not Path(backend.script).is_absolute():
            # Mock scripts resolve relative to the config file, not the CWD.
            backend = replace(backend, script=str(base / backend.script))
        backends[role] = backend
    return ProviderProfile(backends)


def validate_config(config: Config) -> None:
    pipeline, qa = config.pipeline, config.qa
    checks = [
        (pipeline.stat_rate > 0, "pipeline.stat_rate must be > 0"),
        (pipeline.histogram_bins > 0, "pipeline.histogram_bins must be > 0"),
        (0 < pipeline.cut_threshold <= 2.0, "pipeline.cut_threshold must be in (0, 2]"),
        (pipeline.caption_interval > 0, "pipeline.caption_interval must be > 0"),
        (pipeline.gap_threshold > 0, "pipeline.gap_threshold must be > 0"),
        (pipeline.summary_budget > 0, "pipeline.summary_budget must be > 0"),
        (bool(pipeline.separator_token.strip()), "pipeline.separator_token must be non-empty"),
        (qa.window_radius > 0, "qa.window_radius must be > 0"),
        (qa.look_back_window > 0, "qa.look_back_window must be > 0"),
        (
            qa.look_back_count >= 2 and qa.look_back_count % 2 == 0,
            "qa.look_back_count must be an even integer >= 2",
        ),
        (
            qa.look_back_mode in ("captions", "direct"),
            "qa.look_back_mode must be \"captions\" or \"direct\"",
        ),
        (bool(config.cache.directory), "cache.directory must be non-empty"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    for role in ROLES:
        backend = config.providers.backend(role)
        where = f"providers.{role}"
        if backend.kind not in ("mock", "http"):
            raise ConfigError(f"{where}.kind must be \"mock\" or \"http\"")
        if backend.kind == "http" and not backend.endpoint:
            raise ConfigError(f"{where}.endpoint is required for the http backend")
        if backend.timeout <= 0:
            raise ConfigError(f"{where}.timeout must be > 0")
        if backend.retries < 0:
            raise ConfigError(f"{where}.retries must be >= 0")
        if backend.backoff < 0:
            raise ConfigError(f"{where}.backoff must be >= 0")
        if backend.max_parallel < 1:
            raise ConfigError(f"{where}.max_parallel must be >= 1")
        if backend.max_tokens < 1:
            raise ConfigError(f"{where}.max_tokens must be >= 1")
        if any(ch in backend.script for ch in "\n\r"):
            raise ConfigError(f"{where}.script must be a file path")


def load_config(
    path: str | Path | None = None,
    *,
    offline: bool = False,
    overrides: Mapping[str, object] | None = None,
) -> Config:
    """Load, override and validate the configuration.

    No path means pure defaults (all-mock providers). ``overrides`` maps
    dotted option names (``"pipeline.cut_threshold"``) to replacement
    values, applied after the file and before validation.
    """
    raw: dict = {}
    base: Path | None = None
    if path is not None:
        path = Path(path)
        base = path.resolve().parent
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            raw = minitoml.loads(text)
        except minitoml.MiniTomlError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    known_sections = ("providers", "pipeline", "qa", "cache")
    for key in raw:
        if key not in known_sections:
            raise ConfigError(f"unknown config section [{key}]")
    if overrides:
        for dotted, value in overrides.items():
            parts = dotted.split(".")
            if len(parts) < 2:
                raise ConfigError(f"override {dotted!r}: expected section.option")
            table = raw
            for part in parts[:-1]:
                nxt = table.setdefault(part, {})
                if not isinstance(nxt, dict):
                    raise ConfigError(f"override {dotted!r}: {part!r} is not a table")
                table = nxt
            table[parts[-1]] = value
    providers_table = raw.get("providers", {})
    if not isinstance(providers_table, dict):
        raise ConfigError("providers must be a table of role tables")
    for role in providers_table:
        if role not in ROLES:
            raise ConfigError(f"providers.{role}: unknown role (roles: {', '.join(ROLES)})")
    config = Config(
        providers=_build_profile(providers_table, offline, base),
        pipeline=_build_section(PipelineConfig, raw.get("pipeline", {}), "pipeline"),
        qa=_build_section(QAConfig, raw.get("qa", {}), "qa"),
        cache=_build_section(CacheConfig, raw.get("cache", {}), "cache"),
    )
    validate_config(config)
    return config


def dump_config(config: Config) -> str:
    """Render the effective configuration as the TOML subset."""
    return minitoml.dumps(config.to_dict())

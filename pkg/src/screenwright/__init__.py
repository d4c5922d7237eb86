"""screenwright: videos in, scene-level screenplays and answers out."""

from .cache import ScreenplayCache
from .config import Config, load_config
from .errors import ScreenwrightError
from .harness import QAItem, Report, load_dataset, run_eval
from .media import MediaInfo, Shot, detect_shots, probe
from .perception import PerceptionBundle, perceive
from .providers import BackendConfig, ProviderProfile, make_clients
from .qa import Answer, Question, answer_breakpoint, answer_global
from .screenplay import (
    Scene,
    Screenplay,
    build_screenplay,
    deserialize,
    render_text,
    screenplay_digest,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "BackendConfig",
    "Config",
    "MediaInfo",
    "PerceptionBundle",
    "ProviderProfile",
    "QAItem",
    "Question",
    "Report",
    "Scene",
    "Screenplay",
    "ScreenplayCache",
    "ScreenwrightError",
    "Shot",
    "answer_breakpoint",
    "answer_global",
    "build_screenplay",
    "deserialize",
    "detect_shots",
    "load_config",
    "load_dataset",
    "make_clients",
    "perceive",
    "probe",
    "render_text",
    "run_eval",
    "screenplay_digest",
    "serialize",
    "__version__",
]

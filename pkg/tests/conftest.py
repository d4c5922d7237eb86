from pathlib import Path

import pytest

from screenwright.providers import MockClient
from screenwright.telemetry import counters

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"


@pytest.fixture(autouse=True)
def _fresh_process_state():
    # Counters and mock call ordinals are process-wide on purpose; tests must
    # not see each other's.
    counters.reset()
    MockClient.reset_ordinals()
    yield
    counters.reset()
    MockClient.reset_ordinals()


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def clip(fixtures_dir) -> str:
    return str(fixtures_dir / "clip.rawvid")


@pytest.fixture
def offline_config(fixtures_dir):
    from screenwright.config import load_config

    return load_config(fixtures_dir / "offline.toml", offline=True)


@pytest.fixture
def templates():
    from screenwright.templates import TemplateSet

    return TemplateSet.load()

"""Config file loading, overrides, validation and offline forcing."""

import json

import pytest

from screenwright.config import (
    CacheConfig,
    Config,
    PipelineConfig,
    QAConfig,
    dump_config,
    load_config,
    validate_config,
)
from screenwright.errors import ConfigError
from screenwright.providers import ROLES


def write_config(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestDefaults:
    def test_no_path_gives_all_mock_defaults(self):
        config = load_config(None)
        assert config.pipeline == PipelineConfig()
        assert config.qa == QAConfig()
        assert config.cache == CacheConfig()
        for role in ROLES:
            assert config.providers.backend(role).kind == "mock"

    def test_empty_file_equals_defaults(self, tmp_path):
        path = write_config(tmp_path, "")
        assert load_config(path).to_dict() == load_config(None).to_dict()

    def test_digest_stable_and_sensitive(self, tmp_path):
        base = load_config(None).digest()
        assert base == load_config(None).digest()
        path = write_config(tmp_path, "[pipeline]\ncut_threshold = 0.7\n")
        assert load_config(path).digest() != base


class TestFileLoading:
    def test_sections_land_in_place(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "[providers.reasoner]",
            'model = "big-brain"',
            "seed = 3",
            "[pipeline]",
            "cut_threshold = 0.8",
            "merge_scenes = false",
            "[qa]",
            "look_back = false",
            'negative_keywords = ["beats me"]',
            "[cache]",
            'directory = "/tmp/sw-cache"',
            "enabled = false",
        ]))
        config = load_config(path)
        assert config.providers.backend("reasoner").model == "big-brain"
        assert config.providers.backend("reasoner").seed == 3
        assert config.pipeline.cut_threshold == 0.8
        assert config.pipeline.merge_scenes is False
        assert config.qa.look_back is False
        assert config.qa.negative_keywords == ("beats me",)
        assert config.cache.directory == "/tmp/sw-cache"
        assert config.cache.enabled is False

    def test_integer_accepted_for_float_option(self, tmp_path):
        path = write_config(tmp_path, "[pipeline]\ncut_threshold = 1\n")
        value = load_config(path).pipeline.cut_threshold
        assert value == 1.0
        assert isinstance(value, float)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.toml")

    def test_toml_error_carries_path(self, tmp_path):
        path = write_config(tmp_path, "not toml ===\n")
        with pytest.raises(ConfigError, match="config.toml"):
            load_config(path)

    def test_fixture_config_loads(self, fixtures_dir):
        config = load_config(fixtures_dir / "offline.toml", offline=True)
        assert config.providers.backend("asr").script.endswith("mocks.json")

    def test_round_trip_through_dump(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "[pipeline]",
            "cut_threshold = 0.55",
            "[qa]",
            "look_back_count = 4",
        ]))
        config = load_config(path)
        dumped = write_config(tmp_path, dump_config(config), name="dumped.toml")
        again = load_config(dumped)
        assert again.to_dict() == config.to_dict()
        assert again.digest() == config.digest()


class TestRejection:
    @pytest.mark.parametrize(
        ("text", "message"),
        [
            ("[weather]\nsunny = true\n", r"unknown config section \[weather\]"),
            ("[providers.narrator]\nkind = \"mock\"\n", "unknown role"),
            ("[pipeline]\nfoo = 1\n", "pipeline.foo: unknown option"),
            ("[qa]\nlook_back = \"yes\"\n", "qa.look_back: expected true/false"),
            ("[pipeline]\nhistogram_bins = 1.5\n",
             "pipeline.histogram_bins: expected an integer"),
            ("[pipeline]\nhistogram_bins = true\n",
             "pipeline.histogram_bins: expected an integer"),
            ("[pipeline]\nseparator_token = 3\n",
             "pipeline.separator_token: expected a string"),
            ("[qa]\nnegative_keywords = \"cannot\"\n",
             "qa.negative_keywords: expected an array of strings"),
            ("[qa]\nnegative_keywords = [1, 2]\n",
             "qa.negative_keywords: expected an array of strings"),
            ("[providers.vision]\ntemperature = 0.2\n",
             "providers.vision.temperature: unknown option"),
        ],
    )
    def test_malformed_values(self, tmp_path, text, message):
        with pytest.raises(ConfigError, match=message):
            load_config(write_config(tmp_path, text))

    @pytest.mark.parametrize(
        ("text", "message"),
        [
            ("[pipeline]\ncut_threshold = 0.0\n", r"cut_threshold must be in \(0, 2\]"),
            ("[pipeline]\ncut_threshold = 2.5\n", r"cut_threshold must be in \(0, 2\]"),
            ("[pipeline]\nstat_rate = -1.0\n", "stat_rate must be > 0"),
            ("[pipeline]\nsummary_budget = 0\n", "summary_budget must be > 0"),
            ("[pipeline]\nseparator_token = \"  \"\n", "separator_token must be non-empty"),
            ("[qa]\nlook_back_count = 3\n", "look_back_count must be an even"),
            ("[qa]\nlook_back_count = 0\n", "look_back_count must be an even"),
            ("[qa]\nlook_back_mode = \"frames\"\n", "look_back_mode must be"),
            ("[qa]\nwindow_radius = 0.0\n", "window_radius must be > 0"),
            ("[cache]\ndirectory = \"\"\n", "cache.directory must be non-empty"),
            ("[providers.vision]\nkind = \"grpc\"\n", "kind must be"),
            ("[providers.vision]\nkind = \"http\"\n", "endpoint is required"),
            ("[providers.vision]\ntimeout = 0.0\n", "timeout must be > 0"),
            ("[providers.vision]\nretries = -1\n", "retries must be >= 0"),
            ("[providers.vision]\nmax_parallel = 0\n", "max_parallel must be >= 1"),
            ("[providers.vision]\nmax_tokens = 0\n", "max_tokens must be >= 1"),
        ],
    )
    def test_validation_messages(self, tmp_path, text, message):
        with pytest.raises(ConfigError, match=message):
            load_config(write_config(tmp_path, text))

    def test_validate_config_directly(self):
        validate_config(Config())


class TestOverrides:
    def test_override_beats_file(self, tmp_path):
        path = write_config(tmp_path, "[pipeline]\ncut_threshold = 0.4\n")
        config = load_config(path, overrides={"pipeline.cut_threshold": 1.1})
        assert config.pipeline.cut_threshold == 1.1

    def test_override_without_file(self):
        config = load_config(None, overrides={"qa.look_back": False})
        assert config.qa.look_back is False

    def test_nested_provider_override(self, tmp_path):
        config = load_config(None, overrides={"providers.reasoner.seed": 9})
        assert config.providers.backend("reasoner").seed == 9

    def test_override_is_validated(self):
        with pytest.raises(ConfigError, match="cut_threshold"):
            load_config(None, overrides={"pipeline.cut_threshold": 9.0})

    def test_override_unknown_option_rejected(self):
        with pytest.raises(ConfigError, match="unknown option"):
            load_config(None, overrides={"pipeline.wibble": 1})

    def test_override_needs_dotted_path(self):
        with pytest.raises(ConfigError, match="section.option"):
            load_config(None, overrides={"pipeline": 1})


class TestOffline:
    def test_offline_forces_mock_and_keeps_settings(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "[providers.reasoner]",
            'kind = "http"',
            'endpoint = "https://llm.example"',
            'model = "big-brain"',
            "seed = 7",
        ]))
        config = load_config(path, offline=True)
        backend = config.providers.backend("reasoner")
        assert backend.kind == "mock"
        assert backend.seed == 7
        assert backend.model == "big-brain"

    def test_online_http_profile_loads(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "[providers.reasoner]",
            'kind = "http"',
            'endpoint = "https://llm.example"',
        ]))
        config = load_config(path)
        assert config.providers.backend("reasoner").kind == "http"

    def test_script_paths_resolve_relative_to_config(self, tmp_path):
        nested = tmp_path / "conf"
        nested.mkdir()
        script = nested / "replies.json"
        script.write_text(json.dumps(
            [{"role": "asr", "match": {"ordinal": 0}, "response": "[]"}]))
        path = write_config(nested, "\n".join([
            "[providers.asr]",
            'script = "replies.json"',
        ]))
        config = load_config(path)
        assert config.providers.backend("asr").script == str(script)

    def test_absolute_script_path_kept(self, tmp_path):
        script = tmp_path / "replies.json"
        script.write_text("[]")
        path = write_config(tmp_path, "\n".join([
            "[providers.asr]",
            f'script = "{script}"',
        ]))
        assert load_config(path).providers.backend("asr").script == str(script)


class TestSecrets:
    def test_no_api_key_option_exists(self, tmp_path):
        path = write_config(tmp_path, "\n".join([
            "[providers.reasoner]",
            'api_key = "sk-oops"',
        ]))
        with pytest.raises(ConfigError, match="unknown option"):
            load_config(path)

    def test_dump_never_contains_key_material(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SW_API_KEY_REASONER", "sk-supersecret")
        path = write_config(tmp_path, "\n".join([
            "[providers.reasoner]",
            'kind = "http"',
            'endpoint = "https://llm.example"',
            'api_key_env = "SW_API_KEY_REASONER"',
        ]))
        dumped = dump_config(load_config(path))
        assert "sk-supersecret" not in dumped
        assert "SW_API_KEY_REASONER" in dumped

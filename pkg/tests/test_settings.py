import pytest
from pydantic import ValidationError

from src.utils.settings import BenchConfig, DiscoveryConfig, Settings, load_json_config


class TestDiscoveryConfig:

    def test_defaults(self):
        config = DiscoveryConfig()

        assert (config.tau_scale, config.tau_plus_ratio, config.noise_floor) == (0.15, 2.0, 3.0)
        assert config.adjust_covariates is True
        assert config.effect_statistic == "dose_response"

    @pytest.mark.parametrize(
        "overrides",
        [
            {"tau_plus_ratio": 1.0},
            {"noise_floor": -1.0},
            {"tau_e": 0.0},
            {"mmd_agg": "median"},
            # K belongs to the benchmark grid, not to discovery.
            {"k": 4},
        ],
    )
    def test_rejected(self, overrides):
        with pytest.raises(ValidationError):
            DiscoveryConfig(**overrides)


class TestSettings:

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("CAUSAL_SIM_LOG_LEVEL", "debug")
        monkeypatch.setenv("CAUSAL_SIM_WORKERS", "3")
        monkeypatch.setenv("CAUSAL_SIM_BASE_SEED", "42")

        settings = Settings.from_env()

        assert (settings.log_level, settings.workers, settings.base_seed) == ("DEBUG", 3, 42)

    def test_configure_logging_accepts_unknown_level(self):
        Settings(log_level="CHATTY").configure_logging()


def test_load_json_config(tmp_path):
    path = tmp_path / "bench.json"
    path.write_text('{"graphs": ["fork"], "seeds": 2}')

    config = load_json_config(path, BenchConfig)

    assert config.seeds == 2
    assert [g.value for g in config.graphs] == ["fork"]

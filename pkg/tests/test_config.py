import math

import pytest

from softgrip.config import DEFAULT_CONFIG, ToolkitConfig, load_config
from softgrip.errors import ConfigError
from softgrip.pressure import DEFAULT_MAPS


def write(tmp_path, text):
    p = tmp_path / "cfg.yaml"
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadConfig:
    def test_no_path_gives_defaults(self):
        assert load_config(None) is DEFAULT_CONFIG

    def test_empty_file_gives_defaults(self, tmp_path):
        assert load_config(write(tmp_path, "")) is DEFAULT_CONFIG

    def test_defaults_match_module_defaults(self, tmp_path):
        cfg = load_config(write(tmp_path, "geometry: {}\n"))
        assert cfg.geometry.l1 == 70.0 and cfg.geometry.l2 == 44.0
        assert cfg.maps.distal.k == DEFAULT_MAPS.distal.k
        assert cfg.limits.phi == pytest.approx((-math.pi / 2, math.pi / 2))

    def test_degree_and_unit_conversion(self, tmp_path):
        cfg = load_config(
            write(
                tmp_path,
                "geometry:\n  l1_mm: 80\n"
                "limits:\n  theta1_deg: [0, 45]\n"
                "maps:\n  distal: {k_deg_per_kpa: 1.0, b_deg: 2.0}\n"
                "controller:\n  deadband_kpa: 2.5\n",
            )
        )
        assert cfg.geometry.l1 == 80.0
        assert cfg.limits.theta1[1] == pytest.approx(math.pi / 4)
        assert cfg.maps.distal.k == pytest.approx(math.radians(1.0))
        assert cfg.maps.distal.b == pytest.approx(math.radians(2.0))
        assert cfg.controller.deadband == 2.5
        # untouched sections keep defaults
        assert cfg.plant.tank_volume == 100.0

    def test_unknown_top_level_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown top-level"):
            load_config(write(tmp_path, "gripper: {}\n"))

    def test_unknown_nested_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown keys"):
            load_config(write(tmp_path, "geometry:\n  l1: 70\n"))
        with pytest.raises(ConfigError, match="unknown keys"):
            load_config(write(tmp_path, "camera:\n  focal: 600\n"))

    def test_scalar_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "geometry: 7\n"))
        with pytest.raises(ConfigError, match="mapping"):
            load_config(write(tmp_path, "- a\n- b\n"))

    def test_invalid_values_become_config_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "limits:\n  theta1_deg: [30, 10]\n"))
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "plant:\n  tank_volume: -5\n"))

    def test_yaml_syntax_error(self, tmp_path):
        with pytest.raises(ConfigError, match="parse"):
            load_config(write(tmp_path, "geometry: {l1_mm: [}\n"))

    def test_missing_file_is_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "nope.yaml")

    def test_config_is_frozen(self):
        cfg = ToolkitConfig()
        with pytest.raises(AttributeError):
            cfg.p_max = 10.0

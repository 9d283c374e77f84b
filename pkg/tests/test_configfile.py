import math

import pytest

from teleopsim import Architecture, ConfigError, ExperimentConfig
from teleopsim.configfile import (
    dump_config,
    load_config,
    load_delay_profile_csv,
    parse_config_text,
)

SAMPLE = """
# experiment setup
arch = wave+pred
b = 8.0
delay = 0.5
input = step:0.5
duration = 12.0
dt = 0.001
plant.K_a = 4.0      # gain
plant.T_d = inf
plant.v_max = 7.5
smith.tau_max = 1.5
mj.gamma_max = 2.5
zeta.delayed_substitution = true
"""


def test_parse_full_config():
    cfg = parse_config_text(SAMPLE)
    assert cfg.arch is Architecture.WAVE_PRED
    assert cfg.b == 8.0
    assert cfg.delay == 0.5
    assert cfg.input.kind == "step" and cfg.input.amplitude == 0.5
    assert cfg.duration == 12.0
    assert cfg.K_a == 4.0
    assert math.isinf(cfg.T_d)
    assert cfg.smith_tau_max == 1.5
    assert cfg.mj_gamma_max == 2.5
    assert cfg.zeta_delayed_substitution is True
    cfg.validate()


def test_unknown_key_rejected_with_location():
    with pytest.raises(ConfigError, match="<config>:1: unknown key 'plant.mass'"):
        parse_config_text("plant.mass = 2.0")


def test_bad_value_rejected_with_key():
    with pytest.raises(ConfigError, match="b:"):
        parse_config_text("b = heavy")
    with pytest.raises(ConfigError, match="arch"):
        parse_config_text("arch = warp")
    with pytest.raises(ConfigError, match="boolean"):
        parse_config_text("zeta.delayed_substitution = maybe")


def test_missing_equals_rejected():
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config_text("arch wave")


def test_defaults_preserved_for_unset_keys():
    cfg = parse_config_text("b = 9.0")
    assert cfg.b == 9.0
    assert cfg.duration == ExperimentConfig().duration


def test_dump_round_trip():
    cfg = parse_config_text(SAMPLE)
    text = dump_config(cfg)
    again = parse_config_text(text)
    assert again == cfg


def test_load_config_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(SAMPLE, encoding="utf-8")
    cfg = load_config(path)
    assert cfg.b == 8.0


def test_delay_profile_csv(tmp_path):
    path = tmp_path / "delay.csv"
    path.write_text("t,tau\n0.0,0.5\n5.0,1.0\n", encoding="utf-8")
    points = load_delay_profile_csv(path)
    assert points == ((0.0, 0.5), (5.0, 1.0))


def test_delay_profile_csv_requires_header(tmp_path):
    path = tmp_path / "delay.csv"
    path.write_text("0.0,0.5\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="header"):
        load_delay_profile_csv(path)


def test_delay_profile_csv_rejects_garbage(tmp_path):
    path = tmp_path / "delay.csv"
    path.write_text("t,tau\n0.0,fast\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_delay_profile_csv(path)

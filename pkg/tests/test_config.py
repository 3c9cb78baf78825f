"""Config document parsing, echoing and preset coverage."""

import pytest

from vanetflow.config import (ConfigError, PRESETS, SimConfig, as_echo_dict,
                              config_to_text, parse_config)


def test_empty_document_gives_defaults_and_full_echo():
    cfg = parse_config("")
    assert cfg == SimConfig()
    echo = as_echo_dict(cfg)
    # every field group is present in the echo
    assert "seed" in echo and "radio.tx_range" in echo and "policy.kind" in echo
    assert "driver.politeness" in echo
    # echoing and re-parsing reproduces the config exactly
    assert parse_config(config_to_text(cfg)) == cfg


def test_unit_suffix_speed():
    cfg = parse_config("speed_limit = 120 km/h\n")
    assert cfg.speed_limit == pytest.approx(120.0 / 3.6)
    assert cfg.driver_params().desired_velocity == pytest.approx(120.0 / 3.6)


def test_unit_suffixes_distance_time_rate():
    cfg = parse_config(
        "field_length = 1.5 km\nduration = 10 min\ntraffic_load = 4400 veh/h\n"
        "warm_up = 30 s\n")
    assert cfg.field_length == 1500.0
    assert cfg.duration == 600.0
    assert cfg.traffic_load == 4400.0
    assert cfg.warm_up == 30.0


def test_negative_traffic_load_names_the_key():
    with pytest.raises(ConfigError, match="traffic_load"):
        parse_config("traffic_load = -10\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key 'spam'"):
        parse_config("spam = 1\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("seed = 1\nseed = 2\n")


def test_bad_unit_and_bad_number():
    with pytest.raises(ConfigError, match="speed_limit"):
        parse_config("speed_limit = 120 mph\n")
    with pytest.raises(ConfigError, match="expected a number"):
        parse_config("duration = fast\n")


def test_integer_fields_reject_fractions():
    with pytest.raises(ConfigError, match="seed"):
        parse_config("seed = 1.5\n")


def test_boolean_words():
    assert parse_config("communication_enabled = off\n").communication_enabled is False
    assert parse_config("vsl_enabled = yes\n").vsl_enabled is True
    with pytest.raises(ConfigError, match="vsl_enabled"):
        parse_config("vsl_enabled = maybe\n")


def test_choice_fields():
    cfg = parse_config("policy.kind = edge\nlane_change_variant = brute_force\n")
    assert cfg.policy.kind == "edge"
    assert cfg.lane_change_variant == "brute_force"
    with pytest.raises(ConfigError, match="policy.kind"):
        parse_config("policy.kind = shouting\n")


def test_comments_and_blank_lines():
    cfg = parse_config("# a comment\n\nseed = 9  # trailing\n")
    assert cfg.seed == 9


def test_interference_range_follows_tx_range():
    cfg = parse_config("radio.tx_range = 150 m\n")
    assert cfg.radio.interference_range == 300.0
    cfg = parse_config("radio.tx_range = 150 m\nradio.interference_range = 180 m\n")
    assert cfg.radio.interference_range == 180.0


def test_validation_reports_nested_keys():
    with pytest.raises(ConfigError, match="radio"):
        parse_config("radio.reception_prob = 1.4\n")


def test_obstacle_must_be_inside_field():
    with pytest.raises(ConfigError, match="obstacle_position"):
        parse_config("obstacle_position = 2 km\n")


def test_parse_does_not_mutate_base():
    base = SimConfig()
    parse_config("seed = 123\nradio.tx_range = 50\n", base=base)
    assert base.seed == SimConfig().seed
    assert base.radio.tx_range == SimConfig().radio.tx_range


def test_presets_are_complete_and_pairable():
    assert set(PRESETS) == {"velocity_motorway", "velocity_urban",
                            "lane_change_position", "protocol_comparison",
                            "velocity_grid"}
    for preset in PRESETS.values():
        on = preset.config(seed=3, communication=True)
        off = preset.config(seed=3, communication=False)
        assert on.communication_enabled and not off.communication_enabled
        assert on.seed == off.seed == 3
        on.validate()
        off.validate()


def test_protocol_preset_stops_at_origin():
    assert PRESETS["protocol_comparison"].config().stop_at_origin is True

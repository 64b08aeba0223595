import json

import pytest

from config import (
    ConfigError,
    EXAMPLE_CONFIG,
    _bilayer_from_config,
    _laminate_from_config,
    _load_laminate_config,
    _parse_args,
    _save_laminate_config,
    _with_model,
)
from laminate import Model


def _write(tmp_path, data, name="laminate.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_parse_args_subcommands():
    args = _parse_args(["dispersion", "exact", "--kappa-points", "11", "--out", "x"])
    assert args.command == "dispersion"
    assert args.mode == "exact"
    assert args.kappa_points == 11
    args = _parse_args(["figures", "dd-both"])
    assert args.figure_id == "dd-both"
    assert args.kappa_points is None


def test_parse_args_rejects_unknown_command():
    with pytest.raises(ConfigError) as info:
        _parse_args(["explode"])
    assert info.value.code == "usage"


def test_default_config_is_bundled_example():
    config = _load_laminate_config(None)
    assert config["path"] == str(EXAMPLE_CONFIG)
    assert config["model"] == "model1"
    assert config["bilayer"]["sigma_a"] > 0.0
    assert config["scales"]["kappa_star"] == 1.0
    bilayer = _bilayer_from_config(config)
    assert bilayer is not None
    assert bilayer.model is Model.MODEL1


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError) as info:
        _load_laminate_config(str(tmp_path / "nope.json"))
    assert info.value.code == "config_missing"

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        _load_laminate_config(str(broken))
    assert info.value.code == "config_json"


def test_schema_errors_name_the_field(tmp_path):
    bad_phi = {"h": 0.1, "v_m": 0.01, "bilayer": {"sigma_a": 1, "sigma_b": 2, "phi": 1.2, "gamma_a": 1, "gamma_b": 1}}
    with pytest.raises(ConfigError) as info:
        _load_laminate_config(_write(tmp_path, bad_phi))
    assert info.value.code == "config_schema"
    assert info.value.field == "bilayer.phi"

    no_h = {"v_m": 0.01, "bilayer": {"sigma_a": 1, "sigma_b": 2, "phi": 0.5, "gamma_a": 1, "gamma_b": 1}}
    with pytest.raises(ConfigError) as info:
        _load_laminate_config(_write(tmp_path, no_h))
    assert info.value.field == "h"

    bad_model = {"model": "model3", "h": 0.1, "v_m": 0.0, "bilayer": {}}
    with pytest.raises(ConfigError) as info:
        _load_laminate_config(_write(tmp_path, bad_model))
    assert info.value.field == "model"


def test_profile_descriptor(tmp_path):
    data = {
        "h": 0.2,
        "v_m": 0.001,
        "profile": [
            {"breakpoint": 0.0, "sigma": 1.0, "gamma": 2.0},
            {"breakpoint": 0.3, "sigma": 4.0, "gamma": 1.0},
            {"breakpoint": 0.7, "sigma": 2.0, "gamma": 3.0},
        ],
    }
    config = _load_laminate_config(_write(tmp_path, data))
    assert _bilayer_from_config(config) is None
    spec = _laminate_from_config(config)
    assert spec.profile.sigma.edges.tolist() == [0.0, 0.3, 0.7, 1.0]


def test_model_override_needs_density(tmp_path):
    config = _load_laminate_config(None)
    with pytest.raises(ConfigError) as info:
        _with_model(config, "2")
    assert info.value.field == "bilayer.rho_a"
    assert _with_model(config, "1") is config


def test_save_and_reload(tmp_path):
    config = _load_laminate_config(None)
    target = tmp_path / "nested" / "saved.json"
    _save_laminate_config(str(target), config)
    assert target.read_text(encoding="utf-8").endswith("\n")
    assert not (tmp_path / "nested" / "saved.json.tmp").exists()
    reloaded = _load_laminate_config(str(target))
    assert reloaded["bilayer"] == config["bilayer"]
    assert reloaded["h"] == config["h"]
    assert reloaded["simulation"] == config["simulation"]

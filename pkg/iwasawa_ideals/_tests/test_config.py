import pytest

from iwasawa_ideals.code_algebra.padic import LocalRing
from iwasawa_ideals.config import config_from_dict, config_load


def test_load_pi2_field(config_file, pi2_config):
    config = config_load(config_file())
    assert config.p == 2
    assert config.N == 4
    assert config.gammas is None
    local = LocalRing(config.local_field.spec())
    assert local.e == 2 and local.modulus == 4
    echo = config.to_dict()
    assert {k: echo[k] for k in pi2_config} == pi2_config


def test_missing_field(pi2_config):
    data = pi2_config
    del data["N"]
    with pytest.raises(ValueError, match="missing required config field 'N'"):
        config_from_dict(data)


def test_non_prime_p(pi2_config):
    with pytest.raises(ValueError, match="p must be prime"):
        config_from_dict(dict(pi2_config, p=4))


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"N": "4"}, "'N' must be an integer"),
        ({"N": 1}, "'N' must be >= 2"),
        ({"e": 0}, "'e' must be >= 1"),
        ({"eisenstein": [-1, 0, 1]}, "invalid field data"),
        ({"phi": 3}, "'phi' must be a list"),
        ({"gammas": [{"r": 1, "x": [[1]]}]}, "gammas\\[0\\].x"),
        ({"gammas": [{"r": 0, "x": [[1], [0]]}]}, "gammas\\[0\\].r"),
        ({"caps": {"speed": 3}}, "unknown config field 'caps.speed'"),
        ({"caps": {"delta_bound": 0}}, "caps.delta_bound"),
    ],
)
def test_invalid_fields(pi2_config, overrides, message):
    with pytest.raises(ValueError, match=message):
        config_from_dict(dict(pi2_config, **overrides))


def test_gammas_and_caps(pi2_config):
    config = config_from_dict(
        dict(pi2_config, gammas=[{"r": 1, "x": [[0], [1]]}], caps={"delta_bound": 3})
    )
    assert config.gammas[0].x == [[0], [1]]
    assert config.caps.delta_bound == 3
    assert config.to_dict()["gammas"] == [{"r": 1, "x": [[0], [1]]}]


def test_unreadable_and_invalid_files(tmp_path):
    with pytest.raises(ValueError, match="cannot read"):
        config_load(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValueError, match="not valid JSON"):
        config_load(bad)

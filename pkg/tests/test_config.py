import json

import pytest

from coin.config import Config, load_config
from coin.exceptions import ConfigError


def test_defaults():
    c = Config()
    assert c.context_fraction == 0.08
    assert c.radius_factor == 0.5
    assert c.min_cluster_fraction == 0.03
    assert c.ps_threshold == 0.8 and c.ps_splits == 5 and c.max_L == 10
    assert c.lambda_grid == (0.001, 0.003, 0.01, 0.03, 0.1, 0.3)
    assert c.theta_rel == 0.1 and c.beta == 1.0 and c.p == 0
    assert c.master_seed == 42


@pytest.mark.parametrize("changes", [
    {"context_fraction": 0.0},
    {"theta_rel": 1.5},
    {"radius_factor": 1.0},
    {"beta": -1.0},
    {"beta": [1.0, -0.5]},
    {"p": 2},
    {"lambda_grid": []},
    {"max_L": 0},
    {"report_threshold": -1.0},
])
def test_invalid_values(changes):
    with pytest.raises(ConfigError):
        Config().replace(**changes)


def test_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        Config.from_dict({"nope": 1})


def test_dict_round_trip():
    c = Config(beta=[1.0, 2.0], p=[0, 1], lambda_grid=[0.1])
    assert Config.from_dict(json.loads(json.dumps(c.to_dict()))) == c


def test_load_config_file_and_env(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"theta_rel": 0.2, "master_seed": 1}))
    assert load_config(path, env={}).theta_rel == 0.2
    assert load_config(path, env={}).master_seed == 1
    assert load_config(path, env={"COIN_SEED": "9"}).master_seed == 9


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_load_config_bad_file(tmp_path, text):
    path = tmp_path / "c.json"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path, env={})


def test_bad_seed_env():
    with pytest.raises(ConfigError):
        load_config(None, env={"COIN_SEED": "abc"})

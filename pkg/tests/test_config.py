import json

import pytest

from rec_feedback.config import (
    ConfigError, OUTPUT_ENV, RunConfigFile, default_output, load_config,
    merge, parse_grid, parse_methods, parse_pairs, pick
)
from rec_feedback.engine import RewiringConfig


def write(tmp_path, data):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(data))
    return path


def test_load_config(tmp_path):
    path = write(tmp_path, {
        'rewiring': {'theta': 0.5, 'seed': 3},
        'grids': {'theta': [0, 1]},
        'replicas': 2,
    })
    cfg = load_config(path)
    assert cfg.rewiring == {'theta': 0.5, 'seed': 3}
    assert cfg.grids.theta == (0, 1)
    assert cfg.grids.p is None
    assert cfg.replicas == 2
    assert load_config(None) == RunConfigFile()


@pytest.mark.parametrize('data', [
    {'rewirng': {}},
    {'grids': {'phi': [1]}},
    {'rewiring': [1, 2]},
    [1, 2],
])
def test_bad_config(tmp_path, data):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, data))


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / 'missing.json')
    path = tmp_path / 'broken.json'
    path.write_text('{"rewiring": ')
    with pytest.raises(ConfigError):
        load_config(path)


def test_merge_precedence():
    section = {'theta': 0.5, 'p': 0.2}
    config = merge(RewiringConfig, section, {'p': 0.9, 'seed': None})
    assert config == RewiringConfig(theta=0.5, p=0.9)

    with pytest.raises(ConfigError):
        merge(RewiringConfig, {'gamma': 1}, {})
    with pytest.raises(ConfigError):
        merge(RewiringConfig, {}, {'theta': 2.0})


def test_pick():
    assert pick(None, 0, 5) == 0
    assert pick(None, None) is None


def test_default_output(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert default_output() == 'results'
    monkeypatch.setenv(OUTPUT_ENV, '/tmp/elsewhere')
    assert default_output() == '/tmp/elsewhere'


def test_parse_grid():
    assert parse_grid('0:1:0.25') == (0, 0.25, 0.5, 0.75, 1)
    assert parse_grid('0:1:0.05')[-1] == 1
    assert len(parse_grid('0:1:0.05')) == 21
    assert parse_grid('1,0.8,0.6') == (1, 0.8, 0.6)
    for text in ['1:0:0.1', '0:1:0', 'a,b']:
        with pytest.raises(ConfigError):
            parse_grid(text)


def test_parse_pairs():
    assert parse_pairs(['users=10', 'items=5,links=20']) == \
        {'users': '10', 'items': '5', 'links': '20'}
    with pytest.raises(ConfigError):
        parse_pairs(['users'])


def test_parse_methods():
    methods = parse_methods(None)
    assert {k: m.theta for k, m in methods.items()} == \
        {'CN': 0, 'COS': 0.5, 'LHN': 1}
    assert parse_methods({'X': '0.3'})['X'].theta == 0.3
    with pytest.raises(ConfigError):
        parse_methods({'X': 3})

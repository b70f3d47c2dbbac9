import importlib
import json
import logging
import os
import pkgutil

import numpy as np
import pytest
from colorama import Fore, Style

import wormhole_tool
from wormhole_tool.exceptions import ConfigurationError, StaleInputError
from wormhole_tool.util import get_output_root, get_persist_dir
from wormhole_tool.util.config import Config, get_config, resolve_config_path
from wormhole_tool.util.logs import ColourFormatter, configure_logging
from wormhole_tool.util.output import (Manifest, canonical_json, format_value, git_blob_hash, read_csv, read_json,
                                       verify_manifest, write_csv)


@pytest.fixture
def home(tmp_path, monkeypatch):
    monkeypatch.setenv('HOME', str(tmp_path))
    monkeypatch.delenv('WORMHOLE_CONFIG', raising=False)
    monkeypatch.delenv('WORMHOLE_OUTPUT_ROOT', raising=False)
    return tmp_path


def test_persist_dir_is_created(home):
    assert get_persist_dir() == str(home / '.wormhole-tool')
    assert os.path.isdir(get_persist_dir())
    assert resolve_config_path() == str(home / '.wormhole-tool' / 'settings.json')


def test_output_root_precedence(home, monkeypatch):
    assert get_output_root(str(home / 'explicit')) == str(home / 'explicit')
    assert os.path.isdir(str(home / 'explicit'))
    monkeypatch.setenv('WORMHOLE_OUTPUT_ROOT', str(home / 'from-env'))
    assert get_output_root() == str(home / 'from-env')
    monkeypatch.delenv('WORMHOLE_OUTPUT_ROOT')
    monkeypatch.chdir(str(home))
    assert get_output_root() == os.path.join(str(home), 'wormhole-output')


def test_missing_default_config_is_empty(home):
    config = Config()
    assert config.content == {}
    assert config.command_defaults('kink') == {}


def test_command_defaults_merge_sections(home):
    path = home / 'settings.json'
    path.write_text(json.dumps({'points': 128, 's-end': 5.0, 'evolve': {'points': 256}, 'kink': {'tol': 1e-9}}))
    config = Config(str(path))
    assert config.command_defaults('evolve') == {'points': 256, 's_end': 5.0}
    assert config.command_defaults('kink') == {'points': 128, 's_end': 5.0, 'tol': 1e-9}


def test_config_save_round_trip(home):
    path = str(home / 'settings.json')
    with open(path, 'w') as f:
        f.write('{}')
    config = Config(path)
    config.set('cfl', 0.2)
    assert config.setdefault('cfl', 0.5) == 0.2
    config.save()
    assert Config(path).get('cfl') == 0.2


@pytest.mark.parametrize('content', ['{broken', '[1, 2]'])
def test_bad_config_files(home, content):
    path = home / 'settings.json'
    path.write_text(content)
    with pytest.raises(ConfigurationError):
        Config(str(path))


def test_explicit_config_must_exist(home, monkeypatch):
    with pytest.raises(ConfigurationError):
        Config(str(home / 'absent.json'))
    monkeypatch.setenv('WORMHOLE_CONFIG', str(home / 'absent.json'))
    with pytest.raises(ConfigurationError):
        Config()


def test_get_config_is_cached(home):
    path = home / 'cached.json'
    path.write_text('{"a": 1.0}')
    assert get_config(str(path)) is get_config(str(path))


@pytest.mark.parametrize('value,text', [
    (None, ''),
    (True, 'true'),
    (np.bool_(False), 'false'),
    (np.int64(3), '3'),
    (0.1, '0.10000000000000001'),
    (float('nan'), 'nan'),
    ('even', 'even'),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_csv_columns(tmp_path):
    path = str(tmp_path / 'table.csv')
    write_csv(path, ('a', 'parity', 'gamma'), [(1.0, 'even', None), (2.5, 'odd', 0.125)])
    columns = read_csv(path)
    assert list(columns) == ['a', 'parity', 'gamma']
    assert columns['a'] == [1.0, 2.5]
    assert columns['parity'] == ['even', 'odd']
    assert np.isnan(columns['gamma'][0])
    assert columns['gamma'][1] == 0.125


def test_full_precision_survives_csv(tmp_path):
    path = str(tmp_path / 'values.csv')
    values = [1.0 / 3.0, np.pi, 1e-300]
    write_csv(path, ('x',), [(v,) for v in values])
    assert read_csv(path)['x'] == values


def test_unreadable_inputs(tmp_path):
    with pytest.raises(StaleInputError):
        read_csv(str(tmp_path / 'absent.csv'))
    path = tmp_path / 'bad.json'
    path.write_text('{')
    with pytest.raises(StaleInputError):
        read_json(str(path))


def test_canonical_json():
    text = canonical_json({'b': np.float64(1.5), 'a': np.arange(2), 'c': complex(1, -2)})
    assert text == '{"a":[0,1],"b":1.5,"c":[1.0,-2.0]}'


def test_git_blob_hash(tmp_path):
    assert git_blob_hash(b'') == 'e69de29bb2d1d6434b8b29ae775ad8c2e48c5391'
    assert git_blob_hash(b'hello\n') == 'ce013625030ba8dba906f756967f9e9ca394464a'
    path = tmp_path / 'hello.txt'
    path.write_bytes(b'hello\n')
    assert git_blob_hash(str(path)) == git_blob_hash(b'hello\n')


def test_manifest_records_and_verifies_outputs(tmp_path):
    manifest = Manifest('modes', {'a': 1.0, 'n': 1}, str(tmp_path), '0.1.0')
    write_csv(manifest.path('modes.csv'), ('omega2',), [(1.1411,)])
    manifest.add_output('modes.csv')
    data_file = tmp_path / 'input.csv'
    data_file.write_text('y,alpha,beta\n')
    manifest.add_input('data_file', str(data_file))
    manifest.extra['note'] = 'checked'
    path = manifest.write()
    loaded = verify_manifest(path)
    assert loaded['command'] == 'modes'
    assert loaded['inputs']['config'] == git_blob_hash(canonical_json({'a': 1.0, 'n': 1}).encode('utf-8'))
    assert loaded['inputs']['data_file'] == git_blob_hash(str(data_file))
    assert loaded['extra'] == {'note': 'checked'}
    assert 'finished' not in loaded
    timing = read_json(manifest.path('timing.json'))
    assert timing['finished'] is not None
    assert timing['wall_clock'] >= 0
    assert 'timing.json' not in loaded['outputs']


def test_identical_manifests_are_byte_identical(tmp_path):
    paths = []
    for name in ('first', 'second'):
        directory = tmp_path / name
        directory.mkdir()
        manifest = Manifest('gamma', {'a': 1.0}, str(directory), '0.1.0')
        write_csv(manifest.path('gamma.csv'), ('gamma',), [(0.0863,)])
        manifest.add_output('gamma.csv')
        manifest.timing['solve'] = 0.5 if name == 'first' else 7.25
        paths.append(manifest.write())
    with open(paths[0], 'rb') as first, open(paths[1], 'rb') as second:
        assert first.read() == second.read()
    assert read_json(str(tmp_path / 'second' / 'timing.json'))['solve'] == 7.25


def test_manifest_detects_changed_and_missing_outputs(tmp_path):
    manifest = Manifest('kink', {}, str(tmp_path), '0.1.0')
    write_csv(manifest.path('profile.csv'), ('r', 'phi'), [(0.0, 1.5707963267948966)])
    manifest.add_output('profile.csv')
    path = manifest.write()
    with open(manifest.path('profile.csv'), 'a') as f:
        f.write('1,2\n')
    with pytest.raises(StaleInputError):
        verify_manifest(path)
    os.remove(manifest.path('profile.csv'))
    with pytest.raises(StaleInputError):
        verify_manifest(path)


def _record(level, message='message'):
    return logging.LogRecord('wormhole_tool.test', level, __file__, 1, message, None, None)


def test_colour_formatter():
    coloured = ColourFormatter(force_colour=True)
    assert coloured.format(_record(logging.WARNING)) == (Style.BRIGHT + Fore.YELLOW +
                                                         'WARNING:wormhole_tool.test:message' + Style.RESET_ALL)
    assert coloured.format(_record(logging.INFO)) == 'INFO:wormhole_tool.test:message'
    plain = ColourFormatter(force_colour=False)
    assert plain.format(_record(logging.ERROR)) == 'ERROR:wormhole_tool.test:message'


def test_configure_logging_installs_one_handler():
    root = logging.getLogger()
    first = configure_logging(force_colour=False)
    second = configure_logging(force_colour=False)
    try:
        assert first not in root.handlers
        assert second in root.handlers
    finally:
        root.removeHandler(second)


def test_every_module_declares_its_author():
    for info in pkgutil.walk_packages(wormhole_tool.__path__, 'wormhole_tool.'):
        module = importlib.import_module(info.name)
        assert module.__author__ == 'wormhole-tool developers', info.name
    assert wormhole_tool.__author__ == 'wormhole-tool developers'

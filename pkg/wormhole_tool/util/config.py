__author__ = 'wormhole-tool developers'

import json
import logging
import os
import os.path
import threading

from wormhole_tool.exceptions import ConfigurationError
from . import get_persist_dir

logger = logging.getLogger("wormhole_tool.util.config")


def resolve_config_path(path=None):
    return path or os.environ.get('WORMHOLE_CONFIG') or os.path.join(get_persist_dir(), 'settings.json')


class Config(object):
    """Option defaults from a JSON file.

    Top-level scalar keys apply to every command; a top-level object named after a
    command overrides them for that command only.
    """

    def __init__(self, path=None):
        self.path = resolve_config_path(path)
        self.lock = threading.Lock()
        try:
            with open(self.path) as f:
                self.content = json.load(f)
        except IOError:
            if path or os.environ.get('WORMHOLE_CONFIG'):
                raise ConfigurationError("Cannot read config file {}.".format(self.path))
            self.content = {}
        except ValueError as e:
            raise ConfigurationError("Config file {} is not valid JSON: {}".format(self.path, e))
        if not isinstance(self.content, dict):
            raise ConfigurationError("Config file {} must hold a JSON object.".format(self.path))
        logger.debug("Loaded %d config keys from %s", len(self.content), self.path)

    def save(self):
        with self.lock:
            with open(self.path, 'w') as f:
                json.dump(self.content, f, indent=4, sort_keys=True)

    def get(self, key, default=None):
        return self.content.get(key, default)

    def set(self, key, value):
        with self.lock:
            self.content[key] = value

    def setdefault(self, key, default=None):
        with self.lock:
            return self.content.setdefault(key, default)

    def command_defaults(self, command):
        defaults = {key: value for key, value in self.content.items() if not isinstance(value, dict)}
        section = self.content.get(command, {})
        if isinstance(section, dict):
            defaults.update(section)
        return {key.replace('-', '_'): value for key, value in defaults.items()}


_configs = {}


def get_config(path=None):
    resolved = resolve_config_path(path)
    if resolved not in _configs:
        _configs[resolved] = Config(path)
    return _configs[resolved]

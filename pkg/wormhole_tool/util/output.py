__author__ = 'wormhole-tool developers'

from collections import OrderedDict
import csv
import datetime
import hashlib
import json
import logging
import os
import os.path

import numpy as np

from wormhole_tool.exceptions import StaleInputError

logger = logging.getLogger("wormhole_tool.util.output")

MANIFEST_NAME = 'manifest.json'
TIMING_NAME = 'timing.json'


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '{:.17g}'.format(float(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
    logger.debug("Wrote %d rows to %s", len(rows), path)
    return path


def _parse(value):
    if value == '':
        return float('nan')
    try:
        return float(value)
    except ValueError:
        return value


def read_csv(path):
    """Columns of a CSV file, keyed by header name."""
    try:
        with open(path, newline='') as f:
            reader = csv.reader(f)
            header = next(reader)
            rows = [row for row in reader if row]
    except (IOError, OSError, StopIteration) as e:
        raise StaleInputError("Cannot read CSV file {}: {}".format(path, e))
    columns = OrderedDict((name, []) for name in header)
    for row in rows:
        for name, value in zip(header, row):
            columns[name].append(_parse(value))
    return columns


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError("{!r} is not JSON serialisable".format(value))


def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(',', ':'), default=_json_default)


def write_json(path, data):
    with open(path, 'w') as f:
        json.dump(data, f, sort_keys=True, indent=2, default=_json_default)
        f.write('\n')
    return path


def read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (IOError, OSError, ValueError) as e:
        raise StaleInputError("Cannot read JSON file {}: {}".format(path, e))


def git_blob_hash(source):
    """SHA-1 of ``source`` (a path or bytes) as git would store it as a blob."""
    if isinstance(source, bytes):
        content = source
    else:
        with open(source, 'rb') as f:
            content = f.read()
    digest = hashlib.sha1()
    digest.update('blob {}\0'.format(len(content)).encode('ascii'))
    digest.update(content)
    return digest.hexdigest()


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class Manifest(object):
    """Provenance record written next to every command's outputs.

    Clock readings go to a separate timing.json, so identical runs write
    identical manifests.
    """

    def __init__(self, command, config, directory, version):
        self.command = command
        self.config = config
        self.directory = directory
        self.version = version
        self.inputs = OrderedDict([('config', git_blob_hash(canonical_json(config).encode('utf-8')))])
        self.outputs = OrderedDict()
        self.started = _now()
        self._clock = datetime.datetime.now()
        self.finished = None
        self.extra = {}
        self.timing = OrderedDict()

    def path(self, name):
        return os.path.join(self.directory, name)

    def add_input(self, name, path):
        self.inputs[name] = git_blob_hash(path)

    def add_output(self, name):
        self.outputs[name] = git_blob_hash(self.path(name))

    def describe(self):
        return {
            'command': self.command,
            'config': self.config,
            'inputs': dict(self.inputs),
            'outputs': dict(self.outputs),
            'version': self.version,
            'extra': self.extra,
        }

    def describe_timing(self):
        timing = OrderedDict([
            ('started', self.started),
            ('finished', self.finished),
            ('wall_clock', (datetime.datetime.now() - self._clock).total_seconds()),
        ])
        timing.update(self.timing)
        return timing

    def write(self):
        self.finished = _now()
        write_json(self.path(MANIFEST_NAME), self.describe())
        write_json(self.path(TIMING_NAME), self.describe_timing())
        logger.info("Manifest written to %s", self.path(MANIFEST_NAME))
        return self.path(MANIFEST_NAME)


def verify_manifest(path):
    """Load a manifest and check every listed output against its hash."""
    manifest = read_json(path)
    directory = os.path.dirname(os.path.abspath(path))
    for name, expected in sorted(manifest.get('outputs', {}).items()):
        target = os.path.join(directory, name)
        if not os.path.exists(target):
            raise StaleInputError("{} is listed in {} but missing.".format(name, path))
        if git_blob_hash(target) != expected:
            raise StaleInputError("{} does not match the hash recorded in {}.".format(name, path))
    return manifest

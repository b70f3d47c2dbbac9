__author__ = 'wormhole-tool developers'

from six import with_metaclass

import argparse
import json
import logging
import os
import os.path

from wormhole_tool.exceptions import UsageError
from wormhole_tool.util import get_output_root
from wormhole_tool.util.output import Manifest

logger = logging.getLogger("wormhole_tool.commands.base")

_CommandRegistry = []

# Parsed-argument keys that describe the invocation rather than the computation.
_PLUMBING_KEYS = ('func', 'v', 'config', 'out', 'jobs')


def _positive_int(value):
    """Validate that the value is a positive integer."""
    try:
        ivalue = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not a valid integer".format(value))
    if ivalue < 1:
        raise argparse.ArgumentTypeError("'{}' must be a positive integer (>= 1)".format(value))
    return ivalue


def _nonnegative_int(value):
    try:
        ivalue = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not a valid integer".format(value))
    if ivalue < 0:
        raise argparse.ArgumentTypeError("'{}' must be a non-negative integer".format(value))
    return ivalue


def _positive_float(value):
    try:
        fvalue = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not a number".format(value))
    if not fvalue > 0:
        raise argparse.ArgumentTypeError("'{}' must be positive".format(value))
    return fvalue


def _interval(value):
    """lo:hi with lo < hi."""
    parts = value.split(':')
    try:
        lo, hi = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("'{}' is not of the form lo:hi".format(value))
    if not lo < hi:
        raise argparse.ArgumentTypeError("'{}' is inverted: need lo < hi".format(value))
    return lo, hi


def _sweep(value):
    """lo:hi:steps with lo < hi and at least two steps."""
    parts = value.split(':')
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("'{}' is not of the form lo:hi:steps".format(value))
    lo, hi = _interval(':'.join(parts[:2]))
    steps = _positive_int(parts[2])
    if steps < 2:
        raise argparse.ArgumentTypeError("a sweep needs at least 2 steps, got {}".format(steps))
    return lo, hi, steps


class SelfRegisteringCommand(type):
    def __init__(cls, name, bases, dct):
        if hasattr(cls, 'command') and cls.command is not None:
            _CommandRegistry.append(cls)
        super(SelfRegisteringCommand, cls).__init__(name, bases, dct)


class BaseCommand(with_metaclass(SelfRegisteringCommand)):
    command = None
    has_subcommands = False

    @classmethod
    def add_parser(cls, parser):
        if hasattr(cls, 'epilog'):
            epilog = cls.epilog
        elif cls.has_subcommands:
            epilog = "For help on an individual subcommand, call that command with --help."
        else:
            epilog = None
        parser = parser.add_parser(cls.command, parents=cls._shared_parser(), help=cls.__doc__, epilog=epilog,
                                   formatter_class=argparse.RawDescriptionHelpFormatter)
        parser.set_defaults(func=lambda x: cls()(x))
        return parser

    @classmethod
    def _shared_parser(cls):
        parser = argparse.ArgumentParser(add_help=False)
        parser.add_argument('-v', action='count', default=0, help="Degree of verbosity (use more v for more verbosity)")
        parser.add_argument('--config', metavar='PATH',
                            help="JSON file of option defaults. Equivalent to WORMHOLE_CONFIG.")
        parser.add_argument('--out', metavar='DIR',
                            help="Output root directory. Equivalent to WORMHOLE_OUTPUT_ROOT.")
        return [parser]

    @classmethod
    def apply_config(cls, parser, settings):
        """Use config-file values as defaults for this command's options."""
        known = set(action.dest for action in parser._actions)
        defaults = dict((key, value) for key, value in settings.command_defaults(cls.command).items()
                        if key in known and key not in ('config', 'out'))
        if defaults:
            logger.debug("Config defaults for %s: %s", cls.command, defaults)
            parser.set_defaults(**defaults)

    def __call__(self, args):
        self._set_debugging(args.v)
        self.args = args

    def _set_debugging(self, level):
        self._verbosity = level
        if level is not None:
            if level == 1:
                verbosity = logging.INFO
            elif level >= 2:
                verbosity = logging.DEBUG
            else:
                verbosity = logging.WARNING
            logging.getLogger().setLevel(verbosity)

    def require(self, args, *names):
        missing = ['--' + name.replace('_', '-') for name in names if getattr(args, name, None) is None]
        if missing:
            raise UsageError("{} requires {}.".format(self.command, ", ".join(missing)))

    def resolved_config(self, args):
        return dict((key, value) for key, value in sorted(vars(args).items()) if key not in _PLUMBING_KEYS)

    def output_directory(self, args, name):
        directory = os.path.join(get_output_root(args.out), name)
        if not os.path.exists(directory):
            os.makedirs(directory)
        return directory

    def start_manifest(self, args, directory):
        from wormhole_tool import __version__
        return Manifest(self.command, self.resolved_config(args), directory, __version__)

    def emit(self, summary):
        print(json.dumps(summary, sort_keys=True, default=str))


def register_children(parser, settings=None):
    subparsers = parser.add_subparsers(title="command")
    for command in _CommandRegistry:
        subparser = command.add_parser(subparsers)
        if settings is not None:
            command.apply_config(subparser, settings)

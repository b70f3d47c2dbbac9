__author__ = 'wormhole-tool developers'

import argparse
import json
import logging

from .exceptions import ToolError
from .util.config import get_config
from .util.logs import configure_logging

try:
    from importlib.metadata import version, PackageNotFoundError
    __version__ = version('wormhole-tool')
except PackageNotFoundError:
    __version__ = '0.0.0'
__version_info__ = tuple(int(p) for p in __version__.split('.')[:3] if p.isdigit())

# Import order sets the command order in `wormhole -h`.
from .commands.base import register_children
from .commands import kink, modes, gamma, evolve, analyze

logger = logging.getLogger("wormhole_tool")


def _error_exit(parser, error):
    parser.exit(message=json.dumps(error.as_dict(), sort_keys=True) + "\n", status=error.exit_code)


def run_tool(args=None):
    configure_logging()
    parser = argparse.ArgumentParser(description="Sine-Gordon kinks on a wormhole: profiles, spectra and evolutions.",
                                     prog="wormhole",
                                     epilog="For help on an individual command, call that command with --help.")
    parser.add_argument("--version", action="version", version="wormhole-tool v{}".format(__version__))
    preparser = argparse.ArgumentParser(add_help=False)
    preparser.add_argument('--config')
    known, _ = preparser.parse_known_args(args)
    try:
        settings = get_config(known.config)
    except ToolError as e:
        _error_exit(parser, e)
    register_children(parser, settings)
    args = parser.parse_args(args)
    if not hasattr(args, 'func'):
        parser.error("no subcommand specified.")
    try:
        args.func(args)
    except ToolError as e:
        logger.debug("Command failed", exc_info=True)
        _error_exit(parser, e)

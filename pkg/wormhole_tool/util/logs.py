__author__ = 'wormhole-tool developers'

from collections import OrderedDict
import logging
import sys

from colorama import Fore, Back, Style

logger = logging.getLogger("wormhole_tool.util.logs")


class ColourFormatter(logging.Formatter):
    colour_scheme = OrderedDict([
        (logging.DEBUG, Fore.CYAN),
        (logging.INFO, ""),
        (logging.WARNING, Style.BRIGHT + Fore.YELLOW),
        (logging.ERROR, Style.BRIGHT + Fore.RED),
        (logging.CRITICAL, Back.RED + Style.BRIGHT + Fore.WHITE),
    ])

    def __init__(self, fmt="%(levelname)s:%(name)s:%(message)s", force_colour=None, stream=None):
        super(ColourFormatter, self).__init__(fmt)
        stream = stream or sys.stderr
        self.print_with_colour = force_colour if force_colour is not None else stream.isatty()

    def _colour_for(self, level):
        for threshold, colour in reversed(list(self.colour_scheme.items())):
            if level >= threshold:
                return colour
        return ""

    def format(self, record):
        message = super(ColourFormatter, self).format(record)
        colour = self._colour_for(record.levelno)
        if self.print_with_colour and colour:
            return colour + message + Style.RESET_ALL
        return message


def configure_logging(stream=None, force_colour=None):
    """Install a single coloured stderr handler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_wormhole', False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(ColourFormatter(force_colour=force_colour, stream=stream))
    handler._wormhole = True
    root.addHandler(handler)
    return handler

__author__ = 'wormhole-tool developers'

import os
import os.path


def get_persist_dir():
    dir = os.path.expanduser("~/.wormhole-tool")
    if not os.path.exists(dir):
        os.makedirs(dir)
    return dir


def get_output_root(override=None):
    """Where run directories go: ``--out``, then WORMHOLE_OUTPUT_ROOT, then ./wormhole-output."""
    root = override or os.environ.get('WORMHOLE_OUTPUT_ROOT') or os.path.join(os.getcwd(), 'wormhole-output')
    if not os.path.exists(root):
        os.makedirs(root)
    return root

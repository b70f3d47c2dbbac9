#!/usr/bin/env python3
__author__ = 'wormhole-tool developers'

import wormhole_tool

if __name__ == "__main__":
    wormhole_tool.run_tool()

__author__ = 'wormhole-tool developers'

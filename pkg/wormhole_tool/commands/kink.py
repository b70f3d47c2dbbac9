__author__ = 'wormhole-tool developers'

import logging

from .base import BaseCommand, _positive_float, _positive_int
from wormhole_tool.physics.kink import SHOOT_TOL, WormholeConfig, kink_diagnostics, solve_kink
from wormhole_tool.util.output import write_csv, write_json

logger = logging.getLogger("wormhole_tool.commands.kink")


class KinkCommand(BaseCommand):
    """Computes the n-kink on a wormhole of throat radius a."""
    command = 'kink'

    @classmethod
    def add_parser(cls, parser):
        parser = super(KinkCommand, cls).add_parser(parser)
        parser.add_argument('--a', type=_positive_float, help="Throat radius.")
        parser.add_argument('--n', type=_positive_int, help="Topological degree (>= 1).")
        parser.add_argument('--tol', type=_positive_float, default=SHOOT_TOL, help="Shooting tolerance on b_n.")
        parser.add_argument('--r-max', type=_positive_float, help="Shooting radius (default max(25, 10a)).")
        parser.add_argument('--spacing', type=_positive_float, default=0.01, help="Profile sample spacing in r.")
        return parser

    def __call__(self, args):
        super(KinkCommand, self).__call__(args)
        self.require(args, 'a', 'n')
        config = WormholeConfig(args.a, args.n)
        kink = solve_kink(config, shoot_tol=args.tol, r_max=args.r_max)
        diagnostics = kink_diagnostics(kink)

        directory = self.output_directory(args, 'kink-a{:g}-n{}'.format(config.a, config.n))
        manifest = self.start_manifest(args, directory)
        grid, phi, dphi = kink.samples(kink.default_grid(args.spacing))
        write_csv(manifest.path('profile.csv'), ('r', 'phi', 'dphi'), list(zip(grid.points, phi, dphi)))
        manifest.add_output('profile.csv')
        summary = kink.describe()
        summary.update({
            'energy': diagnostics.energy,
            'friction_residual': diagnostics.friction_residual,
            'separation': diagnostics.separation,
            'warnings': list(kink.coefficient.warnings),
        })
        write_json(manifest.path('kink.json'), summary)
        manifest.add_output('kink.json')
        manifest.write()
        self.emit(summary)

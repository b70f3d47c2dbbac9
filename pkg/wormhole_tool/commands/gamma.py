__author__ = 'wormhole-tool developers'

import logging

from .base import BaseCommand, _positive_float
from wormhole_tool.exceptions import DomainError
from wormhole_tool.physics.kink import WormholeConfig, solve_kink
from wormhole_tool.physics.spectrum import build_potential, gamma_for_mode, gap_eigenvalues
from wormhole_tool.util.output import write_json

logger = logging.getLogger("wormhole_tool.commands.gamma")


class GammaCommand(BaseCommand):
    """Computes the resonant damping coefficient of the 1-kink's internal mode."""
    command = 'gamma'

    @classmethod
    def add_parser(cls, parser):
        parser = super(GammaCommand, cls).add_parser(parser)
        parser.add_argument('--a', type=_positive_float, help="Throat radius.")
        parser.add_argument('--radius', type=_positive_float, default=200.0,
                            help="Radius where the outgoing solution is seeded.")
        return parser

    def __call__(self, args):
        super(GammaCommand, self).__call__(args)
        self.require(args, 'a')
        kink = solve_kink(WormholeConfig(args.a, 1))
        modes = gap_eigenvalues(build_potential(kink))
        if not modes:
            raise DomainError("No internal mode for a = {:g}: the 1-kink has no gap eigenvalue.".format(args.a))
        result = gamma_for_mode(kink, modes[0], radius=args.radius)
        logger.info("a = %g: Gamma^-1/2 = %.5f, transmitted fraction %.5f", args.a, result.inv_sqrt_gamma,
                    result.scattering.transmitted)
        summary = result.describe(a=args.a)

        directory = self.output_directory(args, 'gamma-a{:g}'.format(args.a))
        manifest = self.start_manifest(args, directory)
        write_json(manifest.path('gamma.json'), summary)
        manifest.add_output('gamma.json')
        manifest.write()
        self.emit(summary)

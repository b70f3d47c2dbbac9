__author__ = 'wormhole-tool developers'

import logging
import sys

from progressbar import ProgressBar, Bar, Timer, Percentage

from .base import BaseCommand, _nonnegative_int, _positive_float, _positive_int
from wormhole_tool.exceptions import UnstableRunError, UsageError
from wormhole_tool.physics.evolve import (EvolutionConfig, KinkPlusBump, SampleData, TabulatedData, VacuumPulse,
                                          evolve_run, write_checkpoint)
from wormhole_tool.physics.kink import WormholeConfig, solve_kink
from wormhole_tool.physics.spectrum import build_potential, gap_eigenvalues
from wormhole_tool.util.output import write_csv, write_json

logger = logging.getLogger("wormhole_tool.commands.evolve")


class EvolveCommand(BaseCommand):
    """Evolves perturbed kink data in hyperboloidal time."""
    command = 'evolve'
    epilog = """Initial data families:
  sample    h_n(y) + exp(-tan(y)^2 / 4), zero velocity (needs n >= 1)
  gaussian  h_n(y) plus a Gaussian bump in r (a pulse on the vacuum for n = 0)
  file      columns y, alpha, beta from --data-file
"""

    def __init__(self):
        self.progress_bar = None
        self._shown = 0.0

    @classmethod
    def add_parser(cls, parser):
        parser = super(EvolveCommand, cls).add_parser(parser)
        parser.add_argument('--a', type=_positive_float, help="Throat radius.")
        parser.add_argument('--n', type=_nonnegative_int, help="Topological degree (0 only with non-kink data).")
        parser.add_argument('--data', choices=('sample', 'gaussian', 'file'), default='sample',
                            help="Initial data family.")
        parser.add_argument('--data-file', help="CSV file for --data file.")
        parser.add_argument('--amplitude', type=float, default=None, help="Perturbation amplitude.")
        parser.add_argument('--width', type=_positive_float, default=None, help="Perturbation width.")
        parser.add_argument('--center', type=float, default=0.0, help="Centre of the Gaussian bump in r.")
        parser.add_argument('--points', type=_positive_int, default=2048, help="Grid points in y.")
        parser.add_argument('--s-end', type=_positive_float, default=100.0, help="Final hyperboloidal time.")
        parser.add_argument('--cfl', type=_positive_float, default=0.25, help="Courant factor.")
        parser.add_argument('--sigma-ko', type=float, default=0.02, help="Kreiss-Oliger coefficient.")
        parser.add_argument('--eps-c', type=float, default=-0.1, help="Constraint damping coefficient (<= 0).")
        parser.add_argument('--output-every', type=_positive_int, default=100,
                            help="Steps between diagnostic records before the logarithmic cadence starts.")
        parser.add_argument('--probe-y', type=float, default=0.0, help="Diagnostic location in y.")
        parser.add_argument('--checkpoint-every', type=_positive_float, default=None,
                            help="Write a checkpoint every this much hyperboloidal time.")
        parser.add_argument('--no-projection', action='store_true',
                            help="Skip the mode projection diagnostic.")
        return parser

    def _initial_data(self, args, config, kink):
        amplitude = {}
        if args.amplitude is not None:
            amplitude['amplitude'] = args.amplitude
        if args.width is not None:
            amplitude['width'] = args.width
        if args.data == 'file':
            self.require(args, 'data_file')
            return TabulatedData(args.data_file)
        if args.data == 'sample':
            if config.n == 0:
                raise UsageError("--data sample perturbs a kink and needs n >= 1.")
            return SampleData(kink, **amplitude)
        if config.n == 0:
            return VacuumPulse(config.a, center=args.center, **amplitude)
        return KinkPlusBump(kink, center=args.center, **amplitude)

    def _progress(self, s, s_end):
        if s - self._shown >= 1e-3 * s_end or s >= s_end:
            self._shown = s
            self.progress_bar.update(min(s, s_end))

    def __call__(self, args):
        super(EvolveCommand, self).__call__(args)
        self.require(args, 'a', 'n')
        wormhole = WormholeConfig(args.a, args.n, allow_vacuum=True)
        config = EvolutionConfig(wormhole, num_points=args.points, cfl=args.cfl, sigma_ko=args.sigma_ko,
                                 eps_c=args.eps_c, s_end=args.s_end, output_every=args.output_every,
                                 probe_y=args.probe_y)
        kink = solve_kink(wormhole) if wormhole.n >= 1 else None
        mode = None
        if kink is not None and not args.no_projection:
            modes = gap_eigenvalues(build_potential(kink))
            mode = modes[0] if modes else None
        data = self._initial_data(args, config, kink)
        initial = data.field_state(kink, config)

        directory = self.output_directory(args, 'evolve-a{:g}-n{}-{}-N{}'.format(
            wormhole.a, wormhole.n, args.data, args.points))
        manifest = self.start_manifest(args, directory)
        if args.data == 'file':
            manifest.add_input('data_file', args.data_file)
        if mode is not None:
            write_json(manifest.path('mode.json'), mode.describe())
            write_csv(manifest.path('mode.csv'), ('r', 'v'), list(zip(mode.grid.points, mode.values)))
            manifest.add_output('mode.json')
            manifest.add_output('mode.csv')

        checkpoints = []

        def checkpoint(state):
            name = 'checkpoint-{:012.3f}.bin'.format(state.s)
            write_checkpoint(manifest.path(name), state, config)
            checkpoints.append(name)

        progress = None
        if sys.stderr.isatty():
            self.progress_bar = ProgressBar(max_value=config.s_end, widgets=[
                Percentage(), Bar(marker='=', left='[', right=']'), ' ', Timer(format='%s')])
            self.progress_bar.start()
            progress = self._progress

        failure = None
        try:
            record = evolve_run(initial, config, kink=kink, mode=mode, progress=progress,
                                checkpoint=checkpoint if args.checkpoint_every else None,
                                checkpoint_every=args.checkpoint_every)
        except UnstableRunError as e:
            failure = e
            record = e.record
        finally:
            if self.progress_bar is not None:
                self.progress_bar.finish()

        record.metadata['initial_data'] = data.describe()
        record.to_csv(manifest.path('run.csv'))
        write_json(manifest.path('run.json'), {'metadata': record.metadata, 'warnings': record.warnings,
                                                'complete': failure is None})
        manifest.add_output('run.csv')
        manifest.add_output('run.json')
        for name in checkpoints:
            manifest.add_output(name)
            manifest.add_output(name + '.json')
        manifest.extra['complete'] = failure is None
        manifest.timing['evolution'] = record.wall_clock
        manifest.write()
        if failure is not None:
            raise failure
        self.emit({'directory': directory, 'records': len(record), 'warnings': record.warnings})

__author__ = 'wormhole-tool developers'

from concurrent.futures import ProcessPoolExecutor
import logging
import os.path

import numpy as np

from .base import BaseCommand, _interval, _nonnegative_int, _positive_float, _positive_int, _sweep
from wormhole_tool.exceptions import UsageError
from wormhole_tool.physics.kink import WormholeConfig, solve_kink
from wormhole_tool.physics.spectrum import build_potential, critical_radius, gap_eigenvalues
from wormhole_tool.util.output import read_json, write_csv, write_json

logger = logging.getLogger("wormhole_tool.commands.modes")

MODE_COLUMNS = ('a', 'n', 'index', 'omega2', 'omega', 'parity', 'node_count')


def mode_rows(modes):
    rows = []
    for mode in modes:
        row = mode.describe()
        rows.append(tuple(row[column] for column in MODE_COLUMNS))
    return rows


def compute_modes(a, n):
    return gap_eigenvalues(build_potential(solve_kink(WormholeConfig(a, n))))


def _sweep_item(index, a, n, directory):
    modes = compute_modes(a, n)
    path = os.path.join(directory, 'item-{:05d}.json'.format(index))
    write_json(path, {'index': index, 'a': a, 'n': n, 'modes': [mode.describe() for mode in modes]})
    return path


class ModesCommand(BaseCommand):
    """Finds the gap eigenvalues of the linearised operator around the n-kink."""
    command = 'modes'

    @classmethod
    def add_parser(cls, parser):
        parser = super(ModesCommand, cls).add_parser(parser)
        parser.add_argument('--a', type=_positive_float, help="Throat radius.")
        parser.add_argument('--n', type=_positive_int, help="Topological degree (>= 1).")
        parser.add_argument('--sweep', type=_sweep, metavar='LO:HI:STEPS',
                            help="Scan throat radii from LO to HI in STEPS equal steps instead of a single --a.")
        parser.add_argument('--jobs', type=_positive_int, default=1, help="Worker processes for --sweep.")
        return parser

    def __call__(self, args):
        super(ModesCommand, self).__call__(args)
        self.require(args, 'n')
        if args.sweep is not None:
            self._run_sweep(args)
        else:
            self.require(args, 'a')
            self._run_single(args)

    def _run_single(self, args):
        modes = compute_modes(args.a, args.n)
        directory = self.output_directory(args, 'modes-a{:g}-n{}'.format(args.a, args.n))
        manifest = self.start_manifest(args, directory)
        write_csv(manifest.path('modes.csv'), MODE_COLUMNS, mode_rows(modes))
        manifest.add_output('modes.csv')
        for mode in modes:
            name = 'mode-{}.csv'.format(mode.node_count)
            write_csv(manifest.path(name), ('r', 'v'), list(zip(mode.grid.points, mode.values)))
            manifest.add_output(name)
        if not modes:
            logger.warning("No gap eigenvalue for a = %g, n = %d.", args.a, args.n)
            manifest.extra['note'] = 'no gap eigenvalue'
        manifest.write()
        self.emit({'a': args.a, 'n': args.n, 'modes': [mode.describe() for mode in modes],
                   'note': None if modes else 'no gap eigenvalue'})

    def _run_sweep(self, args):
        lo, hi, steps = args.sweep
        radii = np.linspace(lo, hi, steps)
        directory = self.output_directory(args, 'modes-sweep-n{}-{:g}-{:g}-{}'.format(args.n, lo, hi, steps))
        items = os.path.join(directory, 'items')
        if not os.path.exists(items):
            os.makedirs(items)
        work = [(index, float(a), args.n, items) for index, a in enumerate(radii)]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                paths = list(pool.map(_sweep_item, *zip(*work)))
        else:
            paths = [_sweep_item(*item) for item in work]

        # Items are merged in sweep order regardless of completion order.
        manifest = self.start_manifest(args, directory)
        rows = []
        for path in sorted(paths):
            item = read_json(path)
            manifest.add_output(os.path.join('items', os.path.basename(path)))
            for mode in item['modes']:
                rows.append(tuple(mode[column] for column in MODE_COLUMNS))
        write_csv(manifest.path('modes.csv'), MODE_COLUMNS, rows)
        manifest.add_output('modes.csv')
        manifest.write()
        self.emit({'n': args.n, 'sweep': [lo, hi, steps], 'rows': len(rows)})


class CriticalCommand(BaseCommand):
    """Finds the throat radius at which an internal mode merges into the continuum."""
    command = 'critical'

    @classmethod
    def add_parser(cls, parser):
        parser = super(CriticalCommand, cls).add_parser(parser)
        parser.add_argument('--n', type=_positive_int, help="Topological degree (>= 1).")
        parser.add_argument('--mode', type=_nonnegative_int, default=0, help="Node count of the tracked mode.")
        parser.add_argument('--bracket', type=_interval, metavar='LO:HI',
                            help="Throat radii with the mode absent (LO) and present (HI).")
        parser.add_argument('--points', type=_positive_int, default=6, help="Ladder points per refinement stage.")
        return parser

    def __call__(self, args):
        super(CriticalCommand, self).__call__(args)
        self.require(args, 'n', 'bracket')
        if args.mode >= args.n:
            raise UsageError("The {}-kink has at most {} internal mode(s); --mode {} does not exist."
                             .format(args.n, args.n, args.mode))
        if args.points < 3:
            raise UsageError("--points must be at least 3.")
        a_star = critical_radius(args.n, args.mode, args.bracket, points=args.points)
        directory = self.output_directory(args, 'critical-n{}-mode{}'.format(args.n, args.mode))
        manifest = self.start_manifest(args, directory)
        result = {'n': args.n, 'mode': args.mode, 'bracket': list(args.bracket), 'a_star': a_star}
        write_json(manifest.path('critical.json'), result)
        manifest.add_output('critical.json')
        manifest.write()
        self.emit(result)

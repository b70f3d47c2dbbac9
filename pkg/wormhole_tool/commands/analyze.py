__author__ = 'wormhole-tool developers'

import logging
import os.path

from .base import BaseCommand, _interval
from wormhole_tool.exceptions import StaleInputError
from wormhole_tool.physics.analysis import analysis_report
from wormhole_tool.physics.evolve import RECORD_COLUMNS, RunRecord
from wormhole_tool.physics.spectrum import GammaResult, ModeData
from wormhole_tool.util.output import read_csv, read_json, verify_manifest, write_csv, write_json

logger = logging.getLogger("wormhole_tool.commands.analyze")


def load_mode(directory, modes_file=None):
    """The internal mode used by a run: its own samples, else the lowest row of a modes table."""
    if modes_file is None:
        if not os.path.exists(os.path.join(directory, 'mode.json')):
            return None
        columns = read_csv(os.path.join(directory, 'mode.csv'))
        return ModeData.from_samples(read_json(os.path.join(directory, 'mode.json')), columns['r'], columns['v'])
    columns = read_csv(modes_file)
    if not columns.get('omega2'):
        return None
    rows = [dict(zip(columns.keys(), values)) for values in zip(*columns.values())]
    return ModeData.from_row(min(rows, key=lambda row: row['omega2']))


def load_gamma(path):
    data = read_json(path)
    return GammaResult(data['omega'], data['xi'], complex(data['overlap_re'], data['overlap_im']), data['gamma'])


class AnalyzeCommand(BaseCommand):
    """Fits decay laws to an evolution run and compares them with the predictions."""
    command = 'analyze'

    @classmethod
    def add_parser(cls, parser):
        parser = super(AnalyzeCommand, cls).add_parser(parser)
        parser.add_argument('--run', metavar='MANIFEST', help="manifest.json of an evolve run.")
        parser.add_argument('--mode-from', metavar='CSV', help="modes.csv to take the internal mode from.")
        parser.add_argument('--gamma-from', metavar='JSON', help="gamma.json with the damping coefficient.")
        parser.add_argument('--signal', choices=('alpha_proj', 'u_probe'), default=None,
                            help="Signal to fit (default: alpha_proj when a mode is known).")
        parser.add_argument('--window', type=_interval, metavar='LO:HI', help="Fit window in s.")
        return parser

    def __call__(self, args):
        super(AnalyzeCommand, self).__call__(args)
        self.require(args, 'run')
        manifest_in = verify_manifest(args.run)
        if manifest_in.get('command') != 'evolve':
            raise StaleInputError("{} is not the manifest of an evolve run.".format(args.run))
        run_directory = os.path.dirname(os.path.abspath(args.run))
        run_info = read_json(os.path.join(run_directory, 'run.json'))
        record = RunRecord.from_csv(os.path.join(run_directory, 'run.csv'), metadata=run_info['metadata'])
        record.warnings = list(run_info.get('warnings', []))
        mode = load_mode(run_directory, args.mode_from)
        gamma = load_gamma(args.gamma_from) if args.gamma_from else None

        report, plots = analysis_report(record, mode=mode, gamma=gamma, signal=args.signal, window=args.window)
        report['run'] = os.path.abspath(args.run)
        report['columns'] = list(RECORD_COLUMNS)

        directory = self.output_directory(args, 'analysis-' + os.path.basename(run_directory))
        manifest = self.start_manifest(args, directory)
        manifest.add_input('run_manifest', args.run)
        if args.mode_from:
            manifest.add_input('modes', args.mode_from)
        if args.gamma_from:
            manifest.add_input('gamma', args.gamma_from)
        write_json(manifest.path('report.json'), report)
        manifest.add_output('report.json')
        for name, (header, rows) in sorted(plots.items()):
            write_csv(manifest.path(name + '.csv'), header, rows)
            manifest.add_output(name + '.csv')
        manifest.write()
        self.emit(report)

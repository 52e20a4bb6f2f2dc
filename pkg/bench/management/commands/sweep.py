"""Run the benchmark over several (n_server, n_ingest) pairs and write the scaling curve."""
from dataclasses import replace

from django.utils import timezone

from bench.cli import BenchCommand
from bench.config import harness_setting
from bench.constants import MESSAGES, SCALING_FILE_NAME
from bench.exceptions import InvalidBenchmarkConfig
from bench.reports import ScalingCurve, ScalingPoint
from bench.serializers import BenchmarkConfigSerializer
from bench.services import BenchmarkService


def parse_pair(text):
    """'2:4' -> (2, 4)"""
    try:
        servers, ingest = (int(part) for part in text.split(':'))
    except ValueError:
        raise InvalidBenchmarkConfig(f'Pair {text!r} is not <servers>:<ingest>')
    return servers, ingest


class Command(BenchCommand):
    help = 'Sweep (n_server, n_ingest) pairs at fixed per-worker work; writes scaling.csv'

    def add_arguments(self, parser):
        parser.add_argument('--pairs', nargs='*', default=[], help='Pairs as <servers>:<ingest>, e.g. 2:1 2:2')
        self.add_config_arguments(parser, pairs=True)

    def run(self, **options):
        pairs = [parse_pair(p) for p in options['pairs']]
        if not pairs:
            raise InvalidBenchmarkConfig('Sweep needs at least one <servers>:<ingest> pair')
        data = self.config_data(options)
        servers, ingest = pairs[0]
        data.setdefault('n_server', servers)
        data.setdefault('n_ingest', ingest)
        base = self.load_config(data)
        out = self.output_dir(options)
        started_at = timezone.now()

        points = []
        total_inserts = 0
        for servers, ingest in pairs:
            cfg = replace(base, n_server=servers, n_ingest=ingest)
            run_dir = out / f'{servers}x{ingest}'
            setup = BenchmarkService.setup_phase(cfg, run_dir)
            report = BenchmarkService.run_benchmark(cfg, run_dir, setup=setup)
            verification = BenchmarkService.verify_ingest(setup.store, cfg)
            if not verification.passed:
                self.report_checks(verification)
            self.write_run_outputs(run_dir, report, started_at)
            points.append(ScalingPoint.from_report(report))
            total_inserts += report.total_inserts
            self.stdout.write(
                f'{servers}x{ingest}: N_p={cfg.n_p} aggregate={report.aggregate_rate:.0f} '
                f'per_worker={report.mean_worker_rate:.0f} entries/s'
            )

        curve = ScalingCurve(points)
        curve.write_csv(out / SCALING_FILE_NAME)
        tolerance = harness_setting('LINEAR_TOLERANCE')
        linear = curve.is_linear(tolerance)
        self.record_run(
            'sweep',
            {
                'config': BenchmarkConfigSerializer(base).data,
                'pairs': [f'{s}:{i}' for s, i in pairs],
                'linear': linear,
                'dispersion': curve.dispersion,
                'started_at': started_at.isoformat(),
            },
            out,
            True,
            total_inserts=total_inserts,
            aggregate_rate=max(p.aggregate_rate for p in curve),
        )
        self.stdout.write(f'Per-worker rate dispersion (max/min): {curve.dispersion:.3f}')
        self.stdout.write(self.style.SUCCESS(
            MESSAGES['sweep_done'].format(rows=len(curve), linear=str(linear).lower())
        ))


"""Run one scaled-problem ingest benchmark and verify the result."""
from django.utils import timezone

from bench.cli import BenchCommand
from bench.constants import MESSAGES
from bench.serializers import RunManifestSerializer
from bench.services import BenchmarkService


class Command(BenchCommand):
    help = 'Run the ingest benchmark; exits 1 if verification fails'

    def add_arguments(self, parser):
        self.add_config_arguments(parser)
        parser.add_argument('--dump', action='store_true', help='Also write the table contents to store.tsv')

    def run(self, **options):
        cfg = self.load_config(self.config_data(options))
        out = self.output_dir(options)
        started_at = timezone.now()

        setup = BenchmarkService.setup_phase(cfg, out)
        report = BenchmarkService.run_benchmark(cfg, out, setup=setup)
        snapshots = BenchmarkService.snapshot_tablets(setup.store, cfg)
        verification = BenchmarkService.verify_tablets(snapshots, cfg)

        manifest = self.write_run_outputs(out, report, started_at, snapshots if options['dump'] else None)
        run = self.record_run(
            'bench', RunManifestSerializer(manifest).data, out, verification.passed,
            total_inserts=report.total_inserts,
            aggregate_rate=report.aggregate_rate,
            wall_seconds=report.wall_seconds,
        )
        self.stdout.write(f'Run {run.pk}: outputs in {out}')
        self.report_checks(verification)
        self.stdout.write(self.style.SUCCESS(
            MESSAGES['bench_passed'].format(total=report.total_inserts, rate=report.aggregate_rate)
        ))

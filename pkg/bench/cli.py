"""
Shared plumbing for the benchmark management commands.

``BenchCommand`` turns ``BenchError`` into ``CommandError`` with the error's
exit code (2 usage/config, 1 verification), builds a BenchmarkConfig from a
JSON file plus flags, writes run outputs and records runs in the ledger.
"""
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

from .config import BenchmarkConfig, harness_setting
from .constants import (
    DUMP_FILE_NAME,
    MANIFEST_FILE_NAME,
    MESSAGES,
    REPORT_FILE_NAME,
    SPLIT_FILE_NAME,
    THROUGHPUT_FILE_NAME,
)
from .exceptions import BenchError, VerificationFailed
from .reports import (
    CHECK_PASS,
    CHECK_SKIPPED,
    IngestReport,
    RunManifest,
    VerificationReport,
    write_store_dump,
    write_throughput_csv,
)
from .serializers import (
    BenchmarkConfigSerializer,
    BenchmarkRunSerializer,
    IngestReportSerializer,
    RunManifestSerializer,
    load_validated,
    read_json,
    write_json,
)

logger = logging.getLogger(__name__)

# flag dest -> config key
CONFIG_FLAGS = {
    'servers': 'n_server',
    'ingest': 'n_ingest',
    'tablets': 'n_tablet',
    'scale': 'scale',
    'seed': 'seed',
    'balancer_rate': 'balancer_rate',
}


class BenchCommand(BaseCommand):
    """Base class; subclasses implement ``run`` instead of ``handle``."""

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except BenchError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError

    # Configuration

    def add_config_arguments(self, parser, pairs=False):
        parser.add_argument('--config', help='JSON config file with flat BenchmarkConfig keys')
        if not pairs:
            parser.add_argument('--servers', type=int, help='Number of tablet servers (N_server)')
            parser.add_argument('--ingest', type=int, help='Ingest workers per server (N_ingest)')
        parser.add_argument('--tablets', type=int, help='Tablets per worker (N_tablet)')
        parser.add_argument('--scale', type=int, help='Graph500 SCALE of the base graph')
        parser.add_argument('--seed', type=int, help='Base random seed')
        parser.add_argument('--walog', choices=('on', 'off'), help='Write-ahead log during ingest')
        parser.add_argument('--balancer-rate', type=float, help='Tablet migrations per simulated second')
        parser.add_argument('--out', help='Output directory')

    def config_data(self, options) -> dict:
        """Config file values overridden by any flags given."""
        data = dict(read_json(options['config'])) if options.get('config') else {}
        for flag, key in CONFIG_FLAGS.items():
            if options.get(flag) is not None:
                data[key] = options[flag]
        if options.get('walog') is not None:
            data['walog_enabled'] = options['walog'] == 'on'
        data.setdefault('averaging_window', harness_setting('AVERAGING_WINDOW'))
        data.setdefault('table_name', harness_setting('TABLE_NAME'))
        return data

    def load_config(self, data) -> BenchmarkConfig:
        return load_validated(BenchmarkConfigSerializer, data)

    def output_dir(self, options) -> Path:
        if options.get('out'):
            path = Path(options['out'])
        else:
            stamp = timezone.now().strftime('%Y%m%d-%H%M%S-%f')
            path = Path(harness_setting('OUTPUT_DIR')) / f'{self.command_name}-{stamp}'
        path.mkdir(parents=True, exist_ok=True)
        return path

    # Outputs

    def write_run_outputs(self, out: Path, report: IngestReport, started_at, snapshots=None) -> RunManifest:
        """Write manifest.json, report.json, throughput.csv and optionally store.tsv."""
        outputs = {
            'manifest': str(out / MANIFEST_FILE_NAME),
            'report': str(out / REPORT_FILE_NAME),
            'throughput': str(out / THROUGHPUT_FILE_NAME),
            'splits': str(out / SPLIT_FILE_NAME),
        }
        if snapshots is not None:
            outputs['dump'] = str(write_store_dump(out / DUMP_FILE_NAME, snapshots))
        manifest = RunManifest(config=report.config, started_at=started_at, outputs=outputs)
        write_json(outputs['manifest'], RunManifestSerializer(manifest).data)
        write_json(outputs['report'], IngestReportSerializer(report).data)
        write_throughput_csv(outputs['throughput'], report.samples)
        return manifest

    def record_run(self, command, manifest_data, out, passed, total_inserts=0, aggregate_rate=0.0, wall_seconds=0.0):
        serializer = BenchmarkRunSerializer(data={
            'command': command,
            'manifest': manifest_data,
            'total_inserts': total_inserts,
            'aggregate_rate': aggregate_rate,
            'wall_seconds': wall_seconds,
            'verification_passed': passed,
            'output_dir': str(out),
        })
        serializer.is_valid(raise_exception=True)
        run = serializer.save()
        logger.info('Recorded %s', run)
        return run

    def report_checks(self, verification: VerificationReport):
        """Print one line per check; raise VerificationFailed naming the failures."""
        for check in verification.checks:
            if check.status == CHECK_PASS:
                self.stdout.write(self.style.SUCCESS(MESSAGES['check_passed'].format(name=check.name)))
            elif check.status == CHECK_SKIPPED:
                self.stdout.write(self.style.WARNING(
                    MESSAGES['check_skipped'].format(name=check.name, detail=check.detail)))
            else:
                self.stdout.write(self.style.ERROR(
                    MESSAGES['check_failed'].format(name=check.name, detail=check.detail)))
        failed = verification.failed()
        if failed:
            raise VerificationFailed(f'Verification failed: {", ".join(c.name for c in failed)}')

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]


"""Re-check a run: rerun a recorded manifest, or check a store dump offline."""
import tempfile
from pathlib import Path

from bench.cli import BenchCommand
from bench.constants import DUMP_FILE_NAME, MANIFEST_FILE_NAME, REPORT_FILE_NAME, SPLIT_FILE_NAME
from bench.exceptions import InvalidBenchmarkConfig
from bench.models import BenchmarkRun
from bench.reports import read_store_dump
from bench.serializers import IngestReportSerializer, RunManifestSerializer, load_validated, read_json
from bench.services import BenchmarkService, DegreeCheckService
from bench.store import SplitTable


class Command(BenchCommand):
    help = 'Verify a run: table checks plus degree-distribution checks; exits 1 on failure'

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--run', type=int, help='Rerun a recorded BenchmarkRun by id')
        source.add_argument('--manifest', help='Rerun the config in a manifest.json')
        source.add_argument('--from', dest='from_dir', help='Check the store dump in a bench output directory')
        parser.add_argument('--out', help='Directory for the rerun split file')

    def run(self, **options):
        if options['from_dir']:
            verification, source = self.verify_dump(Path(options['from_dir']))
        else:
            manifest_data, expected = self.load_manifest(options)
            manifest = load_validated(RunManifestSerializer, manifest_data)
            verification, source = self.rerun(manifest.config, options.get('out'), expected)
        self.record_run('verify', {'source': source}, options.get('out') or '', verification.passed)
        self.report_checks(verification)

    def load_manifest(self, options):
        """Manifest document plus the recorded report, if one is available."""
        if options['run'] is not None:
            try:
                run = BenchmarkRun.objects.get(pk=options['run'], command='bench')
            except BenchmarkRun.DoesNotExist:
                raise InvalidBenchmarkConfig(f'No bench run with id {options["run"]}')
            report_path = Path(run.output_dir) / REPORT_FILE_NAME
            return run.manifest, report_path if report_path.exists() else None
        path = Path(options['manifest'])
        report_path = path.parent / REPORT_FILE_NAME
        return read_json(path), report_path if report_path.exists() else None

    def rerun(self, cfg, out, report_path):
        with tempfile.TemporaryDirectory() as scratch:
            run_dir = Path(out) if out else Path(scratch)
            setup = BenchmarkService.setup_phase(cfg, run_dir)
            report = BenchmarkService.run_benchmark(cfg, run_dir, setup=setup)
            verification = BenchmarkService.verify_ingest(setup.store, cfg)
        if report_path is not None:
            recorded = load_validated(IngestReportSerializer, read_json(report_path))
            same = recorded.tablet_inserts == report.tablet_inserts
            verification.add('reproduced_counts', same,
                             '' if same else f'insert counts differ from {report_path}')
        verification.extend(DegreeCheckService.check(cfg))
        return verification, f'rerun of seed {cfg.seed}'

    def verify_dump(self, directory: Path):
        for name in (MANIFEST_FILE_NAME, SPLIT_FILE_NAME, DUMP_FILE_NAME):
            if not (directory / name).exists():
                raise InvalidBenchmarkConfig(f'{directory / name} not found; run bench with --dump')
        manifest = load_validated(RunManifestSerializer, read_json(directory / MANIFEST_FILE_NAME))
        cfg = manifest.config
        splits = SplitTable.read(directory / SPLIT_FILE_NAME)
        snapshots = read_store_dump(directory / DUMP_FILE_NAME, splits)
        verification = BenchmarkService.verify_tablets(snapshots, cfg)
        verification.extend(DegreeCheckService.check(cfg))
        return verification, str(directory)

"""
Serializers for the ingest benchmark.

Serializers handle conversion between benchmark objects and JSON, including:
- Validation of flat JSON config files into a BenchmarkConfig
- Report and manifest documents with nested workers and samples
- The run ledger model

JSON is rendered with DRF's JSONRenderer and parsed with its JSONParser, so
config files, manifests and reports share one encoding.
"""
import io
from pathlib import Path

from rest_framework import serializers
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .config import BenchmarkConfig
from .constants import (
    DEFAULT_AVERAGING_WINDOW,
    DEFAULT_BALANCER_RATE,
    DEFAULT_BATCH_BLOCK_BYTES,
    DEFAULT_EDGE_FACTOR,
    DEFAULT_FLUSH_SECONDS_PER_ENTRY,
    DEFAULT_INSERT_SECONDS_PER_ENTRY,
    DEFAULT_MEMTABLE_FLUSH_THRESHOLD,
    DEFAULT_N_TABLET,
    DEFAULT_TABLE_NAME,
    DEFAULT_WALOG_COST_FACTOR,
    RECIPE_MINOR_COMPACTIONS,
    RECIPE_WALOG_ENABLED,
)
from .exceptions import BenchError, InvalidBenchmarkConfig
from .models import BenchmarkRun
from .reports import IngestReport, RunManifest, WorkerReport
from .store import ThroughputSample


class BenchmarkConfigSerializer(serializers.Serializer):
    """
    Flat benchmark configuration.

    Required: n_server, n_ingest, scale
    Everything else defaults to the setup recipe (32 tablets per worker,
    WAL off, compaction cap 5). Unknown keys are rejected.
    """
    n_server = serializers.IntegerField(min_value=1)
    n_ingest = serializers.IntegerField(min_value=1)
    scale = serializers.IntegerField(min_value=1)
    n_tablet = serializers.IntegerField(min_value=1, default=DEFAULT_N_TABLET)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=0)
    edge_factor = serializers.IntegerField(min_value=1, default=DEFAULT_EDGE_FACTOR)
    run_seconds = serializers.FloatField(min_value=0, default=300.0)
    table_name = serializers.CharField(default=DEFAULT_TABLE_NAME)
    regenerate_per_tablet = serializers.BooleanField(default=False)
    permute_vertices = serializers.BooleanField(default=True)
    keep_self_edges = serializers.BooleanField(default=True)

    # Store settings
    balancer_rate = serializers.FloatField(default=DEFAULT_BALANCER_RATE)
    max_concurrent_minor_compactions = serializers.IntegerField(min_value=1, default=RECIPE_MINOR_COMPACTIONS)
    walog_enabled = serializers.BooleanField(default=RECIPE_WALOG_ENABLED)
    walog_cost_factor = serializers.FloatField(min_value=1, default=DEFAULT_WALOG_COST_FACTOR)
    memtable_flush_threshold = serializers.IntegerField(min_value=1, default=DEFAULT_MEMTABLE_FLUSH_THRESHOLD)
    batch_block_bytes = serializers.IntegerField(min_value=1, default=DEFAULT_BATCH_BLOCK_BYTES)
    averaging_window = serializers.FloatField(default=DEFAULT_AVERAGING_WINDOW)
    insert_seconds_per_entry = serializers.FloatField(min_value=0, default=DEFAULT_INSERT_SECONDS_PER_ENTRY)
    flush_seconds_per_entry = serializers.FloatField(min_value=0, default=DEFAULT_FLUSH_SECONDS_PER_ENTRY)

    def validate(self, attrs):
        """Reject unknown keys and anything BenchmarkConfig itself refuses."""
        initial = getattr(self, 'initial_data', None)
        if isinstance(initial, dict):
            unknown = set(initial) - set(self.fields)
            if unknown:
                raise serializers.ValidationError(
                    f'Unknown config keys: {", ".join(sorted(unknown))}'
                )
        try:
            BenchmarkConfig.from_flat(dict(attrs))
        except BenchError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        """Build the BenchmarkConfig."""
        return BenchmarkConfig.from_flat(dict(validated_data))

    def to_representation(self, instance):
        if isinstance(instance, BenchmarkConfig):
            instance = instance.to_flat()
        return super().to_representation(instance)


class ThroughputSampleSerializer(serializers.Serializer):
    """One row of the throughput series."""
    elapsed_seconds = serializers.FloatField(source='timestamp')
    cumulative_inserts = serializers.IntegerField(min_value=0)
    windowed_rate = serializers.FloatField()


class WorkerReportSerializer(serializers.Serializer):
    """Per-worker counts; hostname and rate are derived and read-only."""
    pid = serializers.IntegerField(min_value=0)
    server_id = serializers.IntegerField(min_value=0)
    hostname = serializers.CharField(read_only=True)
    tablets = serializers.ListField(child=serializers.IntegerField(min_value=0))
    entries_inserted = serializers.IntegerField(min_value=0)
    elapsed_seconds = serializers.FloatField(min_value=0)
    real_seconds = serializers.FloatField(min_value=0, default=0.0)
    entries_per_second = serializers.FloatField(read_only=True)
    tablet_inserts = serializers.DictField(child=serializers.IntegerField(min_value=0), default=dict)


class IngestReportSerializer(serializers.Serializer):
    """
    Full report of one run.

    Aggregates (total, rates) are read-only: they are recomputed from the
    workers on every serialization, so parsing and re-serializing a report
    yields the same document.
    """
    config = BenchmarkConfigSerializer()
    workers = WorkerReportSerializer(many=True)
    total_inserts = serializers.IntegerField(read_only=True)
    wall_seconds = serializers.FloatField(min_value=0)
    real_seconds = serializers.FloatField(min_value=0, default=0.0)
    setup_seconds = serializers.FloatField(min_value=0, default=0.0)
    aggregate_rate = serializers.FloatField(read_only=True)
    per_server_rate = serializers.FloatField(read_only=True)
    mean_worker_rate = serializers.FloatField(read_only=True)
    windowed_rate = serializers.FloatField(default=0.0)
    tablet_inserts = serializers.ListField(child=serializers.IntegerField(min_value=0), default=list)
    compactions_run = serializers.IntegerField(min_value=0, default=0)
    entries_flushed = serializers.IntegerField(min_value=0, default=0)
    splits_migrated = serializers.IntegerField(min_value=0, default=0)
    samples = ThroughputSampleSerializer(many=True, default=list)
    reference_figures = serializers.DictField(read_only=True)

    def create(self, validated_data):
        """Rebuild an IngestReport, including nested workers and samples."""
        config = BenchmarkConfig.from_flat(dict(validated_data.pop('config')))
        workers = []
        for w in validated_data.pop('workers'):
            w = dict(w)
            w['tablet_inserts'] = {int(k): v for k, v in w.get('tablet_inserts', {}).items()}
            workers.append(WorkerReport(**w))
        samples = [ThroughputSample(**dict(s)) for s in validated_data.pop('samples', [])]
        return IngestReport(config=config, workers=workers, samples=samples, **validated_data)


class RunManifestSerializer(serializers.Serializer):
    """Config, seed, version and output files of a run."""
    config = BenchmarkConfigSerializer()
    version = serializers.CharField()
    started_at = serializers.DateTimeField()
    seed = serializers.IntegerField(read_only=True)
    outputs = serializers.DictField(child=serializers.CharField(), default=dict)

    def create(self, validated_data):
        config = BenchmarkConfig.from_flat(dict(validated_data.pop('config')))
        return RunManifest(config=config, **validated_data)


class BenchmarkRunSerializer(serializers.ModelSerializer):
    """Run ledger entry."""
    class Meta:
        model = BenchmarkRun
        fields = (
            'id', 'created_at', 'command', 'manifest', 'total_inserts', 'aggregate_rate',
            'wall_seconds', 'verification_passed', 'output_dir',
        )
        read_only_fields = ('id', 'created_at')


# JSON files

def render_json(data) -> bytes:
    return JSONRenderer().render(data, renderer_context={'indent': 2})


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_bytes(render_json(data) + b'\n')
    return path


def read_json(path):
    """
    Parse a JSON file.

    Raises:
        InvalidBenchmarkConfig: File missing or not valid JSON
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InvalidBenchmarkConfig(f'Cannot read {path}: {exc.strerror}')
    try:
        return JSONParser().parse(io.BytesIO(raw))
    except ParseError as exc:
        raise InvalidBenchmarkConfig(f'{path} is not valid JSON: {exc.detail}')


def load_validated(serializer_class, data):
    """
    Validate ``data`` with ``serializer_class`` and return the built object.

    Raises:
        InvalidBenchmarkConfig: With the serializer's error messages
    """
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise InvalidBenchmarkConfig(_flatten_errors(serializer.errors))
    return serializer.save()


def _flatten_errors(errors, prefix=''):
    if isinstance(errors, dict):
        return '; '.join(
            _flatten_errors(value, prefix if key == 'non_field_errors' else f'{prefix}{key}.')
            for key, value in errors.items()
        )
    if isinstance(errors, list):
        return '; '.join(_flatten_errors(e, prefix) for e in errors)
    label = prefix.rstrip('.')
    return f'{label}: {errors}' if label else str(errors)

"""
Result types of a benchmark run and the plain-text files they are written to.

JSON documents (manifest, report) go through the serializers in
``serializers.py``; this module owns the dataclasses plus the CSV and dump
formats:

- throughput.csv: ``elapsed_seconds,cumulative_inserts,windowed_rate``
- scaling.csv: ``n_server,n_ingest,n_p,aggregate_rate,per_worker_rate``
- store.tsv: ``#tablet<TAB>id<TAB>inserts`` headers, each followed by that
  tablet's ``row<TAB>col<TAB>value`` lines
"""
import csv
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import BenchmarkConfig
from .constants import (
    DUMP_TABLET_MARKER,
    REFERENCE_FIGURES,
    SCALING_COLUMNS,
    THROUGHPUT_COLUMNS,
)
from .exceptions import InvalidBenchmarkConfig
from .store import SplitTable, ThroughputSample

logger = logging.getLogger(__name__)

CHECK_PASS = 'pass'
CHECK_FAIL = 'fail'
CHECK_SKIPPED = 'skipped'


def _rate(count, seconds):
    return count / seconds if seconds > 0 else 0.0


@dataclass
class WorkerReport:
    """Counts and timing of one worker's execution phase."""
    pid: int
    server_id: int
    tablets: List[int]
    entries_inserted: int
    elapsed_seconds: float
    real_seconds: float = 0.0
    tablet_inserts: Dict[int, int] = field(default_factory=dict)

    @property
    def hostname(self):
        return f'server-{self.server_id}'

    @property
    def entries_per_second(self):
        return _rate(self.entries_inserted, self.elapsed_seconds)


@dataclass
class IngestReport:
    """
    Aggregate of all workers of one run.

    ``wall_seconds`` is the simulated makespan of the execution phase, so
    ``aggregate_rate`` is total inserts over the time the slowest worker took.
    """
    config: BenchmarkConfig
    workers: List[WorkerReport]
    wall_seconds: float
    real_seconds: float = 0.0
    setup_seconds: float = 0.0
    samples: List[ThroughputSample] = field(default_factory=list)
    tablet_inserts: List[int] = field(default_factory=list)
    windowed_rate: float = 0.0
    compactions_run: int = 0
    entries_flushed: int = 0
    splits_migrated: int = 0

    @property
    def total_inserts(self):
        return sum(w.entries_inserted for w in self.workers)

    @property
    def aggregate_rate(self):
        return _rate(self.total_inserts, self.wall_seconds)

    @property
    def per_server_rate(self):
        return self.aggregate_rate / self.config.n_server

    @property
    def mean_worker_rate(self):
        if not self.workers:
            return 0.0
        return sum(w.entries_per_second for w in self.workers) / len(self.workers)

    @property
    def reference_figures(self):
        return dict(REFERENCE_FIGURES)


@dataclass
class CheckResult:
    name: str
    status: str
    detail: str = ''

    @property
    def passed(self):
        return self.status != CHECK_FAIL


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, ok, detail=''):
        self.checks.append(CheckResult(name, CHECK_PASS if ok else CHECK_FAIL, detail))

    def skip(self, name, detail):
        self.checks.append(CheckResult(name, CHECK_SKIPPED, detail))

    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def extend(self, other: 'VerificationReport'):
        self.checks.extend(other.checks)
        return self


@dataclass
class RunManifest:
    """Everything needed to repeat a run: config, seed, version and outputs."""
    config: BenchmarkConfig
    version: str = __version__
    started_at: datetime = None
    outputs: Dict[str, str] = field(default_factory=dict)

    @property
    def seed(self):
        return self.config.seed


# Throughput series

def write_throughput_csv(path, samples: Sequence[ThroughputSample]) -> Path:
    path = Path(path)
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(THROUGHPUT_COLUMNS)
        for s in samples:
            writer.writerow((repr(float(s.timestamp)), s.cumulative_inserts, repr(float(s.windowed_rate))))
    return path


def read_throughput_csv(path) -> List[ThroughputSample]:
    with open(Path(path), newline='', encoding='utf-8') as fh:
        reader = csv.DictReader(fh)
        return [
            ThroughputSample(float(r['elapsed_seconds']), int(r['cumulative_inserts']), float(r['windowed_rate']))
            for r in reader
        ]


# Scaling curve

@dataclass(frozen=True)
class ScalingPoint:
    n_server: int
    n_ingest: int
    n_p: int
    aggregate_rate: float
    per_worker_rate: float

    @classmethod
    def from_report(cls, report: IngestReport) -> 'ScalingPoint':
        cfg = report.config
        return cls(cfg.n_server, cfg.n_ingest, cfg.n_p, report.aggregate_rate, report.mean_worker_rate)


class ScalingCurve:
    """Scaling points sorted by (n_server, n_ingest)."""

    def __init__(self, points: Sequence[ScalingPoint] = ()):
        self.points = sorted(points, key=lambda p: (p.n_server, p.n_ingest))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def dispersion(self) -> float:
        """max/min ratio of per-worker rates across the sweep."""
        rates = [p.per_worker_rate for p in self.points]
        if not rates or min(rates) <= 0:
            return float('inf')
        return max(rates) / min(rates)

    def is_linear(self, tolerance: float) -> bool:
        """
        True when every per-worker rate is within +/- tolerance of the first
        point's and the aggregate rate never drops as N_p grows.
        """
        if not self.points:
            return False
        baseline = self.points[0].per_worker_rate
        if baseline <= 0:
            return False
        within = all(abs(p.per_worker_rate - baseline) <= tolerance * baseline for p in self.points)
        by_workers = sorted(self.points, key=lambda p: p.n_p)
        monotone = all(a.aggregate_rate <= b.aggregate_rate for a, b in zip(by_workers, by_workers[1:]))
        return within and monotone

    def write_csv(self, path) -> Path:
        path = Path(path)
        with open(path, 'w', newline='', encoding='utf-8') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(SCALING_COLUMNS)
            for p in self.points:
                writer.writerow((p.n_server, p.n_ingest, p.n_p, repr(float(p.aggregate_rate)),
                                 repr(float(p.per_worker_rate))))
        return path

    @classmethod
    def read_csv(cls, path) -> 'ScalingCurve':
        with open(Path(path), newline='', encoding='utf-8') as fh:
            return cls([
                ScalingPoint(int(r['n_server']), int(r['n_ingest']), int(r['n_p']),
                             float(r['aggregate_rate']), float(r['per_worker_rate']))
                for r in csv.DictReader(fh)
            ])


# Store dump

@dataclass
class TabletSnapshot:
    """Range, placement, insert count and stored entries of one tablet."""
    tablet_id: int
    low: Optional[str]
    high: Optional[str]
    server: int
    inserts_accepted: int
    entries: List[Tuple[str, str, str]] = field(default_factory=list)


def write_store_dump(path, snapshots: Sequence[TabletSnapshot]) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        for snap in snapshots:
            fh.write(f'{DUMP_TABLET_MARKER}\t{snap.tablet_id}\t{snap.inserts_accepted}\n')
            for row, col, value in snap.entries:
                fh.write(f'{row}\t{col}\t{value}\n')
    logger.info('Wrote store dump %s (%d tablets)', path, len(snapshots))
    return path


def read_store_dump(path, splits: SplitTable) -> List[TabletSnapshot]:
    """
    Read a store dump, taking tablet ranges and servers from ``splits``.

    Raises:
        InvalidBenchmarkConfig: Malformed dump or tablet id outside the split table
    """
    path = Path(path)
    snapshots: List[TabletSnapshot] = []
    with open(path, encoding='utf-8') as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip('\n').split('\t')
            if len(parts) != 3:
                raise InvalidBenchmarkConfig(f'{path}:{lineno}: expected three tab-separated fields')
            if parts[0] == DUMP_TABLET_MARKER:
                tablet_id = int(parts[1])
                if not 0 <= tablet_id < splits.tablet_count:
                    raise InvalidBenchmarkConfig(f'{path}:{lineno}: unknown tablet {tablet_id}')
                low, high = splits.tablet_range(tablet_id)
                snapshots.append(TabletSnapshot(
                    tablet_id, low, high, splits.server_of(tablet_id), int(parts[2])))
            elif not snapshots:
                raise InvalidBenchmarkConfig(f'{path}:{lineno}: entry before first {DUMP_TABLET_MARKER} line')
            else:
                snapshots[-1].entries.append((parts[0], parts[1], parts[2]))
    return snapshots

"""
Service layer for the ingest benchmark.

This module contains the service classes that run the scaled-problem
benchmark on the simulated store:

- ``SplitPlanner`` computes the global split table and each worker's share
- ``BenchmarkService`` runs the setup and execution phases, aggregates the
  workers and verifies the ingested table
- ``DegreeCheckService`` checks the generated base graph itself

Management commands call these services and never touch the store directly.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List

import numpy as np

from .assoc import AssocArray, Triple, apply_row_offset, pad_key, to_triples
from .config import BenchmarkConfig, WorkerIdentity, harness_setting
from .constants import (
    COLLISION_SUM,
    DEFAULT_MINOR_COMPACTIONS,
    OPTION_MINOR_COMPACTION_MAX,
    OPTION_WALOG_ENABLED,
    SPLIT_FILE_NAME,
)
from .exceptions import (
    BenchError,
    ConservationError,
    FitUndefined,
    NoLocalTablets,
    SetupStepFailed,
    SplitFileError,
)
from .graph500 import degree_distribution, edges_to_assoc, generate, key_width_for
from .reports import IngestReport, TabletSnapshot, VerificationReport, WorkerReport
from .store import SimulatedClock, SplitTable, TabletStore

logger = logging.getLogger(__name__)


class SplitPlanner:
    """Service class for split computation and split assignment."""

    @staticmethod
    def compute_global_splits(cfg: BenchmarkConfig) -> SplitTable:
        """
        Split table of the stacked N_row x N table.

        Tablet t covers rows [t*N, (t+1)*N) and belongs on server
        t div (n_ingest * n_tablet).

        Args:
            cfg: Benchmark configuration

        Returns:
            SplitTable: T - 1 boundaries pad(t*N) with their intended servers
        """
        n = cfg.n_vertices
        width = cfg.key_width
        per_server = cfg.tablets_per_server
        tablets = range(1, cfg.n_tablets_total)
        return SplitTable(
            tuple(pad_key(t * n, width) for t in tablets),
            tuple(t // per_server for t in tablets),
            first_server=0,
        )

    @staticmethod
    def assign_local_splits(me: WorkerIdentity, splits: SplitTable, n_ingest: int) -> List[int]:
        """
        Tablets a worker writes: those on its server at positions equal to its
        local rank modulo n_ingest.

        Raises:
            NoLocalTablets: If the worker's server holds no tablets
        """
        local = splits.tablets_on(me.server_id)
        if not local:
            raise NoLocalTablets(f'{me.hostname} owns no tablets')
        return local[me.pid % n_ingest::n_ingest]

    @staticmethod
    def owner_of(cfg: BenchmarkConfig, tablet: int) -> int:
        """pid of the worker that writes ``tablet`` under the intended placement."""
        server, position = divmod(tablet, cfg.tablets_per_server)
        return server * cfg.n_ingest + position % cfg.n_ingest


@dataclass
class SetupResult:
    store: TabletStore
    splits: SplitTable
    split_path: Path
    workers: List[WorkerIdentity]
    setup_seconds: float


@contextmanager
def _setup_step(step: int, description: str):
    logger.info('Setup step %d: %s', step, description)
    try:
        yield
    except BenchError as exc:
        logger.error('Setup step %d failed: %s', step, exc)
        raise SetupStepFailed(step, str(exc)) from exc


def base_graph(cfg: BenchmarkConfig, *stream: int) -> AssocArray:
    """
    A worker's base adjacency array with rows keyed in [0, N).

    Values count edge multiplicity, so the entries sum to M.
    """
    edges = generate(cfg.generator_config().derive(*stream))
    return edges_to_assoc(edges, key_width_for(cfg.n_vertices), collision=COLLISION_SUM)


def expand_multiplicity(A: AssocArray):
    """Yield one value-1 triple per counted edge of A."""
    for t in to_triples(A):
        one = Triple(t.row, t.col, 1)
        for _ in range(int(t.val)):
            yield one


class BenchmarkService:
    """Service class for the two benchmark phases and their verification."""

    @staticmethod
    def setup_phase(cfg: BenchmarkConfig, output_dir, store: TabletStore = None) -> SetupResult:
        """
        Prepare the store and the split file.

        Steps, in order:
            1. start the store with n_server servers
            2. set the minor-compaction cap
            3. create the table
            4. set the write-ahead log
            5. add the global splits and wait for the balancer
            6. write the split file
            7. lay out N_p workers, n_ingest per server

        Args:
            cfg: Benchmark configuration
            output_dir: Directory receiving the split file
            store: Already running store to reuse instead of starting one

        Raises:
            SetupStepFailed: Carries the number of the failing step
        """
        with _setup_step(1, f'start store with {cfg.n_server} servers'):
            if store is None:
                boot = replace(cfg.store, walog_enabled=True,
                               max_concurrent_minor_compactions=DEFAULT_MINOR_COMPACTIONS)
                store = TabletStore(boot)
        start = store.clock.now()

        with _setup_step(2, 'set minor compaction cap'):
            store.set_option(None, OPTION_MINOR_COMPACTION_MAX,
                             str(cfg.store.max_concurrent_minor_compactions))

        with _setup_step(3, f'create table {cfg.table_name}'):
            store.create_table(cfg.table_name)

        with _setup_step(4, 'set write-ahead log'):
            store.set_option(cfg.table_name, OPTION_WALOG_ENABLED,
                             'true' if cfg.store.walog_enabled else 'false')

        with _setup_step(5, f'add {cfg.n_tablets_total - 1} splits and balance'):
            planned = SplitPlanner.compute_global_splits(cfg)
            store.add_splits(cfg.table_name, planned.boundaries)
            store.run_balancer_until_stable(cfg.table_name)

        with _setup_step(6, 'write split file'):
            try:
                output_dir = Path(output_dir)
                output_dir.mkdir(parents=True, exist_ok=True)
                splits = store.get_split_locations(cfg.table_name)
                split_path = splits.write(output_dir / SPLIT_FILE_NAME)
            except OSError as exc:
                raise SplitFileError(f'Cannot write split file: {exc}')

        with _setup_step(7, f'lay out {cfg.n_p} workers'):
            workers = WorkerIdentity.all_for(cfg)

        setup_seconds = store.clock.now() - start
        logger.info('Setup complete: %d tablets on %d servers in %.2f simulated seconds',
                    splits.tablet_count, cfg.n_server, setup_seconds)
        return SetupResult(store, splits, split_path, workers, setup_seconds)

    @staticmethod
    def execution_phase(me: WorkerIdentity, cfg: BenchmarkConfig, split_path, store: TabletStore) -> WorkerReport:
        """
        One worker's ingest: read the split file, pick local tablets, generate
        the base graph, then offset and insert it once per tablet.

        The worker runs on its own simulated clock starting at zero, the end
        of the setup phase.

        Raises:
            SplitFileError: Split file missing or not matching this config
            NoLocalTablets: The worker's server holds no tablets
        """
        real_start = time.perf_counter()
        splits = SplitTable.read(split_path)
        if splits != SplitPlanner.compute_global_splits(cfg):
            raise SplitFileError(f'Split file {split_path} is stale for this configuration')
        tablets = SplitPlanner.assign_local_splits(me, splits, cfg.n_ingest)
        logger.info('Worker %d on %s starting: tablets %s', me.pid, me.hostname, tablets)

        base = None if cfg.regenerate_per_tablet else base_graph(cfg, me.pid)
        clock = SimulatedClock()
        writer = store.open_batch_writer(cfg.table_name, clock)
        per_tablet: Dict[int, int] = {}
        for tablet in tablets:
            graph = base_graph(cfg, me.pid, tablet) if cfg.regenerate_per_tablet else base
            offset = apply_row_offset(graph, tablet * cfg.n_vertices, cfg.key_width)
            before = writer.entries_sent + len(writer.buffer)
            writer.put(expand_multiplicity(offset))
            per_tablet[tablet] = writer.entries_sent + len(writer.buffer) - before
        writer.close()

        report = WorkerReport(
            pid=me.pid,
            server_id=me.server_id,
            tablets=list(tablets),
            entries_inserted=writer.entries_sent,
            elapsed_seconds=clock.now(),
            real_seconds=time.perf_counter() - real_start,
            tablet_inserts=per_tablet,
        )
        logger.info('Worker %d finished: %d inserts in %.3f simulated seconds (%.0f entries/s)',
                    me.pid, report.entries_inserted, report.elapsed_seconds, report.entries_per_second)
        return report

    @staticmethod
    def run_benchmark(cfg: BenchmarkConfig, output_dir, setup: SetupResult = None) -> IngestReport:
        """
        Setup phase, then all N_p workers concurrently, then aggregation.

        Raises:
            ConservationError: If total inserts differ from N_p * n_tablet * M
        """
        real_start = time.perf_counter()
        setup = setup or BenchmarkService.setup_phase(cfg, output_dir)
        store = setup.store

        with ThreadPoolExecutor(max_workers=cfg.n_p, thread_name_prefix='ingest') as pool:
            futures = [
                pool.submit(BenchmarkService.execution_phase, me, cfg, setup.split_path, store)
                for me in setup.workers
            ]
            workers = [f.result() for f in futures]

        total = sum(w.entries_inserted for w in workers)
        if total != cfg.planned_entries:
            raise ConservationError(f'Inserted {total} entries, planned {cfg.planned_entries}')

        makespan = max(w.elapsed_seconds for w in workers)
        metrics = store.snapshot_metrics(SimulatedClock(makespan))
        report = IngestReport(
            config=cfg,
            workers=workers,
            wall_seconds=makespan,
            real_seconds=time.perf_counter() - real_start,
            setup_seconds=setup.setup_seconds,
            samples=metrics.samples,
            tablet_inserts=store.tablet_inserts(cfg.table_name),
            windowed_rate=metrics.windowed_rate,
            compactions_run=metrics.compactions_run,
            entries_flushed=metrics.entries_flushed,
            splits_migrated=metrics.splits_migrated,
        )
        if makespan > cfg.run_seconds:
            logger.warning('Run took %.1f simulated seconds, over the %.1f s budget', makespan, cfg.run_seconds)
        logger.info('Benchmark complete: %d inserts, %.0f entries/s aggregate', total, report.aggregate_rate)
        return report

    @staticmethod
    def snapshot_tablets(store: TabletStore, cfg: BenchmarkConfig) -> List[TabletSnapshot]:
        splits = store.get_split_locations(cfg.table_name)
        inserts = store.tablet_inserts(cfg.table_name)
        snapshots = []
        for t in range(splits.tablet_count):
            low, high = splits.tablet_range(t)
            snapshots.append(TabletSnapshot(
                t, low, high, splits.server_of(t), inserts[t],
                store.tablet_entries(cfg.table_name, t)))
        return snapshots

    @staticmethod
    def verify_ingest(store: TabletStore, cfg: BenchmarkConfig) -> VerificationReport:
        """Verify the live table; see ``verify_tablets`` for the checks."""
        return BenchmarkService.verify_tablets(BenchmarkService.snapshot_tablets(store, cfg), cfg)

    @staticmethod
    def verify_tablets(snapshots: List[TabletSnapshot], cfg: BenchmarkConfig) -> VerificationReport:
        """
        Checks on an ingested table:

        - tablet_counts: every tablet accepted exactly M inserts
        - distinct_keys: every tablet holds as many distinct keys as its
          writer's base graph has entries
        - containment: no stored row lies outside its tablet's range
        - server_balance: per-server insert totals are all equal and non-zero
        """
        result = VerificationReport()
        m = cfg.n_edges

        wrong = [s.tablet_id for s in snapshots if s.inserts_accepted != m]
        missing = cfg.n_tablets_total - len(snapshots)
        ok = not wrong and not missing
        detail = '' if ok else f'{len(wrong)} tablets differ from {m} inserts, {missing} missing'
        result.add('tablet_counts', ok, detail)

        expected = {}
        wrong = []
        for s in snapshots:
            pid = SplitPlanner.owner_of(cfg, s.tablet_id)
            stream = (pid, s.tablet_id) if cfg.regenerate_per_tablet else (pid,)
            if stream not in expected:
                expected[stream] = base_graph(cfg, *stream).nnz
            if len(s.entries) != expected[stream]:
                wrong.append(s.tablet_id)
        result.add('distinct_keys', not wrong, f'tablets {wrong[:5]} differ' if wrong else '')

        outside = [
            (s.tablet_id, row) for s in snapshots for row, _, _ in s.entries
            if (s.low is not None and row < s.low) or (s.high is not None and row >= s.high)
        ]
        result.add('containment', not outside,
                   f'row {outside[0][1]!r} outside tablet {outside[0][0]}' if outside else '')

        per_server = np.zeros(cfg.n_server, dtype=np.int64)
        for s in snapshots:
            per_server[s.server] += s.inserts_accepted
        balanced = per_server.min() > 0 and per_server.max() == per_server.min()
        result.add('server_balance', bool(balanced),
                   '' if balanced else f'per-server inserts {per_server.tolist()}')

        for check in result.checks:
            logger.info('Verification %s: %s %s', check.name, check.status, check.detail)
        return result


class DegreeCheckService:
    """Service class for checks on the generated base graph."""

    @staticmethod
    def check(cfg: BenchmarkConfig, slope_range=None, min_scale=None) -> VerificationReport:
        """
        Edge count, vertex id range and degree-on-count slope of worker 0's
        base graph. The slope check is skipped below ``min_scale``, where the
        histogram is too short for a meaningful fit.
        """
        slope_range = slope_range or harness_setting('SLOPE_RANGE')
        min_scale = harness_setting('SLOPE_MIN_SCALE') if min_scale is None else min_scale
        result = VerificationReport()
        edges = generate(cfg.generator_config().derive(0))

        result.add('edge_count', edges.n_edges == cfg.n_edges,
                   f'{edges.n_edges} edges, expected {cfg.n_edges}')
        in_range = edges.n_edges == 0 or (
            min(edges.start.min(), edges.end.min()) >= 0
            and max(edges.start.max(), edges.end.max()) < cfg.n_vertices)
        result.add('vertex_range', bool(in_range), '' if in_range else f'ids outside [0, {cfg.n_vertices})')

        if cfg.scale < min_scale:
            result.skip('degree_slope', 'scale too small')
            return result
        try:
            slope = degree_distribution(edges).degree_on_count_slope
        except FitUndefined as exc:
            result.add('degree_slope', False, str(exc))
            return result
        if slope is None:
            result.add('degree_slope', False, 'every degree has the same count')
            return result
        lo, hi = slope_range
        result.add('degree_slope', lo <= slope <= hi, f'slope {slope:.3f}, expected [{lo}, {hi}]')
        return result

import tempfile
from dataclasses import replace
from pathlib import Path

from django.test import SimpleTestCase

from bench.config import BenchmarkConfig, WorkerIdentity, recipe_store_config
from bench.exceptions import (
    ConservationError,
    InvalidBenchmarkConfig,
    NoLocalTablets,
    SetupStepFailed,
    SplitFileError,
)
from bench.reports import CHECK_PASS, CHECK_SKIPPED, ScalingCurve, ScalingPoint, read_store_dump, write_store_dump
from bench.serializers import (
    BenchmarkConfigSerializer,
    IngestReportSerializer,
    load_validated,
    render_json,
)
from bench.services import BenchmarkService, DegreeCheckService, SplitPlanner, base_graph, expand_multiplicity
from bench.store import SplitTable


def small_config(**overrides):
    values = {'n_server': 1, 'n_ingest': 1, 'n_tablet': 4, 'scale': 8}
    values.update(overrides)
    return BenchmarkConfig(**values)


class BenchmarkTestCase(SimpleTestCase):
    """Base class giving every test a scratch output directory"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()


class BenchmarkConfigTests(SimpleTestCase):
    """Test derived sizes and validation of BenchmarkConfig"""

    def test_single_worker_sizes(self):
        """Test (1, 1, 32, 17) plans 4,194,304 rows and 33,554,432 entries"""
        cfg = BenchmarkConfig(n_server=1, n_ingest=1, n_tablet=32, scale=17)
        self.assertEqual(cfg.n_p, 1)
        self.assertEqual(cfg.n_row, 4194304)
        self.assertEqual(cfg.planned_entries, 33554432)
        self.assertEqual(cfg.key_width, 7)

    def test_full_size_rows(self):
        """Test (216, 6, 32, 17) stacks 5,435,817,984 rows"""
        cfg = BenchmarkConfig(n_server=216, n_ingest=6, n_tablet=32, scale=17)
        self.assertEqual(cfg.n_p, 1296)
        self.assertEqual(cfg.n_row, 5435817984)
        self.assertEqual(cfg.key_width, 10)

    def test_recipe_store_defaults(self):
        """Test the store follows the recipe and the server count"""
        cfg = small_config(n_server=3)
        self.assertEqual(cfg.store, recipe_store_config(n_servers=3))
        self.assertFalse(cfg.store.walog_enabled)
        self.assertEqual(cfg.store.max_concurrent_minor_compactions, 5)

    def test_invalid(self):
        """Test non-positive counts and bad seeds are rejected"""
        with self.assertRaises(InvalidBenchmarkConfig):
            small_config(n_server=0)
        with self.assertRaises(InvalidBenchmarkConfig):
            small_config(n_tablet=True)
        with self.assertRaises(InvalidBenchmarkConfig):
            small_config(seed=-1)
        with self.assertRaises(InvalidBenchmarkConfig):
            BenchmarkConfig.from_flat({'n_server': 1, 'n_ingest': 1, 'scale': 4, 'colour': 'red'})
        with self.assertRaises(InvalidBenchmarkConfig):
            BenchmarkConfig.from_flat({'n_server': 1, 'n_ingest': 1, 'scale': 4, 'balancer_rate': 0})

    def test_flat_round_trip(self):
        """Test to_flat and from_flat agree"""
        cfg = small_config(seed=9, n_server=2)
        self.assertEqual(BenchmarkConfig.from_flat(cfg.to_flat()), cfg)

    def test_worker_identity(self):
        """Test contiguous placement of workers on servers"""
        cfg = small_config(n_server=2, n_ingest=3)
        workers = WorkerIdentity.all_for(cfg)
        self.assertEqual([w.server_id for w in workers], [0, 0, 0, 1, 1, 1])
        self.assertEqual([w.local_rank for w in workers], [0, 1, 2, 0, 1, 2])
        self.assertEqual(workers[4].hostname, 'server-1')
        with self.assertRaises(InvalidBenchmarkConfig):
            WorkerIdentity(6, 6, 3)


class SplitPlannerTests(SimpleTestCase):
    """Test global split computation and assignment"""

    def test_global_splits(self):
        """Test boundaries are padded multiples of N placed in server blocks"""
        cfg = small_config(n_server=2, n_ingest=1, n_tablet=2, scale=2)
        splits = SplitPlanner.compute_global_splits(cfg)
        self.assertEqual(splits.boundaries, ('04', '08', '12'))
        self.assertEqual(splits.placements(), [0, 0, 1, 1])

    def test_single_tablet_has_no_boundaries(self):
        """Test (1, 1, 1, 1) yields zero boundaries"""
        splits = SplitPlanner.compute_global_splits(small_config(n_tablet=1, scale=1))
        self.assertEqual(splits.boundaries, ())
        self.assertEqual(splits.tablet_count, 1)

    def test_full_size_boundaries(self):
        """Test the single-worker full-size table has 31 boundaries"""
        cfg = BenchmarkConfig(n_server=1, n_ingest=1, n_tablet=32, scale=17)
        splits = SplitPlanner.compute_global_splits(cfg)
        self.assertEqual(len(splits.boundaries), 31)
        self.assertEqual(splits.boundaries[0], '0131072')

    def test_assign_local_splits(self):
        """Test worker 3 of (2, 2, 2) writes tablets 5 and 7"""
        cfg = small_config(n_server=2, n_ingest=2, n_tablet=2)
        splits = SplitPlanner.compute_global_splits(cfg)
        me = WorkerIdentity(3, cfg.n_p, cfg.n_ingest)
        self.assertEqual(SplitPlanner.assign_local_splits(me, splits, cfg.n_ingest), [5, 7])

    def test_assignment_partitions_tablets(self):
        """Test assignments are disjoint, exhaustive and match owner_of"""
        cfg = small_config(n_server=3, n_ingest=2, n_tablet=3)
        splits = SplitPlanner.compute_global_splits(cfg)
        seen = []
        for me in WorkerIdentity.all_for(cfg):
            mine = SplitPlanner.assign_local_splits(me, splits, cfg.n_ingest)
            self.assertEqual(len(mine), cfg.n_tablet)
            for tablet in mine:
                self.assertEqual(SplitPlanner.owner_of(cfg, tablet), me.pid)
            seen.extend(mine)
        self.assertEqual(sorted(seen), list(range(cfg.n_tablets_total)))

    def test_no_local_tablets(self):
        """Test a server with no tablets fails"""
        me = WorkerIdentity(1, 2, 1)
        with self.assertRaises(NoLocalTablets):
            SplitPlanner.assign_local_splits(me, SplitTable((), (), 0), 1)


class BaseGraphTests(SimpleTestCase):
    """Test the base graph a worker ingests"""

    def test_multiplicity_sums_to_edge_count(self):
        """Test counted entries expand to exactly M inserts"""
        cfg = small_config()
        A = base_graph(cfg, 0)
        self.assertEqual(sum(1 for _ in expand_multiplicity(A)), cfg.n_edges)
        self.assertTrue(all(t.val == 1 for t in expand_multiplicity(A)))

    def test_streams_differ_per_worker(self):
        """Test each pid derives its own graph"""
        cfg = small_config()
        self.assertNotEqual(base_graph(cfg, 0).entries(), base_graph(cfg, 1).entries())
        self.assertEqual(base_graph(cfg, 0).entries(), base_graph(cfg, 0).entries())


class SetupPhaseTests(BenchmarkTestCase):
    """Test the setup phase"""

    def test_sixteen_tablets_on_two_servers(self):
        """Test (2, 2, 4, 8) gives 15 boundaries balanced 8 and 8"""
        cfg = small_config(n_server=2, n_ingest=2, n_tablet=4)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        self.assertEqual(len(setup.splits.boundaries), 15)
        self.assertEqual(len(setup.splits.tablets_on(0)), 8)
        self.assertEqual(len(setup.splits.tablets_on(1)), 8)
        self.assertEqual(SplitTable.read(setup.split_path), setup.splits)
        self.assertEqual(len(setup.workers), 4)
        # 8 tablets migrate at 50 per second
        self.assertAlmostEqual(setup.setup_seconds, 0.16)

    def test_options_applied(self):
        """Test the configured WAL and compaction cap reach the store"""
        cfg = small_config(n_server=2)
        store = BenchmarkService.setup_phase(cfg, self.out).store
        self.assertFalse(store.config.walog_enabled)
        self.assertEqual(store.config.max_concurrent_minor_compactions, 5)

    def test_second_setup_fails_at_create_table(self):
        """Test reusing a store with the table already present fails at step 3"""
        cfg = small_config()
        store = BenchmarkService.setup_phase(cfg, self.out).store
        with self.assertRaises(SetupStepFailed) as ctx:
            BenchmarkService.setup_phase(cfg, self.out, store=store)
        self.assertEqual(ctx.exception.step, 3)
        self.assertIn('setup step 3', str(ctx.exception))


class ExecutionPhaseTests(BenchmarkTestCase):
    """Test one worker's ingest"""

    def test_four_tablets_at_scale_eight(self):
        """Test a worker inserts 4 * 2048 entries, M per tablet"""
        cfg = small_config()
        setup = BenchmarkService.setup_phase(cfg, self.out)
        report = BenchmarkService.execution_phase(setup.workers[0], cfg, setup.split_path, setup.store)
        self.assertEqual(report.entries_inserted, 8192)
        self.assertEqual(report.tablets, [0, 1, 2, 3])
        self.assertEqual(report.tablet_inserts, {0: 2048, 1: 2048, 2: 2048, 3: 2048})
        self.assertEqual(setup.store.tablet_inserts(cfg.table_name), [2048] * 4)
        self.assertAlmostEqual(report.entries_per_second, 1e5, delta=1)

    def test_stale_split_file(self):
        """Test a split file from another configuration is refused"""
        cfg = small_config()
        setup = BenchmarkService.setup_phase(cfg, self.out)
        stale = SplitTable((), (), 0).write(self.out / 'stale.txt')
        with self.assertRaises(SplitFileError):
            BenchmarkService.execution_phase(setup.workers[0], cfg, stale, setup.store)

    def test_missing_split_file(self):
        """Test a missing split file is refused"""
        cfg = small_config()
        setup = BenchmarkService.setup_phase(cfg, self.out)
        with self.assertRaises(SplitFileError):
            BenchmarkService.execution_phase(setup.workers[0], cfg, self.out / 'none.txt', setup.store)

    def test_regenerate_per_tablet(self):
        """Test per-tablet graphs still give M inserts per tablet"""
        cfg = small_config(n_tablet=2, regenerate_per_tablet=True)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        report = BenchmarkService.execution_phase(setup.workers[0], cfg, setup.split_path, setup.store)
        self.assertEqual(report.tablet_inserts, {0: 2048, 1: 2048})
        self.assertTrue(BenchmarkService.verify_ingest(setup.store, cfg).passed)


class RunBenchmarkTests(BenchmarkTestCase):
    """Test full runs and their verification"""

    def test_conservation_and_verification(self):
        """Test total inserts equal N_p * n_tablet * M and every check passes"""
        cfg = small_config(n_server=2, n_ingest=2, n_tablet=2)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        report = BenchmarkService.run_benchmark(cfg, self.out, setup)
        self.assertEqual(report.total_inserts, 8 * 2048)
        self.assertEqual(report.tablet_inserts, [2048] * 8)
        self.assertEqual(len(report.workers), 4)
        self.assertGreater(report.aggregate_rate, 0)
        self.assertEqual(report.samples[-1].cumulative_inserts, report.total_inserts)
        verification = BenchmarkService.verify_ingest(setup.store, cfg)
        self.assertTrue(verification.passed, verification.failed())
        self.assertEqual([c.name for c in verification.checks],
                         ['tablet_counts', 'distinct_keys', 'containment', 'server_balance'])

    def test_verification_matrix(self):
        """Test every desk-scale layout at scales 8 and 10 verifies"""
        for n_server, n_ingest, n_tablet in ((1, 1, 4), (2, 2, 4), (4, 2, 8)):
            for scale in (8, 10):
                with self.subTest(n_server=n_server, n_ingest=n_ingest, n_tablet=n_tablet, scale=scale):
                    cfg = small_config(n_server=n_server, n_ingest=n_ingest, n_tablet=n_tablet, scale=scale)
                    out = self.out / f'{n_server}x{n_ingest}x{n_tablet}-{scale}'
                    setup = BenchmarkService.setup_phase(cfg, out)
                    report = BenchmarkService.run_benchmark(cfg, out, setup)
                    self.assertEqual(report.tablet_inserts, [cfg.n_edges] * cfg.n_tablets_total)
                    verification = BenchmarkService.verify_ingest(setup.store, cfg)
                    self.assertTrue(verification.passed, verification.failed())

    def test_untouched_table_fails(self):
        """Test verification of an empty table fails counts and balance"""
        cfg = small_config(n_server=2)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        failed = {c.name for c in BenchmarkService.verify_ingest(setup.store, cfg).failed()}
        self.assertIn('tablet_counts', failed)
        self.assertIn('server_balance', failed)

    def test_misplaced_row_fails_containment(self):
        """Test a row outside its tablet's range is reported"""
        cfg = small_config()
        setup = BenchmarkService.setup_phase(cfg, self.out)
        BenchmarkService.run_benchmark(cfg, self.out, setup)
        setup.store.inject_raw_entry(cfg.table_name, 0, '9999', '000', '1')
        failed = {c.name for c in BenchmarkService.verify_ingest(setup.store, cfg).failed()}
        self.assertIn('containment', failed)
        self.assertNotIn('tablet_counts', failed)

    def test_conservation_error(self):
        """Test a run missing a worker's inserts is refused"""
        cfg = small_config(n_server=2)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        with self.assertRaises(ConservationError):
            BenchmarkService.run_benchmark(cfg, self.out, replace(setup, workers=setup.workers[:1]))

    def test_deterministic(self):
        """Test two runs of one config store identical tablets"""
        cfg = small_config(n_server=2, n_tablet=2, seed=17)
        dumps = []
        for name in ('a', 'b'):
            setup = BenchmarkService.setup_phase(cfg, self.out / name)
            BenchmarkService.run_benchmark(cfg, self.out / name, setup)
            dumps.append([s.entries for s in BenchmarkService.snapshot_tablets(setup.store, cfg)])
        self.assertEqual(dumps[0], dumps[1])

    def test_store_dump_verifies(self):
        """Test a written dump reads back and verifies like the live store"""
        cfg = small_config(n_server=2, n_tablet=2)
        setup = BenchmarkService.setup_phase(cfg, self.out)
        BenchmarkService.run_benchmark(cfg, self.out, setup)
        snapshots = BenchmarkService.snapshot_tablets(setup.store, cfg)
        path = write_store_dump(self.out / 'store.tsv', snapshots)
        restored = read_store_dump(path, SplitTable.read(setup.split_path))
        self.assertEqual(restored, snapshots)
        self.assertTrue(BenchmarkService.verify_tablets(restored, cfg).passed)

    def test_weak_scaling(self):
        """Test per-worker rate stays within 30% and aggregate rate grows with N_p"""
        points = []
        for n_p in (1, 2, 4, 8):
            cfg = small_config(n_server=n_p, scale=10)
            report = BenchmarkService.run_benchmark(cfg, self.out / str(n_p))
            points.append(ScalingPoint.from_report(report))
        curve = ScalingCurve(points)
        self.assertTrue(curve.is_linear(0.30))
        self.assertLessEqual(curve.dispersion, 1.3)
        rates = [p.aggregate_rate for p in sorted(points, key=lambda p: p.n_p)]
        self.assertEqual(rates, sorted(rates))


class DegreeCheckTests(SimpleTestCase):
    """Test checks on the generated base graph"""

    def test_small_scale_skips_slope(self):
        """Test the slope check is skipped below the minimum scale"""
        result = DegreeCheckService.check(small_config())
        statuses = {c.name: c.status for c in result.checks}
        self.assertEqual(statuses['degree_slope'], CHECK_SKIPPED)
        self.assertTrue(result.passed)

    def test_slope_checked(self):
        """Test a negative slope passes a wide range"""
        result = DegreeCheckService.check(small_config(scale=10), slope_range=(-10.0, 0.0), min_scale=1)
        self.assertTrue(result.passed, result.failed())
        self.assertEqual(len(result.checks), 3)

    def test_slope_outside_range(self):
        """Test a range excluding the fitted slope fails"""
        result = DegreeCheckService.check(small_config(scale=10), slope_range=(0.5, 1.0), min_scale=1)
        self.assertEqual([c.name for c in result.failed()], ['degree_slope'])

    def test_default_range_at_scale_fourteen(self):
        """Test a default graph at the minimum scale passes the configured range"""
        result = DegreeCheckService.check(small_config(scale=14))
        statuses = {c.name: c.status for c in result.checks}
        self.assertEqual(statuses['degree_slope'], CHECK_PASS)
        self.assertTrue(result.passed, result.failed())


class ReportSerializerTests(BenchmarkTestCase):
    """Test JSON documents of configs and reports"""

    def test_config_defaults(self):
        """Test omitted keys take recipe defaults"""
        cfg = load_validated(BenchmarkConfigSerializer, {'n_server': 2, 'n_ingest': 1, 'scale': 4})
        self.assertEqual(cfg.n_tablet, 32)
        self.assertFalse(cfg.store.walog_enabled)
        self.assertEqual(cfg.store.n_servers, 2)

    def test_config_rejects_unknown_and_invalid(self):
        """Test unknown keys and bad values fail validation"""
        with self.assertRaises(InvalidBenchmarkConfig) as ctx:
            load_validated(BenchmarkConfigSerializer, {'n_server': 1, 'n_ingest': 1, 'scale': 4, 'tabets': 2})
        self.assertIn('tabets', str(ctx.exception))
        with self.assertRaises(InvalidBenchmarkConfig):
            load_validated(BenchmarkConfigSerializer, {'n_server': 0, 'n_ingest': 1, 'scale': 4})
        with self.assertRaises(InvalidBenchmarkConfig):
            load_validated(BenchmarkConfigSerializer, {'n_ingest': 1, 'scale': 4})

    def test_report_document_is_stable(self):
        """Test parsing and re-serializing a report yields the same document"""
        cfg = small_config(n_server=2, n_tablet=1)
        report = BenchmarkService.run_benchmark(cfg, self.out)
        first = IngestReportSerializer(report).data
        rebuilt = load_validated(IngestReportSerializer, first)
        self.assertEqual(rebuilt.total_inserts, report.total_inserts)
        self.assertEqual(rebuilt.config, cfg)
        self.assertEqual(render_json(IngestReportSerializer(rebuilt).data), render_json(first))

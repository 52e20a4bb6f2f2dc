"""
In-process simulation of a range-partitioned, sorted key-value store.

The store reproduces the mechanics the ingest benchmark exercises:
- tables split into tablets, each a contiguous block of rows hosted on one server
- split keys are inclusive lower bounds: locate(split) is the tablet starting there
- a load balancer that migrates tablets at a fixed rate per simulated second
- batch writers that send fixed-size blocks routed to tablets
- memtables flushed to immutable sorted runs by minor compactions, at most
  ``max_concurrent_minor_compactions`` running at once per server
- a write-ahead log modeled as a multiplicative insert-path cost

Servers are in-process shards; time is simulated. A block costs
``entries * insert_seconds_per_entry`` simulated seconds (times
``walog_cost_factor`` with the WAL on), charged to the clock of the writer that
sent it. Compaction waves cost ``max entries in wave * flush_seconds_per_entry``.
"""
import heapq
import logging
import threading
from bisect import bisect_left, bisect_right
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .assoc import Triple, format_value
from .constants import (
    DEFAULT_AVERAGING_WINDOW,
    DEFAULT_BALANCER_RATE,
    DEFAULT_BATCH_BLOCK_BYTES,
    DEFAULT_FLUSH_SECONDS_PER_ENTRY,
    DEFAULT_INSERT_SECONDS_PER_ENTRY,
    DEFAULT_MEMTABLE_FLUSH_THRESHOLD,
    DEFAULT_MINOR_COMPACTIONS,
    DEFAULT_WALOG_COST_FACTOR,
    FIRST_TABLET_MARKER,
    OPTION_MINOR_COMPACTION_MAX,
    OPTION_WALOG_ENABLED,
    SERVER_OPTIONS,
    TABLE_OPTIONS,
    TRIPLE_SEPARATOR_BYTES,
)
from .exceptions import (
    DuplicateTable,
    InvalidStoreConfig,
    KeyRangeError,
    SplitFileError,
    SplitOrderError,
    TableNotFound,
    UnknownOption,
    WriterClosed,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StoreConfig:
    """
    Tuning knobs of the simulated store.

    Attributes:
        n_servers: Number of tablet servers
        balancer_rate: Tablet migrations per simulated second
        max_concurrent_minor_compactions: Per-server compaction cap
        walog_enabled: Whether inserts pay the write-ahead-log cost
        walog_cost_factor: Insert-path slowdown when the WAL is on
        memtable_flush_threshold: Entries per tablet before a minor compaction is queued
        batch_block_bytes: Batch writer block size
        averaging_window: Window for the reported ingest rate, in seconds
        insert_seconds_per_entry: Simulated cost of one insert
        flush_seconds_per_entry: Simulated cost of flushing one entry
    """
    n_servers: int = 1
    balancer_rate: float = DEFAULT_BALANCER_RATE
    max_concurrent_minor_compactions: int = DEFAULT_MINOR_COMPACTIONS
    walog_enabled: bool = True
    walog_cost_factor: float = DEFAULT_WALOG_COST_FACTOR
    memtable_flush_threshold: int = DEFAULT_MEMTABLE_FLUSH_THRESHOLD
    batch_block_bytes: int = DEFAULT_BATCH_BLOCK_BYTES
    averaging_window: float = DEFAULT_AVERAGING_WINDOW
    insert_seconds_per_entry: float = DEFAULT_INSERT_SECONDS_PER_ENTRY
    flush_seconds_per_entry: float = DEFAULT_FLUSH_SECONDS_PER_ENTRY

    def __post_init__(self):
        positive = (
            'n_servers', 'balancer_rate', 'max_concurrent_minor_compactions',
            'memtable_flush_threshold', 'batch_block_bytes', 'averaging_window',
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise InvalidStoreConfig(f'{name} must be positive')
        if self.walog_cost_factor < 1:
            raise InvalidStoreConfig('walog_cost_factor must be >= 1')
        if self.insert_seconds_per_entry < 0 or self.flush_seconds_per_entry < 0:
            raise InvalidStoreConfig('simulated costs must be non-negative')


class SimulatedClock:
    """Thread-safe simulated time, in seconds."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance(self, seconds: float) -> float:
        with self._lock:
            self._now += seconds
            return self._now


def triple_size(row: str, col: str, value: str) -> int:
    """Serialized size used for block accounting."""
    return len(row) + len(col) + len(value) + TRIPLE_SEPARATOR_BYTES


@dataclass(frozen=True)
class SortedRun:
    """Immutable sorted run produced by a minor compaction."""
    keys: Tuple[Tuple[str, str], ...]
    values: Tuple[str, ...]

    def __len__(self):
        return len(self.keys)

    def items(self, lo: Optional[str] = None, hi: Optional[str] = None):
        start = 0 if lo is None else bisect_left(self.keys, (lo,))
        stop = len(self.keys) if hi is None else bisect_left(self.keys, (hi,))
        for i in range(start, stop):
            yield self.keys[i][0], self.keys[i][1], self.values[i]


def _tagged(items, generation):
    for r, c, v in items:
        yield r, c, generation, v


def _run_of(items) -> SortedRun:
    items = list(items)
    return SortedRun(tuple((r, c) for r, c, _ in items), tuple(v for _, _, v in items))


class Tablet:
    """
    A contiguous block of rows [low, high) of one table, hosted on one server.

    ``low`` is None for the first tablet and ``high`` is None for the last.
    All mutable state is guarded by ``lock``.
    """

    def __init__(self, table: str, low: Optional[str], high: Optional[str], server: int):
        self.table = table
        self.low = low
        self.high = high
        self.server = server
        self.memtable: Dict[str, Dict[str, str]] = {}
        self.memtable_entries = 0
        self.flushed_files: List[SortedRun] = []
        self.inserts_accepted = 0
        self.queued = False
        self.lock = threading.Lock()

    def contains(self, row: str) -> bool:
        return (self.low is None or self.low <= row) and (self.high is None or row < self.high)

    def apply(self, items: Sequence[Tuple[str, str, str]]):
        """Apply (row, col, value) items to the memtable, last write wins."""
        memtable = self.memtable
        for row, col, value in items:
            cols = memtable.get(row)
            if cols is None:
                cols = memtable[row] = {}
            if col not in cols:
                self.memtable_entries += 1
            cols[col] = value
        self.inserts_accepted += len(items)

    def freeze(self) -> int:
        """Flush the memtable into a new sorted run; returns entries flushed."""
        if not self.memtable_entries:
            return 0
        ordered = sorted(
            ((row, col), value)
            for row, cols in self.memtable.items()
            for col, value in cols.items()
        )
        self.flushed_files.append(SortedRun(tuple(k for k, _ in ordered), tuple(v for _, v in ordered)))
        flushed = self.memtable_entries
        self.memtable = {}
        self.memtable_entries = 0
        return flushed

    def merged(self, lo: Optional[str] = None, hi: Optional[str] = None) -> Iterator[Tuple[str, str, str]]:
        """Newest value per key over memtable and flushed runs, sorted by (row, col)."""
        sources = []
        for generation, run in enumerate(self.flushed_files):
            sources.append(_tagged(run.items(lo, hi), -generation))
        newest = -len(self.flushed_files)
        memtable_items = sorted(
            (r, c, newest, v)
            for r, cols in self.memtable.items()
            if (lo is None or r >= lo) and (hi is None or r < hi)
            for c, v in cols.items()
        )
        sources.append(iter(memtable_items))
        previous = None
        for r, c, _, v in heapq.merge(*sources):
            if (r, c) != previous:
                previous = (r, c)
                yield r, c, v

    def split(self, key: str) -> 'Tablet':
        """
        Split at ``key``; self keeps [low, key) and the returned tablet gets
        [key, high) on the same server.
        """
        upper = Tablet(self.table, key, self.high, self.server)
        lower_runs = []
        for run in self.flushed_files:
            lower_runs.append(_run_of(run.items(None, key)))
            upper.flushed_files.append(_run_of(run.items(key, None)))
        self.flushed_files = lower_runs
        for row in [r for r in self.memtable if r >= key]:
            cols = self.memtable.pop(row)
            upper.memtable[row] = cols
            upper.memtable_entries += len(cols)
            self.memtable_entries -= len(cols)
        self.high = key
        return upper


@dataclass(frozen=True)
class SplitTable:
    """
    Ordered tablet boundaries of a table plus the server of every tablet.

    Tablet 0 covers rows below ``boundaries[0]`` and sits on ``first_server``;
    tablet t >= 1 starts at ``boundaries[t - 1]`` and sits on ``servers[t - 1]``.
    """
    boundaries: Tuple[str, ...]
    servers: Tuple[int, ...]
    first_server: int = 0

    def __post_init__(self):
        if len(self.boundaries) != len(self.servers):
            raise SplitOrderError('Every boundary needs a server')
        if any(a >= b for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise SplitOrderError('Split keys must be strictly increasing')

    @property
    def tablet_count(self):
        return len(self.boundaries) + 1

    def server_of(self, tablet: int) -> int:
        return self.first_server if tablet == 0 else self.servers[tablet - 1]

    def tablet_range(self, tablet: int) -> Tuple[Optional[str], Optional[str]]:
        low = None if tablet == 0 else self.boundaries[tablet - 1]
        high = self.boundaries[tablet] if tablet < len(self.boundaries) else None
        return low, high

    def placements(self) -> List[int]:
        return [self.server_of(t) for t in range(self.tablet_count)]

    def tablets_on(self, server: int) -> List[int]:
        """Tablet ids hosted on ``server``, in key order."""
        return [t for t in range(self.tablet_count) if self.server_of(t) == server]

    def locate(self, row: str) -> int:
        return bisect_right(self.boundaries, row)

    def to_text(self) -> str:
        lines = [f'{key}\t{server}\n' for key, server in zip(self.boundaries, self.servers)]
        lines.append(f'{FIRST_TABLET_MARKER}\t{self.first_server}\n')
        return ''.join(lines)

    @classmethod
    def from_text(cls, text: str) -> 'SplitTable':
        boundaries, servers, first = [], [], None
        for lineno, line in enumerate(text.splitlines(), start=1):
            parts = line.split('\t')
            if len(parts) != 2 or not parts[1].isdigit():
                raise SplitFileError(f'line {lineno}: expected <key><TAB><server>')
            if parts[0] == FIRST_TABLET_MARKER:
                first = int(parts[1])
            else:
                boundaries.append(parts[0])
                servers.append(int(parts[1]))
        if first is None:
            raise SplitFileError(f'missing {FIRST_TABLET_MARKER} line')
        try:
            return cls(tuple(boundaries), tuple(servers), first)
        except SplitOrderError as exc:
            raise SplitFileError(str(exc))

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding='utf-8')
        return path

    @classmethod
    def read(cls, path) -> 'SplitTable':
        path = Path(path)
        if not path.exists():
            raise SplitFileError(f'Split file {path} does not exist')
        return cls.from_text(path.read_text(encoding='utf-8'))


class Table:
    """A table: its tablets in key order and a lock guarding the tablet list."""

    def __init__(self, name: str, server: int = 0):
        self.name = name
        self.tablets: List[Tablet] = [Tablet(name, None, None, server)]
        self.lock = threading.RLock()

    def split_keys(self) -> List[str]:
        return [t.low for t in self.tablets[1:]]

    def locate(self, row: str) -> int:
        return bisect_right(self.split_keys(), row)


@dataclass(frozen=True)
class ThroughputSample:
    """Cumulative inserts at a point in (simulated) time."""
    timestamp: float
    cumulative_inserts: int
    windowed_rate: float = 0.0


@dataclass
class ServerMetrics:
    inserts_accepted: int = 0
    entries_flushed: int = 0
    compactions_run: int = 0
    compaction_waves: int = 0
    compactions_queued_peak: int = 0
    compactions_active_peak: int = 0
    splits_migrated: int = 0


@dataclass
class StoreMetrics:
    """Snapshot of store counters plus the cumulative insert series."""
    servers: Dict[int, ServerMetrics]
    samples: List[ThroughputSample] = field(default_factory=list)
    windowed_rate: float = 0.0

    def _total(self, name):
        return sum(getattr(s, name) for s in self.servers.values())

    @property
    def inserts_accepted(self):
        return self._total('inserts_accepted')

    @property
    def entries_flushed(self):
        return self._total('entries_flushed')

    @property
    def compactions_run(self):
        return self._total('compactions_run')

    @property
    def compactions_queued_peak(self):
        return max((s.compactions_queued_peak for s in self.servers.values()), default=0)

    @property
    def splits_migrated(self):
        return self._total('splits_migrated')


def windowed_series(events: Sequence[Tuple[float, int]], window: float) -> List[ThroughputSample]:
    """
    Turn (timestamp, inserts) events into a cumulative series with a trailing
    windowed rate at every sample.

    The rate at time t is (cum(t) - cum(t - w)) / w with w = min(window, t).
    """
    ordered = sorted(events)
    times, cumulative, total = [], [], 0
    for ts, count in ordered:
        total += count
        times.append(ts)
        cumulative.append(total)
    samples = []
    for i, (ts, cum) in enumerate(zip(times, cumulative)):
        width = min(window, ts)
        if width <= 0:
            rate = 0.0
        else:
            j = bisect_right(times, ts - width) - 1
            before = cumulative[j] if j >= 0 else 0
            rate = (cum - before) / width
        samples.append(ThroughputSample(ts, cum, rate))
    return samples


class _ServerState:
    def __init__(self, cap: int):
        self.queue: deque = deque()
        self.semaphore = threading.BoundedSemaphore(cap)
        self.active = 0
        self.metrics = ServerMetrics()


class TabletStore:
    """
    The simulated multi-server store.

    All public operations are safe to call from concurrent workers: the table
    list is guarded by the table lock, each tablet by its own lock, and server
    counters by the metrics lock.
    """

    def __init__(self, config: StoreConfig = None, clock: SimulatedClock = None):
        self.config = config or StoreConfig()
        self.clock = clock or SimulatedClock()
        self._tables: Dict[str, Table] = {}
        self._lock = threading.RLock()
        self._metrics_lock = threading.Lock()
        self._servers = [_ServerState(self.config.max_concurrent_minor_compactions)
                         for _ in range(self.config.n_servers)]
        self._events: List[Tuple[float, int]] = []
        logger.info('Started store with %d servers', self.config.n_servers)

    # Tables and options

    def create_table(self, name: str) -> Table:
        """
        Create a table with a single unbounded tablet on server 0.

        Raises:
            DuplicateTable: If the name is already in use
        """
        with self._lock:
            if name in self._tables:
                raise DuplicateTable(f'Table {name!r} already exists')
            table = self._tables[name] = Table(name)
        logger.info('Created table %s', name)
        return table

    def table(self, name: str) -> Table:
        with self._lock:
            try:
                return self._tables[name]
            except KeyError:
                raise TableNotFound(f'Table {name!r} does not exist')

    def set_option(self, table: Optional[str], key: str, value: str):
        """
        Set a recognized option; the key must match bit-exactly.

        Server-scope options ignore ``table``; table-scope options require an
        existing table.

        Raises:
            UnknownOption: Unknown key or unparsable value
            TableNotFound: Table-scope option on a missing table
        """
        if key not in SERVER_OPTIONS and key not in TABLE_OPTIONS:
            raise UnknownOption(f'Unknown option {key!r}')
        if key in TABLE_OPTIONS:
            self.table(table)
        if key == OPTION_MINOR_COMPACTION_MAX:
            if not value.isdigit() or int(value) < 1:
                raise UnknownOption(f'{key} needs a positive integer, got {value!r}')
            cap = int(value)
            with self._lock:
                self.config = replace(self.config, max_concurrent_minor_compactions=cap)
                for server in self._servers:
                    server.semaphore = threading.BoundedSemaphore(cap)
        elif key == OPTION_WALOG_ENABLED:
            if value not in ('true', 'false'):
                raise UnknownOption(f"{key} must be 'true' or 'false', got {value!r}")
            with self._lock:
                self.config = replace(self.config, walog_enabled=value == 'true')
        logger.info('Set option %s=%s', key, value)

    # Splits and balancing

    def add_splits(self, table: str, split_keys: Sequence[str]):
        """
        Split the table at the given keys; new tablets stay on the server of
        the tablet they were split from.

        Raises:
            SplitOrderError: Keys unsorted, duplicated or already a split
        """
        keys = list(split_keys)
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise SplitOrderError('Split keys must be strictly increasing')
        t = self.table(table)
        with t.lock:
            existing = set(t.split_keys())
            if existing.intersection(keys):
                raise SplitOrderError('Split key already exists')
            tablets = []
            pending = deque(keys)
            for tablet in t.tablets:
                with tablet.lock:
                    while pending and tablet.contains(pending[0]):
                        upper = tablet.split(pending.popleft())
                        tablets.append(tablet)
                        tablet = upper
                tablets.append(tablet)
            t.tablets = tablets
        logger.info('Added %d splits to %s (%d tablets)', len(keys), table, len(tablets))

    def run_balancer_until_stable(self, table: str, clock: SimulatedClock = None) -> float:
        """
        Migrate tablets until per-server counts differ by at most one.

        Tablets are assigned in contiguous key-ordered blocks: tablet i of T
        belongs on server i * n_servers // T. Only misplaced tablets move, one
        migration costing 1 / balancer_rate simulated seconds.

        Returns:
            float: Simulated seconds spent migrating
        """
        clock = clock or self.clock
        t = self.table(table)
        n_servers = self.config.n_servers
        moved = 0
        with t.lock:
            count = len(t.tablets)
            for i, tablet in enumerate(t.tablets):
                target = i * n_servers // count
                if tablet.server != target:
                    with tablet.lock:
                        tablet.server = target
                    moved += 1
                    with self._metrics_lock:
                        self._servers[target].metrics.splits_migrated += 1
        elapsed = moved / self.config.balancer_rate
        clock.advance(elapsed)
        logger.info('Balanced %s: %d migrations in %.2f simulated seconds', table, moved, elapsed)
        return elapsed

    def get_split_locations(self, table: str) -> SplitTable:
        t = self.table(table)
        with t.lock:
            tablets = list(t.tablets)
        return SplitTable(
            tuple(tb.low for tb in tablets[1:]),
            tuple(tb.server for tb in tablets[1:]),
            tablets[0].server,
        )

    def locate(self, table: str, row_key: str) -> Tuple[int, int]:
        """Return (server id, tablet id) of the tablet with low <= key < high."""
        t = self.table(table)
        with t.lock:
            idx = t.locate(row_key)
            return t.tablets[idx].server, idx

    # Writes

    def open_batch_writer(self, table: str, clock: SimulatedClock = None) -> 'BatchWriter':
        self.table(table)
        return BatchWriter(self, table, clock or self.clock)

    def _route(self, t: Table, items) -> Dict[int, Tuple[Tablet, list]]:
        routed: Dict[int, Tuple[Tablet, list]] = {}
        with t.lock:
            keys = t.split_keys()
            tablets = t.tablets
            for item in items:
                idx = bisect_right(keys, item[0])
                entry = routed.get(idx)
                if entry is None:
                    entry = routed[idx] = (tablets[idx], [])
                entry[1].append(item)
        return routed

    def _apply_block(self, table: str, items: List[Tuple[str, str, str]], clock: SimulatedClock):
        t = self.table(table)
        touched = set()
        pending = items
        while pending:
            retry = []
            for tablet, batch in self._route(t, pending).values():
                with tablet.lock:
                    # a concurrent split may have moved part of the range
                    stray = [item for item in batch if not tablet.contains(item[0])]
                    if stray:
                        retry.extend(stray)
                        batch = [item for item in batch if tablet.contains(item[0])]
                    tablet.apply(batch)
                    server = tablet.server
                    needs_flush = (
                        tablet.memtable_entries > self.config.memtable_flush_threshold
                        and not tablet.queued
                    )
                    if needs_flush:
                        tablet.queued = True
                with self._metrics_lock:
                    state = self._servers[server]
                    state.metrics.inserts_accepted += len(batch)
                    if needs_flush:
                        state.queue.append(tablet)
                        state.metrics.compactions_queued_peak = max(
                            state.metrics.compactions_queued_peak, len(state.queue))
                if needs_flush:
                    touched.add(server)
            pending = retry

        cost = len(items) * self.config.insert_seconds_per_entry
        if self.config.walog_enabled:
            cost *= self.config.walog_cost_factor
        now = clock.advance(cost)
        with self._metrics_lock:
            self._events.append((now, len(items)))
        logger.debug('Applied block of %d entries to %s at t=%.4f', len(items), table, now)

        for server in sorted(touched):
            self.run_minor_compactions(server, clock)

    # Compactions

    def run_minor_compactions(self, server: int, clock: SimulatedClock = None) -> int:
        """
        Flush every queued tablet on ``server`` into a new sorted run.

        Tablets run in waves of at most max_concurrent_minor_compactions; each
        wave costs (largest memtable in the wave) * flush_seconds_per_entry.

        Returns:
            int: Number of compactions executed
        """
        clock = clock or self.clock
        state = self._servers[server]
        with self._metrics_lock:
            pending = list(state.queue)
            state.queue.clear()
        if not pending:
            return 0

        cap = self.config.max_concurrent_minor_compactions
        executed = 0
        for offset in range(0, len(pending), cap):
            wave = pending[offset:offset + cap]
            with ThreadPoolExecutor(max_workers=len(wave)) as pool:
                flushed = list(pool.map(lambda tb: self._compact(state, tb), wave))
            executed += len(wave)
            clock.advance(max(flushed) * self.config.flush_seconds_per_entry)
            with self._metrics_lock:
                state.metrics.compaction_waves += 1
        logger.info('Server %d ran %d minor compactions in %d waves',
                    server, executed, -(-executed // cap))
        return executed

    def _compact(self, state: _ServerState, tablet: Tablet) -> int:
        with state.semaphore:
            with self._metrics_lock:
                state.active += 1
                state.metrics.compactions_active_peak = max(
                    state.metrics.compactions_active_peak, state.active)
            try:
                with tablet.lock:
                    flushed = tablet.freeze()
                    tablet.queued = False
            finally:
                with self._metrics_lock:
                    state.active -= 1
        with self._metrics_lock:
            state.metrics.entries_flushed += flushed
            state.metrics.compactions_run += 1
        return flushed

    # Reads

    def scan(self, table: str, lo: str, hi: str) -> List[Triple]:
        """
        Newest value per key over [lo, hi), sorted by (row, col).

        Raises:
            KeyRangeError: If lo > hi
        """
        if lo > hi:
            raise KeyRangeError(f'Scan lower bound {lo!r} exceeds upper bound {hi!r}')
        t = self.table(table)
        with t.lock:
            tablets = list(t.tablets)
        result = []
        for tablet in tablets:
            if tablet.high is not None and tablet.high <= lo:
                continue
            if tablet.low is not None and tablet.low >= hi:
                break
            with tablet.lock:
                result.extend(Triple(r, c, v) for r, c, v in tablet.merged(lo, hi))
        return result

    def tablet_entries(self, table: str, tablet_id: int) -> List[Tuple[str, str, str]]:
        """Every entry physically held by one tablet, regardless of its range."""
        tablet = self.table(table).tablets[tablet_id]
        with tablet.lock:
            return list(tablet.merged())

    def tablet_inserts(self, table: str) -> List[int]:
        t = self.table(table)
        with t.lock:
            return [tablet.inserts_accepted for tablet in t.tablets]

    def inject_raw_entry(self, table: str, tablet_id: int, row: str, col: str, value: str):
        """Test hook: write an entry straight into a tablet, bypassing routing."""
        tablet = self.table(table).tablets[tablet_id]
        with tablet.lock:
            tablet.apply([(row, col, value)])
            tablet.inserts_accepted -= 1

    # Metrics

    def snapshot_metrics(self, clock: SimulatedClock = None) -> StoreMetrics:
        """
        Current counters, the cumulative insert series and the ingest rate over
        the trailing averaging window ending at ``clock``'s time.
        """
        clock = clock or self.clock
        with self._metrics_lock:
            servers = {i: replace(s.metrics) for i, s in enumerate(self._servers)}
            events = list(self._events)
        window = self.config.averaging_window
        samples = windowed_series(events, window)
        now = clock.now()
        width = min(window, now)
        rate = 0.0
        if width > 0:
            recent = sum(count for ts, count in events if now - width < ts <= now)
            rate = recent / width
        return StoreMetrics(servers, samples, rate)


class BatchWriter:
    """
    Client-side buffer that sends triples to the store in fixed-size blocks.

    A block is sent whenever the buffered serialized size reaches
    ``batch_block_bytes``; ``close`` sends the remainder.
    """

    def __init__(self, store: TabletStore, table: str, clock: SimulatedClock):
        self.store = store
        self.table = table
        self.clock = clock
        self.block_bytes = store.config.batch_block_bytes
        self.buffer: List[Tuple[str, str, str]] = []
        self.buffered_bytes = 0
        self.blocks_sent = 0
        self.entries_sent = 0
        self.closed = False

    def put(self, triples) -> None:
        """
        Buffer triples, sending full blocks as they fill.

        Raises:
            WriterClosed: If the writer was closed
        """
        if self.closed:
            raise WriterClosed()
        for t in triples:
            value = format_value(t.val)
            self.buffer.append((t.row, t.col, value))
            self.buffered_bytes += triple_size(t.row, t.col, value)
            if self.buffered_bytes >= self.block_bytes:
                self._flush()

    def _flush(self):
        if not self.buffer:
            return
        block, self.buffer, self.buffered_bytes = self.buffer, [], 0
        self.store._apply_block(self.table, block, self.clock)
        self.blocks_sent += 1
        self.entries_sent += len(block)

    def close(self) -> None:
        """
        Send any buffered triples as a final block.

        Raises:
            WriterClosed: On a second close
        """
        if self.closed:
            raise WriterClosed('Batch writer already closed')
        self._flush()
        self.closed = True

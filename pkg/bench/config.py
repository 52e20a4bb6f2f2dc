"""
Benchmark configuration and worker identity.

``BenchmarkConfig`` describes one scaled-problem run: N_server servers with
N_ingest workers each, every worker writing N_tablet copies of a SCALE base
graph. The derived sizes follow directly:

    N     = 2^scale                      vertices of one base graph
    M     = edge_factor * N              edges of one base graph
    N_p   = n_server * n_ingest          workers
    N_row = N_p * n_tablet * N           rows of the stacked table
"""
from dataclasses import asdict, dataclass, field, fields, replace

from django.conf import settings

from .constants import (
    DEFAULT_EDGE_FACTOR,
    DEFAULT_N_TABLET,
    DEFAULT_RMAT_PROBS,
    DEFAULT_TABLE_NAME,
    RECIPE_MINOR_COMPACTIONS,
    RECIPE_WALOG_ENABLED,
)
from .exceptions import InvalidBenchmarkConfig, InvalidGeneratorConfig, InvalidStoreConfig
from .graph500 import GeneratorConfig, key_width_for
from .store import StoreConfig

HARNESS_DEFAULTS = {
    'OUTPUT_DIR': 'runs',
    'TABLE_NAME': DEFAULT_TABLE_NAME,
    'AVERAGING_WINDOW': 30.0,
    'LINEAR_TOLERANCE': 0.30,
    'SLOPE_RANGE': (-0.85, -0.40),
    'SLOPE_MIN_SCALE': 14,
}


def harness_setting(name):
    """Read one ``settings.INGEST_BENCH`` value, falling back to the defaults."""
    return getattr(settings, 'INGEST_BENCH', {}).get(name, HARNESS_DEFAULTS[name])


def recipe_store_config(**overrides) -> StoreConfig:
    """Store settings the setup recipe applies: WAL off, compaction cap 5."""
    values = {
        'walog_enabled': RECIPE_WALOG_ENABLED,
        'max_concurrent_minor_compactions': RECIPE_MINOR_COMPACTIONS,
    }
    values.update(overrides)
    return StoreConfig(**values)


STORE_FIELDS = tuple(f.name for f in fields(StoreConfig) if f.name != 'n_servers')


@dataclass(frozen=True)
class BenchmarkConfig:
    """
    One benchmark run.

    Attributes:
        n_server: Tablet servers (N_server)
        n_ingest: Ingest workers per server (N_ingest)
        n_tablet: Tablets written by each worker (N_tablet)
        scale: Generator SCALE of the base graph
        seed: 64-bit base seed; worker streams derive from (seed, pid)
        edge_factor: Edges per vertex
        store: Store settings; ``n_servers`` always follows ``n_server``
        run_seconds: Simulated duration a run is expected to fit in
        table_name: Name of the ingest table
        regenerate_per_tablet: Draw a fresh base graph for every tablet
        permute_vertices: Relabel vertices of each base graph
        keep_self_edges: Keep self-loops in the base graph
    """
    n_server: int
    n_ingest: int
    scale: int
    n_tablet: int = DEFAULT_N_TABLET
    seed: int = 0
    edge_factor: int = DEFAULT_EDGE_FACTOR
    store: StoreConfig = field(default_factory=recipe_store_config)
    run_seconds: float = 300.0
    table_name: str = DEFAULT_TABLE_NAME
    regenerate_per_tablet: bool = False
    permute_vertices: bool = True
    keep_self_edges: bool = True

    def __post_init__(self):
        for name in ('n_server', 'n_ingest', 'n_tablet', 'scale', 'edge_factor'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidBenchmarkConfig(f'{name} must be a positive integer, got {value!r}')
        if self.run_seconds <= 0:
            raise InvalidBenchmarkConfig('run_seconds must be positive')
        if not self.table_name:
            raise InvalidBenchmarkConfig('table_name must not be empty')
        if self.store.n_servers != self.n_server:
            object.__setattr__(self, 'store', replace(self.store, n_servers=self.n_server))
        # validates seed and edge factor the same way the generator does
        self.generator_config()

    @property
    def n_vertices(self):
        return 1 << self.scale

    @property
    def n_edges(self):
        return self.edge_factor * self.n_vertices

    @property
    def n_p(self):
        return self.n_server * self.n_ingest

    @property
    def n_row(self):
        return self.n_p * self.n_tablet * self.n_vertices

    @property
    def n_tablets_total(self):
        return self.n_p * self.n_tablet

    @property
    def tablets_per_server(self):
        return self.n_ingest * self.n_tablet

    @property
    def planned_entries(self):
        return self.n_tablets_total * self.n_edges

    @property
    def key_width(self):
        """Digits of N_row - 1, the width of every row key in the table."""
        return key_width_for(self.n_row)

    def generator_config(self) -> GeneratorConfig:
        try:
            return GeneratorConfig(
                scale=self.scale,
                edge_factor=self.edge_factor,
                rmat_probs=DEFAULT_RMAT_PROBS,
                seed=self.seed,
                permute_vertices=self.permute_vertices,
                keep_self_edges=self.keep_self_edges,
            )
        except InvalidGeneratorConfig as exc:
            raise InvalidBenchmarkConfig(str(exc))

    def to_flat(self) -> dict:
        """Flat key/value form used by config files and manifests."""
        flat = {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'store'}
        store = asdict(self.store)
        flat.update({name: store[name] for name in STORE_FIELDS})
        return flat

    @classmethod
    def from_flat(cls, data: dict) -> 'BenchmarkConfig':
        """
        Build a config from flat keys; store fields not given keep the recipe values.

        Raises:
            InvalidBenchmarkConfig: Unknown keys or invalid values
        """
        own = {f.name for f in fields(cls)} - {'store'}
        unknown = set(data) - own - set(STORE_FIELDS)
        if unknown:
            raise InvalidBenchmarkConfig(f'Unknown config keys: {", ".join(sorted(unknown))}')
        store_values = {k: v for k, v in data.items() if k in STORE_FIELDS}
        try:
            store = recipe_store_config(**store_values)
        except InvalidStoreConfig as exc:
            raise InvalidBenchmarkConfig(str(exc))
        return cls(store=store, **{k: v for k, v in data.items() if k in own})


@dataclass(frozen=True)
class WorkerIdentity:
    """
    What one SPMD worker knows about itself.

    Workers are placed in contiguous blocks: pid div n_ingest is the server
    a worker runs on, pid mod n_ingest its rank on that server.
    """
    pid: int
    n_p: int
    n_ingest: int

    def __post_init__(self):
        if not 0 <= self.pid < self.n_p:
            raise InvalidBenchmarkConfig(f'pid {self.pid} outside [0, {self.n_p})')

    @property
    def server_id(self):
        return self.pid // self.n_ingest

    @property
    def local_rank(self):
        return self.pid % self.n_ingest

    @property
    def hostname(self):
        return f'server-{self.server_id}'

    @classmethod
    def all_for(cls, cfg: BenchmarkConfig):
        return [cls(pid, cfg.n_p, cfg.n_ingest) for pid in range(cfg.n_p)]

"""
Constants used throughout the ingest benchmark.

Centralizes option keys, recipe values and reference figures for easy
maintenance. Harness defaults that operators may want to change live in
``settings.INGEST_BENCH`` instead.
"""

# Graph500 sizing
DEFAULT_EDGE_FACTOR = 8
DEFAULT_RMAT_PROBS = (0.57, 0.19, 0.19, 0.05)
RMAT_PROB_TOLERANCE = 1e-12

# Store defaults (what a freshly started store boots with)
DEFAULT_BALANCER_RATE = 50.0
DEFAULT_MINOR_COMPACTIONS = 4
DEFAULT_WALOG_COST_FACTOR = 1.3
DEFAULT_MEMTABLE_FLUSH_THRESHOLD = 100_000
DEFAULT_BATCH_BLOCK_BYTES = 500_000
DEFAULT_AVERAGING_WINDOW = 30.0
# 100,000 entries/s per ingest stream
DEFAULT_INSERT_SECONDS_PER_ENTRY = 1e-5
DEFAULT_FLUSH_SECONDS_PER_ENTRY = 1e-6

# Option keys accepted by set_option (bit-exact)
OPTION_MINOR_COMPACTION_MAX = 'tserver.compaction.minor.concurrent.max'
OPTION_WALOG_ENABLED = 'table.walog.enabled'
SERVER_OPTIONS = (OPTION_MINOR_COMPACTION_MAX,)
TABLE_OPTIONS = (OPTION_WALOG_ENABLED,)

# Recipe values applied during the setup phase
RECIPE_MINOR_COMPACTIONS = 5
RECIPE_WALOG_ENABLED = False
DEFAULT_N_TABLET = 32
DEFAULT_TABLE_NAME = 'Tgraph'

# Triple serialized size = len(row) + len(col) + len(value) + separators
TRIPLE_SEPARATOR_BYTES = 3

# Split file
SPLIT_FILE_NAME = 'splits.txt'
FIRST_TABLET_MARKER = '#first_tablet'

# Store dump
DUMP_FILE_NAME = 'store.tsv'
DUMP_TABLET_MARKER = '#tablet'

# Associative arrays
FRONTIER_ROW_KEY = 'frontier'
COLLISION_KEEP_LAST = 'keep_last'
COLLISION_SUM = 'sum'
COLLISION_POLICIES = (COLLISION_KEEP_LAST, COLLISION_SUM)
VALUE_KIND_TEXTUAL = 'textual'
VALUE_KIND_NUMERIC = 'numeric'

# Output files
MANIFEST_FILE_NAME = 'manifest.json'
REPORT_FILE_NAME = 'report.json'
THROUGHPUT_FILE_NAME = 'throughput.csv'
SCALING_FILE_NAME = 'scaling.csv'
THROUGHPUT_COLUMNS = ('elapsed_seconds', 'cumulative_inserts', 'windowed_rate')
SCALING_COLUMNS = ('n_server', 'n_ingest', 'n_p', 'aggregate_rate', 'per_worker_rate')

# Reference figures from published 216-node measurements.
# Reported for information only, never asserted.
REFERENCE_FIGURES = {
    'peak_entries_per_second': 115_000_000,
    'entries_per_second_per_process': 100_000,
    'entries_per_second_per_server': 500_000,
    'typical_run_seconds': 300,
    'degree_slope': -0.62,
}

# Exit codes for management commands
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

# Response messages
MESSAGES = {
    'generated': 'Wrote {path}: N={n} M={m}',
    'bench_passed': 'Benchmark complete: {total} inserts, {rate:.0f} entries/s (simulated)',
    'sweep_done': 'Sweep complete: {rows} configurations, linear={linear}',
    'check_passed': '{name}: pass',
    'check_failed': '{name}: FAIL ({detail})',
    'check_skipped': '{name}: skipped ({detail})',
}

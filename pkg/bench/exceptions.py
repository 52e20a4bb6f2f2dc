"""
Custom exceptions for the ingest benchmark.

Every exception carries a human-readable ``default_detail`` and a stable
``default_code`` in the same shape DRF's ``APIException`` uses, so management
commands can report them uniformly. ``exit_code`` tells the CLI which
status to exit with: 2 for usage and configuration problems, 1 for
verification failures.
"""
from .constants import EXIT_USAGE, EXIT_VERIFICATION_FAILED


class BenchError(Exception):
    """
    Base class for all benchmark errors.

    Attributes:
        default_detail: Message used when none is supplied
        default_code: Short machine-readable error code
        exit_code: Process exit status used by management commands
    """
    default_detail = 'Benchmark error'
    default_code = 'error'
    exit_code = EXIT_USAGE

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def __str__(self):
        return str(self.detail)


# Associative arrays

class KindMismatch(BenchError):
    """Raised when triples mix textual and numeric values."""
    default_detail = 'Triples mix textual and numeric values'
    default_code = 'kind_mismatch'


class CollisionPolicyError(BenchError):
    """Raised for an unknown collision policy or 'sum' on textual values."""
    default_detail = 'Collision policy cannot be applied to these values'
    default_code = 'collision_policy'


class InvalidValue(BenchError):
    """Raised for empty text values, non-finite numbers or empty keys."""
    default_detail = 'Values must be non-empty text or finite numbers'
    default_code = 'invalid_value'


class KeyRangeError(BenchError):
    """Raised when a key range has lo > hi."""
    default_detail = 'Range lower bound exceeds upper bound'
    default_code = 'key_range'


class PositionError(BenchError, IndexError):
    """Raised when a 1-based row position range is invalid."""
    default_detail = 'Positions are 1-based and start must not exceed stop'
    default_code = 'position'


class RowKeyParseError(BenchError):
    """Raised when a row key does not parse as an unsigned integer."""
    default_detail = 'Row key is not an unsigned integer'
    default_code = 'row_key_parse'


class KeyEncodingError(BenchError):
    """Raised when a number does not fit the requested key width."""
    default_detail = 'Value does not fit in the requested key width'
    default_code = 'key_encoding'


# Graph generation

class InvalidGeneratorConfig(BenchError):
    """Raised when scale, edge factor or R-MAT probabilities are invalid."""
    default_detail = 'Invalid generator configuration'
    default_code = 'invalid_generator_config'


class FitUndefined(BenchError):
    """Raised when fewer than two distinct degrees are available to fit."""
    default_detail = 'Power-law fit needs at least two distinct degrees'
    default_code = 'fit_undefined'


# Tablet store

class InvalidStoreConfig(BenchError):
    """Raised when a store configuration value is out of range."""
    default_detail = 'Invalid store configuration'
    default_code = 'invalid_store_config'


class DuplicateTable(BenchError):
    """Raised when creating a table whose name is already in use."""
    default_detail = 'Table already exists'
    default_code = 'duplicate_table'


class TableNotFound(BenchError):
    """Raised when an operation names a table that does not exist."""
    default_detail = 'Table does not exist'
    default_code = 'table_not_found'


class UnknownOption(BenchError):
    """Raised for an option key the store does not recognize, or a bad value."""
    default_detail = 'Unknown option'
    default_code = 'unknown_option'


class SplitOrderError(BenchError):
    """Raised when split keys are unsorted, duplicated or already present."""
    default_detail = 'Split keys must be strictly increasing and new'
    default_code = 'split_order'


class WriterClosed(BenchError):
    """Raised when using a batch writer after it was closed."""
    default_detail = 'Batch writer is closed'
    default_code = 'writer_closed'


# Benchmark

class InvalidBenchmarkConfig(BenchError):
    """Raised when a benchmark configuration is invalid."""
    default_detail = 'Invalid benchmark configuration'
    default_code = 'invalid_benchmark_config'


class NoLocalTablets(BenchError):
    """Raised when a worker's server owns no tablets."""
    default_detail = 'Server owns no tablets'
    default_code = 'no_local_tablets'


class SplitFileError(BenchError):
    """Raised when the split file is missing, malformed or stale."""
    default_detail = 'Split file is missing or stale'
    default_code = 'split_file'


class SetupStepFailed(BenchError):
    """
    Raised when a setup-phase step fails.

    The failing step number (1-7) is kept on ``step`` and prefixed to the
    message so the CLI output names it.
    """
    default_detail = 'Setup step failed'
    default_code = 'setup_step_failed'

    def __init__(self, step, detail=None):
        self.step = step
        super().__init__(f'setup step {step}: {detail or self.default_detail}')


class ConservationError(BenchError):
    """Raised when total inserts differ from N_p * N_tablet * M."""
    default_detail = 'Insert count does not match the planned total'
    default_code = 'conservation'
    exit_code = EXIT_VERIFICATION_FAILED


class VerificationFailed(BenchError):
    """Raised by the CLI when one or more verification checks fail."""
    default_detail = 'Verification failed'
    default_code = 'verification_failed'
    exit_code = EXIT_VERIFICATION_FAILED

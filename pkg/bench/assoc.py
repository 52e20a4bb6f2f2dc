"""
D4M-style associative arrays.

An associative array is a sparse 2-D array whose rows and columns are keyed by
strings. Query operations (rows by key, prefix, range or position, entries by
value) and algebra (add, sub, and, or, matmul) all return new associative
arrays, so they compose.

Storage follows the D4M layout: sorted unique row keys, sorted unique column
keys and a ``scipy.sparse`` CSR matrix of entries. Textual arrays keep a sorted
tuple of distinct values and store 1-based indices into it in the matrix, so
the same sparse machinery serves both value kinds.

Invariants kept by every constructor:
- row and column keys are strictly sorted and every key has at least one entry
- no entry stores the empty value (numeric zeros are dropped)
- all entries share one value kind
- arrays are never mutated after construction
"""
import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .constants import (
    COLLISION_KEEP_LAST,
    COLLISION_POLICIES,
    COLLISION_SUM,
    FRONTIER_ROW_KEY,
    VALUE_KIND_NUMERIC,
    VALUE_KIND_TEXTUAL,
)
from .exceptions import (
    CollisionPolicyError,
    InvalidValue,
    KeyEncodingError,
    KeyRangeError,
    KindMismatch,
    PositionError,
    RowKeyParseError,
)

logger = logging.getLogger(__name__)

Value = Union[str, float]


@dataclass(frozen=True)
class Triple:
    """A single (row, col, val) entry, the reduced form of a store entry."""
    row: str
    col: str
    val: Value

    def __post_init__(self):
        if not self.row or not self.col:
            raise InvalidValue('Triple row and col must be non-empty strings')


def value_kind_of(val) -> str:
    """
    Classify a value as textual or numeric.

    Raises:
        InvalidValue: For empty strings, non-finite numbers or other types
    """
    if isinstance(val, str):
        if not val:
            raise InvalidValue('Textual values must be non-empty')
        return VALUE_KIND_TEXTUAL
    if isinstance(val, (int, float, np.integer, np.floating)) and not isinstance(val, bool):
        if not math.isfinite(val):
            raise InvalidValue(f'Numeric value {val!r} is not finite')
        return VALUE_KIND_NUMERIC
    raise InvalidValue(f'Unsupported value type {type(val).__name__}')


def format_value(val: Value) -> str:
    """Render a value as text: integral numbers without a fraction, others with repr."""
    if isinstance(val, str):
        return val
    val = float(val)
    if val.is_integer():
        return str(int(val))
    return repr(val)


def parse_value(text: str) -> Value:
    """Inverse of format_value: finite numbers become floats, anything else stays text."""
    try:
        number = float(text)
    except ValueError:
        return text
    return number if math.isfinite(number) else text


def _keys(seq) -> np.ndarray:
    # object, not str: numpy's fixed-width unicode dtype strips trailing NULs,
    # which would merge 'a\x00' into 'a'
    if isinstance(seq, np.ndarray) and seq.dtype.kind == 'U':
        return seq
    return np.array(list(seq), dtype=object)


class AssocArray:
    """
    Immutable sparse 2-D array keyed by sorted string row/column keys.

    Build instances with ``from_triples`` or ``from_columns``; the constructor
    trusts its arguments to already satisfy the invariants.

    Attributes:
        row_keys (tuple): Sorted unique row keys
        col_keys (tuple): Sorted unique column keys
        value_kind (str): 'textual' or 'numeric'
    """
    __slots__ = ('_rows', '_cols', '_matrix', '_values')

    def __init__(self, row_keys, col_keys, matrix, values=None):
        self._rows: Tuple[str, ...] = tuple(row_keys)
        self._cols: Tuple[str, ...] = tuple(col_keys)
        self._matrix: sp.csr_matrix = matrix
        self._values: Optional[Tuple[str, ...]] = None if values is None else tuple(values)

    @classmethod
    def empty(cls, value_kind=VALUE_KIND_NUMERIC):
        values = () if value_kind == VALUE_KIND_TEXTUAL else None
        return cls((), (), sp.csr_matrix((0, 0), dtype=np.float64), values)

    @property
    def row_keys(self):
        return self._rows

    @property
    def col_keys(self):
        return self._cols

    @property
    def value_kind(self):
        return VALUE_KIND_NUMERIC if self._values is None else VALUE_KIND_TEXTUAL

    @property
    def nnz(self):
        return int(self._matrix.nnz)

    @property
    def shape(self):
        return (len(self._rows), len(self._cols))

    @property
    def is_empty(self):
        return self._matrix.nnz == 0

    @property
    def T(self):
        return transpose(self)

    def _decode(self, raw) -> Value:
        if self._values is None:
            return float(raw)
        return self._values[int(raw) - 1]

    def get(self, row, col) -> Optional[Value]:
        """Return A(row, col), or None when the entry is empty."""
        i = bisect_left(self._rows, row)
        j = bisect_left(self._cols, col)
        if i == len(self._rows) or self._rows[i] != row:
            return None
        if j == len(self._cols) or self._cols[j] != col:
            return None
        raw = self._matrix[i, j]
        return None if raw == 0 else self._decode(raw)

    def entries(self) -> Dict[Tuple[str, str], Value]:
        """Return the entries as a {(row, col): value} dict."""
        return {(t.row, t.col): t.val for t in to_triples(self)}

    def __eq__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return (
            self._rows == other._rows
            and self._cols == other._cols
            and to_triples(self) == to_triples(other)
        )

    def __hash__(self):
        return hash((self._rows, self._cols, self.nnz))

    def __repr__(self):
        return f'<AssocArray {self.value_kind} {len(self._rows)}x{len(self._cols)} nnz={self.nnz}>'

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __and__(self, other):
        return and_(self, other)

    def __or__(self, other):
        return or_(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def _condense(row_keys, col_keys, matrix, values=None) -> AssocArray:
    """Drop zeros and unused keys/values and return a canonical AssocArray."""
    kind = VALUE_KIND_NUMERIC if values is None else VALUE_KIND_TEXTUAL
    m = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    m.sum_duplicates()
    m.eliminate_zeros()
    if m.nnz == 0:
        return AssocArray.empty(kind)

    r_idx = np.flatnonzero(np.diff(m.indptr))
    c_idx = np.flatnonzero(np.bincount(m.indices, minlength=m.shape[1]))
    if len(r_idx) < m.shape[0]:
        m = m[r_idx, :]
    if len(c_idx) < m.shape[1]:
        m = m[:, c_idx]
    rows = _keys(row_keys)[r_idx].tolist()
    cols = _keys(col_keys)[c_idx].tolist()

    if values is not None:
        used = np.unique(m.data)
        if len(used) < len(values):
            values = [values[int(u) - 1] for u in used]
            m.data = np.searchsorted(used, m.data).astype(np.float64) + 1.0
    m = sp.csr_matrix(m)
    m.sort_indices()
    return AssocArray(rows, cols, m, values)


def _build(rows, cols, data, values=None, keep_last=False) -> AssocArray:
    kind = VALUE_KIND_NUMERIC if values is None else VALUE_KIND_TEXTUAL
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        return AssocArray.empty(kind)
    row_keys, ri = np.unique(_keys(rows), return_inverse=True)
    col_keys, ci = np.unique(_keys(cols), return_inverse=True)
    ri = ri.ravel().astype(np.int64)
    ci = ci.ravel().astype(np.int64)
    if keep_last:
        linear = ri * len(col_keys) + ci
        _, first_from_end = np.unique(linear[::-1], return_index=True)
        last = len(linear) - 1 - first_from_end
        ri, ci, data = ri[last], ci[last], data[last]
    m = sp.coo_matrix((data, (ri, ci)), shape=(len(row_keys), len(col_keys)))
    return _condense(row_keys, col_keys, m, values)


def from_triples(triples: Sequence[Triple], collision: str = COLLISION_KEEP_LAST) -> AssocArray:
    """
    Build an associative array from triples.

    Args:
        triples: Triples to load; later triples win under keep_last
        collision: 'keep_last' (store overwrite semantics) or 'sum'
            (sparse-matrix accumulation, numeric values only)

    Returns:
        AssocArray: Array with A(row, col) = val for every triple

    Raises:
        CollisionPolicyError: Unknown policy, or 'sum' on textual values
        KindMismatch: Triples mix textual and numeric values
        InvalidValue: Empty text or non-finite number
    """
    if collision not in COLLISION_POLICIES:
        raise CollisionPolicyError(f'Unknown collision policy {collision!r}')
    triples = list(triples)
    if not triples:
        return AssocArray.empty()

    kinds = {value_kind_of(t.val) for t in triples}
    if len(kinds) > 1:
        raise KindMismatch()
    kind = kinds.pop()

    rows = [t.row for t in triples]
    cols = [t.col for t in triples]
    if kind == VALUE_KIND_NUMERIC:
        data = [float(t.val) for t in triples]
        return _build(rows, cols, data, keep_last=collision == COLLISION_KEEP_LAST)

    if collision == COLLISION_SUM:
        raise CollisionPolicyError("The 'sum' policy requires numeric values")
    values, inverse = np.unique(_keys(t.val for t in triples), return_inverse=True)
    return _build(rows, cols, inverse.ravel() + 1.0, values=values.tolist(), keep_last=True)


def from_columns(rows, cols, vals, collision: str = COLLISION_KEEP_LAST) -> AssocArray:
    """
    Columnar constructor for numeric arrays: parallel row, col and value arrays.

    Avoids building one Triple per entry, which matters for million-edge graphs.
    Values must be finite numbers.
    """
    if collision not in COLLISION_POLICIES:
        raise CollisionPolicyError(f'Unknown collision policy {collision!r}')
    data = np.asarray(vals, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise InvalidValue('Numeric values must be finite')
    return _build(rows, cols, data, keep_last=collision == COLLISION_KEEP_LAST)


def to_triples(A: AssocArray) -> List[Triple]:
    """Return the entries of A as triples sorted by (row, col)."""
    if A.is_empty:
        return []
    coo = A._matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows, cols = A._rows, A._cols
    return [
        Triple(rows[r], cols[c], A._decode(v))
        for r, c, v in zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist())
    ]


# Queries

def _take_rows(A: AssocArray, idx) -> AssocArray:
    idx = np.asarray(idx, dtype=np.intp)
    if A.is_empty or idx.size == 0:
        return AssocArray.empty(A.value_kind)
    return _condense(_keys(A._rows)[idx], A._cols, A._matrix[idx, :], A._values)


def rows_by_keys(A: AssocArray, keys: Iterable[str]) -> AssocArray:
    """Rows whose key is listed; keys absent from A are ignored."""
    rows = A._rows
    idx = set()
    for key in keys:
        i = bisect_left(rows, key)
        if i < len(rows) and rows[i] == key:
            idx.add(i)
    return _take_rows(A, sorted(idx))


def row(A: AssocArray, key: str) -> AssocArray:
    """The single row A(key, :)."""
    return rows_by_keys(A, [key])


def rows_by_prefix(A: AssocArray, prefix: str) -> AssocArray:
    """Rows whose key starts with prefix; the empty prefix selects every row."""
    rows = A._rows
    start = bisect_left(rows, prefix)
    stop = start
    while stop < len(rows) and rows[stop].startswith(prefix):
        stop += 1
    return _take_rows(A, range(start, stop))


def rows_by_range(A: AssocArray, lo: str, hi: str) -> AssocArray:
    """
    Rows with lo <= key <= hi (inclusive at both ends).

    Raises:
        KeyRangeError: If lo > hi
    """
    if lo > hi:
        raise KeyRangeError(f'Range lower bound {lo!r} exceeds upper bound {hi!r}')
    return _take_rows(A, range(bisect_left(A._rows, lo), bisect_right(A._rows, hi)))


def rows_by_position(A: AssocArray, start: int, stop: int) -> AssocArray:
    """
    Rows at 1-based positions start..stop in sorted key order.

    Positions past the last row are ignored.

    Raises:
        PositionError: If start < 1 or stop < start
    """
    if start < 1:
        raise PositionError(f'Row positions are 1-based, got start={start}')
    if stop < start:
        raise PositionError(f'stop={stop} is before start={start}')
    return _take_rows(A, range(start - 1, min(stop, len(A._rows))))


def cols_by_keys(A: AssocArray, keys: Iterable[str]) -> AssocArray:
    return transpose(rows_by_keys(transpose(A), keys))


def cols_by_prefix(A: AssocArray, prefix: str) -> AssocArray:
    return transpose(rows_by_prefix(transpose(A), prefix))


def cols_by_range(A: AssocArray, lo: str, hi: str) -> AssocArray:
    return transpose(rows_by_range(transpose(A), lo, hi))


def filter_value(A: AssocArray, v: Value) -> AssocArray:
    """
    Entries whose value equals v exactly.

    A value of the other kind matches nothing and yields an empty array.
    """
    if A.is_empty:
        return A
    if A._values is not None:
        if not isinstance(v, str) or v not in A._values:
            return AssocArray.empty(A.value_kind)
        target = float(A._values.index(v) + 1)
    else:
        if isinstance(v, str) or isinstance(v, bool):
            return AssocArray.empty(A.value_kind)
        target = float(v)
    m = A._matrix.copy()
    m.data = np.where(m.data == target, m.data, 0.0)
    return _condense(A._rows, A._cols, m, A._values)


# Algebra

def numeric_projection(A: AssocArray) -> AssocArray:
    """Same sparsity pattern with every textual value replaced by 1; numeric arrays pass through."""
    if A._values is None:
        return A
    m = A._matrix.copy()
    m.data = np.ones_like(m.data)
    return AssocArray(A._rows, A._cols, m)


def _pattern(A: AssocArray) -> AssocArray:
    m = A._matrix.copy()
    m.data = np.ones_like(m.data)
    return AssocArray(A._rows, A._cols, m)


def _embed(A: AssocArray, rows_u: np.ndarray, cols_u: np.ndarray) -> sp.csr_matrix:
    """Re-index A's matrix into the (rows_u, cols_u) key space."""
    coo = A._matrix.tocoo()
    r = np.searchsorted(rows_u, _keys(A._rows))[coo.row] if coo.nnz else coo.row
    c = np.searchsorted(cols_u, _keys(A._cols))[coo.col] if coo.nnz else coo.col
    return sp.csr_matrix((coo.data, (r, c)), shape=(len(rows_u), len(cols_u)))


def _union_op(A: AssocArray, B: AssocArray, op) -> AssocArray:
    rows_u = np.union1d(_keys(A._rows), _keys(B._rows))
    cols_u = np.union1d(_keys(A._cols), _keys(B._cols))
    if rows_u.size == 0 or cols_u.size == 0:
        return AssocArray.empty()
    result = op(_embed(A, rows_u, cols_u), _embed(B, rows_u, cols_u))
    return _condense(rows_u, cols_u, result)


def add(A: AssocArray, B: AssocArray) -> AssocArray:
    """Key-union sum; textual inputs are projected to numeric first."""
    return _union_op(numeric_projection(A), numeric_projection(B), lambda a, b: a + b)


def sub(A: AssocArray, B: AssocArray) -> AssocArray:
    """Key-union difference; entries that become exactly 0 are removed."""
    return _union_op(numeric_projection(A), numeric_projection(B), lambda a, b: a - b)


def and_(A: AssocArray, B: AssocArray) -> AssocArray:
    """Entries present in both A and B, every value 1."""
    return _union_op(_pattern(A), _pattern(B), lambda a, b: a.multiply(b))


def or_(A: AssocArray, B: AssocArray) -> AssocArray:
    """Entries present in either A or B, every value 1."""
    def union_pattern(a, b):
        m = sp.csr_matrix(a + b)
        m.data = np.ones_like(m.data)
        return m
    return _union_op(_pattern(A), _pattern(B), union_pattern)


def matmul(A: AssocArray, B: AssocArray) -> AssocArray:
    """
    C(i, j) = sum over k of A(i, k) * B(k, j).

    k runs over exact string matches between A's column keys and B's row keys.
    Textual inputs are projected to numeric first; exact zeros are dropped.
    """
    A, B = numeric_projection(A), numeric_projection(B)
    if A.is_empty or B.is_empty:
        return AssocArray.empty()
    _, ia, ib = np.intersect1d(_keys(A._cols), _keys(B._rows), assume_unique=True, return_indices=True)
    if ia.size == 0:
        return AssocArray.empty()
    product = A._matrix[:, ia] @ B._matrix[ib, :]
    return _condense(A._rows, B._cols, product)


def transpose(A: AssocArray) -> AssocArray:
    """Swap rows and columns; transpose(transpose(A)) == A."""
    if A.is_empty:
        return A
    m = sp.csr_matrix(A._matrix.T)
    m.sort_indices()
    return AssocArray(A._cols, A._rows, m, A._values)


def bfs_step(A: AssocArray, frontier: Iterable[str]) -> AssocArray:
    """
    One breadth-first step: the neighbors reachable from the frontier rows.

    Computed as an indicator row vector times the numeric projection of A, so
    graph traversal and matrix-vector multiply are the same operation. The
    result has a single row keyed 'frontier'; each value counts the frontier
    vertices that reach that column.
    """
    keys = sorted({k for k in frontier if k})
    if not keys:
        return AssocArray.empty()
    indicator = from_triples([Triple(FRONTIER_ROW_KEY, k, 1.0) for k in keys])
    return matmul(indicator, numeric_projection(A))


def pad_key(number: int, width: int) -> str:
    """
    Zero-padded decimal key of exactly ``width`` digits.

    Raises:
        KeyEncodingError: If the number is negative or needs more digits
    """
    if number < 0:
        raise KeyEncodingError(f'Cannot encode negative number {number}')
    text = str(number)
    if len(text) > width:
        raise KeyEncodingError(f'{number} does not fit in {width} digits')
    return text.zfill(width)


def apply_row_offset(A: AssocArray, offset: int, width: int) -> AssocArray:
    """
    Shift numeric row keys by offset and re-encode them with a fixed width.

    Each row key k becomes pad(int(k) + offset, width); values and column keys
    are unchanged.

    Raises:
        RowKeyParseError: A row key is not an unsigned decimal integer
        KeyEncodingError: A shifted key needs more than ``width`` digits, or two
            keys collide after re-encoding (e.g. '1' and '01')
    """
    if A.is_empty:
        return A
    new_keys = []
    for key in A._rows:
        if not (key.isascii() and key.isdigit()):
            raise RowKeyParseError(f'Row key {key!r} is not an unsigned integer')
        new_keys.append(pad_key(int(key) + offset, width))

    order = np.argsort(_keys(new_keys), kind='stable')
    sorted_keys = [new_keys[i] for i in order]
    if len(set(sorted_keys)) != len(sorted_keys):
        raise KeyEncodingError('Row keys collide after offset encoding')
    m = A._matrix if np.all(order[:-1] < order[1:]) else A._matrix[order, :]
    return AssocArray(sorted_keys, A._cols, sp.csr_matrix(m), A._values)


# Triple text format: row<TAB>col<TAB>value<NEWLINE>

def write_triples(path, triples: Iterable[Triple]) -> int:
    """Write triples sorted by (row, col); returns the number written."""
    ordered = sorted(triples, key=lambda t: (t.row, t.col))
    with open(Path(path), 'w', encoding='utf-8', newline='\n') as fh:
        for t in ordered:
            fh.write(f'{t.row}\t{t.col}\t{format_value(t.val)}\n')
    return len(ordered)


def read_triples(path) -> List[Triple]:
    """
    Read a triple text file.

    Raises:
        InvalidValue: A line does not have exactly three tab-separated fields
    """
    triples = []
    with open(Path(path), encoding='utf-8') as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip('\n')
            if not line:
                continue
            parts = line.split('\t')
            if len(parts) != 3:
                raise InvalidValue(f'{path}:{lineno}: expected row<TAB>col<TAB>value')
            triples.append(Triple(parts[0], parts[1], parse_value(parts[2])))
    return triples

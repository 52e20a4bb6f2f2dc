"""
Graph500-style R-MAT graph generation and degree-distribution analysis.

Sizing follows the Graph500 rules: N = 2^SCALE vertices and M = edge_factor * N
edges. Each edge is drawn by SCALE recursive quadrant choices over the
adjacency matrix with probabilities (a, b, c, d).

Random streams come from numpy's PCG64 bit generator seeded through
``SeedSequence(entropy=seed, spawn_key=...)``. A worker derives its own
independent stream by extending the spawn key with its P_ID (and a tablet
id when regenerating per tablet), so every stream is reproducible from
(seed, spawn_key) alone.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import stats

from .assoc import AssocArray, from_columns
from .constants import (
    COLLISION_KEEP_LAST,
    DEFAULT_EDGE_FACTOR,
    DEFAULT_RMAT_PROBS,
    RMAT_PROB_TOLERANCE,
)
from .exceptions import FitUndefined, InvalidGeneratorConfig, KeyEncodingError

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Parameters of one R-MAT graph.

    Attributes:
        scale: SCALE; the graph has 2^scale vertices
        edge_factor: Edges per vertex (M = edge_factor * N)
        rmat_probs: Quadrant probabilities (a, b, c, d), summing to 1
        seed: 64-bit unsigned base seed
        permute_vertices: Relabel vertices with a seed-derived permutation
        keep_self_edges: Keep start == end edges; otherwise redraw them
        spawn_key: Stream derivation path below the base seed
    """
    scale: int
    edge_factor: int = DEFAULT_EDGE_FACTOR
    rmat_probs: Tuple[float, float, float, float] = DEFAULT_RMAT_PROBS
    seed: int = 0
    permute_vertices: bool = True
    keep_self_edges: bool = True
    spawn_key: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.scale < 1:
            raise InvalidGeneratorConfig(f'scale must be >= 1, got {self.scale}')
        if self.edge_factor < 1:
            raise InvalidGeneratorConfig(f'edge_factor must be >= 1, got {self.edge_factor}')
        if not 0 <= self.seed < MAX_SEED:
            raise InvalidGeneratorConfig('seed must be a 64-bit unsigned integer')
        probs = tuple(float(p) for p in self.rmat_probs)
        if len(probs) != 4 or any(p < 0 for p in probs):
            raise InvalidGeneratorConfig('rmat_probs must be four non-negative reals')
        if abs(sum(probs) - 1.0) > RMAT_PROB_TOLERANCE:
            raise InvalidGeneratorConfig(f'rmat_probs must sum to 1, got {sum(probs)!r}')
        object.__setattr__(self, 'rmat_probs', probs)

    @property
    def n_vertices(self):
        return 1 << self.scale

    @property
    def n_edges(self):
        return self.edge_factor * self.n_vertices

    def derive(self, *key: int) -> 'GeneratorConfig':
        """Config for an independent stream, e.g. ``cfg.derive(pid)``."""
        return replace(self, spawn_key=self.spawn_key + tuple(int(k) for k in key))

    def rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.spawn_key)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Generated graph: parallel arrays of start and end vertex ids in [0, N)."""
    n_vertices: int
    start: np.ndarray
    end: np.ndarray

    @property
    def n_edges(self):
        return int(self.start.size)

    def __len__(self):
        return self.n_edges

    def pairs(self):
        return zip(self.start.tolist(), self.end.tolist())

    def __eq__(self, other):
        if not isinstance(other, EdgeList):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.start, other.start)
            and np.array_equal(self.end, other.end)
        )


@dataclass(frozen=True)
class DegreeStats:
    """
    Total-degree histogram of a graph plus its log-log least-squares slopes.

    Vertices of degree 0 are not in the histogram; a self-loop adds 2 to its
    vertex.

    ``fitted_slope`` regresses log(count) on log(degree). On R-MAT graphs the
    sparse count-1 tail pulls it to about -1.1 at SCALE 14-17.
    ``degree_on_count_slope`` regresses log(degree) on log(count); that is the
    orientation quoted for published Graph500 degree plots (18884 leaves and a
    top degree of 447 give -ln 447 / ln 18884 = -0.62), and it is the figure
    the slope acceptance range applies to. It is None when every degree has
    the same count.
    """
    histogram: Dict[int, int]
    fitted_slope: float
    degree_on_count_slope: Optional[float] = None

    @property
    def max_degree(self):
        return max(self.histogram)

    @property
    def median_degree(self):
        degrees = np.repeat(list(self.histogram), list(self.histogram.values()))
        return float(np.median(degrees))


def _rmat_edges(rng, scale, count, probs):
    a, b, c, _ = probs
    start = np.zeros(count, dtype=np.int64)
    end = np.zeros(count, dtype=np.int64)
    for level in range(scale):
        r = rng.random(count)
        # quadrants: a=(0,0) b=(0,1) c=(1,0) d=(1,1)
        start_bit = r >= a + b
        end_bit = ((r >= a) & (r < a + b)) | (r >= a + b + c)
        start |= start_bit.astype(np.int64) << level
        end |= end_bit.astype(np.int64) << level
    return start, end


def generate(cfg: GeneratorConfig) -> EdgeList:
    """
    Generate exactly M = edge_factor * 2^scale R-MAT edges.

    Self-loops are redrawn (not dropped) when keep_self_edges is false, so M
    stays exact. The vertex permutation is drawn after all edges, which makes
    the degree histogram independent of permute_vertices.
    """
    rng = cfg.rng()
    start, end = _rmat_edges(rng, cfg.scale, cfg.n_edges, cfg.rmat_probs)

    if not cfg.keep_self_edges:
        if cfg.rmat_probs[1] + cfg.rmat_probs[2] == 0:
            raise InvalidGeneratorConfig('Cannot avoid self-edges when b = c = 0')
        loops = np.flatnonzero(start == end)
        while loops.size:
            s, e = _rmat_edges(rng, cfg.scale, loops.size, cfg.rmat_probs)
            start[loops] = s
            end[loops] = e
            loops = loops[s == e]

    if cfg.permute_vertices:
        perm = rng.permutation(cfg.n_vertices)
        start = perm[start]
        end = perm[end]

    logger.debug('Generated scale=%d graph: N=%d M=%d', cfg.scale, cfg.n_vertices, cfg.n_edges)
    return EdgeList(cfg.n_vertices, start, end)


def fit_degree_slope(histogram: Dict[int, int]) -> float:
    """
    Least-squares slope of log(count) against log(degree).

    Raises:
        FitUndefined: Fewer than two distinct degrees with count >= 1
    """
    points = sorted((d, c) for d, c in histogram.items() if d > 0 and c >= 1)
    if len(points) < 2:
        raise FitUndefined()
    degrees, counts = zip(*points)
    return float(stats.linregress(np.log(degrees), np.log(counts)).slope)


def fit_degree_on_count(histogram: Dict[int, int]) -> float:
    """
    Least-squares slope of log(degree) against log(count), over the same
    points as fit_degree_slope.

    For an exact law count = k * degree^s this is 1/s; on noisy histograms the
    two slopes are not reciprocal.

    Raises:
        FitUndefined: Fewer than two distinct counts among degrees with count >= 1
    """
    points = [(d, c) for d, c in histogram.items() if d > 0 and c >= 1]
    if len({c for _, c in points}) < 2:
        raise FitUndefined('Degree-on-count fit needs at least two distinct counts')
    degrees, counts = zip(*points)
    return float(stats.linregress(np.log(counts), np.log(degrees)).slope)


def degree_distribution(e: EdgeList) -> DegreeStats:
    """Histogram of total (in + out) degree and its fitted power-law slopes."""
    degree = np.bincount(e.start, minlength=e.n_vertices) + np.bincount(e.end, minlength=e.n_vertices)
    values, counts = np.unique(degree[degree > 0], return_counts=True)
    histogram = dict(zip(values.tolist(), counts.tolist()))
    slope = fit_degree_slope(histogram)
    try:
        degree_on_count = fit_degree_on_count(histogram)
    except FitUndefined:
        degree_on_count = None
    return DegreeStats(histogram, slope, degree_on_count)


def key_width_for(n: int) -> int:
    """Digits needed to write n - 1 in decimal (at least 1)."""
    return len(str(max(n - 1, 0)))


def edges_to_assoc(e: EdgeList, key_width: int, collision: str = COLLISION_KEEP_LAST) -> AssocArray:
    """
    Adjacency array with A(pad(i), pad(j)) = 1 for every edge i -> j.

    Keys are zero-padded decimal strings of exactly ``key_width`` digits, so
    lexicographic order equals numeric order. With the default 'keep_last'
    policy duplicate edges collapse to a single 1; with 'sum' each value
    counts the edge's multiplicity.

    Raises:
        KeyEncodingError: If key_width is too small for N - 1
    """
    needed = key_width_for(e.n_vertices)
    if key_width < needed:
        raise KeyEncodingError(f'key_width {key_width} < {needed} digits needed for N={e.n_vertices}')
    rows = np.char.zfill(e.start.astype(str), key_width)
    cols = np.char.zfill(e.end.astype(str), key_width)
    return from_columns(rows, cols, np.ones(e.n_edges), collision=collision)


# Edge-list file format: header "N M", then one "start end" pair per line

def write_edge_list(path, e: EdgeList) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        np.savetxt(
            fh,
            np.column_stack((e.start, e.end)),
            fmt='%d',
            header=f'{e.n_vertices} {e.n_edges}',
            comments='',
        )
    return path


def read_edge_list(path) -> EdgeList:
    """
    Read an edge-list file written by write_edge_list.

    Raises:
        InvalidGeneratorConfig: Header missing, edge count or ids inconsistent
    """
    path = Path(path)
    with open(path, encoding='utf-8') as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidGeneratorConfig(f'{path}: header must be "N M"')
        n, m = int(header[0]), int(header[1])
        pairs = np.loadtxt(fh, dtype=np.int64, ndmin=2) if m else np.zeros((0, 2), dtype=np.int64)
    if pairs.shape != (m, 2):
        raise InvalidGeneratorConfig(f'{path}: expected {m} edges, found {pairs.shape[0]}')
    if m and (pairs.min() < 0 or pairs.max() >= n):
        raise InvalidGeneratorConfig(f'{path}: vertex id out of range [0, {n})')
    return EdgeList(n, pairs[:, 0].copy(), pairs[:, 1].copy())

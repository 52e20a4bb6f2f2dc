import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from bench.graph500 import (
    EdgeList,
    GeneratorConfig,
    degree_distribution,
    edges_to_assoc,
    fit_degree_on_count,
    fit_degree_slope,
    generate,
    key_width_for,
    read_edge_list,
    write_edge_list,
)
from bench.exceptions import FitUndefined, InvalidGeneratorConfig, KeyEncodingError

UNIFORM = (0.25, 0.25, 0.25, 0.25)


def edge_list(pairs, n):
    start, end = zip(*pairs) if pairs else ((), ())
    return EdgeList(n, np.array(start, dtype=np.int64), np.array(end, dtype=np.int64))


class GeneratorConfigTests(SimpleTestCase):
    """Test generator parameter validation"""

    def test_sizes(self):
        """Test N = 2^scale and M = 8N"""
        cfg = GeneratorConfig(scale=17)
        self.assertEqual(cfg.n_vertices, 131072)
        self.assertEqual(cfg.n_edges, 1048576)

    def test_invalid(self):
        """Test scale, probabilities and seed are checked"""
        with self.assertRaises(InvalidGeneratorConfig):
            GeneratorConfig(scale=0)
        with self.assertRaises(InvalidGeneratorConfig):
            GeneratorConfig(scale=4, rmat_probs=(0.5, 0.5, 0.5, 0.0))
        with self.assertRaises(InvalidGeneratorConfig):
            GeneratorConfig(scale=4, rmat_probs=(1.2, -0.2, 0.0, 0.0))
        with self.assertRaises(InvalidGeneratorConfig):
            GeneratorConfig(scale=4, seed=-1)
        with self.assertRaises(InvalidGeneratorConfig):
            GeneratorConfig(scale=4, seed=2 ** 64)

    def test_derive_extends_spawn_key(self):
        """Test derived configs differ only in their spawn key"""
        cfg = GeneratorConfig(scale=4, seed=3)
        self.assertEqual(cfg.derive(2, 5).spawn_key, (2, 5))
        self.assertEqual(cfg.derive(2).derive(5), cfg.derive(2, 5))


class GenerateTests(SimpleTestCase):
    """Test R-MAT edge generation"""

    def test_scale_one(self):
        """Test scale 1 gives 16 edges over ids {0, 1}"""
        e = generate(GeneratorConfig(scale=1, seed=4))
        self.assertEqual(e.n_vertices, 2)
        self.assertEqual(len(e), 16)
        self.assertTrue(set(e.start.tolist()) | set(e.end.tolist()) <= {0, 1})

    def test_scale_seventeen_sizes(self):
        """Test the full-size graph has exactly M edges with ids below N"""
        e = generate(GeneratorConfig(scale=17, seed=1))
        self.assertEqual(e.n_vertices, 131072)
        self.assertEqual(e.n_edges, 1048576)
        self.assertLess(int(max(e.start.max(), e.end.max())), 131072)
        self.assertGreaterEqual(int(min(e.start.min(), e.end.min())), 0)

    def test_deterministic(self):
        """Test identical configs give identical edges and derived streams differ"""
        cfg = GeneratorConfig(scale=8, seed=42)
        self.assertEqual(generate(cfg), generate(cfg))
        self.assertNotEqual(generate(cfg.derive(0)), generate(cfg.derive(1)))
        self.assertNotEqual(generate(cfg), generate(GeneratorConfig(scale=8, seed=43)))

    def test_uniform_quadrants(self):
        """Test uniform probabilities give binomial out-degrees and balanced bits"""
        cfg = GeneratorConfig(scale=10, rmat_probs=UNIFORM, seed=11, permute_vertices=False)
        e = generate(cfg)
        out_degree = np.bincount(e.start, minlength=cfg.n_vertices)
        self.assertEqual(out_degree.mean(), 8.0)
        sigma = np.sqrt(cfg.n_edges * (1 / cfg.n_vertices) * (1 - 1 / cfg.n_vertices))
        self.assertLess(np.abs(out_degree - 8.0).max(), 7 * sigma)
        bit_sigma = np.sqrt(0.25 / cfg.n_edges)
        for level in range(cfg.scale):
            for ids in (e.start, e.end):
                share = ((ids >> level) & 1).mean()
                self.assertLess(abs(share - 0.5), 5 * bit_sigma)

    def test_self_edges_redrawn(self):
        """Test keep_self_edges=False leaves no loops and keeps M exact"""
        e = generate(GeneratorConfig(scale=6, seed=2, keep_self_edges=False))
        self.assertFalse(np.any(e.start == e.end))
        self.assertEqual(e.n_edges, 512)

    def test_self_edges_kept(self):
        """Test the default keeps some diagonal entries"""
        e = generate(GeneratorConfig(scale=6, seed=2))
        self.assertTrue(np.any(e.start == e.end))

    def test_permutation_preserves_degrees(self):
        """Test relabeling does not change the degree histogram"""
        plain = generate(GeneratorConfig(scale=10, seed=5, permute_vertices=False))
        permuted = generate(GeneratorConfig(scale=10, seed=5, permute_vertices=True))
        self.assertEqual(degree_distribution(plain).histogram, degree_distribution(permuted).histogram)


class DegreeDistributionTests(SimpleTestCase):
    """Test degree histograms and the power-law fit"""

    def test_hand_count(self):
        """Test a -> b, a -> c gives {1: 2, 2: 1}"""
        stats = degree_distribution(edge_list([(0, 1), (0, 2)], 4))
        self.assertEqual(stats.histogram, {1: 2, 2: 1})

    def test_self_loop_counts_twice(self):
        """Test a self-loop adds 2 to its vertex"""
        stats = degree_distribution(edge_list([(0, 0), (1, 2)], 3))
        self.assertEqual(stats.histogram, {1: 2, 2: 1})

    def test_fit_undefined(self):
        """Test a single distinct degree cannot be fitted"""
        with self.assertRaises(FitUndefined):
            degree_distribution(edge_list([(0, 1)], 2))
        with self.assertRaises(FitUndefined):
            fit_degree_slope({})

    def test_synthetic_power_law(self):
        """Test an exact power law recovers its exponent"""
        histogram = {d: round(1e4 * d ** -0.62) for d in range(1, 101)}
        self.assertAlmostEqual(fit_degree_slope(histogram), -0.62, delta=0.02)

    def test_degree_on_count_exact_law(self):
        """Test the degree-on-count slope of an exact law is the reciprocal exponent"""
        histogram = {d: round(1e4 * d ** -0.62) for d in range(1, 101)}
        self.assertAlmostEqual(fit_degree_on_count(histogram), 1 / -0.62, delta=0.05)

        inverse = {round(1e4 * c ** -0.62): c for c in range(1, 101)}
        self.assertAlmostEqual(fit_degree_on_count(inverse), -0.62, delta=0.02)

    def test_degree_on_count_two_points(self):
        """Test 18884 leaves and one vertex of degree 447 give -0.62"""
        self.assertAlmostEqual(fit_degree_on_count({1: 18884, 447: 1}), -0.620, delta=0.001)

    def test_degree_on_count_equal_counts(self):
        """Test equal counts leave the degree-on-count slope undefined"""
        with self.assertRaises(FitUndefined):
            fit_degree_on_count({1: 2, 2: 2})
        stats = degree_distribution(edge_list([(0, 1), (2, 3), (0, 2)], 4))
        self.assertEqual(stats.histogram, {1: 2, 2: 2})
        self.assertIsNone(stats.degree_on_count_slope)
        self.assertAlmostEqual(stats.fitted_slope, 0.0)

    def test_histogram_sums(self):
        """Test counts stay within N and degrees sum to 2M"""
        e = generate(GeneratorConfig(scale=10, seed=8))
        stats = degree_distribution(e)
        self.assertLessEqual(sum(stats.histogram.values()), e.n_vertices)
        self.assertEqual(sum(d * c for d, c in stats.histogram.items()), 2 * e.n_edges)

    def test_skew_at_scale_fourteen(self):
        """Test both slopes are negative and the top vertex dwarfs the median"""
        stats = degree_distribution(generate(GeneratorConfig(scale=14, seed=3)))
        self.assertLess(stats.fitted_slope, 0)
        self.assertLess(stats.degree_on_count_slope, 0)
        self.assertGreater(stats.max_degree, 50 * stats.median_degree)

    def test_slope_at_scale_seventeen(self):
        """Test the degree-on-count slope over five seeds stays in [-0.85, -0.40]"""
        for seed in range(5):
            stats = degree_distribution(generate(GeneratorConfig(scale=17, seed=seed)))
            self.assertLess(stats.fitted_slope, stats.degree_on_count_slope, f'seed {seed}')
            slope = stats.degree_on_count_slope
            self.assertGreaterEqual(slope, -0.85, f'seed {seed}')
            self.assertLessEqual(slope, -0.40, f'seed {seed}')


class EdgesToAssocTests(SimpleTestCase):
    """Test adjacency arrays built from edges"""

    def test_single_edge(self):
        """Test (0, 1) with width 2 is A('00', '01') = 1"""
        A = edges_to_assoc(edge_list([(0, 1)], 16), 2)
        self.assertEqual(A.entries(), {('00', '01'): 1.0})

    def test_duplicates_collapse(self):
        """Test a repeated edge is stored once with value 1"""
        A = edges_to_assoc(edge_list([(3, 4), (3, 4)], 8), 1)
        self.assertEqual(A.entries(), {('3', '4'): 1.0})

    def test_sum_counts_multiplicity(self):
        """Test the sum policy counts repeated edges"""
        A = edges_to_assoc(edge_list([(3, 4), (3, 4), (1, 2)], 8), 1, collision='sum')
        self.assertEqual(A.entries(), {('1', '2'): 1.0, ('3', '4'): 2.0})

    def test_width_too_small(self):
        """Test a width below digits(N - 1) fails"""
        with self.assertRaises(KeyEncodingError):
            edges_to_assoc(edge_list([(0, 1)], 16), 1)

    def test_nnz_counts_distinct_edges(self):
        """Test nnz equals the number of distinct edges"""
        e = generate(GeneratorConfig(scale=8, seed=9))
        A = edges_to_assoc(e, key_width_for(e.n_vertices))
        self.assertEqual(A.nnz, len(set(e.pairs())))
        self.assertLessEqual(A.nnz, e.n_edges)

    def test_key_width(self):
        """Test digits of N - 1"""
        self.assertEqual(key_width_for(1), 1)
        self.assertEqual(key_width_for(10), 1)
        self.assertEqual(key_width_for(11), 2)
        self.assertEqual(key_width_for(131072), 6)


class EdgeListFileTests(SimpleTestCase):
    """Test the edge-list file format"""

    def test_header_and_round_trip(self):
        """Test the header line and reading the file back"""
        e = generate(GeneratorConfig(scale=4, seed=1))
        with tempfile.TemporaryDirectory() as tmp:
            path = write_edge_list(Path(tmp) / 'g.el', e)
            self.assertEqual(path.read_text().splitlines()[0], '16 128')
            self.assertEqual(read_edge_list(path), e)

    def test_same_seed_same_bytes(self):
        """Test two writes of one config are byte-identical"""
        cfg = GeneratorConfig(scale=5, seed=7)
        with tempfile.TemporaryDirectory() as tmp:
            first = write_edge_list(Path(tmp) / 'a.el', generate(cfg))
            second = write_edge_list(Path(tmp) / 'b.el', generate(cfg))
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_bad_file(self):
        """Test a truncated edge list is rejected"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.el'
            path.write_text('16 3\n0 1\n')
            with self.assertRaises(InvalidGeneratorConfig):
                read_edge_list(path)

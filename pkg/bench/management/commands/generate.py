"""Generate one Graph500 R-MAT base graph and write it as an edge list."""
from pathlib import Path

from bench.cli import BenchCommand
from bench.constants import DEFAULT_EDGE_FACTOR, MESSAGES
from bench.graph500 import GeneratorConfig, generate, write_edge_list


class Command(BenchCommand):
    help = 'Generate a Graph500 R-MAT edge list (N = 2^scale vertices, M = edge_factor * N edges)'

    def add_arguments(self, parser):
        parser.add_argument('--scale', type=int, required=True, help='Graph500 SCALE')
        parser.add_argument('--seed', type=int, default=0, help='Random seed')
        parser.add_argument('--edge-factor', type=int, default=DEFAULT_EDGE_FACTOR, help='Edges per vertex')
        parser.add_argument('--no-permute', action='store_true', help='Keep R-MAT vertex labels')
        parser.add_argument('--out', required=True, help='Edge-list file to write')

    def run(self, **options):
        cfg = GeneratorConfig(
            scale=options['scale'],
            edge_factor=options['edge_factor'],
            seed=options['seed'],
            permute_vertices=not options['no_permute'],
        )
        edges = generate(cfg)
        path = write_edge_list(Path(options['out']), edges)
        self.stdout.write(self.style.SUCCESS(
            MESSAGES['generated'].format(path=path, n=edges.n_vertices, m=edges.n_edges)
        ))

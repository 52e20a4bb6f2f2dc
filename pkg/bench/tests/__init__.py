# Test suite for the ingest benchmark
#
# Test files:
# - test_assoc.py: Associative arrays (construction, queries, algebra, triple files)
# - test_graph500.py: R-MAT generation, degree histogram and slope fits, edge-list files
# - test_store.py: Simulated tablet store (splits, balancer, batch writer, scans, compactions)
# - test_ingest.py: SPMD setup and ingest phases, scaling curves, verification checks
# - test_commands.py: generate, bench, sweep and verify management commands

"""
Django App configuration for the ingest benchmark.

The app carries the benchmark code, the run ledger model and the
``generate``, ``bench``, ``sweep`` and ``verify`` management commands.
"""
from django.apps import AppConfig


class BenchConfig(AppConfig):
    """
    Configuration class for the benchmark application.

    Attributes:
        default_auto_field: Type of primary key to use (BigAutoField)
        name: Application name ('bench')
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'bench'
    verbose_name = 'Ingest benchmark'

"""
Django models for the ingest benchmark.

Only run metadata is persisted; tables, tablets and associative arrays live
in memory for the duration of a run.
- BenchmarkRun: one ``bench``, ``sweep`` or ``verify`` invocation and its outcome
"""
from django.db import models


class BenchmarkRun(models.Model):
    """
    Ledger entry for one benchmark command.

    Attributes:
        created_at (DateTimeField): When the run was recorded
        command (CharField): Management command that produced the run
        manifest (JSONField): Serialized RunManifest; enough to repeat the run
        total_inserts (BigIntegerField): Entries inserted across all workers
        aggregate_rate (FloatField): Total inserts over simulated makespan
        wall_seconds (FloatField): Simulated makespan of the execution phase
        verification_passed (BooleanField): Outcome of the verification checks
        output_dir (CharField): Directory holding the run's files
    """
    COMMAND_CHOICES = [
        ('bench', 'Bench'),
        ('sweep', 'Sweep'),
        ('verify', 'Verify'),
    ]

    created_at = models.DateTimeField(auto_now_add=True)
    command = models.CharField(max_length=10, choices=COMMAND_CHOICES)
    manifest = models.JSONField(default=dict)
    total_inserts = models.BigIntegerField(default=0)
    aggregate_rate = models.FloatField(default=0.0)
    wall_seconds = models.FloatField(default=0.0)
    verification_passed = models.BooleanField(default=False)
    output_dir = models.CharField(max_length=500, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        """
        Return a one-line summary of the run.

        Returns:
            str: e.g. "bench #3: 8192 inserts (pass)"
        """
        outcome = 'pass' if self.verification_passed else 'fail'
        return f'{self.command} #{self.pk}: {self.total_inserts} inserts ({outcome})'

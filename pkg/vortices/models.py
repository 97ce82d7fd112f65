"""
Models for the Cylinder Vortex simulator.

This module defines the run registry: one SimulationRun row per invocation
of the runner, pointing at the run directory and its manifest. The
numerical state itself lives in files, not in the database.
"""

from django.db import models
from django.utils import timezone


# ==============================================================================
# Simulation Run Registry
# ==============================================================================

class SimulationRun(models.Model):
    """
    A simulation, bound replay or report run.
    Created when a run starts and updated when it finishes.
    """
    MODE_EULER = 'euler'
    MODE_NS = 'ns'
    MODE_BOUND_REPLAY = 'bound_replay'
    MODE_REPORT = 'report'
    MODE_CHOICES = [
        (MODE_EULER, 'Euler (inviscid)'),
        (MODE_NS, 'Navier-Stokes (random vortex)'),
        (MODE_BOUND_REPLAY, 'Bound replay'),
        (MODE_REPORT, 'Confinement report'),
    ]

    STATUS_RUNNING = 'running'
    STATUS_COMPLETE = 'complete'
    STATUS_INCOMPLETE = 'incomplete'
    STATUS_CHOICES = [
        (STATUS_RUNNING, 'Running'),
        (STATUS_COMPLETE, 'Complete'),
        (STATUS_INCOMPLETE, 'Incomplete'),
    ]

    mode = models.CharField(max_length=20, choices=MODE_CHOICES)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default=STATUS_RUNNING)
    output_dir = models.CharField(max_length=500, help_text="Directory holding the run artifacts")
    manifest_path = models.CharField(max_length=500, blank=True)
    config = models.JSONField(default=dict, help_text="Validated run configuration")
    exit_code = models.IntegerField(null=True, blank=True)
    created_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = "Simulation Run"
        verbose_name_plural = "Simulation Runs"

    def __str__(self):
        return f"{self.get_mode_display()} run {self.pk} ({self.status})"

    @property
    def duration(self):
        """Wall-clock duration, or None while running."""
        if self.finished_at is None:
            return None
        return self.finished_at - self.created_at

    def mark_finished(self, exit_code):
        self.exit_code = exit_code
        self.status = self.STATUS_COMPLETE if exit_code == 0 else self.STATUS_INCOMPLETE
        self.finished_at = timezone.now()
        self.save(update_fields=['exit_code', 'status', 'finished_at'])

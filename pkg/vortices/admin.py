"""
Django Admin configuration for the Vortices app.

Runs are created by the runner; the admin is a read-only registry.
"""

from django.contrib import admin

from .models import SimulationRun


@admin.register(SimulationRun)
class SimulationRunAdmin(admin.ModelAdmin):
    """Admin configuration for SimulationRun model."""
    list_display = ['id', 'mode', 'status', 'exit_code', 'output_dir', 'created_at', 'finished_at']
    list_filter = ['mode', 'status']
    search_fields = ['output_dir']
    ordering = ['-created_at']
    readonly_fields = ['mode', 'status', 'output_dir', 'manifest_path', 'config',
                       'exit_code', 'created_at', 'finished_at']
    fieldsets = (
        ('Run', {
            'fields': ('mode', 'status', 'exit_code')
        }),
        ('Artifacts', {
            'fields': ('output_dir', 'manifest_path')
        }),
        ('Configuration', {
            'fields': ('config',),
            'classes': ('collapse',)
        }),
        ('Timestamps', {
            'fields': ('created_at', 'finished_at')
        }),
    )

    def has_add_permission(self, request):
        """Runs are registered by the runner only."""
        return False

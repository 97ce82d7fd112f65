from django.apps import AppConfig


class VorticesConfig(AppConfig):
    """Configuration for the Vortices app."""
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'vortices'
    verbose_name = 'Cylinder Vortex Simulations'

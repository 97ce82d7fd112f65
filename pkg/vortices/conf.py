"""
Access to simulator settings.

The numerical modules are usable outside a configured Django project
(notebooks, scripts); settings fall back to the given defaults there.
"""

from django.core.exceptions import ImproperlyConfigured


def get_setting(name, default):
    """Return ``settings.<name>``, or ``default`` if absent or unconfigured."""
    try:
        from django.conf import settings
        return getattr(settings, name, default)
    except ImproperlyConfigured:
        return default

"""
WSGI config for cylinder_flow project.

Serves the read-only run registry (admin, run listings, diagnostics exports).

It exposes the WSGI callable as a module-level variable named ``application``.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'cylinder_flow.settings')

application = get_wsgi_application()

"""
WSGI config for the PhaseLab project.

It exposes the WSGI callable as a module-level variable named ``application``;
the only route served is the snapshot validation endpoint.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'phaselab.settings')

application = get_wsgi_application()

"""
WSGI config for the kahler-bounds-lab project.

Only the admin is served; it lists the recorded experiment runs.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.production")

application = get_wsgi_application()

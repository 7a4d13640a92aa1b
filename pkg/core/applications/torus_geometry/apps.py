from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class TorusGeometryConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.torus_geometry"
    verbose_name = _("Torus geometry")

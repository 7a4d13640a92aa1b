from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class LabCliConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.lab_cli"
    verbose_name = _("Lab")

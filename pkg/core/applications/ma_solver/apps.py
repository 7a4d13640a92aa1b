from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class MaSolverConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.ma_solver"
    verbose_name = _("Monge-Ampere solver")

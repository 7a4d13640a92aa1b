from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class NonlinearOperatorsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.nonlinear_operators"
    verbose_name = _("Nonlinear operators")

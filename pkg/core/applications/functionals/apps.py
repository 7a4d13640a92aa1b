from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class FunctionalsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.functionals"
    verbose_name = _("Functionals")

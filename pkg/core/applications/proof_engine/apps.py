from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class ProofEngineConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "core.applications.proof_engine"
    verbose_name = _("Proof engine")

from django.db import models
from django.utils.translation import gettext_lazy as _


class OperatorKind(models.TextChoices):
    MONGE_AMPERE = "monge_ampere", _("Complex Monge-Ampere")
    HESSIAN = "hessian", _("Complex Hessian (sigma_k)")
    P_MONGE_AMPERE = "p_monge_ampere", _("p-Monge-Ampere")


class ConeKind(models.TextChoices):
    GAMMA_K = "gamma_k", _("Gamma_k cone")
    PMA = "pma", _("p-Monge-Ampere cone")


class Measure(models.TextChoices):
    """Reference measures a scalar field can be integrated against."""

    BACKGROUND = "omega_x", _("omega_X^n")
    DENSITY = "density", _("e^{nF} omega_X^n")
    SOLUTION = "omega_phi", _("omega_phi^n")


class LevelDirection(models.TextChoices):
    SUBLEVEL = "sublevel", _("Sublevel {phi < -s}")
    SUPERLEVEL = "superlevel", _("Superlevel {u > s}")


class LabCommand(models.TextChoices):
    VERIFY_OPERATOR = "verify-operator", _("Verify operator")
    SWEEP = "sweep", _("Degenerating background sweep")
    PROOF_AUDIT = "proof-audit", _("Proof audit")
    COUPLED_CHECK = "coupled-check", _("Coupled system check")
    SOLVE_MA = "solve-ma", _("Solve Monge-Ampere")


class ExitCode(models.IntegerChoices):
    PASSED = 0, _("All checks passed")
    BOUND_VIOLATION = 1, _("Bound violation")
    CONFIG_ERROR = 2, _("Configuration error")
    SOLVER_FAILURE = 3, _("Solver failure")


class Provenance(models.TextChoices):
    """Where a ledger constant comes from."""

    FORMULA = "formula", _("Explicit formula")
    MEASURED = "measured", _("Measured on computed data")
    CONFIGURED = "configured", _("Configuration value")
    SEARCHED = "searched", _("Numerical search")


class DispatchBackend(models.TextChoices):
    LOCAL = "local", _("In-process")
    CELERY = "celery", _("Celery workers")

import auto_prefetch
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.helper.enums import ExitCode
from core.helper.enums import LabCommand
from core.helper.models import TimeStampedModel


class ExperimentRun(TimeStampedModel):
    """
    One invocation of a lab command. Timestamps live here and never in the
    emitted report files.
    """

    command = models.CharField(
        max_length=32,
        choices=LabCommand.choices,
        verbose_name=_("Command"),
    )
    seed = models.BigIntegerField(
        verbose_name=_("Seed"),
        help_text=_("Sampling seed every random draw of the run flows from"),
    )
    config_digest = models.CharField(
        max_length=64,
        verbose_name=_("Config digest"),
        help_text=_("sha256 of the canonical experiment config"),
    )
    output_dir = models.CharField(
        max_length=500,
        verbose_name=_("Output directory"),
    )
    exit_code = models.PositiveSmallIntegerField(
        choices=ExitCode.choices,
        default=ExitCode.PASSED,
        verbose_name=_("Exit code"),
    )
    verdict = models.JSONField(
        default=dict,
        blank=True,
        verbose_name=_("Verdict"),
    )

    class Meta(auto_prefetch.Model.Meta):
        db_table = "experiment_runs"
        verbose_name = _("Experiment Run")
        verbose_name_plural = _("Experiment Runs")
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.command} (seed {self.seed}, exit {self.exit_code})"

    @property
    def passed(self) -> bool:
        return self.exit_code == ExitCode.PASSED

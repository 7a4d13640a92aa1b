import json
from pathlib import Path

from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from core.applications.lab_cli.runners import run_command
from core.applications.lab_cli.services import load_experiment_config
from core.helper.custom_exceptions import LabException
from core.helper.enums import ExitCode
from core.helper.enums import LabCommand


class Command(BaseCommand):
    help = "Run a lab experiment: verify-operator, sweep, proof-audit, coupled-check or solve-ma."

    def add_arguments(self, parser):
        parser.add_argument("subcommand", choices=LabCommand.values)
        parser.add_argument("--config", type=Path, default=None, help="JSON or TOML experiment config")
        parser.add_argument("--seed", type=int, default=None, help="override sampling.seed")
        parser.add_argument("--out", type=Path, default=None, help="output root (default LAB_OUTPUT_ROOT)")
        parser.add_argument("--grid", type=int, default=None, help="override grid.N")
        parser.add_argument("--jobs", type=int, default=None, help="parallel local jobs")

    def handle(self, *args, **options):
        try:
            config = load_experiment_config(
                options["config"],
                seed=options["seed"],
                out=options["out"],
                grid=options["grid"],
                jobs=options["jobs"],
            )
            outcome = run_command(options["subcommand"], config)
        except LabException as exc:
            self.stderr.write(json.dumps(exc.as_dict(), default=str))
            raise CommandError(exc.detail, returncode=int(exc.exit_code)) from exc

        self.stdout.write(json.dumps(outcome.dict_plain(), indent=2))
        if outcome.exit_code != ExitCode.PASSED:
            msg = f"{outcome.command.value} finished with exit code {outcome.exit_code}"
            raise CommandError(msg, returncode=outcome.exit_code)
        self.stdout.write(self.style.SUCCESS(f"{outcome.command.value}: all checks passed"))

from django.contrib import admin

from core.applications.lab_cli.models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ["command", "seed", "exit_code", "config_digest", "created_at"]
    list_filter = ["command", "exit_code"]
    search_fields = ["config_digest", "output_dir"]
    readonly_fields = ["verdict", "created_at", "updated_at"]

# Generated by Django 5.2.8 on 2026-10-19 09:00

import core.helper.models
import django.db.models.manager
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.CharField(default=core.helper.models.generate_uuid, editable=False, max_length=32, primary_key=True, serialize=False, unique=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('command', models.CharField(choices=[('verify-operator', 'Verify operator'), ('sweep', 'Degenerating background sweep'), ('proof-audit', 'Proof audit'), ('coupled-check', 'Coupled system check'), ('solve-ma', 'Solve Monge-Ampere')], max_length=32, verbose_name='Command')),
                ('seed', models.BigIntegerField(help_text='Sampling seed every random draw of the run flows from', verbose_name='Seed')),
                ('config_digest', models.CharField(help_text='sha256 of the canonical experiment config', max_length=64, verbose_name='Config digest')),
                ('output_dir', models.CharField(max_length=500, verbose_name='Output directory')),
                ('exit_code', models.PositiveSmallIntegerField(choices=[(0, 'All checks passed'), (1, 'Bound violation'), (2, 'Configuration error'), (3, 'Solver failure')], default=0, verbose_name='Exit code')),
                ('verdict', models.JSONField(blank=True, default=dict, verbose_name='Verdict')),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'db_table': 'experiment_runs',
                'ordering': ['-created_at'],
                'abstract': False,
                'base_manager_name': 'prefetch_manager',
            },
            managers=[
                ('objects', django.db.models.manager.Manager()),
                ('prefetch_manager', django.db.models.manager.Manager()),
            ],
        ),
    ]

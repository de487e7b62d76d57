# Generated by Django 5.1.1 on 2026-10-17 09:12

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment', models.CharField(help_text='EXAMPLE, EX1, EX2, EX3 or BENCHMARK', max_length=32)),
                ('seed', models.PositiveIntegerField(default=0)),
                ('iterations', models.PositiveIntegerField(default=1)),
                ('repetitions', models.PositiveIntegerField(default=1)),
                ('config', models.JSONField(default=dict, help_text='Resolved run configuration')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at', '-id'],
                'indexes': [models.Index(fields=['experiment'], name='evaluation__experim_5c1f0e_idx')],
            },
        ),
        migrations.CreateModel(
            name='AucResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('source', models.CharField(blank=True, max_length=128)),
                ('dataset', models.CharField(max_length=255)),
                ('iteration', models.PositiveIntegerField(default=0)),
                ('repetition', models.PositiveIntegerField(default=0)),
                ('method', models.CharField(max_length=64)),
                ('auc', models.FloatField(validators=[django.core.validators.MinValueValidator(0.0), django.core.validators.MaxValueValidator(1.0)])),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='evaluation_app.experimentrun')),
            ],
            options={
                'ordering': ['run', 'iteration', 'repetition', 'dataset', 'method'],
                'constraints': [models.UniqueConstraint(fields=('run', 'dataset', 'method'), name='unique_auc_per_cell')],
            },
        ),
    ]

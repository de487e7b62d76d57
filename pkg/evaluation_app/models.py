"""
Stored experiment runs.

CSV files are the canonical outputs of every command; these tables keep
a queryable history of runs saved with ``--save``.
"""
from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models


class ExperimentRun(models.Model):
    """
    One invocation of the experiment or benchmark command.
    """
    experiment = models.CharField(
        max_length=32,
        help_text="EXAMPLE, EX1, EX2, EX3 or BENCHMARK"
    )
    seed = models.PositiveIntegerField(default=0)
    iterations = models.PositiveIntegerField(default=1)
    repetitions = models.PositiveIntegerField(default=1)
    config = models.JSONField(
        default=dict,
        help_text="Resolved run configuration"
    )
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at", "-id"]
        indexes = [
            models.Index(fields=["experiment"], name="evaluation__experim_5c1f0e_idx"),
        ]

    def __str__(self):
        return f"{self.experiment} (seed {self.seed}, {self.iterations}x{self.repetitions})"

    def mean_auc_by_method(self):
        """Pooled mean AUC per method for this run."""
        rows = self.results.values("method").annotate(mean_auc=models.Avg("auc"))
        return {row["method"]: row["mean_auc"] for row in rows}


class AucResult(models.Model):
    """
    AUC of one ensemble method on one generated or benchmark dataset.
    """
    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name="results",
    )
    source = models.CharField(max_length=128, blank=True)
    dataset = models.CharField(max_length=255)
    iteration = models.PositiveIntegerField(default=0)
    repetition = models.PositiveIntegerField(default=0)
    method = models.CharField(max_length=64)
    auc = models.FloatField(
        validators=[MinValueValidator(0.0), MaxValueValidator(1.0)]
    )

    class Meta:
        ordering = ["run", "iteration", "repetition", "dataset", "method"]
        constraints = [
            models.UniqueConstraint(
                fields=["run", "dataset", "method"], name="unique_auc_per_cell"
            ),
        ]

    def __str__(self):
        return f"{self.method} on {self.dataset}: {self.auc:.4f}"

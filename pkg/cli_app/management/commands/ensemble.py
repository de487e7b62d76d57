from pathlib import Path

from cli_app import services
from cli_app.management.base import EnsembleCommand


class Command(EnsembleCommand):
    help = "Combine a score matrix with one ensemble method or all seven."

    def add_arguments(self, parser):
        parser.add_argument('scores', type=Path, help="Score matrix CSV written by detect.")
        parser.add_argument(
            '--method', default=services.ALL_METHODS,
            help="all, irt, average, greedy, greedy-avg, icwa, max or thresh (default all).",
        )
        parser.add_argument(
            '--output', type=Path, help="Ensemble CSV (default <out-dir>/<name>_ensemble.csv)."
        )
        super().add_arguments(parser)

    def run(self, cfg, **options):
        path, summary = services.ensemble(
            options['scores'], options['method'], cfg, options.get('output')
        )
        self.stdout.write(self.style.SUCCESS(f"Wrote ensemble scores to {path}"))
        if summary is not None:
            self.stdout.write(f"AUC summary updated in {summary}")

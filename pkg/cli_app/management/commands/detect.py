from pathlib import Path

from cli_app import services
from cli_app.management.base import EnsembleCommand


class Command(EnsembleCommand):
    help = "Score a dataset CSV with the seven nearest-neighbor detectors."

    def add_arguments(self, parser):
        parser.add_argument(
            'dataset', type=Path, help="Dataset CSV, optional final 'label' column."
        )
        parser.add_argument(
            '--output', type=Path, help="Scores CSV (default <out-dir>/<name>_scores.csv)."
        )
        super().add_arguments(parser)

    def run(self, cfg, **options):
        path = services.detect(options['dataset'], cfg, options.get('output'))
        self.stdout.write(self.style.SUCCESS(f"Wrote detector scores to {path}"))

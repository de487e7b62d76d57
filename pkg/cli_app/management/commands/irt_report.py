from pathlib import Path

from cli_app import services
from cli_app.management.base import EnsembleCommand


class Command(EnsembleCommand):
    help = "Fit the IRT model to a score matrix and export item parameters and traits."

    def add_arguments(self, parser):
        parser.add_argument('scores', type=Path, help="Score matrix CSV written by detect.")
        super().add_arguments(parser)

    def run(self, cfg, **options):
        items, theta = services.irt_report(options['scores'], cfg)
        self.stdout.write(self.style.SUCCESS(f"Wrote {items} and {theta}"))

from pathlib import Path

from cli_app import services
from cli_app.management.base import EnsembleCommand
from evaluation_app.services import save_report
from evaluation_app.stats import method_means


class Command(EnsembleCommand):
    help = (
        "Score every labeled CSV in a directory with all ensembles and summarize "
        "best-method proportions, top-2 significance and detector correlations."
    )

    def add_arguments(self, parser):
        parser.add_argument('directory', type=Path, help="Directory of <source>_<name>.csv files.")
        parser.add_argument(
            '--no-plots', dest='plots', action='store_false', help="Skip the SVG plots."
        )
        parser.add_argument('--save', action='store_true', help="Store the report in the database.")
        super().add_arguments(parser)

    def run(self, cfg, **options):
        report, correlations = services.run_benchmark(options['directory'], cfg)
        paths = services.write_benchmark(report, correlations, cfg, with_plots=options['plots'])

        for method, value in method_means(report).items():
            self.stdout.write(f"{method:<20} {value:.4f}")
        if options['save']:
            run = save_report(report, 'BENCHMARK', seed=cfg.seed, config=cfg.as_dict())
            self.stdout.write(f"Saved as run {run.pk}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {paths['report']}"))

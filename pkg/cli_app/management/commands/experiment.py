from cli_app import services
from cli_app.management.base import EnsembleCommand
from evaluation_app.services import save_report
from evaluation_app.stats import method_means
from synth_app.generators import EXAMPLE, EXPERIMENTS, ExperimentSpec


class Command(EnsembleCommand):
    help = "Run a synthetic experiment grid and write its AUC report, t-tests and plot."

    def add_arguments(self, parser):
        parser.add_argument('experiment', type=str.upper, choices=EXPERIMENTS)
        parser.add_argument('--iterations', type=int, default=10)
        parser.add_argument('--repetitions', type=int, default=10)
        parser.add_argument(
            '--greedy-kappa-sweep', dest='kappa_sweep', action='store_true',
            help="Also report Greedy with kappa = 3 and kappa = 10 (annulus example).",
        )
        parser.add_argument(
            '--no-plots', dest='plots', action='store_false', help="Skip the SVG plot."
        )
        parser.add_argument('--save', action='store_true', help="Store the report in the database.")
        super().add_arguments(parser)

    def run(self, cfg, **options):
        spec = ExperimentSpec(
            options['experiment'],
            iterations=options['iterations'],
            repetitions=options['repetitions'],
            seed=cfg.seed,
        )
        sweep = options['kappa_sweep'] or spec.experiment == EXAMPLE
        report = services.run_experiment(spec, cfg, kappa_sweep=sweep)
        paths = services.write_experiment(report, spec, cfg, with_plots=options['plots'])

        for method, value in method_means(report).items():
            self.stdout.write(f"{method:<20} {value:.4f}")
        if options['save']:
            run = save_report(
                report,
                spec.experiment,
                seed=spec.seed,
                iterations=spec.iterations,
                repetitions=spec.repetitions,
                config=cfg.as_dict(),
            )
            self.stdout.write(f"Saved as run {run.pk}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {paths['report']}"))

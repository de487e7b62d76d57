from cli_app import services
from cli_app.management.base import EnsembleCommand


class Command(EnsembleCommand):
    help = "Count false positives of the top-2 t-test on simulated equal-performance methods."

    def add_arguments(self, parser):
        parser.add_argument('--sources', type=int, default=1190, help="Dataset sources.")
        parser.add_argument('--datasets', type=int, default=100, help="Datasets per source.")
        parser.add_argument('--methods', type=int, default=7, help="Competing methods.")
        parser.add_argument('--reps', type=int, default=30, help="Simulation replicates.")
        super().add_arguments(parser)

    def run(self, cfg, **options):
        path, mean, sd = services.fp_sim(
            cfg, options['sources'], options['datasets'], options['methods'], options['reps']
        )
        self.stdout.write(f"False positives per replicate: mean {mean:.2f}, SD {sd:.2f}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))

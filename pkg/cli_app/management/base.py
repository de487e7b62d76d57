"""
Shared base for the irtensemble management commands.

Adds the run-configuration flags, builds the RunConfig and maps domain
errors onto exit codes: 1 for rejected input, 2 for numerical failure.
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from cli_app.config import build_config
from scoring_app.exceptions import InputError, NumericalError

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 1
EXIT_NUMERICAL_ERROR = 2


class EnsembleCommand(BaseCommand):
    """
    Subclasses implement ``run(cfg, **options)``.
    """

    def add_arguments(self, parser):
        group = parser.add_argument_group('run configuration')
        group.add_argument('--config', help="key=value file; flags override its entries.")
        group.add_argument(
            '--regime', choices=['t1', 't2'], help="Neighborhood regime (default t1)."
        )
        group.add_argument('--k', type=int, help="Explicit k for LOF, COF, INFLO, LDF and LDOF.")
        group.add_argument('--k-min', dest='k_min', type=int, help="Lower k for KNN-AGG and KDEOS.")
        group.add_argument('--k-max', dest='k_max', type=int, help="Upper k for KNN-AGG and KDEOS.")
        group.add_argument('--algorithm', choices=['brute', 'kd_tree'], help="Neighbor search.")
        group.add_argument('--seed', type=int, help="Base seed (default 0).")
        group.add_argument('--epsilon', type=float, help="Normalization margin (default 0.005).")
        group.add_argument('--kappa', type=int, help="Expected anomalies for Greedy (default 5).")
        group.add_argument(
            '--kappa-range',
            dest='kappa_range',
            help="Inclusive kappa range for Greedy-Avg, e.g. 1-10.",
        )
        group.add_argument('--max-iter', dest='max_iter', type=int, help="EM iteration cap.")
        group.add_argument('--tol', type=float, help="EM parameter-change tolerance.")
        group.add_argument(
            '--strict', action='store_const', const=True, default=None,
            help="Treat a non-converged IRT fit as an error (exit code 2).",
        )
        group.add_argument('--out-dir', dest='out_dir', help="Directory for all outputs.")
        group.add_argument('--jobs', type=int, help="Worker processes; -1 uses every core.")

    def handle(self, *args, **options):
        try:
            cfg = build_config(options.get('config'), options)
            return self.run(cfg, **options)
        except InputError as exc:
            logger.error("%s", exc)
            raise CommandError(str(exc), returncode=EXIT_INPUT_ERROR) from exc
        except NumericalError as exc:
            logger.error("%s", exc)
            raise CommandError(str(exc), returncode=EXIT_NUMERICAL_ERROR) from exc

    def run(self, cfg, **options):
        raise NotImplementedError('subclasses of EnsembleCommand must provide a run() method')

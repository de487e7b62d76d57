import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from django.test import SimpleTestCase
from scipy.special import expit
from scipy.stats import rankdata

from detector_app.detectors import (
    DETECTOR_NAMES,
    INFLO,
    KDEOS,
    KNN_AGG,
    LDF,
    LDOF,
    LOF,
    DetectorConfig,
)
from detector_app.services import run_all
from irt_app.crm import FitConfig, latent_trait
from irt_app.services import IRT, export_model, fit_scores, irt_ensemble, items_frame
from scoring_app.domain import NormalizedScores, ScoreMatrix
from scoring_app.utils import normalize_columns, to_logit
from synth_app.generators import (
    draw_items,
    gen_ex1,
    gen_ex2,
    gen_ex3,
    gen_example,
    simulate_crm,
)

EPSILON = 0.005
SHARP = (KNN_AGG, LOF, LDF)
NOISY = (INFLO, KDEOS, LDOF)


def _scores(seed=0, n_obs=80):
    rng = np.random.default_rng(seed)
    trait = rng.normal(size=n_obs)
    columns = [np.exp(0.8 * trait + rng.normal(scale=s, size=n_obs)) for s in (0.2, 0.4, 0.6, 1.5)]
    return ScoreMatrix(scores=np.column_stack(columns), detector_names=('a', 'b', 'c', 'd'))


def _boundary_scores(seed):
    """
    96 ordinary rows, 3 planted anomalies and, last, one boundary row that
    only the noisy detectors score high. Columns follow DETECTOR_NAMES.
    """
    rng = np.random.default_rng(seed)
    noise = np.array([0.3, 0.3, 0.5, 2.0, 2.0, 0.3, 2.0])
    trait = np.concatenate([rng.normal(size=96), rng.normal(4.5, 0.3, size=3)])
    z = -2.0 + 0.9 * trait[:, None] + rng.normal(size=(99, 7)) * noise
    boundary = [0.48, 0.56, 0.62, 1.0, 0.98, 0.74, 1.0]
    values = np.clip(np.vstack([expit(z), boundary]), EPSILON, 1.0 - EPSILON)
    return NormalizedScores(values=values, epsilon=EPSILON, detector_names=DETECTOR_NAMES)


def _detector_scores(ds):
    return run_all(ds, DetectorConfig.for_regime('t1', ds.n_obs))


class IrtEnsembleTests(SimpleTestCase):
    """
    Tests for irt_ensemble and the model export.
    """
    def test_result_carries_item_table(self):
        """Test that the IRT result carries the item parameters and convergence flag."""
        m = _scores()
        result = irt_ensemble(m)
        self.assertEqual(result.method, IRT)
        self.assertEqual(len(result), m.n_obs)
        self.assertEqual(set(result.params['alpha']), {'a', 'b', 'c', 'd'})
        self.assertTrue(result.params['converged'])

    def test_noisy_detector_is_discounted(self):
        """Test that the noisiest detector gets the smallest discrimination."""
        alpha = irt_ensemble(_scores()).params['alpha']
        self.assertGreater(abs(alpha['a']), abs(alpha['d']))

    def test_identical_columns_keep_their_ranking(self):
        """Test that identical detectors keep their shared ranking."""
        column = np.random.default_rng(4).gamma(2.0, size=60)
        m = ScoreMatrix(scores=np.column_stack([column] * 3), detector_names=('x', 'y', 'z'))
        np.testing.assert_array_equal(rankdata(irt_ensemble(m).scores), rankdata(column))

    def test_tied_observations_stay_tied(self):
        """Test that identical rows get identical traits."""
        scores = _scores().scores.copy()
        scores[5] = scores[9]
        theta = irt_ensemble(ScoreMatrix(scores=scores, detector_names=('a', 'b', 'c', 'd'))).scores
        self.assertEqual(theta[5], theta[9])

    def test_export_matches_recomputation(self):
        """Test that exported files match the items and recomputed traits."""
        m = _scores(seed=2)
        model = fit_scores(m)
        with tempfile.TemporaryDirectory() as tmp:
            items_path, theta_path = export_model(model, Path(tmp) / 'fit')
            items = pd.read_csv(items_path)
            theta = pd.read_csv(theta_path, float_precision='round_trip')['theta'].to_numpy()
        self.assertEqual(list(items.columns), ['detector', 'alpha', 'beta', 'gamma', 'omega'])
        self.assertEqual(len(items), 4)
        self.assertTrue((items['alpha'] * items['gamma'] > 0).all())
        z = to_logit(normalize_columns(m))
        np.testing.assert_array_equal(theta, latent_trait(z, model.items))

    def test_items_frame_omega_sums_with_gamma(self):
        """Test the omega column of the item frame."""
        frame = items_frame(fit_scores(_scores(seed=3)))
        weights = frame['alpha'] ** 2
        np.testing.assert_allclose(frame['omega'], weights * frame['gamma'] / weights.sum())


@pytest.mark.slow
class AnnulusExampleTests(SimpleTestCase):
    """
    The three centre anomalies of the annulus example receive the highest traits.
    """
    def test_planted_anomalies_rank_first(self):
        """Test that the three centre anomalies get the highest traits in most repetitions."""
        hits = 0
        for repetition in range(10):
            ds = gen_example(seed=7, repetition=repetition)
            theta = irt_ensemble(run_all(ds, DetectorConfig.for_regime('t1', ds.n_obs))).scores
            top = set(np.argsort(-theta, kind='stable')[:3])
            hits += top == set(np.flatnonzero(ds.labels))
        self.assertGreaterEqual(hits, 8)


class BoundaryDiscountTests(SimpleTestCase):
    """
    Tests for discounting detectors with low discrimination.
    """
    def test_noisy_detectors_cannot_lift_a_boundary_point(self):
        """Test that a row scored high only by noisy detectors ranks below the anomalies."""
        for seed in range(5):
            m = _boundary_scores(seed)
            result = irt_ensemble(m, EPSILON)
            alpha = {name: abs(value) for name, value in result.params['alpha'].items()}
            self.assertLess(max(alpha[name] for name in NOISY), min(alpha[name] for name in SHARP))
            ranks = rankdata(result.scores)
            self.assertLess(ranks[-1], ranks[96:99].min(), msg=f"seed {seed}")
            # an unweighted mean still puts the row well above a typical one
            self.assertGreater(m.values[-1].mean(), np.median(m.values[:96].mean(axis=1)))


class SignFlipTests(SimpleTestCase):
    """
    Tests for a reversed detector column.
    """
    def test_reversed_column_keeps_the_trait(self):
        """Test that replacing one normalized column x by 1 - x leaves the trait in place."""
        for seed in range(10):
            z, _ = simulate_crm(draw_items(7, seed=seed), 500, seed=seed)
            x = normalize_columns(ScoreMatrix(scores=z, detector_names=DETECTOR_NAMES), EPSILON)
            values = x.values.copy()
            values[:, 2] = 1.0 - values[:, 2]
            flipped = NormalizedScores(values=values, epsilon=EPSILON, detector_names=DETECTOR_NAMES)
            base, model = fit_scores(x, EPSILON), fit_scores(flipped, EPSILON)
            self.assertGreater(np.corrcoef(model.theta, base.theta)[0, 1], 0.99, msg=f"seed {seed}")
            self.assertLess(model.gamma[2], 0.0)
            self.assertGreater(model.alpha[2] * model.gamma[2], 0.0)
            self.assertTrue((model.alpha * model.gamma > 0).all())


class DetectorScoreFitTests(SimpleTestCase):
    """
    Tests for fitting the seven detectors on the iterated experiments.
    """
    def test_converges_under_default_settings(self):
        """Test that detector scores fit to convergence within the default iteration budget."""
        for ds in (
            gen_ex1(10, seed=0, repetition=1),
            gen_ex1(1, seed=0, repetition=1),
            gen_ex2(5, seed=0, repetition=1),
            gen_ex3(5, seed=0, repetition=1),
        ):
            model = fit_scores(_detector_scores(ds))
            self.assertTrue(model.converged, msg=ds.name)
            self.assertLessEqual(model.iterations, FitConfig().max_iter)
            trace = np.array(model.log_likelihood_trace)
            self.assertTrue((np.diff(trace) >= -1e-8 * np.abs(trace[1:])).all(), msg=ds.name)


@pytest.mark.slow
class DiscriminationOrderTests(SimpleTestCase):
    """
    Density-ratio and distance detectors outweigh the noisier ones on EX1.
    """
    def test_sharp_detectors_discriminate_more_at_last_iteration(self):
        """Test that LOF, LDF and KNN-AGG out-discriminate INFLO, KDEOS and LDOF in 7 of 10 reps."""
        held = 0
        for repetition in range(1, 11):
            ds = gen_ex1(10, seed=0, repetition=repetition)
            alpha = irt_ensemble(_detector_scores(ds)).params['alpha']
            sharp = min(abs(alpha[name]) for name in SHARP)
            noisy = max(abs(alpha[name]) for name in NOISY)
            held += sharp > noisy
        self.assertGreaterEqual(held, 7)

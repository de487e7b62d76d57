import itertools

import numpy as np
import pytest
from django.test import SimpleTestCase
from scipy.linalg import hadamard

from combiner_app.affinity import AffinityConfig, affinity_propagation, median_preference
from combiner_app.combiners import (
    METHOD_ORDER,
    GreedyConfig,
    average,
    column_correlations,
    greedy,
    greedy_avg,
    icwa,
    maximum,
    pearson,
    pseudo_target,
    run_all_combiners,
    thresh,
)
from detector_app.detectors import DetectorConfig
from detector_app.services import run_all
from evaluation_app.metrics import auc
from irt_app.services import irt_ensemble
from scoring_app.domain import NormalizedScores, ScoreMatrix
from scoring_app.exceptions import InputError
from scoring_app.utils import normalize_columns
from synth_app.generators import gen_example


def _normalized(values):
    return NormalizedScores(values=np.asarray(values, dtype=float), epsilon=0.005)


def _random_normalized(rng, n_obs=20, n_det=5):
    return _normalized(rng.uniform(0.01, 0.99, size=(n_obs, n_det)))


class ElementwiseCombinerTests(SimpleTestCase):
    """
    Tests for average, maximum and thresh.
    """
    def test_average_by_hand(self):
        """Test Average on a 2 x 2 matrix."""
        np.testing.assert_allclose(average(_normalized([[0.2, 0.4], [0.6, 0.8]])).scores, [0.3, 0.7])

    def test_maximum_by_hand(self):
        """Test that Max picks the largest entry of a row."""
        self.assertEqual(maximum(_normalized([[0.2, 0.9, 0.1]])).scores[0], 0.9)

    def test_thresh_by_hand(self):
        """Test that Thresh sums only entries above their column mean."""
        x = _normalized([[0.1, 0.5], [0.9, 0.5]])
        np.testing.assert_allclose(thresh(x).scores, [0.0, 0.9])

    def test_identical_columns_return_the_column(self):
        """Test that Average and Max of identical columns give that column."""
        column = np.linspace(0.1, 0.9, 7)
        x = _normalized(np.column_stack([column, column, column]))
        np.testing.assert_allclose(average(x).scores, column)
        np.testing.assert_allclose(maximum(x).scores, column)

    def test_match_elementwise_oracles(self):
        """Test the elementwise combiners against loop-based oracles on random matrices."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            x = _random_normalized(rng, n_obs=int(rng.integers(2, 30)), n_det=int(rng.integers(2, 8)))
            v = x.values
            means = [sum(v[i, j] for i in range(len(v))) / len(v) for j in range(v.shape[1])]
            expected_avg = [sum(row) / len(row) for row in v]
            expected_max = [max(row) for row in v]
            expected_thresh = [sum(val for j, val in enumerate(row) if val > means[j]) for row in v]
            np.testing.assert_allclose(average(x).scores, expected_avg, rtol=1e-12)
            np.testing.assert_array_equal(maximum(x).scores, expected_max)
            np.testing.assert_allclose(thresh(x).scores, expected_thresh, rtol=1e-12)

    def test_raw_scores_are_normalized_first(self):
        """Test that raw scores are min-max normalized before combining."""
        m = ScoreMatrix(scores=[[0.0, 10.0], [5.0, 20.0], [10.0, 30.0]], detector_names=('a', 'b'))
        np.testing.assert_allclose(average(m).scores, [0.005, 0.5, 0.995])

    def test_permutation_equivariance(self):
        """Test that permuting rows permutes the output and permuting columns changes nothing."""
        rng = np.random.default_rng(1)
        x = _random_normalized(rng)
        rows, cols = rng.permutation(20), rng.permutation(5)
        moved = _normalized(x.values[rows][:, cols])
        for combiner in (average, maximum, thresh):
            np.testing.assert_allclose(combiner(moved).scores, combiner(x).scores[rows], rtol=1e-12)

    def test_common_affine_map_keeps_rankings(self):
        """Test that one affine map applied to all raw scores leaves the output unchanged."""
        rng = np.random.default_rng(2)
        raw = rng.gamma(2.0, size=(30, 4))
        base = ScoreMatrix(scores=raw, detector_names=tuple('abcd'))
        moved = ScoreMatrix(scores=3.0 * raw + 11.0, detector_names=tuple('abcd'))
        for combiner in (average, maximum, thresh):
            np.testing.assert_allclose(combiner(moved).scores, combiner(base).scores, rtol=1e-9)


def _greedy_oracle(values, target):
    """Enumerate every subset and keep the one the scan rule would produce."""
    n = values.shape[1]
    to_target = [pearson(values[:, j], target) for j in range(n)]
    order = sorted(range(n), key=lambda j: (-to_target[j], j))
    consistent = []
    for mask in itertools.product((False, True), repeat=n - 1):
        chosen = [order[0]] + [j for j, keep in zip(order[1:], mask) if keep]
        current, selected, ok = to_target[order[0]], [order[0]], True
        for j, keep in zip(order[1:], mask):
            candidate = pearson(values[:, selected + [j]].mean(axis=1), target)
            if (candidate >= current) != keep:
                ok = False
                break
            if keep:
                selected.append(j)
                current = candidate
        if ok:
            consistent.append(chosen)
    return consistent


class GreedyTests(SimpleTestCase):
    """
    Tests for greedy and greedy_avg.
    """
    def test_picks_the_detector_matching_the_target(self):
        """Test that Greedy selects the only detector agreeing with the planted target."""
        rng = np.random.default_rng(3)
        planted = np.full(50, 0.3)
        planted[[4, 17, 23, 31, 45]] = 0.99
        noise = rng.uniform(0.4, 0.6, size=(50, 3))
        result = greedy(_normalized(np.column_stack([planted, noise])), GreedyConfig(kappa=5))
        self.assertEqual(result.params['selected'], ['d1'])
        np.testing.assert_array_equal(result.scores, planted)

    def test_identical_detectors_return_the_column(self):
        """Test that Greedy over identical detectors returns that column."""
        column = np.random.default_rng(4).uniform(0.1, 0.9, size=25)
        result = greedy(_normalized(np.column_stack([column] * 4)), GreedyConfig(kappa=3))
        np.testing.assert_allclose(result.scores, column, rtol=1e-12)

    def test_selection_matches_exhaustive_enumeration(self):
        """Test that the Greedy selection is the single subset consistent with the scan rule."""
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = _random_normalized(rng, n_obs=30, n_det=5)
            kappa = int(rng.integers(1, 8))
            result = greedy(x, GreedyConfig(kappa=kappa))
            consistent = _greedy_oracle(x.values, pseudo_target(x.values, kappa))
            self.assertEqual(len(consistent), 1)
            self.assertEqual([x.detector_names[j] for j in consistent[0]], result.params['selected'])

    def test_pseudo_target_ties_go_to_lower_rows(self):
        """Test that tied scores at the cut give the pseudo-target to the lower row indices."""
        target = pseudo_target(np.array([[0.5], [0.7], [0.7], [0.7]]), 2)
        np.testing.assert_array_equal(target, [0.0, 1.0, 1.0, 0.0])

    def test_kappa_must_be_below_n(self):
        """Test that kappa equal to n is rejected."""
        with self.assertRaises(InputError):
            greedy(_normalized(np.full((4, 2), 0.3) + [[0.1], [0.2], [0.3], [0.4]]), GreedyConfig(kappa=4))

    def test_tied_rows_fall_back_to_average(self):
        """Test that all-tied rows fall back to Average with a warning."""
        with self.assertLogs('combiner_app.combiners', level='WARNING'):
            result = greedy(_normalized(np.full((6, 3), 0.5)), GreedyConfig(kappa=2))
        np.testing.assert_array_equal(result.scores, np.full(6, 0.5))

    def test_greedy_avg_singleton_range_equals_greedy(self):
        """Test that Greedy-Avg over one kappa equals Greedy at that kappa."""
        x = _random_normalized(np.random.default_rng(6))
        np.testing.assert_array_equal(
            greedy_avg(x, GreedyConfig(kappa=1, kappa_range=(4, 4))).scores,
            greedy(x, GreedyConfig(kappa=4)).scores,
        )

    def test_greedy_avg_is_the_mean_over_kappa(self):
        """Test that Greedy-Avg averages the Greedy scores over its kappa range."""
        x = _random_normalized(np.random.default_rng(7))
        expected = np.mean([greedy(x, GreedyConfig(kappa=k)).scores for k in range(2, 7)], axis=0)
        np.testing.assert_allclose(
            greedy_avg(x, GreedyConfig(kappa_range=(2, 6))).scores, expected, rtol=1e-12
        )

    def test_greedy_avg_clamps_range(self):
        """Test that a kappa range reaching n is clamped with a warning."""
        x = _random_normalized(np.random.default_rng(8), n_obs=6)
        with self.assertLogs('combiner_app.combiners', level='WARNING'):
            result = greedy_avg(x, GreedyConfig(kappa_range=(1, 10)))
        self.assertEqual(result.params['kappa_range'], (1, 5))

    def test_invalid_config(self):
        """Test validation of kappa and kappa_range."""
        with self.assertRaises(InputError):
            GreedyConfig(kappa=0)
        with self.assertRaises(InputError):
            GreedyConfig(kappa_range=(5, 2))


def _net_similarity(similarity, preference, exemplars):
    n = similarity.shape[0]
    total = preference * len(exemplars)
    for i in range(n):
        if i not in exemplars:
            total += max(similarity[i, k] for k in exemplars)
    return total


def _two_groups(seed, n_obs=12, noise=0.5):
    rng = np.random.default_rng(seed)
    base1 = rng.normal(size=n_obs)
    base1 -= base1.mean()
    base2 = rng.normal(size=n_obs)
    base2 -= base2.mean()
    base2 -= (base2 @ base1) / (base1 @ base1) * base1
    base2 *= np.linalg.norm(base1) / np.linalg.norm(base2)
    columns = []
    for base in (base1, base2):
        columns += [base, base + noise * rng.normal(size=n_obs), base + noise * rng.normal(size=n_obs)]
    return np.column_stack(columns)


class AffinityPropagationTests(SimpleTestCase):
    """
    Tests for affinity_propagation and icwa.
    """
    def test_exemplars_match_exhaustive_search(self):
        """Test that the exemplars maximize net similarity over every subset."""
        for seed in (0, 1, 2):
            similarity = column_correlations(_two_groups(seed))
            preference = median_preference(similarity)
            result = affinity_propagation(similarity)
            self.assertTrue(result.converged)
            best = max(
                (
                    subset
                    for size in range(1, 7)
                    for subset in itertools.combinations(range(6), size)
                ),
                key=lambda subset: _net_similarity(similarity, preference, subset),
            )
            self.assertEqual(result.exemplars, best)

    def test_equidistant_point_joins_the_lowest_index_exemplar(self):
        """Test that a point tied between two exemplars is assigned to the lower-index one."""
        # stars centred on ids 0 and 4 with id 2 halfway between the centres
        left = [[0, 0], [0, 1], [10, 0], [20, 1], [20, 0], [0, -1], [20, -1]]
        for points in (np.array(left, dtype=float), np.array(left) * [-1.0, 1.0] + [20.0, 0.0]):
            similarity = -((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
            result = affinity_propagation(similarity, AffinityConfig(preference=-200.0))
            self.assertTrue(result.converged)
            self.assertEqual(result.exemplars, (0, 4))
            self.assertEqual(result.exemplars[result.labels[2]], 0)

    def test_single_point(self):
        """Test that a single item is its own exemplar."""
        result = affinity_propagation(np.array([[1.0]]))
        self.assertEqual(result.exemplars, (0,))

    def test_invalid_damping(self):
        """Test that damping of 1 is rejected."""
        with self.assertRaises(InputError):
            AffinityConfig(damping=1.0)

    def test_duplicated_pairs_cluster_together(self):
        """Test that duplicated detectors fall into one cluster each."""
        rng = np.random.default_rng(9)
        a, b = rng.gamma(2.0, size=40), rng.gamma(2.0, size=40)
        m = ScoreMatrix(scores=np.column_stack([a, a, b, b]), detector_names=("A", "A'", "B", "B'"))
        result = icwa(m)
        self.assertEqual(result.params['clusters'], [["A", "A'"], ["B", "B'"]])
        x = normalize_columns(m)
        np.testing.assert_allclose(result.scores, (x.values[:, 0] + x.values[:, 2]) / 2, rtol=1e-12)

    def test_uncorrelated_detectors_reduce_to_average(self):
        """Test that mutually uncorrelated detectors give singleton clusters and the Average score."""
        values = hadamard(8)[:, 1:5].astype(float)
        m = ScoreMatrix(scores=values, detector_names=tuple('abcd'))
        with self.assertLogs('combiner_app.combiners', level='WARNING'):
            result = icwa(m)
        self.assertEqual(result.params['clusters'], [['a'], ['b'], ['c'], ['d']])
        np.testing.assert_allclose(result.scores, average(m).scores, rtol=1e-12)

    def test_groups_are_weighted_per_cluster(self):
        """Test that ICWA averages cluster means with equal weight."""
        values = _two_groups(0)
        m = ScoreMatrix(scores=values, detector_names=tuple('abcdef'))
        result = icwa(m)
        self.assertEqual(result.params['clusters'], [['a', 'b', 'c'], ['d', 'e', 'f']])
        x = normalize_columns(m).values
        np.testing.assert_allclose(
            result.scores, (x[:, :3].mean(axis=1) + x[:, 3:].mean(axis=1)) / 2, rtol=1e-12
        )


class RunAllCombinersTests(SimpleTestCase):
    """
    Tests for run_all_combiners.
    """
    def setUp(self):
        rng = np.random.default_rng(10)
        trait = rng.normal(size=60)
        self.m = ScoreMatrix(
            scores=np.column_stack([trait + rng.normal(scale=s, size=60) for s in (0.3, 0.5, 0.8, 1.2)]),
            detector_names=tuple('abcd'),
        )

    def test_seven_results_in_fixed_order(self):
        """Test that run_all_combiners returns all seven methods in report order."""
        results = run_all_combiners(self.m)
        self.assertEqual(tuple(r.method for r in results), METHOD_ORDER)
        self.assertTrue(all(len(r) == 60 for r in results))

    def test_results_match_standalone_calls(self):
        """Test that each combined result equals its standalone call."""
        results = {r.method: r for r in run_all_combiners(self.m, GreedyConfig(kappa=4))}
        np.testing.assert_array_equal(results['IRT'].scores, irt_ensemble(self.m).scores)
        np.testing.assert_array_equal(results['Average'].scores, average(self.m).scores)
        np.testing.assert_array_equal(results['Greedy'].scores, greedy(self.m, GreedyConfig(kappa=4)).scores)
        np.testing.assert_array_equal(results['Thresh'].scores, thresh(self.m).scores)

    def test_subset_of_methods(self):
        """Test that a method subset is returned in report order."""
        results = run_all_combiners(self.m, methods=('Max', 'IRT'))
        self.assertEqual([r.method for r in results], ['IRT', 'Max'])

    def test_unknown_method_is_rejected(self):
        """Test that an unknown method is rejected."""
        with self.assertRaises(InputError):
            run_all_combiners(self.m, methods=('Median',))


@pytest.mark.slow
class GreedySensitivityTests(SimpleTestCase):
    """
    On the annulus example a kappa matching the 3 planted anomalies beats kappa = 10.
    """
    def test_true_kappa_beats_inflated_kappa(self):
        """Test that kappa equal to the anomaly count usually beats an inflated kappa."""
        wins = 0
        for repetition in range(10):
            ds = gen_example(seed=5, repetition=repetition)
            m = run_all(ds, DetectorConfig.for_regime('t1', ds.n_obs))
            low = auc(greedy(m, GreedyConfig(kappa=3)).scores, ds.labels)
            high = auc(greedy(m, GreedyConfig(kappa=10)).scores, ds.labels)
            wins += low >= high
        self.assertGreaterEqual(wins, 8)

import numpy as np
from django.test import SimpleTestCase

from scoring_app.domain import LabeledDataset, NormalizedScores, ScoreMatrix
from scoring_app.exceptions import InputError
from scoring_app.utils import as_normalized, from_logit, normalize_columns, to_logit


def _matrix(*columns):
    return ScoreMatrix(
        scores=np.column_stack(columns),
        detector_names=tuple(f"m{j}" for j in range(len(columns))),
    )


class NormalizeColumnsTests(SimpleTestCase):
    """
    Tests for normalize_columns.
    """
    def test_endpoints_map_to_epsilon_margins(self):
        """Test that the column extremes map to epsilon and 1 - epsilon."""
        x = normalize_columns(_matrix([0.0, 5.0, 10.0]), epsilon=0.005)
        np.testing.assert_allclose(x.values[:, 0], [0.005, 0.5, 0.995], atol=1e-15)

    def test_constant_column_maps_to_half(self):
        """Test that a constant column maps to 0.5 with a warning naming it."""
        with self.assertLogs('scoring_app.utils', level='WARNING') as logs:
            x = normalize_columns(_matrix([3.0, 3.0, 3.0], [1.0, 2.0, 3.0]), epsilon=0.1)
        np.testing.assert_array_equal(x.values[:, 0], [0.5, 0.5, 0.5])
        self.assertEqual(len(logs.output), 1)
        self.assertIn("'m0'", logs.output[0])

    def test_uneven_column_by_hand(self):
        """Test normalization of an unevenly spaced column against hand values."""
        x = normalize_columns(_matrix([1.0, 2.0, 4.0]), epsilon=0.005)
        np.testing.assert_allclose(x.values[:, 0], [0.005, 0.335, 0.995], atol=1e-12)

    def test_ranks_are_preserved_including_ties(self):
        """Test that normalization keeps ranks and ties."""
        rng = np.random.default_rng(3)
        column = rng.integers(0, 6, size=40).astype(float)
        x = normalize_columns(_matrix(column, rng.normal(size=40)))
        np.testing.assert_array_equal(
            np.argsort(column, kind='stable'), np.argsort(x.values[:, 0], kind='stable')
        )

    def test_scale_and_shift_invariance(self):
        """Test that rescaling or shifting a column leaves its normalization unchanged."""
        rng = np.random.default_rng(4)
        column = rng.normal(size=25)
        base = normalize_columns(_matrix(column))
        moved = normalize_columns(_matrix(3.7 * column - 12.0))
        np.testing.assert_allclose(base.values, moved.values, atol=1e-12)

    def test_epsilon_out_of_range_is_rejected(self):
        """Test that epsilon outside (0, 0.5) is rejected."""
        with self.assertRaises(InputError):
            normalize_columns(_matrix([1.0, 2.0]), epsilon=0.5)

    def test_non_finite_column_is_named(self):
        """Test that a non-finite entry is reported with its column name."""
        with self.assertRaisesMessage(InputError, "'m1'"):
            _matrix([1.0, 2.0], [np.nan, 1.0])


class LogitTests(SimpleTestCase):
    """
    Tests for to_logit / from_logit.
    """
    def test_midpoint_and_upper_margin(self):
        """Test the logit of the midpoint and of the upper margin."""
        x = NormalizedScores(values=np.array([[0.5], [0.995]]), epsilon=0.005)
        z = to_logit(x)
        self.assertEqual(z.values[0, 0], 0.0)
        self.assertAlmostEqual(z.values[1, 0], np.log(199.0), places=12)
        self.assertAlmostEqual(z.values[1, 0], 5.2933, places=4)

    def test_round_trip_through_sigmoid(self):
        """Test that the sigmoid inverts the logit transform."""
        rng = np.random.default_rng(5)
        x = normalize_columns(_matrix(rng.normal(size=50), rng.exponential(size=50)))
        np.testing.assert_allclose(from_logit(to_logit(x)), x.values, atol=1e-12)

    def test_as_normalized_passes_normalized_scores_through(self):
        """Test that already normalized scores pass through unchanged."""
        x = NormalizedScores(values=np.array([[0.2, 0.4], [0.6, 0.8]]), epsilon=0.005)
        self.assertIs(as_normalized(x), x)


class DomainTypeTests(SimpleTestCase):
    """
    Tests for the invariants enforced by the domain types.
    """
    def test_dataset_requires_two_observations(self):
        """Test that a dataset needs at least two observations."""
        with self.assertRaises(InputError):
            LabeledDataset(features=np.array([[1.0, 2.0]]))

    def test_dataset_rejects_all_anomaly_labels(self):
        """Test that a dataset labeled entirely anomalous is rejected."""
        with self.assertRaises(InputError):
            LabeledDataset(features=np.zeros((3, 2)), labels=np.array([1, 1, 1]))

    def test_dataset_is_read_only(self):
        """Test that dataset arrays cannot be written to."""
        ds = LabeledDataset(features=np.zeros((3, 2)), labels=np.array([0, 1, 0]))
        with self.assertRaises(ValueError):
            ds.features[0, 0] = 1.0
        self.assertEqual(ds.n_anomalies, 1)
        self.assertEqual(ds.feature_names, ('x1', 'x2'))

    def test_score_matrix_name_count_must_match(self):
        """Test that the name count must match the score column count."""
        with self.assertRaises(InputError):
            ScoreMatrix(scores=np.zeros((3, 2)), detector_names=('a',))

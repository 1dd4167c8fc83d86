"""Published ORL numbers, first five images per subject for training.

Run with ``ORL_DATA_DIR=/path/to/orl pytest -m orl``.
"""
import pytest

from eigenspace.models.config import Direction, Method, ModelConfig, SplitSpec
from eigenspace.services.dataset import split
from eigenspace.services.experiment import expand_grid, run_experiment, sweep

pytestmark = pytest.mark.orl

FIRST_FIVE = SplitSpec(train_per_subject=5)
TOLERANCE = 0.02


class TestORLCorpus:
    """Test the corpus layout"""

    def test_layout(self, orl_dataset):
        assert len(orl_dataset) == 400
        assert orl_dataset.subjects == list(range(1, 41))
        assert orl_dataset.shape == (112, 92)

    def test_first_five_split(self, orl_dataset):
        train_set, test_set = split(orl_dataset, FIRST_FIVE)
        assert (len(train_set), len(test_set)) == (200, 200)


class TestPublishedAccuracy:
    """Test accuracy and feature size against the published table"""

    @pytest.mark.parametrize(
        "cfg, accuracy, coefficients",
        [
            (ModelConfig(method=Method.PCA, d=34), 0.850, 34),
            (ModelConfig(method=Method.TWO_D, direction=Direction.ROW, d=8), 0.915, 896),
            (ModelConfig(method=Method.TWO_D, direction=Direction.COLUMN, d=4), 0.915, 368),
            (ModelConfig(method=Method.E2D, direction=Direction.ROW, r=21, d=20), 0.930, 120),
            (ModelConfig(method=Method.E2D, direction=Direction.COLUMN, r=6, d=18), 0.925, 288),
            (ModelConfig(method=Method.E2D, direction=Direction.ROW, r=23, d=10), 0.915, 50),
        ],
        ids=lambda value: value.label if isinstance(value, ModelConfig) else None,
    )
    def test_table_cell(self, orl_dataset, cfg, accuracy, coefficients):
        result = run_experiment(orl_dataset, FIRST_FIVE, cfg)
        assert result.feature_coefficients == coefficients
        assert abs(result.accuracy - accuracy) <= TOLERANCE


class TestPublishedClaims:
    """Test the relative claims of the published comparison"""

    def test_stacking_does_not_lose_accuracy(self, orl_dataset):
        """Test the best stacked model is within half a point of the best 2DPCA"""
        e2d = sweep(orl_dataset, FIRST_FIVE, expand_grid([Method.E2D], [Direction.ROW], [2, 4, 8, 21, 23], [10, 20]))
        two_d = sweep(orl_dataset, FIRST_FIVE, expand_grid([Method.TWO_D], [Direction.ROW], [1], [4, 6, 8, 10]))
        assert max(r.accuracy for r in e2d) >= max(r.accuracy for r in two_d) - 0.005

    def test_stacked_features_recognize_faster(self, orl_dataset):
        """Test 50-coefficient features classify faster than 896-coefficient ones"""
        stacked = run_experiment(
            orl_dataset, FIRST_FIVE, ModelConfig(method=Method.E2D, direction=Direction.ROW, r=23, d=10), workers=1
        )
        two_d = run_experiment(
            orl_dataset, FIRST_FIVE, ModelConfig(method=Method.TWO_D, direction=Direction.ROW, d=8), workers=1
        )
        assert stacked.feature_coefficients == 50
        assert two_d.feature_coefficients == 896
        assert stacked.recognition_time < two_d.recognition_time

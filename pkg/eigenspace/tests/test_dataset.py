import shutil

import numpy as np
import pytest
from pydantic import ValidationError

from eigenspace.core.config import settings
from eigenspace.core.exceptions import (
    DatasetLayoutError,
    InvalidParameterError,
    PGMFormatError,
    PGMHeaderError,
    PGMMagicError,
    PGMMaxvalError,
    PGMTruncatedError,
    ShapeMismatchError,
)
from eigenspace.models.config import SplitPolicy, SplitSpec
from eigenspace.services.dataset import (
    LabeledDataset,
    load_orl,
    parse_pgm,
    split,
    synthesize,
    write_pgm,
)
from eigenspace.tests.conftest import write_orl_tree


class TestParsePGM:
    """Test PGM decoding"""

    def test_binary(self):
        image = parse_pgm(b"P5 2 2 255 " + bytes([0, 255, 17, 34]))
        np.testing.assert_array_equal(image, [[0.0, 255.0], [17.0, 34.0]])
        assert image.dtype == np.float64

    def test_ascii(self):
        np.testing.assert_array_equal(parse_pgm(b"P2 1 2 255 7 9"), [[7.0], [9.0]])

    def test_comments(self):
        data = b"P2\n# created by hand\n2 1\n# max\n255\n1 2\n"
        np.testing.assert_array_equal(parse_pgm(data), [[1.0, 2.0]])

    def test_binary_raster_may_start_with_whitespace_byte(self):
        image = parse_pgm(b"P5\n2 1\n255\n" + bytes([10, 32]))
        np.testing.assert_array_equal(image, [[10.0, 32.0]])

    def test_write_then_parse(self, rng):
        image = np.rint(rng.uniform(0, 255, size=(5, 3)))
        data = write_pgm(image)
        assert data.startswith(b"P5\n3 5\n255\n")
        np.testing.assert_array_equal(parse_pgm(data), image)

    @pytest.mark.parametrize(
        "data, error",
        [
            (b"P6 1 1 255 \x00", PGMMagicError),
            (b"P5 2 2 255 \x00\x01", PGMTruncatedError),
            (b"P2 2 1 255 4", PGMTruncatedError),
            (b"P5 1 1 300 \x00", PGMMaxvalError),
            (b"P2 1 1 15 16", PGMMaxvalError),
            (b"P5 two 2 255 \x00\x00\x00\x00", PGMHeaderError),
            (b"P5 2", PGMHeaderError),
        ],
    )
    def test_malformed(self, data, error):
        """Test each defect raises its own error type"""
        with pytest.raises(error):
            parse_pgm(data)
        assert issubclass(error, PGMFormatError)

    def test_write_rejects_fractional_pixels(self):
        with pytest.raises(InvalidParameterError):
            write_pgm(np.full((2, 2), 0.5))


class TestLoadORL:
    """Test ORL directory loading"""

    def test_miniature_tree(self, orl_tree):
        ds = load_orl(orl_tree)
        assert len(ds) == 20
        assert ds.subjects == [1, 2]
        assert ds.labels == (1,) * 10 + (2,) * 10
        assert ds.shape == (8, 6)

    def test_matches_written_images(self, orl_tree):
        expected = synthesize(subjects=2, per_subject=10, shape=(8, 6), seed=3)
        ds = load_orl(orl_tree)
        for loaded, original in zip(ds.images, expected.images):
            np.testing.assert_array_equal(loaded, original)

    def test_deterministic(self, orl_tree):
        first, second = load_orl(orl_tree), load_orl(orl_tree)
        assert first.labels == second.labels
        assert all(a.tobytes() == b.tobytes() for a, b in zip(first.images, second.images))

    def test_missing_image_is_named(self, tmp_path):
        root = write_orl_tree(tmp_path / "orl", subjects=7, per_subject=4)
        (root / "s7" / "3.pgm").unlink()
        with pytest.raises(DatasetLayoutError) as exc:
            load_orl(root)
        assert exc.value.paths == [root / "s7" / "3.pgm"]
        assert str(root / "s7" / "3.pgm") in str(exc.value)

    def test_missing_subject(self, orl_tree):
        shutil.rmtree(orl_tree / "s1")
        with pytest.raises(DatasetLayoutError) as exc:
            load_orl(orl_tree)
        assert exc.value.paths == [orl_tree / "s1"]

    def test_inconsistent_shapes(self, orl_tree):
        odd = orl_tree / "s2" / "5.pgm"
        odd.write_bytes(write_pgm(np.zeros((4, 4))))
        with pytest.raises(DatasetLayoutError) as exc:
            load_orl(orl_tree)
        assert exc.value.paths == [odd]

    def test_flat_layout(self, tmp_path):
        ds = synthesize(subjects=2, per_subject=3, shape=(4, 5), seed=1)
        for k, (image, label) in enumerate(zip(ds.images, ds.labels)):
            (tmp_path / f"s{label}_{k % 3 + 1}.pgm").write_bytes(write_pgm(image))
        loaded = load_orl(tmp_path)
        assert loaded.labels == ds.labels
        assert loaded.shape == (4, 5)

    def test_images_per_subject_limit(self, orl_tree):
        ds = load_orl(orl_tree, images_per_subject=4)
        assert len(ds) == 8

    def test_not_a_directory(self, tmp_path):
        with pytest.raises(DatasetLayoutError):
            load_orl(tmp_path / "absent")

    def test_no_root_configured(self, monkeypatch):
        monkeypatch.setattr(settings, "ORL_DATA_DIR", None)
        with pytest.raises(DatasetLayoutError) as exc:
            load_orl()
        assert "ORL_DATA_DIR" in str(exc.value)

    def test_settings_root(self, orl_tree, monkeypatch):
        monkeypatch.setattr(settings, "ORL_DATA_DIR", str(orl_tree))
        assert len(load_orl()) == 20


class TestLabeledDataset:
    """Test dataset validation"""

    def test_label_count(self):
        with pytest.raises(ShapeMismatchError):
            LabeledDataset(images=(np.zeros((2, 2)),), labels=(1, 2))

    def test_pixel_range(self):
        with pytest.raises(InvalidParameterError):
            LabeledDataset(images=(np.full((2, 2), 256.0),), labels=(1,))

    def test_empty(self):
        with pytest.raises(InvalidParameterError):
            LabeledDataset(images=(), labels=())


class TestSplit:
    """Test train/test partitioning"""

    def test_first_k(self, separable_dataset):
        train_set, test_set = split(separable_dataset, SplitSpec(train_per_subject=4))
        assert len(train_set) == 12
        assert len(test_set) == 6
        assert train_set.labels == (1,) * 4 + (2,) * 4 + (3,) * 4
        np.testing.assert_array_equal(train_set.images[4], separable_dataset.images[6])
        np.testing.assert_array_equal(test_set.images[0], separable_dataset.images[4])

    def test_one_probe_per_subject(self, separable_dataset):
        _, test_set = split(separable_dataset, SplitSpec(train_per_subject=5))
        assert test_set.labels == (1, 2, 3)

    def test_seeded_random_is_reproducible(self, separable_dataset):
        spec = SplitSpec(train_per_subject=3, policy=SplitPolicy.SEEDED_RANDOM, seed=11)
        first, second = split(separable_dataset, spec), split(separable_dataset, spec)
        for a, b in zip(first[0].images + first[1].images, second[0].images + second[1].images):
            assert a.tobytes() == b.tobytes()

    def test_partition(self, separable_dataset):
        """Test train and test together hold every image exactly once"""
        spec = SplitSpec(train_per_subject=2, policy=SplitPolicy.SEEDED_RANDOM, seed=5)
        train_set, test_set = split(separable_dataset, spec)
        seen = sorted(img.tobytes() for img in train_set.images + test_set.images)
        assert seen == sorted(img.tobytes() for img in separable_dataset.images)
        for label in separable_dataset.subjects:
            assert train_set.labels.count(label) == 2
            assert test_set.labels.count(label) == 4

    def test_no_test_images_left(self, separable_dataset):
        with pytest.raises(InvalidParameterError):
            split(separable_dataset, SplitSpec(train_per_subject=6))

    def test_zero_training_images(self):
        with pytest.raises(ValidationError):
            SplitSpec(train_per_subject=0)


class TestSynthesize:
    """Test synthetic dataset generation"""

    def test_shape_and_determinism(self):
        first = synthesize(subjects=2, per_subject=4, shape=(8, 6), seed=42)
        second = synthesize(subjects=2, per_subject=4, shape=(8, 6), seed=42)
        assert len(first) == 8
        assert first.labels == (1, 1, 1, 1, 2, 2, 2, 2)
        assert all(a.tobytes() == b.tobytes() for a, b in zip(first.images, second.images))

    def test_zero_perturbation(self):
        ds = synthesize(subjects=2, per_subject=3, shape=(4, 4), seed=0, noise_amplitude=0.0)
        np.testing.assert_array_equal(ds.images[0], ds.images[2])
        assert not np.array_equal(ds.images[0], ds.images[3])

    def test_integral_pixels(self, synthetic_dataset):
        for image in synthetic_dataset.images:
            np.testing.assert_array_equal(image, np.rint(image))
            assert image.min() >= 0 and image.max() <= 255

    def test_perturbation_must_be_small(self):
        with pytest.raises(InvalidParameterError):
            synthesize(subjects=2, per_subject=2, shape=(3, 3), base_amplitude=10.0, noise_amplitude=4.0)

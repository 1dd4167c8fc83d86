import os
from pathlib import Path

import numpy as np
import pytest

from eigenspace.services.dataset import LabeledDataset, load_orl, synthesize, write_pgm


@pytest.fixture
def rng():
    """Seeded generator so every random instance is reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture
def synthetic_dataset() -> LabeledDataset:
    """Two well-separated subjects, four 8x6 images each"""
    return synthesize(subjects=2, per_subject=4, shape=(8, 6), seed=42)


@pytest.fixture
def separable_dataset() -> LabeledDataset:
    """Three subjects, six 12x10 images each, for end-to-end pipeline runs"""
    return synthesize(subjects=3, per_subject=6, shape=(12, 10), seed=7)


def write_orl_tree(root: Path, subjects: int, per_subject: int, shape=(8, 6), seed: int = 3) -> Path:
    ds = synthesize(subjects=subjects, per_subject=per_subject, shape=shape, seed=seed)
    for k, (image, label) in enumerate(zip(ds.images, ds.labels)):
        subject_dir = root / f"s{label}"
        subject_dir.mkdir(parents=True, exist_ok=True)
        (subject_dir / f"{k % per_subject + 1}.pgm").write_bytes(write_pgm(image))
    return root


@pytest.fixture
def orl_tree(tmp_path) -> Path:
    """Miniature ORL layout: s1/ and s2/ with 1.pgm..10.pgm each"""
    return write_orl_tree(tmp_path / "orl", subjects=2, per_subject=10)


@pytest.fixture(scope="session")
def orl_dataset() -> LabeledDataset:
    """The real ORL corpus, when ORL_DATA_DIR points at it"""
    root = os.getenv("ORL_DATA_DIR")
    if not root or not Path(root).is_dir():
        pytest.skip("ORL_DATA_DIR is not set to an ORL corpus")
    return load_orl(root, images_per_subject=10)

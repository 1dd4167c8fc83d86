import logging
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from eigenspace.core.config import settings
from eigenspace.core.exceptions import (
    DatasetLayoutError,
    InvalidParameterError,
    PGMHeaderError,
    PGMMagicError,
    PGMMaxvalError,
    PGMTruncatedError,
    ShapeMismatchError,
)
from eigenspace.models.config import SplitPolicy, SplitSpec
from eigenspace.services.linalg import Matrix, as_matrix

logger = logging.getLogger(__name__)

PGM_WHITESPACE = b" \t\r\n\v\f"
SUBJECT_DIR = re.compile(r"^s(\d+)$")
SUBJECT_IMAGE = re.compile(r"^(\d+)\.pgm$", re.IGNORECASE)
FLAT_IMAGE = re.compile(r"^s(\d+)_(\d+)\.pgm$", re.IGNORECASE)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    images: Tuple[Matrix, ...]
    labels: Tuple[int, ...]

    def __post_init__(self):
        if not self.images:
            raise InvalidParameterError("a dataset needs at least one image")
        if len(self.images) != len(self.labels):
            raise ShapeMismatchError(f"{len(self.images)} images but {len(self.labels)} labels")
        shape = self.images[0].shape
        for k, img in enumerate(self.images):
            if img.shape != shape:
                raise ShapeMismatchError(f"image {k} has shape {img.shape}, expected {shape}", img.shape, shape)
            if img.min() < 0.0 or img.max() > 255.0:
                raise InvalidParameterError(f"image {k} has pixel values outside [0, 255]")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.images[0].shape

    @property
    def subjects(self) -> List[int]:
        return sorted(set(self.labels))

    def __len__(self) -> int:
        return len(self.images)


class _PGMReader:
    """Token reader over a PGM byte string; '#' starts a comment running to end of line"""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_separators(self) -> None:
        while self.pos < len(self.data):
            byte = self.data[self.pos : self.pos + 1]
            if byte == b"#":
                end = self.data.find(b"\n", self.pos)
                self.pos = len(self.data) if end < 0 else end + 1
            elif byte in PGM_WHITESPACE:
                self.pos += 1
            else:
                return

    def token(self) -> Optional[bytes]:
        self._skip_separators()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1] not in PGM_WHITESPACE + b"#":
            self.pos += 1
        return self.data[start : self.pos] if self.pos > start else None

    def integer(self, field: str) -> int:
        tok = self.token()
        if tok is None:
            raise PGMHeaderError(f"PGM header ends before {field}")
        if not tok.isdigit():
            raise PGMHeaderError(f"PGM {field} is not a decimal integer: {tok[:16]!r}")
        return int(tok)


def parse_pgm(data: bytes) -> Matrix:
    """Decode a binary (P5) or ASCII (P2) 8-bit greyscale PGM into a height x width matrix"""
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PGMMagicError(f"not a greyscale PGM: magic {magic!r}")
    reader = _PGMReader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in PGM_WHITESPACE + b"#":
        raise PGMMagicError(f"not a greyscale PGM: magic {data[:3]!r}")

    width = reader.integer("width")
    height = reader.integer("height")
    maxval = reader.integer("maxval")
    if width < 1 or height < 1:
        raise PGMHeaderError(f"PGM dimensions must be positive, got {width}x{height}")
    if not 1 <= maxval <= 255:
        raise PGMMaxvalError(f"PGM maxval {maxval} is outside 1..255")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        start = reader.pos + 1
        raster = data[start : start + count]
        if len(raster) < count:
            raise PGMTruncatedError(f"P5 raster holds {len(raster)} of {count} bytes")
        values = np.frombuffer(raster, dtype=np.uint8)
    else:
        samples = []
        for k in range(count):
            tok = reader.token()
            if tok is None:
                raise PGMTruncatedError(f"P2 raster holds {k} of {count} samples")
            if not tok.isdigit():
                raise PGMHeaderError(f"P2 sample {k} is not a decimal integer: {tok[:16]!r}")
            samples.append(int(tok))
        values = np.array(samples, dtype=np.int64)

    if values.max(initial=0) > maxval:
        raise PGMMaxvalError(f"PGM sample {int(values.max())} exceeds maxval {maxval}")
    return values.astype(np.float64).reshape(height, width)


def write_pgm(image: npt.ArrayLike) -> bytes:
    a = as_matrix(image, "image")
    if a.min() < 0 or a.max() > 255 or not np.array_equal(a, np.rint(a)):
        raise InvalidParameterError("P5 output needs integral pixel values in [0, 255]")
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode("ascii")
    return header + a.astype(np.uint8).tobytes()


def _discover(root: Path) -> Dict[int, Dict[int, Path]]:
    found: Dict[int, Dict[int, Path]] = defaultdict(dict)
    for entry in sorted(root.iterdir()):
        subject_match = SUBJECT_DIR.match(entry.name)
        flat_match = FLAT_IMAGE.match(entry.name)
        if entry.is_dir() and subject_match:
            for image_path in sorted(entry.iterdir()):
                image_match = SUBJECT_IMAGE.match(image_path.name)
                if image_match and image_path.is_file():
                    found[int(subject_match.group(1))][int(image_match.group(1))] = image_path
        elif entry.is_file() and flat_match:
            found[int(flat_match.group(1))][int(flat_match.group(2))] = entry
    return found


def load_orl(root_path: Optional[Union[str, Path]] = None, images_per_subject: Optional[int] = None) -> LabeledDataset:
    """Load an ORL-style tree of ``s<k>/<j>.pgm`` (or flat ``s<k>_<j>.pgm``) files.

    Subjects must be numbered 1..K and every subject must hold images 1..N,
    N being ``images_per_subject`` or the largest index present. Images are
    ordered by subject, then by image index.
    """
    root_path = root_path or settings.ORL_DATA_DIR
    if not root_path:
        raise DatasetLayoutError("no dataset root given (pass --data-dir or set ORL_DATA_DIR)")
    root = Path(root_path)
    if not root.is_dir():
        raise DatasetLayoutError("dataset root is not a directory", [root])

    found = _discover(root)
    if not found:
        raise DatasetLayoutError("no s<k>/<j>.pgm or s<k>_<j>.pgm images found under", [root])
    subject_count = max(found)
    per_subject = images_per_subject or max(max(images) for images in found.values())

    missing: List[Path] = []
    for subject in range(1, subject_count + 1):
        if subject not in found:
            missing.append(root / f"s{subject}")
            continue
        for index in range(1, per_subject + 1):
            if index not in found[subject]:
                missing.append(root / f"s{subject}" / f"{index}.pgm")
    if missing:
        raise DatasetLayoutError("dataset is missing", missing)

    images: List[Matrix] = []
    labels: List[int] = []
    shape: Optional[Tuple[int, int]] = None
    mismatched: List[Path] = []
    for subject in range(1, subject_count + 1):
        for index in range(1, per_subject + 1):
            path = found[subject][index]
            image = parse_pgm(path.read_bytes())
            if shape is None:
                shape = image.shape
            elif image.shape != shape:
                mismatched.append(path)
            images.append(image)
            labels.append(subject)
    if mismatched:
        raise DatasetLayoutError(f"images do not share the shape {shape}", mismatched)

    logger.info(f"Loaded {len(images)} images of {subject_count} subjects ({shape[0]}x{shape[1]}) from {root}")
    return LabeledDataset(images=tuple(images), labels=tuple(labels))


def _subject_indices(ds: LabeledDataset) -> Dict[int, List[int]]:
    groups: Dict[int, List[int]] = defaultdict(list)
    for k, label in enumerate(ds.labels):
        groups[label].append(k)
    return groups


def split(ds: LabeledDataset, spec: SplitSpec) -> Tuple[LabeledDataset, LabeledDataset]:
    groups = _subject_indices(ds)
    smallest = min(len(idx) for idx in groups.values())
    if spec.train_per_subject >= smallest:
        raise InvalidParameterError(
            f"train_per_subject={spec.train_per_subject} leaves no test image for a subject with {smallest} images"
        )

    rng = np.random.default_rng(spec.seed) if spec.policy == SplitPolicy.SEEDED_RANDOM else None
    train_idx: List[int] = []
    test_idx: List[int] = []
    for label in sorted(groups):
        members = groups[label]
        if rng is not None:
            members = [members[k] for k in rng.permutation(len(members))]
        train_idx.extend(sorted(members[: spec.train_per_subject]))
        test_idx.extend(sorted(members[spec.train_per_subject :]))

    def subset(indices: Sequence[int]) -> LabeledDataset:
        return LabeledDataset(images=tuple(ds.images[k] for k in indices), labels=tuple(ds.labels[k] for k in indices))

    return subset(train_idx), subset(test_idx)


def synthesize(
    subjects: int,
    per_subject: int,
    shape: Tuple[int, int],
    seed: int = 0,
    base_amplitude: Optional[float] = None,
    noise_amplitude: Optional[float] = None,
) -> LabeledDataset:
    """Random per-subject base images plus small uniform perturbations, rounded to 8-bit levels"""
    base_amplitude = settings.SYNTHETIC_BASE_AMPLITUDE if base_amplitude is None else base_amplitude
    noise_amplitude = settings.SYNTHETIC_NOISE_AMPLITUDE if noise_amplitude is None else noise_amplitude
    if subjects < 1 or per_subject < 1 or shape[0] < 1 or shape[1] < 1:
        raise InvalidParameterError(f"subjects, per_subject and shape must be positive: {subjects}, {per_subject}, {shape}")
    if noise_amplitude < 0 or base_amplitude < 5 * noise_amplitude:
        raise InvalidParameterError(
            f"base amplitude {base_amplitude} must be at least 5x the perturbation amplitude {noise_amplitude}"
        )

    rng = np.random.default_rng(seed)
    images: List[Matrix] = []
    labels: List[int] = []
    for subject in range(1, subjects + 1):
        base = rng.uniform(0.0, base_amplitude, size=shape)
        for _ in range(per_subject):
            noise = rng.uniform(-noise_amplitude, noise_amplitude, size=shape)
            images.append(np.clip(np.rint(base + noise), 0.0, 255.0))
            labels.append(subject)
    return LabeledDataset(images=tuple(images), labels=tuple(labels))

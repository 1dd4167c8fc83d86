import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from eigenspace.core.config import settings
from eigenspace.core.exceptions import EigenspaceError, ExperimentError, InvalidParameterError
from eigenspace.models.config import Direction, Method, Metric, ModelConfig, SplitSpec
from eigenspace.models.result import RESULT_FIELDS, ExperimentResult, OutputFormat
from eigenspace.observability.metrics import metrics_collector
from eigenspace.services.dataset import LabeledDataset, split
from eigenspace.services.linalg import Matrix
from eigenspace.services.subspace import Gallery, ProjectionBasis, build_gallery, classify, extract, train

logger = logging.getLogger(__name__)

TIME_FIELDS = ("train_time", "recognition_time")


def _recognize(image: Matrix, basis: ProjectionBasis, gallery: Gallery, metric: Metric) -> Tuple[Optional[int], float]:
    start = time.perf_counter()
    predicted = classify(extract(image, basis), gallery, metric)
    return predicted, time.perf_counter() - start


def _run_on_split(
    train_set: LabeledDataset,
    test_set: LabeledDataset,
    cfg: ModelConfig,
    workers: int,
) -> ExperimentResult:
    start = time.perf_counter()
    basis = train(train_set.images, cfg)
    gallery = build_gallery(train_set.images, train_set.labels, basis)
    train_time = time.perf_counter() - start

    def recognize(image: Matrix) -> Tuple[Optional[int], float]:
        return _recognize(image, basis, gallery, cfg.metric)

    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(recognize, test_set.images))
    else:
        outcomes = [recognize(image) for image in test_set.images]
    recognition_time = time.perf_counter() - start

    correct = 0
    for (predicted, duration), truth in zip(outcomes, test_set.labels):
        correct += int(predicted == truth)
        metrics_collector.record_probe(cfg.method.value, cfg.direction.value, duration)

    probe_count = len(test_set)
    result = ExperimentResult(
        method=cfg.method,
        direction=cfg.direction,
        r=cfg.r,
        d=cfg.d,
        accuracy=correct / probe_count,
        feature_coefficients=int(gallery.features[0].size),
        train_time=train_time,
        recognition_time=recognition_time,
        probe_count=probe_count,
        metadata={
            "metric": cfg.metric.value,
            "workers": workers,
            "recognition_time_per_probe": recognition_time / probe_count,
            "energy_ratio": basis.energy_ratio,
        },
    )
    metrics_collector.record_experiment(result)
    logger.info(
        f"{cfg.label}: accuracy {result.accuracy:.3f} ({correct}/{probe_count}), "
        f"{result.feature_coefficients} coefficients, train {train_time:.3f}s, "
        f"recognition {recognition_time:.3f}s ({workers} worker{'s' if workers > 1 else ''})"
    )
    return result


def _guarded_run(
    train_set: LabeledDataset,
    test_set: LabeledDataset,
    cfg: ModelConfig,
    workers: Optional[int],
) -> ExperimentResult:
    workers = settings.PROBE_WORKERS if workers is None else workers
    try:
        return _run_on_split(train_set, test_set, cfg, max(1, workers))
    except EigenspaceError as exc:
        metrics_collector.record_failure(cfg.method.value, cfg.direction.value)
        raise ExperimentError(f"experiment {cfg.label} failed: {exc}") from exc


def run_experiment(
    ds: LabeledDataset,
    split_spec: SplitSpec,
    cfg: ModelConfig,
    workers: Optional[int] = None,
) -> ExperimentResult:
    try:
        train_set, test_set = split(ds, split_spec)
    except EigenspaceError as exc:
        raise ExperimentError(f"experiment {cfg.label} failed: {exc}") from exc
    return _guarded_run(train_set, test_set, cfg, workers)


def sweep(
    ds: LabeledDataset,
    split_spec: SplitSpec,
    grid: Sequence[ModelConfig],
    workers: Optional[int] = None,
) -> List[ExperimentResult]:
    if not grid:
        raise InvalidParameterError("sweep needs at least one configuration")
    try:
        train_set, test_set = split(ds, split_spec)
    except EigenspaceError as exc:
        raise ExperimentError(f"sweep split failed: {exc}") from exc
    logger.info(f"Sweeping {len(grid)} configurations over {len(train_set)} training / {len(test_set)} test images")
    return [_guarded_run(train_set, test_set, cfg, workers) for cfg in grid]


def expand_grid(
    methods: Iterable[Method],
    directions: Iterable[Direction],
    radii: Iterable[int],
    dims: Iterable[int],
    metric: Optional[Metric] = None,
) -> List[ModelConfig]:
    """Cartesian product method x direction x r x d; r collapses to 1 for pca and twoD"""
    directions, radii, dims = list(directions), list(radii), list(dims)
    grid: List[ModelConfig] = []
    seen = set()
    for method in methods:
        for direction in directions:
            for r in radii:
                for d in dims:
                    options = dict(method=method, direction=direction, r=r, d=d)
                    if metric is not None:
                        options["metric"] = metric
                    cfg = ModelConfig(**options)
                    key = (cfg.method, cfg.direction, cfg.r, cfg.d, cfg.metric)
                    if key not in seen:
                        seen.add(key)
                        grid.append(cfg)
    return grid


def results_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump(mode="json") for r in results], columns=RESULT_FIELDS)


def summarize(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    """Best result per (method, direction): highest accuracy, then fewest coefficients"""
    frame = results_frame(results)
    ranked = frame.sort_values(
        ["accuracy", "feature_coefficients"], ascending=[False, True], kind="stable"
    )
    best = ranked.groupby(["method", "direction"], sort=False).head(1)
    return best.sort_values(["method", "direction"], kind="stable").reset_index(drop=True)


def _format_seconds(value: float) -> str:
    # shortest round-trip digits, but never fewer than three decimals
    return np.format_float_positional(value, unique=True, trim="k", min_digits=3)


def emit_results(results: Sequence[ExperimentResult], fmt: OutputFormat = OutputFormat.JSON) -> bytes:
    fmt = OutputFormat(fmt)
    if fmt == OutputFormat.JSON:
        payload = [r.model_dump(mode="json") for r in results]
        return (json.dumps(payload, indent=2) + "\n").encode("utf-8")

    frame = results_frame(results).astype(object)
    frame["accuracy"] = [repr(float(v)) for v in frame["accuracy"]]
    for column in TIME_FIELDS:
        frame[column] = [_format_seconds(float(v)) for v in frame[column]]
    return frame.to_csv(index=False, lineterminator="\n").encode("utf-8")


def parse_results(data: bytes, fmt: OutputFormat = OutputFormat.JSON) -> List[ExperimentResult]:
    fmt = OutputFormat(fmt)
    if fmt == OutputFormat.JSON:
        records = json.loads(data.decode("utf-8"))
    else:
        frame = pd.read_csv(io.BytesIO(data), float_precision="round_trip", dtype={"method": str, "direction": str})
        records = frame.astype(object).to_dict(orient="records")
    return [ExperimentResult.model_validate(record) for record in records]

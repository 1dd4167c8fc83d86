import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from eigenspace.core.config import settings
from eigenspace.core.exceptions import EigenspaceError
from eigenspace.models.config import Direction, Method, Metric, ModelConfig, SplitPolicy, SplitSpec
from eigenspace.models.result import ExperimentResult, OutputFormat
from eigenspace.observability.metrics import metrics_collector
from eigenspace.services.dataset import LabeledDataset, load_orl, synthesize
from eigenspace.services.experiment import emit_results, expand_grid, run_experiment, summarize, sweep

logger = logging.getLogger(__name__)


def _common_arguments(parser: argparse.ArgumentParser) -> None:
    data = parser.add_argument_group("data")
    data.add_argument('--data-dir', help='ORL root with s<k>/<j>.pgm files (default: $ORL_DATA_DIR)')
    data.add_argument('--synthetic', action='store_true', help='Use a synthesized dataset instead of ORL')
    data.add_argument('--subjects', type=int, default=4, help='Synthetic subjects')
    data.add_argument('--per-subject', type=int, default=6, help='Synthetic images per subject')
    data.add_argument('--height', type=int, default=16, help='Synthetic image height')
    data.add_argument('--width', type=int, default=12, help='Synthetic image width')

    split_group = parser.add_argument_group("split")
    split_group.add_argument('--train-per-subject', type=int, default=5)
    split_group.add_argument('--split-policy', choices=[p.value for p in SplitPolicy], default=SplitPolicy.FIRST_K.value)
    split_group.add_argument('--seed', type=int, default=0, help='Split shuffle and synthetic data seed')

    parser.add_argument('--metric', choices=[m.value for m in Metric], default=settings.DEFAULT_METRIC)
    parser.add_argument('--workers', type=int, default=settings.PROBE_WORKERS, help='Probe classification threads')
    parser.add_argument('--format', choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    parser.add_argument('--output', help='Result file (default: stdout)')
    parser.add_argument('--summary', action='store_true', help='Log the best result per method and direction')
    parser.add_argument('--metrics-file', help='Write Prometheus metrics to this file')
    parser.add_argument('--log-level', default=settings.LOG_LEVEL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='eigenspace',
        description='Train and benchmark PCA / 2DPCA / E2DPCA face recognition'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    run = subparsers.add_parser('run', help='Run one configuration')
    run.add_argument('--method', choices=[m.value for m in Method], required=True)
    run.add_argument('--direction', choices=[d.value for d in Direction], default=Direction.ROW.value)
    run.add_argument('--r', type=int, default=1, help='Stacking radius (e2d only)')
    run.add_argument('--d', type=int, required=True, help='Retained eigenvectors')
    _common_arguments(run)

    grid = subparsers.add_parser('sweep', help='Run the cartesian product of the given values')
    grid.add_argument('--method', nargs='+', choices=[m.value for m in Method], required=True)
    grid.add_argument('--direction', nargs='+', choices=[d.value for d in Direction], default=[Direction.ROW.value])
    grid.add_argument('--r', nargs='+', type=int, default=[1])
    grid.add_argument('--d', nargs='+', type=int, required=True)
    _common_arguments(grid)

    return parser


def _load_dataset(args: argparse.Namespace) -> LabeledDataset:
    if args.synthetic:
        return synthesize(args.subjects, args.per_subject, (args.height, args.width), seed=args.seed)
    return load_orl(args.data_dir or settings.ORL_DATA_DIR)


def _execute(args: argparse.Namespace) -> List[ExperimentResult]:
    dataset = _load_dataset(args)
    split_spec = SplitSpec(
        train_per_subject=args.train_per_subject,
        policy=SplitPolicy(args.split_policy),
        seed=args.seed,
    )
    metric = Metric(args.metric)

    if args.command == 'run':
        cfg = ModelConfig(
            method=Method(args.method),
            direction=Direction(args.direction),
            r=args.r,
            d=args.d,
            metric=metric,
        )
        return [run_experiment(dataset, split_spec, cfg, workers=args.workers)]

    configs = expand_grid(
        [Method(m) for m in args.method],
        [Direction(d) for d in args.direction],
        args.r,
        args.d,
        metric,
    )
    return sweep(dataset, split_spec, configs, workers=args.workers)


def _write_output(payload: bytes, output: Optional[str]) -> None:
    if output:
        Path(output).write_bytes(payload)
        logger.info(f"Results written to {output}")
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=args.log_level.upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    try:
        results = _execute(args)
        _write_output(emit_results(results, OutputFormat(args.format)), args.output)
        if args.summary:
            logger.info("Top accuracy per method:\n" + summarize(results).to_string(index=False))
    except (EigenspaceError, ValidationError, OSError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        return 1
    finally:
        if args.metrics_file:
            metrics_collector.write(args.metrics_file)

    return 0


if __name__ == "__main__":
    sys.exit(main())

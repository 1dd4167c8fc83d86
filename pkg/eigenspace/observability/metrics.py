import logging
from pathlib import Path
from typing import Union

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, Info, write_to_textfile

from eigenspace.core.config import settings
from eigenspace.models.result import ExperimentResult

logger = logging.getLogger(__name__)


class MetricsCollector:
    """Prometheus metrics for experiment runs, kept in a private registry"""

    def __init__(self):
        self.registry = CollectorRegistry()

        self.experiments_total = Counter(
            'experiments_total',
            'Experiments run',
            ['method', 'direction', 'status'],
            registry=self.registry
        )

        self.train_duration = Histogram(
            'train_duration_seconds',
            'Basis training plus gallery extraction time',
            ['method', 'direction'],
            buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 120.0],
            registry=self.registry
        )

        self.probe_duration = Histogram(
            'probe_recognition_duration_seconds',
            'Per-probe feature extraction plus nearest-neighbor search time',
            ['method', 'direction'],
            buckets=[0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1],
            registry=self.registry
        )

        self.accuracy = Gauge(
            'recognition_accuracy_ratio',
            'Fraction of probes classified correctly',
            ['method', 'direction', 'r', 'd'],
            registry=self.registry
        )

        self.feature_coefficients = Gauge(
            'feature_coefficients',
            'Coefficients per extracted feature matrix',
            ['method', 'direction', 'r', 'd'],
            registry=self.registry
        )

        self.app_info = Info(
            'app',
            'Application information',
            registry=self.registry
        )
        self.app_info.info({
            'version': settings.VERSION,
            'project': settings.PROJECT_NAME
        })

    def record_probe(self, method: str, direction: str, duration: float):
        self.probe_duration.labels(method=method, direction=direction).observe(duration)

    def record_experiment(self, result: ExperimentResult):
        """Record a finished experiment"""
        method, direction = result.method.value, result.direction.value
        cell = dict(method=method, direction=direction, r=str(result.r), d=str(result.d))

        self.experiments_total.labels(method=method, direction=direction, status='success').inc()
        self.train_duration.labels(method=method, direction=direction).observe(result.train_time)
        self.accuracy.labels(**cell).set(result.accuracy)
        self.feature_coefficients.labels(**cell).set(result.feature_coefficients)

    def record_failure(self, method: str, direction: str):
        self.experiments_total.labels(method=method, direction=direction, status='failure').inc()

    def write(self, path: Union[str, Path]):
        write_to_textfile(str(path), self.registry)
        logger.info(f"Metrics written to {path}")


# Global instance
metrics_collector = MetricsCollector()

from .base import FrozenModel
from .config import Direction, Method, Metric, ModelConfig, SplitPolicy, SplitSpec, StackConfig
from .result import RESULT_FIELDS, ExperimentResult, OutputFormat

__all__ = [
    "FrozenModel",
    "Direction",
    "Method",
    "Metric",
    "ModelConfig",
    "SplitPolicy",
    "SplitSpec",
    "StackConfig",
    "ExperimentResult",
    "OutputFormat",
    "RESULT_FIELDS",
]

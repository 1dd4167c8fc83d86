import enum
from typing import Any, Dict

from pydantic import Field

from eigenspace.models.base import FrozenModel
from eigenspace.models.config import Direction, Method


class OutputFormat(str, enum.Enum):
    JSON = "json"
    CSV = "csv"


class ExperimentResult(FrozenModel):
    method: Method
    direction: Direction
    r: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    feature_coefficients: int = Field(..., ge=1)
    train_time: float = Field(..., ge=0.0)
    recognition_time: float = Field(..., ge=0.0)
    probe_count: int = Field(..., ge=1)

    # Run context (metric, worker count, per-probe mean); never serialized
    metadata: Dict[str, Any] = Field(default_factory=dict, exclude=True)

    @property
    def recognition_time_per_probe(self) -> float:
        return self.recognition_time / self.probe_count


RESULT_FIELDS = [name for name, info in ExperimentResult.model_fields.items() if not info.exclude]

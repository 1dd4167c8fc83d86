import enum
from typing import Any

from pydantic import Field, model_validator

from eigenspace.core.config import settings
from eigenspace.models.base import FrozenModel


class Direction(str, enum.Enum):
    ROW = "row"
    COLUMN = "column"


class Method(str, enum.Enum):
    PCA = "pca"
    TWO_D = "twoD"
    E2D = "e2d"


class Metric(str, enum.Enum):
    COLUMN_SUM_L2 = "column_sum_l2"
    FROBENIUS = "frobenius"


class SplitPolicy(str, enum.Enum):
    FIRST_K = "first_k"
    SEEDED_RANDOM = "seeded_random"


class StackConfig(FrozenModel):
    """How many adjacent columns are stacked, and along which image axis.

    ``direction=row`` applies the column construction to the transposed image,
    so ``r`` then counts image rows.
    """

    r: int = Field(1, ge=1)
    direction: Direction = Direction.COLUMN


class ModelConfig(FrozenModel):
    method: Method
    r: int = Field(1, ge=1)
    direction: Direction = Direction.ROW
    d: int = Field(..., ge=1)
    metric: Metric = Field(default_factory=lambda: Metric(settings.DEFAULT_METRIC))

    @model_validator(mode="before")
    @classmethod
    def _collapse_radius(cls, data: Any) -> Any:
        # twoD is e2d at r=1; pca ignores r entirely
        if isinstance(data, dict) and data.get("method") in (Method.PCA, Method.TWO_D):
            data = {**data, "r": 1}
        return data

    @property
    def stack_config(self) -> StackConfig:
        return StackConfig(r=self.r, direction=self.direction)

    @property
    def label(self) -> str:
        if self.method == Method.PCA:
            return f"pca(d={self.d})"
        return f"{self.method.value}({self.direction.value}, r={self.r}, d={self.d})"


class SplitSpec(FrozenModel):
    train_per_subject: int = Field(5, ge=1)
    policy: SplitPolicy = SplitPolicy.FIRST_K
    seed: int = 0

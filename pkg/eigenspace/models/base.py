from pydantic import BaseModel, ConfigDict


class FrozenModel(BaseModel):
    """Immutable, strictly-declared value object shared by every config type"""

    model_config = ConfigDict(frozen=True, extra="forbid")

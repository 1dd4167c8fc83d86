import os
from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Core settings
    PROJECT_NAME: str = "Eigenspace"
    VERSION: str = "1.0.0"

    # Dataset - the CLI --data-dir flag wins over this
    ORL_DATA_DIR: Optional[str] = os.getenv("ORL_DATA_DIR")

    # Eigensolver
    EIGEN_TOL: float = 1e-10
    JACOBI_MAX_SWEEPS: int = 100
    EIGEN_SOLVER: str = "auto"  # auto | jacobi | lapack
    JACOBI_MAX_DIM: int = 128
    SYMMETRY_RTOL: float = 1e-9

    # Scatter matrices
    DIRECT_SCATTER_MAX_DIM: int = 4096

    # Synthetic datasets
    SYNTHETIC_BASE_AMPLITUDE: float = 200.0
    SYNTHETIC_NOISE_AMPLITUDE: float = 4.0

    # Experiments
    DEFAULT_METRIC: str = "column_sum_l2"
    PROBE_WORKERS: int = 1
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    class Config:
        case_sensitive = True


settings = Settings()

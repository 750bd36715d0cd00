import os
from typing import Literal

from pydantic import HttpUrl, computed_field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Self


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_ignore_empty=True,
        extra="ignore",
    )
    PROJECT_NAME: str = "cremer-lab"
    ENVIRONMENT: Literal["local", "staging", "production"] = "local"
    SCHEMA_VERSION: str = "1.0"
    LOG_LEVEL: str = "INFO"
    SENTRY_DSN: HttpUrl | None = None

    # brute-force budgets; CREMER_LAB_BUDGET overrides both when set
    CYCLE_BUDGET: int = 2**16 - 1
    TREE_BUDGET: int = 2**20
    CREMER_LAB_BUDGET: int | None = None

    SEPARATION_CAP: int = 256

    ESCAPE_RADIUS: float = 3.0
    MAX_ITER: int = 1000
    RESIDUAL_TOL: float = 1e-9
    GEOMETRIC_TOL: float = 1e-6
    DEDUP_TOL: float = 1e-9
    # slow Newton candidates closer than this are counted together
    CLUSTER_RADIUS: float = 1e-2
    CONTOUR_POINTS: int = 128

    RAY_RADIUS: float = 1000.0
    RAY_DEPTH: int = 30
    RAY_STEPS_PER_LEVEL: int = 8
    RAY_MAX_BISECTIONS: int = 8
    NEWTON_MAX_ITER: int = 64
    LANDING_PERIOD_CAP: int = 64

    MAX_PERIOD: int = 12

    THREADS: int | None = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def threads(self) -> int:
        return self.THREADS or os.cpu_count() or 1

    @model_validator(mode="after")
    def _apply_budget_override(self) -> Self:
        if self.CREMER_LAB_BUDGET is not None:
            self.CYCLE_BUDGET = self.CREMER_LAB_BUDGET
            self.TREE_BUDGET = self.CREMER_LAB_BUDGET
        return self

    @model_validator(mode="after")
    def _check_numeric_limits(self) -> Self:
        # |z| >= 3 forces |P(z)| >= 2|z| when |lambda| = 1
        if self.ESCAPE_RADIUS < 3.0:
            raise ValueError(
                f"ESCAPE_RADIUS must be at least 3.0, got {self.ESCAPE_RADIUS}"
            )
        if self.THREADS is not None and self.THREADS < 1:
            raise ValueError(f"THREADS must be positive, got {self.THREADS}")
        return self


settings = Settings()  # type: ignore

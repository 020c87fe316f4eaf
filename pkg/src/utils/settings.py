"""Configuration models and environment overrides."""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..types import GraphKind, Mechanism

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

DEFAULT_GAMMAS = [0.0, 0.2, 0.4, 0.6, 0.8]


class FlowConfig(BaseModel):
    """Velocity-field network and optimiser settings."""

    model_config = ConfigDict(extra="forbid")

    hidden: int = Field(32, gt=0)
    epochs: int = Field(200, gt=0)
    batch: int = Field(64, gt=0)
    step_size: float = Field(1e-3, gt=0)
    ode_steps: int = Field(50, gt=0)
    seed: int = 0


class DiscoveryConfig(BaseModel):
    """Thresholds and switches of the discovery pipeline."""

    model_config = ConfigDict(extra="forbid")

    # Absolute overrides; when None the thresholds scale with std_obs(X_j).
    tau_e: Optional[float] = Field(None, gt=0)
    tau_scale: float = Field(0.15, gt=0)
    tau_plus_ratio: float = 2.0
    tau_4b: Optional[float] = Field(None, gt=0)
    # Thresholds never drop below this many standard errors of the effect.
    noise_floor: float = Field(3.0, ge=0)
    adjust_covariates: bool = True
    resample_size: int = Field(200, gt=0)
    mmd_agg: Literal["mean", "max"] = "mean"
    obs_conditional: Literal["kde", "flow"] = "kde"
    effect_statistic: Literal["pooled", "per_value_max", "dose_response"] = "dose_response"
    train_flows: bool = False
    skip_confounding: bool = False
    skip_indirect_filter: bool = False
    flow: FlowConfig = Field(default_factory=FlowConfig)
    seed: int = 0

    @field_validator("tau_plus_ratio")
    @classmethod
    def _stricter_gate(cls, value: float) -> float:
        if value <= 1:
            raise ValueError("tau_plus_ratio must exceed 1 so that tau_e_plus > tau_e")
        return value


class BenchConfig(BaseModel):
    """Benchmark grid definition."""

    model_config = ConfigDict(extra="forbid")

    graphs: List[GraphKind] = Field(default_factory=lambda: list(GraphKind))
    mechanisms: List[Mechanism] = Field(default_factory=lambda: [Mechanism.LINEAR])
    gammas: List[float] = Field(default_factory=lambda: list(DEFAULT_GAMMAS))
    seeds: int = Field(5, gt=0)
    n_obs: int = Field(500, gt=0)
    n_int: int = Field(200, gt=0)
    k: int = Field(4, ge=2)
    discovery: DiscoveryConfig = Field(default_factory=DiscoveryConfig)
    out: Optional[Path] = None
    workers: int = Field(1, gt=0)
    base_seed: int = 0
    published_baselines: bool = False

    @field_validator("gammas")
    @classmethod
    def _nonnegative_gammas(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("gammas must not be empty")
        if any(g < 0 for g in values):
            raise ValueError("gammas must be nonnegative")
        return values

    @field_validator("graphs", "mechanisms")
    @classmethod
    def _nonempty(cls, values: List[Any]) -> List[Any]:
        if not values:
            raise ValueError("at least one entry is required")
        return values

    @model_validator(mode="after")
    def _interventions_cover_values(self) -> "BenchConfig":
        if self.n_int < self.k:
            raise ValueError(f"n_int ({self.n_int}) must be at least k ({self.k})")
        return self


class Settings(BaseModel):
    """Process-level settings read from the environment (and a .env file)."""

    log_level: str = "INFO"
    workers: int = Field(1, gt=0)
    base_seed: int = 0

    @classmethod
    def from_env(cls) -> "Settings":
        load_dotenv()
        return cls(
            log_level=os.getenv("CAUSAL_SIM_LOG_LEVEL", "INFO").upper(),
            workers=int(os.getenv("CAUSAL_SIM_WORKERS", "1")),
            base_seed=int(os.getenv("CAUSAL_SIM_BASE_SEED", "0")),
        )

    def configure_logging(self) -> None:
        logging.basicConfig(level=getattr(logging, self.log_level, logging.INFO), format=LOG_FORMAT)


def load_json_config(path: Union[str, Path], model: type) -> Any:
    """Validate a JSON file against a pydantic model."""
    payload: Dict[str, Any] = json.loads(Path(path).read_text(encoding="utf-8"))
    return model.model_validate(payload)

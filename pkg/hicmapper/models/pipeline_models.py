"""
Run-level models: validated pipeline configuration and the reproducibility manifest.
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..core.errors import ParameterRangeError
from .mapper_models import GAIN_HIGH, GAIN_LOW


class PipelineConfig(BaseModel):
    """Every parameter of a run, range-checked."""
    bin_size: int = Field(500000, gt=0)
    n_bins: Optional[int] = Field(None, gt=0)
    smoothing_radius: int = Field(1, ge=0)
    near_max: int = 2_000_000
    mitotic_min: int = 2_000_000
    mitotic_max: int = 12_000_000
    bands_on_smoothed: bool = False
    dense_csv: bool = False
    max_separation: Optional[int] = Field(None, ge=1)
    p: int = Field(2, ge=1)
    scale_by_sqrt_eigenvalue: bool = True
    gains: List[float] = Field(default_factory=lambda: [0.4, 0.4])
    beta: float = Field(0.05, gt=0.0)
    delta_draws: int = Field(10, ge=1)
    seed: Optional[int] = None
    node_function: Literal["mean", "midpoint"] = "mean"
    bootstrap_iterations: int = Field(100, ge=1)
    confidence_level: float = Field(0.90, gt=0.0, lt=1.0)
    workers: int = Field(1, ge=1)

    @field_validator("gains")
    @classmethod
    def _gains_in_range(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one gain is required")
        for gain in value:
            if not GAIN_LOW < gain < GAIN_HIGH:
                raise ValueError(f"gain {gain} outside (1/3, 1/2)")
        return value

    @model_validator(mode="after")
    def _check_bands(self):
        if not 0 < self.near_max <= self.mitotic_min < self.mitotic_max:
            raise ValueError("band thresholds must satisfy 0 < near_max <= mitotic_min < mitotic_max")
        return self

    @classmethod
    def checked(cls, **kwargs) -> "PipelineConfig":
        """
        Build a config, turning validation failures into ParameterRangeError.

        Raises:
            ParameterRangeError: If any field is outside its range
        """
        try:
            return cls(**kwargs)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}"
                for error in exc.errors()
            )
            raise ParameterRangeError(problems) from exc

    def gains_for(self, p: int) -> List[float]:
        """Gains broadcast to p coordinates (a single gain applies to all)."""
        if len(self.gains) == p:
            return list(self.gains)
        if len(self.gains) == 1:
            return self.gains * p
        raise ParameterRangeError(f"{len(self.gains)} gains given for {p} filter coordinates")

    def echo(self) -> Dict[str, Any]:
        """Config as recorded in manifests; the worker count never affects results."""
        return self.model_dump(exclude={"workers"})


class RunManifest(BaseModel):
    """What was run, with what, on which inputs."""
    version: str
    command: str
    config: Dict[str, Any]
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)

"""
Potential Schemas
Kernel configuration documents, sampling grids and hypothesis reports
"""
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import (
    GRID_EXCLUSION_RADIUS,
    GRID_NDIR,
    GRID_NR,
    GRID_R_MAX,
    GRID_R_MIN,
)

KernelKind = Literal["delta", "radial-sk", "delta-plus-f", "dipolar", "custom-radial"]
HypothesisStatus = Literal["pass", "fail", "not-applicable"]


class PotentialSpec(BaseModel):
    """Declarative kernel description, as read from the JSON config"""
    model_config = ConfigDict(frozen=True)

    kind: KernelKind
    dim: int = 3
    params: Dict[str, float] = Field(default_factory=dict)
    # custom-radial only: [[r, rho], ...] with strictly increasing r
    table: Optional[List[Tuple[float, float]]] = None

    def param(self, name: str, default: Optional[float] = None) -> Optional[float]:
        return self.params.get(name, default)


class GridSpec(BaseModel):
    """Log-spaced radii times unit directions; discretizes a.e. conditions"""
    model_config = ConfigDict(frozen=True)

    r_min: float = GRID_R_MIN
    r_max: float = GRID_R_MAX
    n_r: int = Field(default=GRID_NR, ge=1)
    n_dir: int = Field(default=GRID_NDIR, ge=1)
    exclusion_radius: float = Field(default=0.0, ge=0.0)

    @field_validator("r_min")
    @classmethod
    def positive_r_min(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("r_min must be positive")
        return v

    @model_validator(mode="after")
    def ordered_range(self) -> "GridSpec":
        if not self.r_min < self.r_max:
            raise ValueError("grid needs 0 < r_min < r_max")
        return self

    def refined(self, factor: int) -> "GridSpec":
        """Same range with about `factor` times as many points"""
        if factor <= 1:
            return self
        if factor == 4:
            n_r, n_dir = 2 * self.n_r, 2 * self.n_dir
        else:
            n_r, n_dir = factor * self.n_r, self.n_dir
        return self.model_copy(update={"n_r": n_r, "n_dir": n_dir})

    @classmethod
    def default_for(cls, smooth_at_origin: bool, **overrides) -> "GridSpec":
        base = {"exclusion_radius": 0.0 if smooth_at_origin else GRID_EXCLUSION_RADIUS}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


class HypothesisCheck(BaseModel):
    """One sampled hypothesis with its worst-case point"""
    name: str
    status: HypothesisStatus
    witness: Optional[List[float]] = None
    value: Optional[float] = None
    note: str = ""


class HypothesisReport(BaseModel):
    """Sampled validation of H1-H5; never a proof"""
    h1_even: HypothesisCheck
    h2_bounded: HypothesisCheck
    h3_scaled_gradient: HypothesisCheck
    h4_nonnegative: HypothesisCheck
    h5_regular_origin: HypothesisCheck
    notes: List[str] = Field(default_factory=list)

    def checks(self) -> List[HypothesisCheck]:
        return [self.h1_even, self.h2_bounded, self.h3_scaled_gradient,
                self.h4_nonnegative, self.h5_regular_origin]

    @property
    def h4_passes(self) -> bool:
        return self.h4_nonnegative.status == "pass"

    @property
    def h5_passes(self) -> bool:
        return self.h5_regular_origin.status == "pass"

    @property
    def h1_to_h4_pass(self) -> bool:
        return all(c.status == "pass" for c in self.checks()[:4])

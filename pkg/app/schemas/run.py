"""
Run Schemas
Validated command-line runs and reproduction records
"""
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.schemas.potential import PotentialSpec

Command = Literal["analyze", "sweep", "trace", "reproduce"]
ReportFormat = Literal["json", "md", "csv"]


class OutputSpec(BaseModel):
    path: Optional[str] = None  # directory; None prints JSON to stdout
    formats: List[ReportFormat] = Field(default_factory=lambda: ["json"])


class RunConfig(BaseModel):
    potential: Optional[PotentialSpec] = None
    command: Command
    c: Optional[float] = None
    c_range: Optional[Tuple[float, float, int]] = None  # (c_min, c_max, steps)
    axis: Optional[int] = None
    grid_nr: Optional[int] = Field(default=None, ge=1)
    grid_ndir: Optional[int] = Field(default=None, ge=1)
    allow_h4_failure: bool = False
    case: Optional[str] = None
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def command_requirements(self) -> "RunConfig":
        if self.command != "reproduce" and self.potential is None:
            raise ValueError(f"{self.command} requires a potential config")
        if self.command == "analyze":
            if self.c is None or self.c < 0:
                raise ValueError("analyze requires c >= 0")
        elif self.command == "sweep":
            if self.c_range is None:
                raise ValueError("sweep requires --c-min, --c-max and --c-steps")
            c_min, c_max, steps = self.c_range
            if c_min < 0 or steps < 2 or not c_max > c_min:
                raise ValueError("sweep requires 0 <= c_min < c_max and steps >= 2")
        elif self.command == "trace":
            if self.c is None or not self.c > 0:
                raise ValueError("trace requires c > 0")
            if self.axis is None:
                raise ValueError("trace requires --axis")
            if not 2 <= self.axis <= self.potential.dim:
                raise ValueError(f"axis must lie in 2..{self.potential.dim}")
        elif self.command == "reproduce" and not self.case:
            raise ValueError("reproduce requires --case")
        return self

    def c_grid(self) -> List[float]:
        c_min, c_max, steps = self.c_range
        return [c_min + (c_max - c_min) * k / (steps - 1) for k in range(steps)]


class ExpectedValue(BaseModel):
    """One reproduced quantity against its closed-form value"""
    name: str
    expected: float
    computed: Optional[float] = None
    tolerance: float
    provenance: str

    @property
    def matches(self) -> bool:
        if self.computed is None:
            return False
        if self.expected == float("inf"):
            return self.computed == float("inf")
        return abs(self.computed - self.expected) <= self.tolerance


class ReproCase(BaseModel):
    name: str
    potential: Optional[PotentialSpec] = None
    values: List[ExpectedValue] = Field(default_factory=list)
    certified_speeds: List[float] = Field(default_factory=list)
    inconclusive_speeds: List[float] = Field(default_factory=list)
    failures: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and all(v.matches for v in self.values)

"""
Dispersion Schemas
Sonic data, traced curves near the origin and limit comparisons
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class SonicData(BaseModel):
    """Sonic speed; undefined for kernels that are not regular at the origin"""
    defined: bool
    c_s: Optional[float] = None

    def alpha(self, c: float) -> float:
        """c^2 / c_s^2 - 1"""
        if not self.defined or self.c_s is None:
            raise ValueError("sonic speed is undefined for this kernel")
        return c * c / (self.c_s * self.c_s) - 1.0


class TraceSample(BaseModel):
    t: float
    gamma_plus: float
    gamma_minus: float
    residual_plus: float
    residual_minus: float

    @property
    def ratio_sq_plus(self) -> float:
        return (self.gamma_plus / self.t) ** 2

    @property
    def ratio_sq_minus(self) -> float:
        return (self.gamma_minus / self.t) ** 2


class CurveTrace(BaseModel):
    """Sampled branches of the zero set of R_j, t decreasing toward 0"""
    j: int
    c: float
    samples: List[TraceSample] = Field(default_factory=list)
    ell_estimate: float = float("nan")
    ell_error: float = float("nan")
    branch_agreement: float = float("nan")
    dropped: List[float] = Field(default_factory=list)  # t values with no root

    def ts(self) -> List[float]:
        return [s.t for s in self.samples]


class EllEqualityReport(BaseModel):
    c: float
    ells: Dict[int, float]
    ell_errors: Dict[int, float] = Field(default_factory=dict)
    all_positive: bool
    equal: bool
    max_spread: float
    tolerance: float


class MorseCheck(BaseModel):
    """Traced limits against alpha_c for kernels regular at the origin"""
    c: float
    applicable: bool
    predicted: Optional[float] = None
    traced: Dict[int, float] = Field(default_factory=dict)
    max_abs_diff: Optional[float] = None
    note: str = ""

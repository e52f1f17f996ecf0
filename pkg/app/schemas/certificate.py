"""
Certificate Schemas
Multiplier certificates, the dual-sign system and per-speed verdicts
"""
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from app.core.config import GRID_REFINE_FACTOR, SWEEP_WORKERS
from app.schemas.dispersion import EllEqualityReport
from app.schemas.potential import GridSpec, HypothesisReport

Status = Literal["certified-nonexistence", "inconclusive"]
Route = Literal["static-c0", "corollary-gradient", "corollary-window", "lp-sigma", "ell-mismatch", "none"]


class SigmaCertificate(BaseModel):
    """sigma in R^N with its sampled margins"""
    sigma: List[float]
    ell: float
    grid_margin: float
    worst_point: Optional[List[float]] = None
    sigma2_slacks: List[float]
    dual_components: List[float] = Field(default_factory=list)
    verified_on: GridSpec
    fine_margin: Optional[float] = None


class SigmaVerification(BaseModel):
    """Result of re-evaluating a multiplier vector on some grid"""
    margin: float
    scaled_margin: float
    worst_point: Optional[List[float]] = None
    sigma2_slacks: List[float]

    def holds(self, tol: float) -> bool:
        return self.scaled_margin >= -tol and min(self.sigma2_slacks) >= -tol


class FarkasSystem(BaseModel):
    """A z = b from the identities; b stays symbolic"""
    n: int
    ell: float
    A: List[List[float]]
    sigma_prime: List[float]
    dual_components: List[float]

    def matrix(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float)

    def dual_feasible(self, tol: float = 0.0) -> bool:
        return min(self.dual_components) >= -tol


class ClosedFormCheck(BaseModel):
    """Evidence for routes decided by a closed-form inequality"""
    name: str
    holds: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    witness: Optional[List[float]] = None


Evidence = Union[SigmaCertificate, EllEqualityReport, ClosedFormCheck]


class SpeedVerdict(BaseModel):
    c: float
    status: Status = "inconclusive"
    route: Route = "none"
    ell: Optional[float] = None
    evidence: Optional[Evidence] = None
    assumptions: List[str] = Field(default_factory=list)
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "certified-nonexistence"

    def to_report(self) -> Dict[str, Any]:
        """Certificate JSON shape"""
        sigma = None
        margin = None
        if isinstance(self.evidence, SigmaCertificate):
            sigma = list(self.evidence.sigma)
            margin = self.evidence.grid_margin
        return {
            "c": self.c,
            "status": self.status,
            "route": self.route,
            "sigma": sigma,
            "ell": self.ell,
            "grid_margin": margin,
            "assumptions": list(self.assumptions),
        }


class SweepReport(BaseModel):
    model: Dict[str, Any]
    c_grid: List[float]
    verdicts: List[SpeedVerdict] = Field(default_factory=list)
    certified_intervals: List[List[float]] = Field(default_factory=list)
    hypotheses: Optional[HypothesisReport] = None

    def to_report(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "verdicts": [v.to_report() for v in self.verdicts],
            "certified_intervals": [list(iv) for iv in self.certified_intervals],
        }


class PerturbationBound(BaseModel):
    """epsilon threshold under which the gradient corollary applies to delta + eps f"""
    dim: int
    f_l1: float
    scaled_derivative_l1: List[float]
    f_integral: float
    bound: float

    def sonic_speed(self, epsilon: float, a: float = 1.0) -> float:
        """(2a + 2 eps int f)^{1/2}"""
        return float(np.sqrt(2.0 * a + 2.0 * epsilon * self.f_integral))


class PerturbationSpec(BaseModel):
    """Even radial perturbation f of the contact interaction"""
    kind: Literal["gaussian", "tabulated"] = "gaussian"
    scale: float = 1.0
    # tabulated only: [[r, f], ...], f taken as zero beyond the last row
    table: Optional[List[Tuple[float, float]]] = None


class CertifyOptions(BaseModel):
    """Per-run knobs shared by every speed of a sweep"""
    grid: GridSpec
    hypotheses: Optional[HypothesisReport] = None
    allow_h4_failure: bool = False
    refine_factor: int = GRID_REFINE_FACTOR
    workers: int = SWEEP_WORKERS

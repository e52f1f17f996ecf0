"""
Potential Service
Evaluation of W-hat and xi_k d_k W-hat for the built-in kernel families,
custom radial profiles and sampled validation of the standing hypotheses
"""
from __future__ import annotations

import math
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from app.core.config import BOUND_CAP, H5_REL_TOL, H5_STENCILS
from app.core.errors import (
    InvalidParameterError,
    OriginEvaluationError,
    UnsupportedDimensionError,
)
from app.core.logging import logger
from app.schemas.potential import GridSpec, HypothesisCheck, HypothesisReport, PotentialSpec
from app.services.grid_service import samples_for

ArrayFn = Callable[[np.ndarray], np.ndarray]

KNOWN_PARAMS = {
    "delta": {"a"},
    "radial-sk": {"a", "b"},
    "delta-plus-f": {"a", "epsilon"},
    "dipolar": {"a", "b_tilde", "b"},
    "custom-radial": set(),
}


class RadialProfile(NamedTuple):
    """rho and rho' of W-hat(xi) = rho(|xi|), vectorized over r"""
    rho: ArrayFn
    drho: ArrayFn


class PotentialModel:
    """
    Immutable evaluator of a kernel's Fourier transform.

    `w_hat` and `gradient` take arrays of shape (..., dim); `grad_scaled`
    returns the components xi_k d_k W-hat(xi).
    """

    def __init__(
        self,
        spec: PotentialSpec,
        w_hat: ArrayFn,
        gradient: ArrayFn,
        *,
        radial: bool,
        even_per_component: bool,
        smooth_at_origin: bool,
        w_hat_origin: Optional[float] = None,
        profile: Optional[RadialProfile] = None,
        name: Optional[str] = None,
    ):
        self.spec = spec
        self._w_hat = w_hat
        self._gradient = gradient
        self.radial = radial
        self.even_per_component = even_per_component
        self.smooth_at_origin = smooth_at_origin
        self.w_hat_origin = w_hat_origin
        self.profile = profile
        self.name = name or spec.kind
        self.sample_cache: Dict = {}

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def flags(self) -> Dict[str, bool]:
        return {
            "radial": self.radial,
            "even_per_component": self.even_per_component,
            "smooth_at_origin": self.smooth_at_origin,
        }

    def w_hat(self, xi) -> np.ndarray:
        return self._w_hat(np.asarray(xi, dtype=float))

    def gradient(self, xi) -> np.ndarray:
        return self._gradient(np.asarray(xi, dtype=float))

    def grad_scaled(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return xi * self._gradient(xi)

    def summary(self) -> Dict:
        """Model description for reports"""
        out = {"kind": self.spec.kind, "dim": self.dim, "params": dict(self.spec.params)}
        if self.spec.table is not None:
            out["table_rows"] = len(self.spec.table)
        out["flags"] = self.flags
        out["w_hat_origin"] = self.w_hat_origin
        return out

    def __repr__(self) -> str:
        return f"PotentialModel({self.name}, dim={self.dim})"


# ---------------------------------------------------------------------------
# Radial models
# ---------------------------------------------------------------------------

def _norm(xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(xi * xi, axis=-1))


def radial_model(
    spec: PotentialSpec,
    rho: ArrayFn,
    drho: ArrayFn,
    *,
    smooth_at_origin: bool = True,
    name: Optional[str] = None,
) -> PotentialModel:
    """W-hat(xi) = rho(|xi|), grad W-hat = rho'(|xi|) xi / |xi|"""

    def w_hat(xi: np.ndarray) -> np.ndarray:
        return np.asarray(rho(_norm(xi)), dtype=float)

    def gradient(xi: np.ndarray) -> np.ndarray:
        r = _norm(xi)
        d = np.asarray(drho(r), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(r > 0, d / np.where(r > 0, r, 1.0), 0.0)
        return factor[..., None] * xi

    origin = float(rho(np.zeros(1))[0]) if smooth_at_origin else None
    return PotentialModel(
        spec,
        w_hat,
        gradient,
        radial=True,
        even_per_component=True,
        smooth_at_origin=smooth_at_origin,
        w_hat_origin=origin,
        profile=RadialProfile(rho, drho),
        name=name,
    )


def _delta(spec: PotentialSpec) -> PotentialModel:
    a = _positive(spec, "a", 1.0)

    def rho(r):
        return np.full(np.shape(r), a, dtype=float)

    def drho(r):
        return np.zeros(np.shape(r), dtype=float)

    return radial_model(spec, rho, drho, name=f"delta(a={a:g})")


def _radial_sk(spec: PotentialSpec) -> PotentialModel:
    a = _positive(spec, "a", 1.0)
    b = _positive(spec, "b", 1.0)

    def rho(r):
        return (1.0 + a * r * r) ** (-b / 2.0)

    def drho(r):
        return -a * b * r * (1.0 + a * r * r) ** (-b / 2.0 - 1.0)

    return radial_model(spec, rho, drho, name=f"radial-sk(a={a:g}, b={b:g})")


def _delta_plus_f(spec: PotentialSpec) -> PotentialModel:
    # f(x) = exp(-|x|^2), f-hat(xi) = pi^{N/2} exp(-|xi|^2 / 4)
    a = _positive(spec, "a", 1.0)
    eps = float(spec.param("epsilon", 0.0))
    if not math.isfinite(eps) or eps < 0:
        raise InvalidParameterError(f"delta-plus-f needs epsilon >= 0, got {eps}")
    amp = eps * math.pi ** (spec.dim / 2.0)

    def rho(r):
        return a + amp * np.exp(-r * r / 4.0)

    def drho(r):
        return -amp * (r / 2.0) * np.exp(-r * r / 4.0)

    return radial_model(spec, rho, drho, name=f"delta-plus-f(a={a:g}, eps={eps:g})")


def _custom_radial(spec: PotentialSpec) -> PotentialModel:
    if not spec.table or len(spec.table) < 2:
        raise InvalidParameterError("custom-radial needs a table with at least two [r, rho] rows")
    table = np.asarray(spec.table, dtype=float)
    r_tab, rho_tab = table[:, 0], table[:, 1]
    if not np.all(np.isfinite(table)):
        raise InvalidParameterError("custom-radial table has non-finite entries")
    if r_tab[0] < 0 or np.any(np.diff(r_tab) <= 0):
        raise InvalidParameterError("custom-radial table needs strictly increasing r >= 0")

    # monotone cubic inside the table, constant continuation outside it
    interp = PchipInterpolator(r_tab, rho_tab, extrapolate=False)
    d_interp = interp.derivative()
    lo, hi = r_tab[0], r_tab[-1]

    def rho(r):
        r = np.asarray(r, dtype=float)
        out = np.asarray(interp(np.clip(r, lo, hi)), dtype=float)
        return out

    def drho(r):
        r = np.asarray(r, dtype=float)
        inside = (r >= lo) & (r <= hi)
        return np.where(inside, np.asarray(d_interp(np.clip(r, lo, hi)), dtype=float), 0.0)

    return radial_model(spec, rho, drho, smooth_at_origin=bool(lo == 0.0),
                        name=f"custom-radial({len(r_tab)} rows)")


# ---------------------------------------------------------------------------
# Dipolar kernel on R^3
# ---------------------------------------------------------------------------

def _dipolar(spec: PotentialSpec) -> PotentialModel:
    a = _positive(spec, "a", 1.0)
    if "b_tilde" in spec.params:
        bt = float(spec.params["b_tilde"])
    else:
        bt = 4.0 * math.pi * float(spec.param("b", 0.0)) / 3.0
    if not (math.isfinite(a) and math.isfinite(bt)):
        raise InvalidParameterError("dipolar parameters must be finite")

    def w_hat(xi: np.ndarray) -> np.ndarray:
        s = np.sum(xi * xi, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = xi[..., 2] ** 2 / s
        return a + bt * (3.0 * u - 1.0)

    def gradient(xi: np.ndarray) -> np.ndarray:
        s = np.sum(xi * xi, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            common = -6.0 * bt * xi[..., 2] ** 2 / (s * s)
            grad = common[..., None] * xi
            grad[..., 2] += 6.0 * bt * xi[..., 2] / s
        return grad

    return PotentialModel(
        spec,
        w_hat,
        gradient,
        radial=False,
        even_per_component=True,
        smooth_at_origin=False,
        w_hat_origin=None,
        name=f"dipolar(a={a:g}, b_tilde={bt:g})",
    )


_BUILDERS = {
    "delta": _delta,
    "radial-sk": _radial_sk,
    "delta-plus-f": _delta_plus_f,
    "dipolar": _dipolar,
    "custom-radial": _custom_radial,
}


def _positive(spec: PotentialSpec, name: str, default: float) -> float:
    value = float(spec.param(name, default))
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{spec.kind} needs {name} > 0, got {value}")
    return value


def build_potential(spec: PotentialSpec) -> PotentialModel:
    """Validate a kernel spec and build its analytic evaluators"""
    if spec.dim < 2:
        raise UnsupportedDimensionError(f"dimension must be >= 2, got {spec.dim}")
    if spec.kind == "dipolar" and spec.dim != 3:
        raise UnsupportedDimensionError(f"dipolar kernel is defined on R^3, got dim={spec.dim}")
    unknown = set(spec.params) - KNOWN_PARAMS[spec.kind]
    if unknown:
        logger.warning(f"[Potential] Ignoring unknown {spec.kind} parameters: {sorted(unknown)}")
    model = _BUILDERS[spec.kind](spec)
    logger.debug(f"[Potential] Built {model.name} in dimension {spec.dim}")
    return model


# ---------------------------------------------------------------------------
# Point evaluation
# ---------------------------------------------------------------------------

def _as_point(model: PotentialModel, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (model.dim,):
        raise InvalidParameterError(f"expected a point of dimension {model.dim}, got shape {xi.shape}")
    return xi


def eval_w_hat(model: PotentialModel, xi) -> float:
    """Value of W-hat at one point"""
    xi = _as_point(model, xi)
    if not model.smooth_at_origin and not np.any(xi):
        raise OriginEvaluationError(f"{model.name} is not defined at the origin", witness=xi.tolist())
    return float(model.w_hat(xi[None, :])[0])


def eval_grad_scaled(model: PotentialModel, xi) -> np.ndarray:
    """(xi_1 d_1 W-hat, ..., xi_N d_N W-hat) at one nonzero point"""
    xi = _as_point(model, xi)
    if not np.any(xi):
        raise OriginEvaluationError("scaled gradient requested at the origin", witness=xi.tolist())
    return model.grad_scaled(xi[None, :])[0]


def radial_profile(model: PotentialModel) -> Optional[RadialProfile]:
    """rho and rho' when the model is radial"""
    return model.profile if model.radial else None


# ---------------------------------------------------------------------------
# Sampled hypothesis validation
# ---------------------------------------------------------------------------

def _witness(points: np.ndarray, idx: int) -> List[float]:
    return [float(x) for x in points[idx]]


def _hessian_at_origin(model: PotentialModel, h: float) -> np.ndarray:
    n = model.dim
    eye = np.eye(n)
    w0 = float(model.w_hat(np.zeros((1, n)))[0])
    hess = np.zeros((n, n))
    for i in range(n):
        plus = model.w_hat((h * eye[i])[None, :])[0]
        minus = model.w_hat((-h * eye[i])[None, :])[0]
        hess[i, i] = (plus - 2.0 * w0 + minus) / (h * h)
        for j in range(i + 1, n):
            stencil = np.stack([
                h * (eye[i] + eye[j]),
                h * (eye[i] - eye[j]),
                h * (-eye[i] + eye[j]),
                -h * (eye[i] + eye[j]),
            ])
            v = model.w_hat(stencil)
            hess[i, j] = hess[j, i] = (v[0] - v[1] - v[2] + v[3]) / (4.0 * h * h)
    return hess


def _check_h5(model: PotentialModel) -> HypothesisCheck:
    origin = [0.0] * model.dim
    if not model.smooth_at_origin or model.w_hat_origin is None:
        return HypothesisCheck(name="H5", status="fail", witness=origin,
                               note="W-hat is not continuous at the origin; sonic speed undefined")
    if not model.w_hat_origin > 0:
        return HypothesisCheck(name="H5", status="fail", witness=origin, value=model.w_hat_origin,
                               note="W-hat(0) must be positive")
    stencils = sorted(H5_STENCILS, reverse=True)
    hessians = [_hessian_at_origin(model, h) for h in stencils]
    floor = 1e-6 * max(1.0, abs(model.w_hat_origin))
    worst = 0.0
    for coarse, fine in zip(hessians, hessians[1:]):
        scale = max(np.max(np.abs(coarse)), np.max(np.abs(fine)))
        diff = float(np.max(np.abs(coarse - fine)))
        ratio = diff / max(scale, floor) if diff > floor else 0.0
        worst = max(worst, ratio)
    if worst > H5_REL_TOL:
        return HypothesisCheck(name="H5", status="fail", witness=origin, value=worst,
                               note="second differences do not settle across stencils")
    return HypothesisCheck(name="H5", status="pass", value=model.w_hat_origin,
                           note=f"Hessian estimates agree within {worst:.2e}")


def check_hypotheses(model: PotentialModel, grid: GridSpec) -> HypothesisReport:
    """Sampled pass/fail per hypothesis with worst-case witnesses"""
    data = samples_for(model, grid)
    pts, w = data.points, data.w
    notes: List[str] = []

    # H1 evenness
    w_neg = model.w_hat(-pts)
    gap = np.abs(w - w_neg)
    idx = int(np.argmax(gap))
    if gap[idx] <= 1e-12 * (1.0 + abs(w[idx])):
        h1 = HypothesisCheck(name="H1", status="pass", value=float(gap[idx]))
    else:
        h1 = HypothesisCheck(name="H1", status="fail", witness=_witness(pts, idx), value=float(gap[idx]),
                             note="W-hat(xi) != W-hat(-xi)")

    # H2 surrogate: W-hat in L^infinity on the samples
    absw = np.where(np.isfinite(w), np.abs(w), np.inf)
    idx = int(np.argmax(absw))
    if absw[idx] <= BOUND_CAP:
        h2 = HypothesisCheck(name="H2", status="pass", value=float(absw[idx]))
    else:
        h2 = HypothesisCheck(name="H2", status="fail", witness=_witness(pts, idx), value=float(absw[idx]),
                             note="W-hat unbounded or non-finite on the grid")
    if model.dim >= 4:
        notes.append("extra multiplier conditions for N >= 4 are not modelled; only W-hat level checks ran")
        if model.spec.kind == "radial-sk" and not model.spec.param("b", 1.0) > model.dim - 1:
            notes.append(f"radial-sk in dimension {model.dim} needs b > {model.dim - 1} for integrability")

    # H3: every xi_k d_j W-hat bounded
    mixed = np.abs(pts)[:, :, None] * np.abs(data.gradient)[:, None, :]
    per_point = np.max(np.where(np.isfinite(mixed), mixed, np.inf).reshape(len(pts), -1), axis=1)
    idx = int(np.argmax(per_point))
    if per_point[idx] <= BOUND_CAP:
        h3 = HypothesisCheck(name="H3", status="pass", value=float(per_point[idx]))
    else:
        h3 = HypothesisCheck(name="H3", status="fail", witness=_witness(pts, idx), value=float(per_point[idx]),
                             note="xi_k d_j W-hat unbounded or non-finite")

    # H4 nonnegativity
    idx = int(np.argmin(w))
    scale = 1.0 + float(np.max(np.abs(w[np.isfinite(w)]))) if np.any(np.isfinite(w)) else 1.0
    if w[idx] >= -1e-12 * scale:
        h4 = HypothesisCheck(name="H4", status="pass", value=float(w[idx]))
    else:
        h4 = HypothesisCheck(name="H4", status="fail", witness=_witness(pts, idx), value=float(w[idx]),
                             note="W-hat takes negative values")

    h5 = _check_h5(model)

    report = HypothesisReport(h1_even=h1, h2_bounded=h2, h3_scaled_gradient=h3,
                              h4_nonnegative=h4, h5_regular_origin=h5, notes=notes)
    failed = [c.name for c in report.checks() if c.status == "fail"]
    if failed:
        logger.info(f"[Potential] {model.name}: sampled hypotheses failing: {failed}")
    else:
        logger.info(f"[Potential] {model.name}: all sampled hypotheses pass")
    return report

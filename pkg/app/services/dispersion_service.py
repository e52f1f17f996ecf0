"""
Dispersion Service
Dispersion relation, sonic speed and the branches of {R_j = 0} near the origin
"""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from app.core.config import (
    ELL_ABS_TOL,
    ELL_REL_TOL,
    TRACE_BRACKET_EXPANSIONS,
    TRACE_N,
    TRACE_RESIDUAL_TOL,
    TRACE_SLOPE_JUMP,
    TRACE_T_MAX,
    TRACE_T_MIN,
)
from app.core.errors import (
    BranchMismatchError,
    InvalidParameterError,
    LostBranchError,
    NoRootError,
)
from app.core.logging import logger
from app.schemas.dispersion import CurveTrace, EllEqualityReport, MorseCheck, SonicData, TraceSample
from app.services.potential_service import PotentialModel, eval_w_hat

MIN_SAMPLES = 4
NEWTON_STEPS = 3


def omega_squared(model: PotentialModel, xi) -> float:
    """|xi|^4 + 2 W-hat(xi) |xi|^2"""
    xi = np.asarray(xi, dtype=float)
    s = float(np.dot(xi, xi))
    if s == 0.0 and model.smooth_at_origin:
        return 0.0
    return s * s + 2.0 * eval_w_hat(model, xi) * s


def sonic_speed(model: PotentialModel) -> SonicData:
    w0 = model.w_hat_origin
    if not model.smooth_at_origin or w0 is None or not w0 > 0:
        return SonicData(defined=False)
    return SonicData(defined=True, c_s=math.sqrt(2.0 * w0))


def ell_tolerance(ells: Sequence[float]) -> float:
    scale = max((abs(v) for v in ells), default=0.0)
    return max(ELL_REL_TOL * scale, ELL_ABS_TOL)


# ---------------------------------------------------------------------------
# Slices and the quartic
# ---------------------------------------------------------------------------

def _check_axis(model: PotentialModel, j: int) -> None:
    if not 2 <= j <= model.dim:
        raise InvalidParameterError(f"axis j must lie in 2..{model.dim}, got {j}")


def _slice_points(dim: int, j: int, t, y) -> np.ndarray:
    t, y = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(y, dtype=float))
    xi = np.zeros(t.shape + (dim,))
    xi[..., 0] = t
    xi[..., j - 1] = y
    return xi


def slice_function(model: PotentialModel, j: int) -> Callable:
    """(t, y) -> W-hat(t e_1 + y e_j)"""
    _check_axis(model, j)

    def w_j(t, y):
        return model.w_hat(_slice_points(model.dim, j, t, y))

    return w_j


def quartic_residual(model: PotentialModel, j: int, c: float, t, y):
    """R_j(t, y) = s^2 + 2 w_j s - c^2 t^2 with s = t^2 + y^2"""
    _check_axis(model, j)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    s = t * t + y * y
    w = model.w_hat(_slice_points(model.dim, j, t, y))
    return s * s + 2.0 * w * s - c * c * t * t


def _residual_scale(c: float, t: float) -> float:
    return 1.0 + t ** 4 + c * c * t * t


# ---------------------------------------------------------------------------
# Root finding along one branch
# ---------------------------------------------------------------------------

class _Branch:
    """phi(u) = R_j(t, sign*u) for u > 0 and its derivative"""

    def __init__(self, model: PotentialModel, j: int, c: float, t: float, sign: float):
        self.model, self.j, self.c, self.t, self.sign = model, j, c, t, sign

    def _eval(self, u: float) -> Tuple[float, float]:
        y = self.sign * u
        xi = _slice_points(self.model.dim, self.j, self.t, y)[None, :]
        w = float(self.model.w_hat(xi)[0])
        dw = float(self.model.gradient(xi)[0, self.j - 1])
        s = self.t * self.t + y * y
        value = s * s + 2.0 * w * s - self.c * self.c * self.t * self.t
        slope = self.sign * (4.0 * y * (s + w) + 2.0 * s * dw)
        return value, slope

    def __call__(self, u: float) -> float:
        return self._eval(u)[0]

    def polish(self, u: float) -> float:
        """A few Newton steps, each kept only if it lowers |phi|"""
        value, slope = self._eval(u)
        for _ in range(NEWTON_STEPS):
            if value == 0.0 or slope == 0.0 or not math.isfinite(slope):
                break
            cand = u - value / slope
            if not cand > 0:
                break
            cand_value, cand_slope = self._eval(cand)
            if abs(cand_value) >= abs(value):
                break
            u, value, slope = cand, cand_value, cand_slope
        return u

    def root(self, seed: Optional[float]) -> Optional[float]:
        if self(0.0) >= 0.0:
            return None
        lo = hi = None
        if seed is not None and seed > 0:
            a, b = 0.5 * seed, 2.0 * seed
            if self(a) < 0.0 < self(b):
                lo, hi = a, b
        if lo is None:
            lo, hi = 0.0, self.c
            for _ in range(TRACE_BRACKET_EXPANSIONS):
                if self(hi) > 0.0:
                    break
                hi *= 2.0
            if not self(hi) > 0.0:
                return None
        u = brentq(self, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200)
        return self.polish(u)


def _t_grid(t_min: float, t_max: float, n: int) -> List[float]:
    ts = [t_max * 2.0 ** (-k) for k in range(n)]
    return [t for t in ts if t >= t_min * (1.0 - 1e-12)]


# ---------------------------------------------------------------------------
# Extrapolation
# ---------------------------------------------------------------------------

def richardson_limit(hs: Sequence[float], values: Sequence[float]) -> float:
    """
    Limit at h = 0 of values sampled at steps hs, assuming an expansion in
    integer powers of h. Neville's table, so steps need not be geometric;
    for ratio-r steps each level is (r^m * fine - coarse) / (r^m - 1).
    """
    n_steps = len(values)
    if n_steps == 1:
        return float(values[0])
    last_level = [float(v) for v in values]
    for m in range(1, n_steps):
        this_level = []
        for i in range(n_steps - m):
            h_lo, h_hi = hs[i], hs[i + m]
            this_level.append((h_lo * last_level[i + 1] - h_hi * last_level[i]) / (h_lo - h_hi))
        last_level = this_level
    return last_level[0]


def _limit_with_error(ts: Sequence[float], ratios: Sequence[float]) -> Tuple[float, float]:
    hs = [t * t for t in ts]
    ell = richardson_limit(hs[-3:], ratios[-3:])
    previous = richardson_limit(hs[-4:-1], ratios[-4:-1])
    return ell, abs(ell - previous)


def _extrapolate(trace: CurveTrace) -> Tuple[float, float, float, float]:
    ts = trace.ts()
    ell_p, err_p = _limit_with_error(ts, [s.ratio_sq_plus for s in trace.samples])
    ell_m, err_m = _limit_with_error(ts, [s.ratio_sq_minus for s in trace.samples])
    return ell_p, ell_m, max(err_p, err_m), abs(ell_p - ell_m)


def estimate_ell(trace: CurveTrace) -> float:
    """Extrapolated common limit of (gamma+/t)^2 and (gamma-/t)^2"""
    if len(trace.samples) < MIN_SAMPLES:
        raise NoRootError(
            f"j={trace.j}, c={trace.c}: only {len(trace.samples)} usable samples, need {MIN_SAMPLES}"
        )
    ell_p, ell_m, _, _ = _extrapolate(trace)
    last = trace.samples[-1]
    agreement = abs(last.ratio_sq_plus - last.ratio_sq_minus)
    tol = ell_tolerance([ell_p, ell_m])
    if abs(ell_p - ell_m) > tol or agreement > tol:
        raise BranchMismatchError(
            f"j={trace.j}, c={trace.c}: branch limits {ell_p:.8g} and {ell_m:.8g} disagree",
            witness=[last.t, last.gamma_plus, last.gamma_minus],
        )
    return 0.5 * (ell_p + ell_m)


# ---------------------------------------------------------------------------
# Tracing
# ---------------------------------------------------------------------------

def trace_gamma(
    model: PotentialModel,
    j: int,
    c: float,
    t_min: float = TRACE_T_MIN,
    t_max: float = TRACE_T_MAX,
    n: int = TRACE_N,
) -> CurveTrace:
    """
    Follow gamma+ > 0 and gamma- < 0 with R_j(t, gamma(t)) = 0 as t decreases.

    Each root is bracketed and solved with brentq, then Newton-polished. The
    previous root, scaled by t / t_prev, seeds a local bracket. Large t without
    a sign change are dropped (the branch need not reach that far); a branch
    that vanishes below that is a NoRootError once fewer than four samples remain.
    """
    _check_axis(model, j)
    if not c > 0:
        raise InvalidParameterError(f"tracing needs c > 0, got {c}")
    if not 0 < t_min < t_max:
        raise InvalidParameterError(f"tracing needs 0 < t_min < t_max, got {t_min}, {t_max}")

    trace = CurveTrace(j=j, c=c)
    seeds: Dict[float, Optional[float]] = {1.0: None, -1.0: None}
    t_prev: Optional[float] = None
    slope_prev: Optional[float] = None

    for t in _t_grid(t_min, t_max, n):
        roots = {}
        for sign in (1.0, -1.0):
            seed = seeds[sign] * t / t_prev if seeds[sign] is not None else None
            branch = _Branch(model, j, c, t, sign)
            u = branch.root(seed)
            roots[sign] = None if u is None else (u, branch(u))

        if roots[1.0] is None or roots[-1.0] is None:
            logger.debug(f"[Dispersion] j={j} c={c}: no sign change at t={t:.3e}")
            trace.dropped.append(t)
            continue

        (u_p, r_p), (u_m, r_m) = roots[1.0], roots[-1.0]
        tol = TRACE_RESIDUAL_TOL * _residual_scale(c, t)
        if abs(r_p) > tol or abs(r_m) > tol:
            logger.debug(f"[Dispersion] j={j} c={c}: residual {max(abs(r_p), abs(r_m)):.2e} at t={t:.3e}")
            trace.dropped.append(t)
            continue

        if t_prev is not None:
            slope = math.log(u_p / seeds[1.0]) / math.log(t / t_prev)
            if slope_prev is not None and abs(slope - slope_prev) > TRACE_SLOPE_JUMP:
                raise LostBranchError(
                    f"j={j}, c={c}: log-log slope jumped from {slope_prev:.3f} to {slope:.3f} at t={t:.3e}",
                    witness=[t, u_p],
                )
            slope_prev = slope

        trace.samples.append(TraceSample(
            t=t, gamma_plus=u_p, gamma_minus=-u_m, residual_plus=r_p, residual_minus=r_m,
        ))
        seeds = {1.0: u_p, -1.0: u_m}
        t_prev = t

    if len(trace.samples) < MIN_SAMPLES:
        raise NoRootError(
            f"j={j}, c={c}: no root of R_j near the origin at {len(trace.dropped)} of "
            f"{len(trace.dropped) + len(trace.samples)} sampled t",
            witness=trace.dropped[-1:] or None,
        )

    ell_p, ell_m, err, _ = _extrapolate(trace)
    last = trace.samples[-1]
    trace.ell_estimate = 0.5 * (ell_p + ell_m)
    trace.ell_error = err
    trace.branch_agreement = abs(last.ratio_sq_plus - last.ratio_sq_minus)
    logger.debug(
        f"[Dispersion] j={j} c={c}: {len(trace.samples)} samples, ell={trace.ell_estimate:.10g} "
        f"(+/- {trace.ell_error:.1e})"
    )
    return trace


# ---------------------------------------------------------------------------
# Limits across axes
# ---------------------------------------------------------------------------

def traced_ells(model: PotentialModel, c: float) -> Tuple[Dict[int, float], Dict[int, float]]:
    """ell_{j,c} and extrapolation errors for j = 2..N; radial slices are traced once"""
    ells: Dict[int, float] = {}
    errors: Dict[int, float] = {}
    axes = list(range(2, model.dim + 1))
    for j in axes:
        if model.radial and j > 2:
            ells[j], errors[j] = ells[2], errors[2]
            continue
        trace = trace_gamma(model, j, c)
        ells[j] = estimate_ell(trace)
        errors[j] = trace.ell_error
    return ells, errors


def morse_crosscheck(model: PotentialModel, c: float) -> MorseCheck:
    """Traced limits against alpha_c = c^2 / c_s^2 - 1"""
    sonic = sonic_speed(model)
    if not sonic.defined:
        return MorseCheck(c=c, applicable=False, note="sonic speed undefined")
    if not c > sonic.c_s:
        return MorseCheck(c=c, applicable=False, note=f"c <= c_s = {sonic.c_s:.6g}")
    predicted = sonic.alpha(c)
    traced, _ = traced_ells(model, c)
    diff = max(abs(v - predicted) for v in traced.values())
    logger.debug(f"[Dispersion] {model.name} c={c}: alpha={predicted:.8g}, max traced gap {diff:.2e}")
    return MorseCheck(c=c, applicable=True, predicted=predicted, traced=traced, max_abs_diff=diff)


def check_ell_equality(model: PotentialModel, c: float) -> EllEqualityReport:
    if not c > 0:
        raise InvalidParameterError(f"ell equality needs c > 0, got {c}")
    ells, errors = traced_ells(model, c)
    values = list(ells.values())
    spread = max(values) - min(values)
    tol = ell_tolerance(values)
    report = EllEqualityReport(
        c=c,
        ells=ells,
        ell_errors=errors,
        all_positive=all(v > 0 for v in values),
        equal=spread <= tol,
        max_spread=spread,
        tolerance=tol,
    )
    logger.info(
        f"[Dispersion] {model.name} c={c}: ells={ {k: round(v, 8) for k, v in ells.items()} } "
        f"equal={report.equal}"
    )
    return report


# ---------------------------------------------------------------------------
# Dipolar closed forms
# ---------------------------------------------------------------------------

def dipolar_gamma_closed_form(a: float, b_tilde: float, c: float, t, j: int = 3):
    """
    gamma+_{j,c}(t) for W-hat = a + b_tilde (3 xi_3^2 / |xi|^2 - 1).

    On the (xi_1, xi_3) slice s = t^2 + y^2 solves s^2 + 2(a + 2 b_tilde) s = (6 b_tilde + c^2) t^2;
    on the (xi_1, xi_2) slice W-hat is the constant a - b_tilde.
    """
    t = np.asarray(t, dtype=float)
    if j == 3:
        p, q = a + 2.0 * b_tilde, 6.0 * b_tilde + c * c
    elif j == 2:
        p, q = a - b_tilde, c * c
    else:
        raise InvalidParameterError(f"dipolar slices are j=2 or j=3, got {j}")
    rhs = q * t * t
    s = rhs / (p + np.sqrt(p * p + rhs))
    return np.sqrt(s - t * t)


def dipolar_ell_closed_form(a: float, b_tilde: float, c: float, j: int = 3) -> float:
    if j == 3:
        return -1.0 + (6.0 * b_tilde + c * c) / (2.0 * (a + 2.0 * b_tilde))
    if j == 2:
        return c * c / (2.0 * (a - b_tilde)) - 1.0
    raise InvalidParameterError(f"dipolar slices are j=2 or j=3, got {j}")

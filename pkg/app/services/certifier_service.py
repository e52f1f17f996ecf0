"""
Certifier Service
Per-speed nonexistence decisions: the c = 0 sign test, the closed-form
corollaries, the sigma-multiplier feasibility problem and speed sweeps
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from app.core.config import FEASIBILITY_TOL, LP_MARGIN_SHIFT, MORSE_AGREE_TOL, MORSE_REJECT_TOL
from app.core.errors import (
    CertifyError,
    FarkasConsistencyError,
    InvalidParameterError,
    NonRadialModelError,
    TraceError,
)
from app.core.helpers import certified_runs
from app.core.logging import logger
from app.schemas.certificate import (
    CertifyOptions,
    ClosedFormCheck,
    FarkasSystem,
    SigmaCertificate,
    SigmaVerification,
    SpeedVerdict,
    SweepReport,
)
from app.schemas.potential import GridSpec, HypothesisReport
from app.services.dispersion_service import check_ell_equality, morse_crosscheck, sonic_speed
from app.services.grid_service import radii, samples_for
from app.services.potential_service import PotentialModel, check_hypotheses
from app.services.simplex_service import solve_feasibility

GRID_ASSUMPTION = "grid-sampled conditions"
H6_ASSUMPTION = "H6 measure-zero assumed"
TRACED_ELL = "ell from extrapolation"
MORSE_ELL = "ell = alpha_c (regular at the origin)"
TAIL_SLOPE_TOL = 1e-2


# ---------------------------------------------------------------------------
# c = 0
# ---------------------------------------------------------------------------

def check_static(model: PotentialModel, grid: GridSpec) -> SpeedVerdict:
    """Certified iff every xi_j d_j W-hat <= 0 (radial: rho' <= 0)"""
    if model.radial:
        r = radii(grid)
        rho = model.profile.rho(r)
        drho = model.profile.drho(r)
        tol = FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(rho))))
        idx = int(np.argmax(drho))
        worst = float(drho[idx])
        check = ClosedFormCheck(name="rho' <= 0", holds=worst <= tol, value=worst, threshold=0.0,
                                witness=[float(r[idx])])
        assumptions = ["radial profile sampled on the radius grid"]
    else:
        data = samples_for(model, grid)
        tol = FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(data.w))))
        per_point = np.max(data.scaled, axis=1)
        idx = int(np.argmax(per_point))
        worst = float(per_point[idx])
        check = ClosedFormCheck(name="xi_j d_j W-hat <= 0", holds=worst <= tol, value=worst, threshold=0.0,
                                witness=[float(x) for x in data.points[idx]])
        assumptions = [GRID_ASSUMPTION]

    if check.holds:
        return SpeedVerdict(c=0.0, status="certified-nonexistence", route="static-c0",
                            evidence=check, assumptions=assumptions)
    return SpeedVerdict(c=0.0, evidence=check,
                        reason=f"sign condition fails at {check.witness} (value {worst:.3e})")


# ---------------------------------------------------------------------------
# Closed-form corollaries
# ---------------------------------------------------------------------------

def _tail_slope(r: np.ndarray, ratio: np.ndarray) -> float:
    """d log(ratio) / d log(r) over the last decade of valid samples"""
    if len(r) < 2:
        return 0.0
    first = min(int(np.searchsorted(r, r[-1] / 10.0)), len(r) - 2)
    if ratio[first] <= 0 or ratio[-1] <= 0:
        return 0.0
    return float((math.log(ratio[-1]) - math.log(ratio[first])) / (math.log(r[-1]) - math.log(r[first])))


def radial_inf_ratio(model: PotentialModel, grid: Optional[GridSpec] = None) -> float:
    """
    inf over r > 0 of rho(r) / (|rho'(r)| r).

    Sampled on the radius grid widened by four decades below and eight above,
    then refined by a bounded golden-section search around the sampled minimum.
    A minimum at the outer edge is read as an infimum of 0 when the ratio still
    falls faster than r^{-1/2}, or falls at all past the sampling grid's r_max.
    Subnormal samples are dropped.
    """
    if not model.radial or model.profile is None:
        raise NonRadialModelError(f"{model.name} has no radial profile")
    grid = grid or GridSpec()
    key = ("inf_ratio", grid)
    if key in model.sample_cache:
        return model.sample_cache[key]

    rho, drho = model.profile
    base = radii(grid)
    r = np.unique(np.concatenate([
        np.geomspace(grid.r_min * 1e-4, grid.r_min, 17),
        base,
        np.geomspace(grid.r_max, grid.r_max * 1e8, 33),
    ]))
    with np.errstate(all="ignore"):
        num = np.asarray(rho(r), dtype=float)
        den = np.abs(np.asarray(drho(r), dtype=float)) * r
        ratio = num / den
    tiny = np.finfo(float).tiny
    valid = np.isfinite(ratio) & np.isfinite(num) & (den >= tiny) & ~((num > 0) & (num < tiny))

    if not np.any(valid):
        value = math.inf
    else:
        rv, qv = r[valid], ratio[valid]
        idx = int(np.argmin(qv))
        value = float(qv[idx])
        if idx == len(qv) - 1:
            slope = _tail_slope(rv, qv)
            if slope < -0.5 or (slope < -TAIL_SLOPE_TOL and rv[-1] > grid.r_max):
                value = 0.0
        elif 0 < idx < len(qv) - 1:

            def objective(log_r: float) -> float:
                rr = np.array([math.exp(log_r)])
                d = abs(float(drho(rr)[0])) * rr[0]
                return float(rho(rr)[0]) / d if d > 0 else math.inf

            res = minimize_scalar(objective, bounds=(math.log(rv[idx - 1]), math.log(rv[idx + 1])),
                                  method="bounded", options={"xatol": 1e-12})
            if res.success and math.isfinite(res.fun):
                value = min(value, float(res.fun))
        value = max(value, 0.0)

    model.sample_cache[key] = value
    logger.debug(f"[Certifier] {model.name}: inf rho / (|rho'| r) = {value:.10g}")
    return value


def gradient_constant(dim: int) -> float:
    return max(1.0, 2.0 / (dim - 1))


def window_bound(model: PotentialModel, grid: GridSpec) -> float:
    """
    m of the speed-window corollary: radial models use inf rho / (|rho'| r),
    other kernels inf over the grid of (N-1) W-hat / sum_{k>=2} |xi_k d_k W-hat|
    (points with a zero denominator skipped, empty infimum = +inf)
    """
    if model.radial:
        return radial_inf_ratio(model, grid)
    key = ("window", grid)
    if key not in model.sample_cache:
        data = samples_for(model, grid)
        den = np.sum(np.abs(data.scaled[:, 1:]), axis=1)
        live = den > 0
        if not np.any(live):
            value = math.inf
        else:
            value = float(np.min((model.dim - 1) * data.w[live] / den[live]))
        model.sample_cache[key] = value
    return model.sample_cache[key]


def _gradient_check(model: PotentialModel, grid: GridSpec) -> ClosedFormCheck:
    k = gradient_constant(model.dim)
    if model.radial:
        ratio = radial_inf_ratio(model, grid)
        return ClosedFormCheck(name="inf rho / (|rho'| r) >= max{1, 2/(N-1)}",
                               holds=ratio >= k * (1.0 - 1e-9), value=ratio, threshold=k)
    data = samples_for(model, grid)
    rhs = k * np.sum(np.abs(data.scaled[:, 1:]), axis=1) + np.abs(data.scaled[:, 0])
    slack = data.w - rhs
    idx = int(np.argmin(slack))
    tol = FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(data.w))))
    return ClosedFormCheck(name="W-hat >= max{1, 2/(N-1)} sum_{k>=2}|xi_k d_k W-hat| + |xi_1 d_1 W-hat|",
                           holds=bool(slack[idx] >= -tol), value=float(slack[idx]), threshold=0.0,
                           witness=[float(x) for x in data.points[idx]])


def corollary_gradient_bound(model: PotentialModel, grid: GridSpec) -> bool:
    return _gradient_check(model, grid).holds


def corollary_speed_window(model: PotentialModel, c: float, grid: GridSpec) -> bool:
    """alpha_c <= m; False outside c > c_s"""
    sonic = sonic_speed(model)
    if not sonic.defined or not c > sonic.c_s:
        return False
    return sonic.alpha(c) <= window_bound(model, grid)


# ---------------------------------------------------------------------------
# sigma multipliers
# ---------------------------------------------------------------------------

def sigma2_rows(dim: int, ell: float):
    """
    The sigma-2 conditions as rows G sigma >= 1:
    -s1 + S >= 1, s1 + (ell + 2) S >= 1, s1 + S + 2 ell s_j >= 1 for j = 2..N,
    with S the sum of s2..sN
    """
    rows = [np.concatenate([[-1.0], np.ones(dim - 1)]),
            np.concatenate([[1.0], np.full(dim - 1, ell + 2.0)])]
    for j in range(1, dim):
        row = np.ones(dim)
        row[j] += 2.0 * ell
        rows.append(row)
    G = np.vstack(rows)
    return G, np.ones(len(G))


def sigma2_slacks(sigma: Sequence[float], ell: float) -> List[float]:
    sigma = np.asarray(sigma, dtype=float)
    s1, S = float(sigma[0]), float(np.sum(sigma[1:]))
    per_axis = min(S + 2.0 * ell * float(sk) + s1 - 1.0 for sk in sigma[1:])
    return [S - s1 - 1.0, S + (s1 - 1.0) / (ell + 2.0), per_axis]


def _sigma1_rows(model: PotentialModel, ell: float, grid: GridSpec):
    """rows a . sigma >= -W-hat with a = (-g_1, ell g_2, ..., ell g_N)"""
    data = samples_for(model, grid)
    G = data.scaled * np.concatenate([[-1.0], np.full(model.dim - 1, ell)])
    return data, G, -data.w


def verify_sigma(model: PotentialModel, ell: float, sigma: Sequence[float], fine_grid: GridSpec) -> SigmaVerification:
    """Recompute the sigma-1 margin on `fine_grid` together with the sigma-2 slacks"""
    sigma = np.asarray(sigma, dtype=float)
    data, G, h = _sigma1_rows(model, ell, fine_grid)
    lhs = G @ sigma - h
    scaled = lhs / np.maximum(np.linalg.norm(G, axis=1), 1.0)
    idx = int(np.argmin(lhs))
    return SigmaVerification(
        margin=float(lhs[idx]),
        scaled_margin=float(np.min(scaled)),
        worst_point=[float(x) for x in data.points[idx]],
        sigma2_slacks=sigma2_slacks(sigma, ell),
    )


def build_farkas_system(n: int, ell: float, sigma: Sequence[float]) -> FarkasSystem:
    """A, sigma' = (sigma, -1) and A^T sigma'; the b of A z = b stays symbolic"""
    if n < 2:
        raise InvalidParameterError(f"dimension must be >= 2, got {n}")
    if not ell > 0:
        raise InvalidParameterError(f"ell must be positive, got {ell}")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,):
        raise InvalidParameterError(f"sigma must have {n} entries, got shape {sigma.shape}")

    A = np.ones((n + 1, n + 1))
    A[0, 0] = -1.0
    for i in range(1, n):
        A[i, i] = 1.0 + 2.0 * ell
        A[i, n] = 2.0 + ell
    # last row all ones: the closing identity has coefficient 1 on its final unknown
    sigma_prime = np.concatenate([sigma, [-1.0]])
    dual = A.T @ sigma_prime

    s1, S = sigma[0], float(np.sum(sigma[1:]))
    closed = np.concatenate([
        [-s1 + S - 1.0],
        s1 + S + 2.0 * ell * sigma[1:] - 1.0,
        [s1 + (ell + 2.0) * S - 1.0],
    ])
    scale = 1.0 + float(np.max(np.abs(A))) * float(np.sum(np.abs(sigma_prime)))
    if np.max(np.abs(dual - closed)) > 1e-12 * scale:
        raise FarkasConsistencyError(
            f"A^T sigma' deviates from the closed forms by {np.max(np.abs(dual - closed)):.3e}",
            witness=sigma.tolist(),
        )
    return FarkasSystem(n=n, ell=ell, A=A.tolist(), sigma_prime=sigma_prime.tolist(),
                        dual_components=dual.tolist())


def sigma_feasibility(model: PotentialModel, ell: float, grid: GridSpec) -> Optional[SigmaCertificate]:
    """
    Exchange-method LP for sigma over the sampled sigma-1 rows plus the sigma-2 rows.
    Grid rows are first tightened by LP_MARGIN_SHIFT to favour interior points;
    the unshifted system is the fallback.
    """
    if not ell > 0:
        raise InvalidParameterError(f"ell must be positive, got {ell}")
    data, G, h = _sigma1_rows(model, ell, grid)
    finite = np.all(np.isfinite(G), axis=1) & np.isfinite(h)
    if not np.all(finite):
        logger.warning(f"[Certifier] {model.name}: {int(np.sum(~finite))} non-finite sigma-1 rows")
        return None
    G2, h2 = sigma2_rows(model.dim, ell)

    point = None
    for shift in (LP_MARGIN_SHIFT, 0.0):
        point = solve_feasibility(G, h, G2, h2, shift=shift)
        if point is not None:
            break
    if point is None:
        logger.info(f"[Certifier] {model.name}: sampled sigma system infeasible at ell={ell:.6g}")
        return None

    sigma = point.x
    check = verify_sigma(model, ell, sigma, grid)
    farkas = build_farkas_system(model.dim, ell, sigma)
    logger.info(
        f"[Certifier] {model.name}: sigma={np.round(sigma, 6).tolist()} at ell={ell:.6g}, "
        f"margin {check.margin:.3e} after {point.rounds} rounds"
    )
    return SigmaCertificate(
        sigma=sigma.tolist(),
        ell=ell,
        grid_margin=check.margin,
        worst_point=check.worst_point,
        sigma2_slacks=check.sigma2_slacks,
        dual_components=farkas.dual_components,
        verified_on=grid,
    )


# ---------------------------------------------------------------------------
# Decision pipeline
# ---------------------------------------------------------------------------

def _hypotheses(model: PotentialModel, opts: CertifyOptions) -> HypothesisReport:
    if opts.hypotheses is None:
        opts.hypotheses = check_hypotheses(model, opts.grid)
    return opts.hypotheses


def _inconclusive(c: float, reason: str, ell: Optional[float] = None, evidence=None) -> SpeedVerdict:
    logger.info(f"[Certifier] c={c:.6g}: inconclusive ({reason})")
    return SpeedVerdict(c=c, ell=ell, evidence=evidence, reason=reason)


def _corollaries(model: PotentialModel, c: float, ell: float, grid: GridSpec,
                 assumptions: List[str]) -> Optional[SpeedVerdict]:
    gradient = _gradient_check(model, grid)
    if gradient.holds:
        return SpeedVerdict(c=c, status="certified-nonexistence", route="corollary-gradient", ell=ell,
                            evidence=gradient, assumptions=assumptions)
    m = window_bound(model, grid)
    if ell <= m:
        window = ClosedFormCheck(name="ell <= m", holds=True, value=ell, threshold=m)
        return SpeedVerdict(c=c, status="certified-nonexistence", route="corollary-window", ell=ell,
                            evidence=window, assumptions=assumptions)
    return None


def certify_speed(model: PotentialModel, c: float, opts: CertifyOptions) -> SpeedVerdict:
    """
    c = 0 sign test; inconclusive for 0 < c <= c_s; otherwise pick ell (alpha_c
    for kernels regular at the origin, traced limits else), then the corollaries
    and finally the sigma LP re-verified on a refined grid.
    """
    if not (math.isfinite(c) and c >= 0):
        raise InvalidParameterError(f"speed must be finite and >= 0, got {c}")
    grid = opts.grid
    hyp = _hypotheses(model, opts)
    failed = [chk.name for chk in hyp.checks()[:3] if chk.status == "fail"]
    if not hyp.h4_passes and not opts.allow_h4_failure:
        failed.append("H4")
    if failed:
        return _inconclusive(c, f"sampled hypotheses fail: {', '.join(failed)}")
    base = [GRID_ASSUMPTION]
    if not hyp.h4_passes:
        base.append("H4 failure overridden")

    if c == 0.0:
        verdict = check_static(model, grid)
        if not hyp.h4_passes:
            verdict.assumptions = verdict.assumptions + ["H4 failure overridden"]
        return verdict

    sonic = sonic_speed(model)
    if sonic.defined and c <= sonic.c_s:
        return _inconclusive(c, f"c <= c_s = {sonic.c_s:.6g}: below the sonic speed")

    assumptions = base + [H6_ASSUMPTION]
    if hyp.h5_passes and sonic.defined:
        alpha = sonic.alpha(c)
        try:
            morse = morse_crosscheck(model, c)
        except TraceError as e:
            ell = alpha
            assumptions.append(MORSE_ELL)
            logger.warning(f"[Certifier] c={c:.6g}: tracing failed ({e.detail}); using alpha_c")
        else:
            scale = max(1.0, abs(alpha))
            gap = morse.max_abs_diff
            if gap <= MORSE_AGREE_TOL * scale:
                ell = alpha
                assumptions.append(MORSE_ELL)
            elif gap <= MORSE_REJECT_TOL * scale:
                ell = float(np.mean(list(morse.traced.values())))
                assumptions.append(TRACED_ELL)
            else:
                return _inconclusive(c, f"traced ell differs from alpha_c = {alpha:.6g} by {gap:.3e}")
    else:
        try:
            report = check_ell_equality(model, c)
        except TraceError as e:
            return _inconclusive(c, f"tracing failed: {e.detail}")
        if not report.all_positive:
            return _inconclusive(c, f"traced ell not all positive: {report.ells}", evidence=report)
        if not report.equal:
            logger.info(f"[Certifier] c={c:.6g}: certified by unequal limits {report.ells}")
            return SpeedVerdict(c=c, status="certified-nonexistence", route="ell-mismatch",
                                evidence=report, assumptions=assumptions + [TRACED_ELL])
        ell = float(np.mean(list(report.ells.values())))
        assumptions.append(TRACED_ELL)

    if not ell > 0:
        return _inconclusive(c, f"ell = {ell:.6g} is not positive", ell=ell)

    verdict = _corollaries(model, c, ell, grid, assumptions)
    if verdict is not None:
        logger.info(f"[Certifier] c={c:.6g}: certified via {verdict.route}")
        return verdict

    cert = sigma_feasibility(model, ell, grid)
    if cert is None:
        return _inconclusive(c, f"sampled sigma system infeasible at ell = {ell:.6g}", ell=ell)
    fine = grid.refined(opts.refine_factor)
    check = verify_sigma(model, ell, cert.sigma, fine)
    cert.fine_margin = check.margin
    if not check.holds(FEASIBILITY_TOL):
        return _inconclusive(
            c, f"sigma margin {check.margin:.3e} turns negative on the refined grid at {check.worst_point}",
            ell=ell, evidence=cert,
        )
    logger.info(f"[Certifier] c={c:.6g}: certified via lp-sigma")
    return SpeedVerdict(c=c, status="certified-nonexistence", route="lp-sigma", ell=ell, evidence=cert,
                        assumptions=["grid-sampled (sigma-1)"] + assumptions[1:])


def sweep(model: PotentialModel, c_grid: Sequence[float], opts: CertifyOptions) -> SweepReport:
    """Per-speed verdicts in c_grid order plus the maximal certified runs"""
    c_grid = [float(c) for c in c_grid]
    if any(b < a for a, b in zip(c_grid, c_grid[1:])):
        raise InvalidParameterError("c_grid must be sorted ascending")
    _hypotheses(model, opts)

    def run(c: float) -> SpeedVerdict:
        try:
            return certify_speed(model, c, opts)
        except CertifyError as e:
            return _inconclusive(c, e.detail)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            verdicts = list(pool.map(run, c_grid))
    else:
        verdicts = [run(c) for c in c_grid]

    intervals = certified_runs(c_grid, [v.certified for v in verdicts])
    logger.info(f"[Certifier] {model.name}: {sum(v.certified for v in verdicts)}/{len(c_grid)} speeds certified")
    return SweepReport(
        model=model.summary(),
        c_grid=c_grid,
        verdicts=verdicts,
        certified_intervals=[list(iv) for iv in intervals],
        hypotheses=opts.hypotheses,
    )

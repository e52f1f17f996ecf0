"""
Reproduce Service
Built-in kernels checked against their closed-form speeds, ratios and limits
"""
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from app.core.errors import CertifyError, UnknownKernelError
from app.core.logging import logger
from app.schemas.certificate import CertifyOptions, PerturbationSpec
from app.schemas.potential import GridSpec, PotentialSpec
from app.schemas.run import ExpectedValue, ReproCase
from app.services.certifier_service import (
    corollary_gradient_bound,
    corollary_speed_window,
    radial_inf_ratio,
    sweep,
    verify_sigma,
)
from app.services.dispersion_service import (
    dipolar_ell_closed_form,
    dipolar_gamma_closed_form,
    sonic_speed,
    trace_gamma,
)
from app.services.perturbation_service import epsilon_bound
from app.services.potential_service import build_potential

CASES = ("delta", "sk", "delta-plus-f", "dipolar")


def _options(model, grid_nr: Optional[int], grid_ndir: Optional[int]) -> CertifyOptions:
    return CertifyOptions(grid=GridSpec.default_for(model.smooth_at_origin, n_r=grid_nr, n_dir=grid_ndir))


def _run_speeds(case: ReproCase, model, speeds: List[float], expect: Callable[[float], Optional[bool]],
                opts: CertifyOptions) -> None:
    """Sweep `speeds`; expect(c) is True/False for a required verdict, None when either is fine"""
    report = sweep(model, speeds, opts)
    for verdict in report.verdicts:
        (case.certified_speeds if verdict.certified else case.inconclusive_speeds).append(verdict.c)
        wanted = expect(verdict.c)
        if wanted is not None and wanted != verdict.certified:
            state = "certified" if verdict.certified else f"inconclusive ({verdict.reason})"
            case.failures.append(f"c={verdict.c:.6g}: expected {'certified' if wanted else 'inconclusive'}, got {state}")


def _delta(case: ReproCase, params: Dict[str, float], grid_nr, grid_ndir) -> ReproCase:
    a = params.get("a", 1.0)
    dim = int(params.get("dim", 3))
    spec = PotentialSpec(kind="delta", dim=dim, params={"a": a})
    case.potential = spec
    model = build_potential(spec)
    edge = math.sqrt(2.0 * a)
    case.values = [
        ExpectedValue(name="c_s", expected=edge, computed=sonic_speed(model).c_s, tolerance=1e-12,
                      provenance="c_s = (2 W-hat(0))^{1/2} with W-hat = a"),
        ExpectedValue(name="inf rho/(|rho'| r)", expected=math.inf, computed=radial_inf_ratio(model),
                      tolerance=0.0, provenance="constant profile, rho' = 0"),
    ]
    speeds = [k * math.sqrt(a) for k in (0.0, 0.5, 1.0, 1.41, 1.5, 2.0, 5.0, 10.0)]
    _run_speeds(case, model, speeds, lambda c: c == 0.0 or c > edge, _options(model, grid_nr, grid_ndir))
    return case


def _sk(case: ReproCase, params: Dict[str, float], grid_nr, grid_ndir) -> ReproCase:
    a, b = params.get("a", 1.0), params.get("b", 2.0)
    dim = int(params.get("dim", 3))
    spec = PotentialSpec(kind="radial-sk", dim=dim, params={"a": a, "b": b})
    case.potential = spec
    model = build_potential(spec)
    opts = _options(model, grid_nr, grid_ndir)
    c_s = math.sqrt(2.0)
    edge = math.sqrt(2.0 + 2.0 / b)
    case.values = [
        ExpectedValue(name="c_s", expected=c_s, computed=sonic_speed(model).c_s, tolerance=1e-12,
                      provenance="c_s = (2 W-hat(0))^{1/2}, W-hat(0) = 1"),
        ExpectedValue(name="inf rho/(|rho'| r)", expected=1.0 / b, computed=radial_inf_ratio(model, opts.grid),
                      tolerance=1e-8, provenance="(1 + a r^2) / (a b r^2) decreases to 1/b"),
    ]
    inside = [c_s + (edge - c_s) * f for f in (0.05, 0.5, 0.95)]
    for c in inside:
        if not corollary_speed_window(model, c, opts.grid):
            case.failures.append(f"window corollary should hold at c={c:.6g} < {edge:.6g}")
    if corollary_speed_window(model, edge * 1.02, opts.grid):
        case.failures.append(f"window corollary should fail at c={edge * 1.02:.6g}")
    speeds = [0.0, 0.5 * c_s] + inside
    _run_speeds(case, model, speeds, lambda c: c == 0.0 or c > c_s, opts)
    return case


def _delta_plus_f(case: ReproCase, params: Dict[str, float], grid_nr, grid_ndir) -> ReproCase:
    a = params.get("a", 1.0)
    dim = int(params.get("dim", 3))
    bound = epsilon_bound(PerturbationSpec(kind="gaussian"), dim)
    eps = params.get("epsilon", 0.9 * bound.bound)
    spec = PotentialSpec(kind="delta-plus-f", dim=dim, params={"a": a, "epsilon": eps})
    case.potential = spec
    model = build_potential(spec)
    opts = _options(model, grid_nr, grid_ndir)
    c_s = sonic_speed(model).c_s
    case.values = [
        ExpectedValue(name="epsilon bound", expected=1.0 / ((4.0 + dim) * math.pi ** (dim / 2.0)),
                      computed=bound.bound, tolerance=1e-8,
                      provenance="(4 ||f||_1 + sum_k ||x_k d_k f||_1)^{-1}, f = exp(-|x|^2)"),
        ExpectedValue(name="c_s", expected=bound.sonic_speed(eps, a), computed=c_s, tolerance=1e-10,
                      provenance="(2a + 2 eps int f)^{1/2}"),
    ]
    if eps < bound.bound and a == 1.0 and not corollary_gradient_bound(model, opts.grid):
        case.failures.append(f"gradient corollary should hold for epsilon={eps:.6g} < {bound.bound:.6g}")

    def expect(c: float) -> Optional[bool]:
        if eps >= bound.bound:
            return None
        return c == 0.0 or c > c_s

    speeds = [0.0, 0.5 * c_s, 1.05 * c_s, 2.0 * c_s, 5.0 * c_s]
    _run_speeds(case, model, speeds, expect, opts)
    return case


def _dipolar(case: ReproCase, params: Dict[str, float], grid_nr, grid_ndir) -> ReproCase:
    a = params.get("a", 1.0)
    bt = params.get("b_tilde", 0.25)
    spec = PotentialSpec(kind="dipolar", dim=3, params={"a": a, "b_tilde": bt})
    case.potential = spec
    model = build_potential(spec)
    opts = _options(model, grid_nr, grid_ndir)

    c_eq = math.sqrt(3.0 * a)
    trace = trace_gamma(model, 3, c_eq)
    ts = np.array(trace.ts())
    closed = dipolar_gamma_closed_form(a, bt, c_eq, ts, j=3)
    traced = np.array([s.gamma_plus for s in trace.samples])
    rel = float(np.max(np.abs(traced - closed) / closed))
    case.values = [
        ExpectedValue(name="gamma+_3 relative gap", expected=0.0, computed=rel, tolerance=1e-6,
                      provenance="s^2 + 2(a + 2 b~) s = (6 b~ + c^2) t^2 on the (xi_1, xi_3) slice"),
    ]
    for j in (2, 3):
        tr = trace_gamma(model, j, 2.0)
        case.values.append(ExpectedValue(
            name=f"ell_{j} at c=2", expected=dipolar_ell_closed_form(a, bt, 2.0, j), computed=tr.ell_estimate,
            tolerance=1e-4, provenance="limit of (gamma/t)^2 from the slice closed form",
        ))
    check = verify_sigma(model, 0.5, [0.0, 0.5, 0.5], opts.grid.refined(4))
    case.values.append(ExpectedValue(name="sigma=(0,1/2,1/2) holds at ell=1/2", expected=1.0,
                                     computed=float(check.holds(0.0)), tolerance=0.0,
                                     provenance="W-hat + (xi_2 d_2 + xi_3 d_3) W-hat / 4 >= 0 on the refined grid"))
    threshold = math.sqrt(2.0 * max(a - bt, a))
    speeds = [1.5, c_eq, 2.0, 3.0]
    _run_speeds(case, model, speeds, lambda c: True if c > threshold else None, opts)
    return case


_RUNNERS = {"delta": _delta, "sk": _sk, "delta-plus-f": _delta_plus_f, "dipolar": _dipolar}


def run_case(name: str, params: Optional[Dict[str, float]] = None,
             grid_nr: Optional[int] = None, grid_ndir: Optional[int] = None) -> ReproCase:
    """Run one built-in reproduction; never raises on a mismatch, see ReproCase.failures"""
    if name not in _RUNNERS:
        raise UnknownKernelError(f"unknown reproduction case {name!r}; choose from {list(CASES)}")
    params = {k: v for k, v in (params or {}).items() if v is not None}
    case = ReproCase(name=name)
    try:
        _RUNNERS[name](case, params, grid_nr, grid_ndir)
    except CertifyError as e:
        if e.exit_code == 2:
            raise
        case.failures.append(f"{type(e).__name__}: {e.detail}")
    logger.info(f"[Reproduce] {name}: {'passed' if case.passed else 'MISMATCH'}")
    return case


def diff_table(case: ReproCase) -> str:
    lines = [f"{'quantity':<36} {'expected':>14} {'computed':>14} {'tol':>8}"]
    for v in case.values:
        if not v.matches:
            computed = "-" if v.computed is None else f"{v.computed:.8g}"
            lines.append(f"{v.name:<36} {v.expected:>14.8g} {computed:>14} {v.tolerance:>8.1e}")
    lines += case.failures
    return "\n".join(lines)

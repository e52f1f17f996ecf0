"""
Perturbation Service
Threshold on epsilon below which delta + epsilon f satisfies the gradient corollary
"""
import math
import warnings
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma

from app.core.errors import DivergentQuadratureError, InvalidParameterError
from app.core.logging import logger
from app.schemas.certificate import PerturbationBound, PerturbationSpec


def sphere_area(dim: int) -> float:
    """|S^{dim-1}| = 2 pi^{dim/2} / Gamma(dim/2)"""
    return 2.0 * math.pi ** (dim / 2.0) / gamma(dim / 2.0)


def _profile(f_spec: PerturbationSpec) -> Tuple[Callable, Callable, List[Tuple[float, float]]]:
    """f(r), f'(r) and the integration pieces"""
    lam = float(f_spec.scale)
    if f_spec.kind == "gaussian":
        return (
            lambda r: lam * math.exp(-r * r),
            lambda r: -2.0 * lam * r * math.exp(-r * r),
            [(0.0, 1.0), (1.0, math.inf)],
        )

    if not f_spec.table or len(f_spec.table) < 2:
        raise InvalidParameterError("tabulated perturbation needs at least two [r, f] rows")
    table = np.asarray(f_spec.table, dtype=float)
    r_tab = table[:, 0]
    if r_tab[0] < 0 or np.any(np.diff(r_tab) <= 0) or not np.all(np.isfinite(table)):
        raise InvalidParameterError("tabulated perturbation needs finite, strictly increasing r >= 0")
    interp = PchipInterpolator(r_tab, lam * table[:, 1], extrapolate=False)
    d_interp = interp.derivative()
    pieces = list(zip(r_tab[:-1].tolist(), r_tab[1:].tolist()))
    return (lambda r: float(interp(r)), lambda r: float(d_interp(r)), pieces)


def _integrate(fn: Callable, pieces: List[Tuple[float, float]], label: str) -> float:
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        for lo, hi in pieces:
            try:
                value, _ = quad(fn, lo, hi, limit=200)
            except IntegrationWarning as e:
                raise DivergentQuadratureError(f"{label} on [{lo}, {hi}]: {e}") from e
            if not math.isfinite(value):
                raise DivergentQuadratureError(f"{label} on [{lo}, {hi}] is not finite")
            total += value
    return total


def epsilon_bound(f_spec: PerturbationSpec, dim: int) -> PerturbationBound:
    """
    (4 ||f||_1 + sum_k ||x_k d_k f||_1)^{-1} for radial f, by radial quadrature:
    ||f||_1 = |S| int |f| r^{N-1} dr and sum_k ||x_k d_k f||_1 = |S| int |f'| r^N dr,
    split evenly over the N coordinates by symmetry.
    """
    if dim < 2:
        raise InvalidParameterError(f"dimension must be >= 2, got {dim}")
    f, df, pieces = _profile(f_spec)
    area = sphere_area(dim)

    f_l1 = area * _integrate(lambda r: abs(f(r)) * r ** (dim - 1), pieces, "||f||_1")
    f_int = area * _integrate(lambda r: f(r) * r ** (dim - 1), pieces, "int f")
    deriv = area * _integrate(lambda r: abs(df(r)) * r ** dim, pieces, "sum ||x_k d_k f||_1")
    if f_l1 <= 0:
        raise InvalidParameterError("perturbation has zero L1 norm")

    bound = 1.0 / (4.0 * f_l1 + deriv)
    logger.info(f"[Perturbation] {f_spec.kind} f in dimension {dim}: epsilon bound {bound:.8g}")
    return PerturbationBound(
        dim=dim,
        f_l1=f_l1,
        scaled_derivative_l1=[deriv / dim] * dim,
        f_integral=f_int,
        bound=bound,
    )

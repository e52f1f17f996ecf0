"""
Grid Service
Sample points for conditions that hold "for almost all xi"
"""
from typing import Dict

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from app.core.logging import logger
from app.schemas.potential import GridSpec

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def radii(grid: GridSpec) -> np.ndarray:
    return np.geomspace(grid.r_min, grid.r_max, grid.n_r)


def directions(grid: GridSpec, dim: int) -> np.ndarray:
    """
    Unit vectors on S^{dim-1}: uniform angles (2D), Fibonacci sphere (3D),
    scrambled Halton pushed through the normal quantile (dim > 3).
    The 2*dim coordinate axes are always included.
    """
    n = grid.n_dir
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(n) / n
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elif dim == 3:
        i = np.arange(n)
        z = 1.0 - (2.0 * i + 1.0) / n
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = i * _GOLDEN_ANGLE
        dirs = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    else:
        sampler = qmc.Halton(d=dim, scramble=True, seed=0)
        u = np.clip(sampler.random(n), 1e-12, 1.0 - 1e-12)
        dirs = ndtri(u)
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    dirs = np.concatenate([dirs, axes])
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    # uniform angles already contain the axes when n_dir is a multiple of 4
    _, keep = np.unique(np.round(dirs, 12) + 0.0, axis=0, return_index=True)
    return dirs[np.sort(keep)]


def points(grid: GridSpec, dim: int) -> np.ndarray:
    """All radius x direction products, minus the excluded ball"""
    r = radii(grid)
    d = directions(grid, dim)
    pts = (r[:, None, None] * d[None, :, :]).reshape(-1, dim)
    if grid.exclusion_radius > 0:
        pts = pts[np.linalg.norm(pts, axis=1) >= grid.exclusion_radius]
    return pts


class GridSamples:
    """Cached evaluations of W-hat and its scaled gradient on one grid"""

    def __init__(self, model, grid: GridSpec):
        self.grid = grid
        self.points = points(grid, model.dim)
        self.w = model.w_hat(self.points)
        self.gradient = model.gradient(self.points)
        self.scaled = self.points * self.gradient
        logger.debug(f"[Grid] Sampled {len(self.points)} points for {model.name}")


def samples_for(model, grid: GridSpec) -> GridSamples:
    """Evaluations reused across speeds; the cache lives on the (immutable) model"""
    cache: Dict[GridSpec, GridSamples] = model.sample_cache
    hit = cache.get(grid)
    if hit is None:
        hit = GridSamples(model, grid)
        cache[grid] = hit
    return hit

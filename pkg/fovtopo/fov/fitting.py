"""Grid-based quality metric and local refinement of the sector approximation."""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import ResolutionError
from .sector import FovApproximation, FovSector, approx_mask, default_approximation, sector_mask

logger = logging.getLogger(__name__)

DEFAULT_GRID_RES = 0.05
MIN_GRID_CELLS = 100


class ApproximationQuality(BaseModel):
    """Overlap between a sector and its approximation.

    False positives lie inside the approximation but outside the sector; false
    negatives lie inside the sector but outside the approximation.
    """

    model_config = ConfigDict(frozen=True)

    iou: float
    false_positive_area: float
    false_negative_area: float
    grid_resolution: float


def quality_grid(s: FovSector, rho1: float, grid_res: float) -> np.ndarray:
    """Cell centers of the box ``[-R, R]^2`` with ``R = max(rho_s, rho1)``."""
    if not grid_res > 0.0:
        raise ResolutionError(f"grid resolution must be positive, got {grid_res}")
    half = max(s.range, rho1)
    cells = int(math.ceil(2.0 * half / grid_res))
    if cells * cells < MIN_GRID_CELLS:
        raise ResolutionError(
            f"grid of {cells}x{cells} cells is too coarse; need at least {MIN_GRID_CELLS}"
        )
    axis = -half + (np.arange(cells) + 0.5) * grid_res
    xx, yy = np.meshgrid(axis, axis, indexing="xy")
    return np.column_stack([xx.ravel(), yy.ravel()])


def _quality(in_sector: np.ndarray, in_approx: np.ndarray, grid_res: float) -> ApproximationQuality:
    cell = grid_res * grid_res
    inter = int(np.count_nonzero(in_sector & in_approx))
    union = int(np.count_nonzero(in_sector | in_approx))
    return ApproximationQuality(
        iou=inter / union if union else 0.0,
        false_positive_area=np.count_nonzero(in_approx & ~in_sector) * cell,
        false_negative_area=np.count_nonzero(in_sector & ~in_approx) * cell,
        grid_resolution=grid_res,
    )


def approximation_quality(
    s: FovSector, a: FovApproximation, grid_res: float = DEFAULT_GRID_RES
) -> ApproximationQuality:
    points = quality_grid(s, a.rho1, grid_res)
    return _quality(sector_mask(points, s), approx_mask(points, a), grid_res)


def _candidate(s: FovSector, params: np.ndarray) -> FovApproximation:
    rho1, rho2, phi_left, phi_right = (float(p) for p in params)
    return FovApproximation(
        rho1=rho1,
        rho2=rho2,
        offsets=(
            (phi_left, rho2, 0.0),
            (s.heading + math.pi, rho2, 0.0),
            (phi_right, rho2, 0.0),
        ),
    )


def fit_approximation(
    s: FovSector, grid_res: float = DEFAULT_GRID_RES, search_budget: int = 60
) -> FovApproximation:
    """Refine :func:`default_approximation` by coordinate descent on grid IoU.

    Searches ``rho1`` (capped at the sector range), the shared exclusion radius
    and the two lateral offset angles. ``search_budget`` counts IoU
    evaluations including the seed, so a budget of 1 returns the default.
    Only strict improvements are accepted; step sizes halve after a sweep
    without one.
    """
    if search_budget < 1:
        raise ValueError(f"search budget must be >= 1, got {search_budget}")
    seed = default_approximation(s)
    points = quality_grid(s, seed.rho1, grid_res)
    in_sector = sector_mask(points, s)

    def score(a: FovApproximation) -> float:
        return _quality(in_sector, approx_mask(points, a), grid_res).iou

    params = np.array([seed.rho1, seed.rho2, seed.offsets[0][0], seed.offsets[2][0]])
    best_iou = score(seed)
    best = seed
    evaluations = 1
    steps = np.array([0.1 * s.range, 0.1 * s.range, 0.1, 0.1])
    floor = np.array([1e-4 * s.range, 1e-4 * s.range, 1e-5, 1e-5])

    while evaluations < search_budget and np.any(steps > floor):
        improved = False
        for k in range(len(params)):
            for sign in (1.0, -1.0):
                if evaluations >= search_budget:
                    break
                trial = params.copy()
                trial[k] += sign * steps[k]
                if not (0.0 < trial[0] <= s.range and trial[1] > 0.0):
                    continue
                cand = _candidate(s, trial)
                value = score(cand)
                evaluations += 1
                if value > best_iou:
                    params, best, best_iou = trial, cand, value
                    improved = True
                    break
        if not improved:
            steps = steps / 2.0
    logger.info("fit_approximation: %d evaluations, IoU %.6f", evaluations, best_iou)
    return best

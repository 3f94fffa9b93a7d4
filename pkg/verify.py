"""
Numerical verification: maximum modulus on spheres, maximum modulus set
extraction, comparison with the target set, distortion and Lipschitz
probes, and winding degrees of planar maps.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from config.constants import (
    ARGMAX_RTOL,
    DEFAULT_PROBE_RADIUS,
    DEFAULT_REFINE_ITERATIONS,
    DEFAULT_REFINE_STARTS,
    DEFAULT_SAMPLES_PER_SPHERE,
    DEGENERATE_SINGULAR_RATIO,
    DISTORTION_EXCLUSION,
    DISTORTION_QUANTILES,
    HAUSDORFF_BOUND_FACTOR,
)
from config.settings import get_settings
from core_geom import fd_jacobian, grid_spacing, hausdorff_distance, norms, sphere_grid, unit_sphere_grid
from growth_transcend import GrowthSchedule
from map_expr import MapExpr
from sets.base import ClosedSetOracle
from utils.error_handler import DomainError, ValidationError

logger = logging.getLogger(__name__)


# =============================================================================
# Maximum modulus
# =============================================================================

@dataclass
class SphereBudget:
    """Sampling and refinement budget for one sphere."""
    samples: int = DEFAULT_SAMPLES_PER_SPHERE
    refine_starts: int = DEFAULT_REFINE_STARTS
    refine_iterations: int = DEFAULT_REFINE_ITERATIONS
    argmax_rtol: float = ARGMAX_RTOL
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1 or self.refine_starts < 0 or self.refine_iterations < 0:
            raise ValidationError("sphere budget needs samples >= 1 and non-negative refinement", field="plan")
        if not 0 <= self.argmax_rtol < 1:
            raise ValidationError("argmax_rtol must lie in [0, 1)", field="plan.argmax_rtol")


@dataclass
class MaxModResult:
    """M(r, f) estimate with the samples attaining it."""
    radius: float
    m_est: float
    argmax: np.ndarray
    resolution: float
    iterations: int = 0
    refined: int = 0
    samples: int = DEFAULT_SAMPLES_PER_SPHERE

    @property
    def argmax_count(self) -> int:
        return int(self.argmax.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.radius,
            "M_est": self.m_est,
            "argmax_count": self.argmax_count,
            "resolution": self.resolution,
            "iterations": self.iterations,
            "refined": self.refined,
        }


def _modulus(fn: MapExpr, pts: np.ndarray) -> np.ndarray:
    return norms(np.atleast_2d(fn.fn(pts)))


def _refine_circle(fn: MapExpr, r: float, start: np.ndarray, spacing: float, iterations: int):
    theta0 = math.atan2(start[1], start[0])
    half = spacing / r

    def negative(theta: float) -> float:
        return -float(_modulus(fn, r * np.array([[math.cos(theta), math.sin(theta)]]))[0])

    res = minimize_scalar(
        negative,
        bounds=(theta0 - half, theta0 + half),
        method="bounded",
        options={"maxiter": max(iterations, 1), "xatol": 1e-12},
    )
    point = r * np.array([math.cos(res.x), math.sin(res.x)])
    return point, -float(res.fun), int(res.nfev)


def _tangent_basis(u: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(u[None, :])
    return vh[1:]


def _refine_chart(fn: MapExpr, r: float, start: np.ndarray, spacing: float, iterations: int):
    u0 = start / np.linalg.norm(start)
    basis = _tangent_basis(u0)
    step = spacing / r

    def to_sphere(c: np.ndarray) -> np.ndarray:
        v = u0 + c @ basis
        return r * v / np.linalg.norm(v)

    def negative(c: np.ndarray) -> float:
        return -float(_modulus(fn, to_sphere(c)[None, :])[0])

    m = basis.shape[0]
    simplex = np.vstack([np.zeros(m), step * np.eye(m)])
    res = minimize(
        negative,
        np.zeros(m),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "maxiter": max(iterations, 1), "xatol": 1e-12, "fatol": 0.0},
    )
    return to_sphere(res.x), -float(res.fun), int(res.nfev)


def max_modulus(fn: MapExpr, r: float, budget: Optional[SphereBudget] = None) -> MaxModResult:
    """
    Estimate M(r, f) = max over S(r) of |f|.

    Dense sphere sampling, then local polish from the best samples in a
    sphere chart (bounded scalar search on the angle for n = 2, Nelder-Mead
    on tangent coordinates otherwise). Refined points join the argmax set
    only when they beat every sample.
    """
    budget = budget or SphereBudget()
    if r < 0:
        raise DomainError(f"radius must be >= 0, got {r}", "max_modulus")
    n = fn.dimension
    if r == 0:
        origin = np.zeros((1, n))
        return MaxModResult(0.0, float(_modulus(fn, origin)[0]), origin, 0.0, samples=budget.samples)

    samples = sphere_grid(n, budget.samples, r, seed=budget.seed)
    modulus = _modulus(fn, samples)
    spacing = grid_spacing(n, budget.samples, r)
    order = np.argsort(-modulus, kind="stable")
    best = float(modulus[order[0]])

    refine = _refine_circle if n == 2 else _refine_chart
    refined_pts, refined_vals, iterations = [], [], 0
    if budget.refine_iterations > 0:
        for idx in order[:budget.refine_starts]:
            point, value, used = refine(fn, r, samples[idx], spacing, budget.refine_iterations)
            iterations += used
            if value > best:
                refined_pts.append(point)
                refined_vals.append(value)

    m_est = max([best] + refined_vals)
    floor = m_est * (1.0 - budget.argmax_rtol)
    chosen = [samples[modulus >= floor]]
    kept = [p for p, v in zip(refined_pts, refined_vals) if v >= floor]
    if kept:
        chosen.append(np.array(kept))
    argmax = np.vstack(chosen)
    return MaxModResult(r, m_est, argmax, spacing, iterations, len(kept), budget.samples)


# =============================================================================
# Maximum modulus set extraction
# =============================================================================

@dataclass
class MMSExtract:
    """Per-radius maximum modulus results along an r-grid."""
    radii: np.ndarray
    results: List[MaxModResult]
    exceptional: np.ndarray

    def __len__(self) -> int:
        return len(self.results)

    @property
    def points(self) -> np.ndarray:
        """Union of all argmax samples."""
        if not self.results:
            return np.empty((0, 0))
        return np.vstack([res.argmax for res in self.results])


def extract_mms(
    fn: MapExpr,
    r_grid: Sequence[float],
    budget: Optional[SphereBudget] = None,
    schedule: Optional[GrowthSchedule] = None,
    workers: Optional[int] = None,
) -> MMSExtract:
    """Run max_modulus over an r-grid; results come back in grid order."""
    budget = budget or SphereBudget()
    radii = np.sort(np.asarray(r_grid, dtype=float))
    if radii.size == 0:
        return MMSExtract(radii, [], np.zeros(0, dtype=bool))
    workers = workers or get_settings().runtime.threads
    logger.info(f"[MMS] {radii.size} radii, {budget.samples} samples per sphere, {workers} workers")
    if workers == 1:
        results = [max_modulus(fn, float(r), budget) for r in radii]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: max_modulus(fn, float(r), budget), radii))
    flags = schedule.in_exceptional(radii) if schedule is not None else np.zeros(radii.size, dtype=bool)
    return MMSExtract(radii, results, np.asarray(flags, dtype=bool))


# =============================================================================
# Comparison with the target set
# =============================================================================

@dataclass
class RadiusComparison:
    radius: float
    hausdorff: float
    bound: float
    in_exceptional: bool
    skipped: bool

    @property
    def passed(self) -> bool:
        return self.skipped or self.hausdorff <= self.bound


@dataclass
class ComparisonReport:
    rows: List[RadiusComparison] = field(default_factory=list)
    exclude_exceptional: bool = False

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def max_hausdorff(self) -> float:
        values = [row.hausdorff for row in self.rows if not row.skipped]
        return max(values) if values else 0.0

    @property
    def failures(self) -> List[RadiusComparison]:
        return [row for row in self.rows if not row.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "exclude_exceptional": self.exclude_exceptional,
            "max_hausdorff": self.max_hausdorff,
            "checked": sum(1 for row in self.rows if not row.skipped),
            "failures": [
                {"r": row.radius, "hausdorff": row.hausdorff, "bound": row.bound} for row in self.failures
            ],
        }


def compare_to_target(
    extract: MMSExtract,
    target: ClosedSetOracle,
    exclude_exceptional: bool = False,
    bound_factor: float = HAUSDORFF_BOUND_FACTOR,
) -> ComparisonReport:
    """
    Hausdorff distance between the argmax samples and T intersected with S(r)
    at every radius, against bound_factor times the sampling resolution.
    """
    report = ComparisonReport(exclude_exceptional=exclude_exceptional)
    for r, res, flagged in zip(extract.radii, extract.results, extract.exceptional):
        bound = bound_factor * res.resolution + target.tolerance * max(1.0, float(r))
        if exclude_exceptional and flagged:
            report.rows.append(RadiusComparison(float(r), math.nan, bound, True, True))
            continue
        section = target.sphere_section(float(r), res.samples)
        distance = hausdorff_distance(res.argmax, section.points)
        report.rows.append(RadiusComparison(float(r), distance, bound, bool(flagged), False))
    if report.failures:
        worst = max(report.failures, key=lambda row: row.hausdorff / row.bound if row.bound else math.inf)
        logger.warning(
            f"[Compare] {len(report.failures)} radii exceed the bound; worst r={worst.radius:.6g} "
            f"hausdorff={worst.hausdorff:.3g} bound={worst.bound:.3g}"
        )
    return report


# =============================================================================
# Distortion and Lipschitz probes
# =============================================================================

@dataclass
class DistortionReport:
    """Per-point distortion estimates and their summary."""
    mode: str
    points: np.ndarray
    values: np.ndarray
    probe_radius: float
    excluded: List[int] = field(default_factory=list)
    degenerate: List[int] = field(default_factory=list)
    upper_stretch: Optional[np.ndarray] = None
    lower_stretch: Optional[np.ndarray] = None

    @property
    def maximum(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if finite.size else math.nan

    def quantiles(self) -> Dict[str, float]:
        finite = self.values[np.isfinite(self.values)]
        if finite.size == 0:
            return {f"q{q:g}": math.nan for q in DISTORTION_QUANTILES}
        return {f"q{q:g}": float(np.quantile(finite, q)) for q in DISTORTION_QUANTILES}

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "mode": self.mode,
            "probe_radius": self.probe_radius,
            "evaluated": int(self.values.size),
            "excluded": len(self.excluded),
            "degenerate": len(self.degenerate),
            "max": self.maximum,
            "quantiles": self.quantiles(),
        }
        if self.upper_stretch is not None and self.upper_stretch.size:
            out["max_upper_stretch"] = float(self.upper_stretch.max())
            out["min_lower_stretch"] = float(self.lower_stretch.min())
        return out


def _roundness_directions(dimension: int) -> np.ndarray:
    return unit_sphere_grid(dimension, 64 if dimension == 2 else 256)


def distortion_probe(
    fn: MapExpr,
    points: np.ndarray,
    probe_radius: float = DEFAULT_PROBE_RADIUS,
    mode: str = "jacobian",
) -> DistortionReport:
    """
    Local distortion at the given base points.

    jacobian: ratio of extreme singular values of a central-difference
    Jacobian; points near known non-smooth loci are excluded and listed.
    roundness: L_f(x, r) / l_f(x, r) over a sampled sphere about x, with
    the stretches L / r and l / r kept alongside.
    """
    if not probe_radius > 0:
        raise DomainError("probe radius must be positive", "distortion_probe")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if mode == "jacobian":
        keep = np.ones(pts.shape[0], dtype=bool)
        if fn.nonsmooth_distance is not None:
            keep = np.asarray(fn.nonsmooth_distance(pts)) >= max(DISTORTION_EXCLUSION, 2.0 * probe_radius)
        excluded = [int(i) for i in np.flatnonzero(~keep)]
        sv = np.linalg.svd(fd_jacobian(fn.fn, pts[keep], probe_radius), compute_uv=False)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = sv[:, 0] / sv[:, -1]
        bad = ~(sv[:, -1] > DEGENERATE_SINGULAR_RATIO * sv[:, 0])
        kept_index = np.flatnonzero(keep)
        degenerate = [int(i) for i in kept_index[bad]]
        ratio[bad] = math.inf
        if degenerate:
            logger.warning(f"[Distortion] {len(degenerate)} points with degenerate Jacobian")
        return DistortionReport(mode, pts[keep], ratio, probe_radius, excluded, degenerate)
    if mode == "roundness":
        directions = probe_radius * _roundness_directions(pts.shape[1])
        base = np.atleast_2d(fn.fn(pts))
        upper = np.empty(pts.shape[0])
        lower = np.empty(pts.shape[0])
        for i in range(pts.shape[0]):
            stretch = norms(np.atleast_2d(fn.fn(pts[i] + directions)) - base[i])
            upper[i] = stretch.max()
            lower[i] = stretch.min()
        with np.errstate(divide="ignore"):
            ratio = np.where(lower > 0, upper / lower, math.inf)
        degenerate = [int(i) for i in np.flatnonzero(lower <= 0)]
        return DistortionReport(
            mode, pts, ratio, probe_radius, [], degenerate,
            upper_stretch=upper / probe_radius, lower_stretch=lower / probe_radius,
        )
    raise ValidationError(f"unknown distortion mode: {mode}", field="plan.distortion.mode")


def lipschitz_probe(fn: Callable[[np.ndarray], np.ndarray], first: np.ndarray, second: np.ndarray) -> float:
    """max |fn(x) - fn(y)| / |x - y| over point pairs (scalar or vector fn); coincident pairs are skipped."""
    a = np.atleast_2d(np.asarray(first, dtype=float))
    b = np.atleast_2d(np.asarray(second, dtype=float))
    gap = norms(a - b)
    distinct = gap > 0
    if not np.any(distinct):
        return 0.0
    diff = np.asarray(fn(a[distinct]), dtype=float) - np.asarray(fn(b[distinct]), dtype=float)
    rise = norms(diff) if diff.ndim == 2 else np.abs(diff)
    return float(np.max(rise / gap[distinct]))


def circle_degree(fn: MapExpr, r: float, samples: int = 4096) -> int:
    """Winding number about 0 of the image of S(r) under a planar map."""
    if fn.dimension != 2:
        raise DomainError("circle degree is defined for planar maps", "circle_degree")
    theta = 2.0 * np.pi * np.arange(samples + 1) / samples
    image = np.atleast_2d(fn.fn(r * np.column_stack([np.cos(theta), np.sin(theta)])))
    if np.any(norms(image) == 0):
        raise DomainError(f"the image of S({r:.6g}) passes through 0", "circle_degree")
    angles = np.unwrap(np.arctan2(image[:, 1], image[:, 0]))
    return int(round((angles[-1] - angles[0]) / (2.0 * np.pi)))

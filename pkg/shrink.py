"""
Shrinking map and the homeomorphism h1 it induces through the Zorich map.

For a target set T the pullback T' = Z^-1(T) is a closed, group-invariant
set in log coordinates. The shrink map lowers the last coordinate by half
of p(dist(y, T')) with p(d) = d / (1 + d):

    f(y) = (y', y_n - p(d(y, T')) / 2)

f fixes T' and is bi-Lipschitz. Conjugating by Z gives
h1 = Z o f o Z^-1, with |h1(x)| = |x| exp(-p/2); h1 fixes T and pulls every
other point of S(r) strictly inside the ball of radius r.

Pullback distances are exact (analytic mode) for the formula sets with a
closed form, or read from a KD-tree of sampled preimages (sampled mode).
"""
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from config.constants import DEFAULT_PULLBACK_RADII, DEFAULT_R_MAX, DEFAULT_SECTION_SAMPLES, ZORICH_PERIOD
from core_geom import PointLike, SpatialIndex, as_batch, norms, restore
from map_expr import MapExpr
from sets.base import ClosedSetOracle, OracleMode, SetKind
from sets.cloud_sets import PointCloudSet, UnionSet
from sets.formula_sets import ConeSet, LogSpiralSet, OriginSphereSet, RadialRaySet
from utils.error_handler import ConfigError, DomainError, SetValidationError
from zorich import ZorichMap, fold_coordinates

logger = logging.getLogger(__name__)


def p_of_distance(d):
    """p(d) = d / (1 + d): 1-Lipschitz, p(0) = 0, values in [0, 1)."""
    arr = np.asarray(d, dtype=float)
    if np.any(arr < 0):
        raise DomainError("distance must be >= 0", "p_of_distance")
    out = arr / (1.0 + arr)
    return float(out) if out.ndim == 0 else out


class PullbackMode(str, Enum):
    ANALYTIC = "analytic"
    SAMPLED = "sampled"


@dataclass
class SamplingPlan:
    """Radii and section density used to sample T before pulling it back."""
    r_min: float = DEFAULT_PULLBACK_RADII[0]
    r_max: float = DEFAULT_PULLBACK_RADII[1]
    count: int = DEFAULT_PULLBACK_RADII[2]
    section_samples: int = DEFAULT_SECTION_SAMPLES

    def radii(self) -> np.ndarray:
        if not 0 < self.r_min < self.r_max or self.count < 2:
            raise ConfigError("sampling radii need 0 < min < max and count >= 2", fields=["pullback.radii"])
        return np.geomspace(self.r_min, self.r_max, self.count)


# =============================================================================
# Analytic pullback distances
# =============================================================================

def _orbit_box_distance(s: np.ndarray, parity: int, half_side: float) -> np.ndarray:
    """Distance to the union of sup-norm cubes of given half-side centred on the orbit of (0, parity)."""
    d0 = np.abs(np.mod(s + 2.0, ZORICH_PERIOD) - 2.0)
    d1 = np.abs(np.mod(s, ZORICH_PERIOD) - 2.0)
    g0 = np.maximum(d0 - half_side, 0.0)
    g1 = np.maximum(d1 - half_side, 0.0)
    best = np.full(s.shape[0], np.inf)
    for combo in itertools.product((False, True), repeat=s.shape[1]):
        if sum(combo) % 2 != parity:
            continue
        gap = np.where(np.array(combo), g1, g0)
        best = np.minimum(best, np.sum(gap * gap, axis=1))
    return np.sqrt(best)


def _full_space_pullback(target, zorich, y):
    return np.zeros(y.shape[0])


def _ray_pullback(target: RadialRaySet, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    base = zorich.invert(target.direction)
    folded = fold_coordinates(base[:-1])
    return zorich.orbit_distance(y[:, :-1], folded.xi, int(folded.parity))


def _spiral_pullback(target: LogSpiralSet, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    # Lines s + a t = 1 (mod 4) with a = 2 omega / pi
    a = 2.0 * target.omega / math.pi
    offset = y[:, 0] + a * y[:, 1] - 1.0
    return np.abs(np.mod(offset + 2.0, ZORICH_PERIOD) - 2.0) / math.sqrt(1.0 + a * a)


def _cone_pullback(target: ConeSet, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    parity = 0 if target.axis[-1] > 0 else 1
    half_side = 2.0 * target.half_angle / math.pi
    return _orbit_box_distance(y[:, :-1], parity, half_side)


def _sphere_pullback(target: OriginSphereSet, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    return np.abs(y[:, -1] - math.log(target.radius))


def _union_pullback(target: UnionSet, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    return np.min(np.vstack([analytic_pullback_distance(child, zorich, y) for child in target.children]), axis=0)


ANALYTIC_PULLBACKS: Dict[SetKind, Callable] = {
    SetKind.FULL_SPACE: _full_space_pullback,
    SetKind.RADIAL_RAY: _ray_pullback,
    SetKind.LOG_SPIRAL: _spiral_pullback,
    SetKind.CONE: _cone_pullback,
    SetKind.SPHERE: _sphere_pullback,
    SetKind.UNION: _union_pullback,
}


def analytic_supported(target: ClosedSetOracle) -> bool:
    """Whether the pullback of T has a closed-form distance."""
    if target.mode != OracleMode.EXACT or target.kind not in ANALYTIC_PULLBACKS:
        return False
    if isinstance(target, ConeSet):
        return target.is_polar and target.half_angle < math.pi / 2
    if isinstance(target, UnionSet):
        return all(analytic_supported(child) for child in target.children)
    return True


def analytic_pullback_distance(target: ClosedSetOracle, zorich: ZorichMap, y: np.ndarray) -> np.ndarray:
    return ANALYTIC_PULLBACKS[target.kind](target, zorich, y)


# =============================================================================
# Pullback set
# =============================================================================

class PullbackSet:
    """
    T' = Z^-1(T) with a distance oracle capped at r_max.

    Analytic mode evaluates closed forms. Sampled mode stores canonical
    preimages of sphere sections (or of the cloud) together with their
    group copies near the canonical cells, and answers queries after
    moving y into the canonical cells, which leaves the distance unchanged.
    """

    def __init__(
        self,
        target: ClosedSetOracle,
        zorich: ZorichMap,
        mode: Optional[PullbackMode] = None,
        r_max: float = DEFAULT_R_MAX,
        sampling: Optional[SamplingPlan] = None,
    ):
        if target.dimension != zorich.dimension:
            raise ConfigError("target set and Zorich map dimensions differ", fields=["dimension"])
        if not r_max > 0:
            raise ConfigError("r_max must be positive", fields=["pullback.r_max"])
        if not target.contains_origin():
            logger.warning("[Pullback] target set does not contain the origin")
        self.target = target
        self.zorich = zorich
        self.r_max = float(r_max)
        self.sampling = sampling or SamplingPlan()
        if mode is None:
            mode = PullbackMode.ANALYTIC if analytic_supported(target) else PullbackMode.SAMPLED
        self.mode = PullbackMode(mode)
        self.index: Optional[SpatialIndex] = None
        self._resolution = 0.0
        self._t_range = (-math.inf, math.inf)
        if self.mode == PullbackMode.ANALYTIC:
            if not analytic_supported(target):
                raise ConfigError(
                    f"no closed-form pullback for {target.kind.value}; use sampled mode",
                    fields=["pullback.mode"],
                )
        else:
            self._build_sampled()

    @property
    def dimension(self) -> int:
        return self.zorich.dimension

    @property
    def resolution(self) -> float:
        """Largest nearest-neighbour gap among stored preimages (0 in analytic mode)."""
        return self._resolution

    def _target_samples(self) -> np.ndarray:
        if isinstance(self.target, PointCloudSet):
            return self.target.points
        chunks = []
        missing = 0
        for r in self.sampling.radii():
            try:
                chunks.append(self.target.sphere_section(float(r), self.sampling.section_samples).points)
            except SetValidationError:
                missing += 1
        if missing:
            logger.warning(f"[Pullback] {missing} sampling radii had empty sections")
        if not chunks:
            raise SetValidationError("no sphere section of the target could be sampled", radius=self.sampling.r_min)
        return np.vstack(chunks)

    def _replicate(self, canonical: np.ndarray) -> np.ndarray:
        """Group copies of canonical preimages whose x' lies within r_max of the canonical cells."""
        s = canonical[:, :-1]
        folded = fold_coordinates(s)
        equator = np.max(np.abs(folded.xi), axis=1) >= 1.0 - 1e-12
        lo = np.full(s.shape[1], -1.0 - self.r_max)
        hi = np.full(s.shape[1], 1.0 + self.r_max)
        hi[0] = 3.0 + self.r_max
        per_coord = []
        for i in range(s.shape[1]):
            ks = range(int(math.floor((lo[i] - 3.0) / ZORICH_PERIOD)), int(math.ceil((hi[i] + 1.0) / ZORICH_PERIOD)) + 1)
            per_coord.append([(k, c) for k in ks for c in (0, 1)])
        copies = []
        for choice in itertools.product(*per_coord):
            shifts = np.array([k for k, _ in choice], dtype=float) * ZORICH_PERIOD
            types = np.array([c for _, c in choice], dtype=bool)
            keep = equator | (folded.parity == int(types.sum()) % 2)
            if not np.any(keep):
                continue
            values = np.where(types, 2.0 - folded.xi[keep], folded.xi[keep]) + shifts
            inside = np.all((values >= lo) & (values <= hi), axis=1)
            if np.any(inside):
                copies.append(np.column_stack([values[inside], canonical[keep][inside, -1]]))
        return np.unique(np.vstack(copies), axis=0)

    def _build_sampled(self) -> None:
        samples = self._target_samples()
        samples = samples[norms(samples) > 0]
        if samples.shape[0] == 0:
            raise SetValidationError("target set has no points away from the origin", radius=0.0)
        canonical = self.zorich.invert(samples)
        stored = self._replicate(canonical)
        self.index = SpatialIndex(stored)
        self._t_range = (float(canonical[:, -1].min()), float(canonical[:, -1].max()))
        if stored.shape[0] > 1:
            gaps, _ = self.index.tree.query(self.zorich.canonical_representative(canonical), k=2)
            self._resolution = float(np.max(gaps[:, 1]))
        logger.info(
            f"[Pullback] sampled {samples.shape[0]} target points into {stored.shape[0]} preimages "
            f"(resolution {self._resolution:.3g})"
        )

    def distance(self, y: PointLike):
        """Distance from log-coordinate points y to T', capped at r_max."""
        batch, single = as_batch(y)
        if batch.shape[1] != self.dimension:
            raise DomainError(f"expected dimension {self.dimension}", "pullback_distance")
        if self.mode == PullbackMode.ANALYTIC:
            dist = analytic_pullback_distance(self.target, self.zorich, batch)
        else:
            t = batch[:, -1]
            outside = (t < self._t_range[0]) | (t > self._t_range[1])
            if np.any(outside):
                logger.debug(f"[Pullback] {int(outside.sum())} queries outside the sampled log-radius range")
            dist, _ = self.index.query(self.zorich.canonical_representative(batch), upper_bound=self.r_max)
        dist = np.minimum(dist, self.r_max)
        return float(dist[0]) if single else dist

    def describe(self) -> Dict[str, object]:
        info = {"mode": self.mode.value, "r_max": self.r_max, "resolution": self._resolution}
        if self.index is not None:
            info["stored_points"] = len(self.index)
        return info


def pullback_distance(pullback: PullbackSet, y: PointLike):
    return pullback.distance(y)


# =============================================================================
# Shrink map and h1
# =============================================================================

@dataclass
class VerticalSegment:
    """Maximal segment of a vertical line in the complement of T'."""
    t_start: float
    t_end: float
    bounded_below: bool
    bounded_above: bool


class ShrinkMap:
    """f(y) = (y', y_n - p(d(y, T')) / 2) and h1 = Z o f o Z^-1."""

    def __init__(self, pullback: PullbackSet):
        self.pullback = pullback

    @property
    def zorich(self) -> ZorichMap:
        return self.pullback.zorich

    @property
    def dimension(self) -> int:
        return self.pullback.dimension

    def evaluate(self, y: PointLike) -> np.ndarray:
        batch, single = as_batch(y)
        out = batch.copy()
        out[:, -1] -= 0.5 * p_of_distance(np.atleast_1d(self.pullback.distance(batch)))
        return restore(out, single)

    __call__ = evaluate

    def h1(self, x: PointLike, zorich: Optional[ZorichMap] = None) -> np.ndarray:
        """h1(x) = Z(f(Z^-1(x))) and h1(0) = 0."""
        zorich = zorich or self.zorich
        if zorich.dimension != self.dimension:
            raise DomainError("Zorich map dimension does not match the shrink map", "h1_eval")
        batch, single = as_batch(x)
        out = np.zeros_like(batch)
        nz = norms(batch) > 0
        if np.any(nz):
            out[nz] = zorich.evaluate(self.evaluate(zorich.invert(batch[nz])))
        return restore(out, single)

    def h1_nonsmooth_distance(self, x: np.ndarray) -> np.ndarray:
        """Range-side estimate of the distance to T and to the Zorich seams."""
        x = np.atleast_2d(x)
        out = np.full(x.shape[0], np.inf)
        nz = norms(x) > 0
        if np.any(nz):
            y = self.zorich.invert(x[nz])
            gap = np.atleast_1d(self.pullback.distance(y))
            gap = np.where(gap > 0, gap, np.inf)
            seams = np.minimum(gap, self.zorich.nonsmooth_distance(y))
            out[nz] = norms(x[nz]) * seams
        return out

    def h1_expr(self, zorich: Optional[ZorichMap] = None) -> MapExpr:
        return MapExpr(
            name="h1",
            dimension=self.dimension,
            fn=lambda x: self.h1(x, zorich),
            claimed_degree=1,
            nonsmooth_distance=self.h1_nonsmooth_distance,
        )

    def complement_segments(
        self, y_prime: np.ndarray, t_lo: float, t_hi: float, samples: int = 4001
    ) -> List[VerticalSegment]:
        """
        Maximal segments of {(y', t) : t_lo <= t <= t_hi} outside T'.

        Zeros of the pullback distance along the line are located on a grid
        and polished with a bounded scalar minimisation.
        """
        y_prime = np.asarray(y_prime, dtype=float)
        t = np.linspace(t_lo, t_hi, samples)
        pts = np.column_stack([np.tile(y_prime, (samples, 1)), t])
        dist = np.atleast_1d(self.pullback.distance(pts))
        step = t[1] - t[0]

        def along(tt: float) -> float:
            return float(self.pullback.distance(np.append(y_prime, tt)))

        if np.all(dist <= 1e-12):
            return []
        zeros = []
        for i in range(1, samples - 1):
            if dist[i] <= dist[i - 1] and dist[i] <= dist[i + 1] and dist[i] <= 2.0 * step:
                res = minimize_scalar(along, bounds=(t[i - 1], t[i + 1]), method="bounded",
                                      options={"xatol": 1e-13})
                if res.fun <= 1e-9 and (not zeros or res.x - zeros[-1] > step):
                    zeros.append(float(res.x))
        edges = [t_lo] + zeros + [t_hi]
        segments = []
        for k in range(len(edges) - 1):
            segments.append(VerticalSegment(
                t_start=edges[k],
                t_end=edges[k + 1],
                bounded_below=k > 0,
                bounded_above=k < len(edges) - 2,
            ))
        return segments


def shrink_f(shrink: ShrinkMap, y: PointLike) -> np.ndarray:
    return shrink.evaluate(y)


def h1_eval(shrink: ShrinkMap, zorich: ZorichMap, x: PointLike) -> np.ndarray:
    return shrink.h1(x, zorich)

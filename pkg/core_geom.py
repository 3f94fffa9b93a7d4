"""
Euclidean geometry primitives for qrmax.

Points are handled as numpy arrays. Every operation accepts either a single
point of shape (n,) or a batch of shape (N, n) and returns the same layout,
so maps can be evaluated on whole sphere grids at once.

Contents:
- PointN and batch helpers
- Sphere sampling grids (angular for n=2, Fibonacci for n=3, seeded Gaussian above)
- Star surfaces and their radial maps
- Spatial index (scipy cKDTree) with exact nearest-neighbour and Hausdorff distances
- Finite-difference Jacobians
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from config.constants import MIN_DIMENSION
from utils.error_handler import DomainError, ValidationError

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
HIGH_DIMENSION_GRID_SEED = 20240607


@dataclass(frozen=True)
class PointN:
    """A finite point of R^n with n >= 2."""
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) < MIN_DIMENSION:
            raise DomainError(f"points need at least {MIN_DIMENSION} coordinates, got {len(coords)}", "PointN")
        if not all(math.isfinite(c) for c in coords):
            raise DomainError(f"non-finite coordinate in {coords}", "PointN")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values: float) -> 'PointN':
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


PointLike = Union[PointN, Sequence[float], np.ndarray]


def as_batch(x: PointLike) -> Tuple[np.ndarray, bool]:
    """
    Convert input to a float batch of shape (N, n).

    Returns:
        (batch, was_single) where was_single tells whether to squeeze results
    """
    if isinstance(x, PointN):
        return x.as_array()[None, :], True
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim != 2:
        raise DomainError(f"expected shape (n,) or (N, n), got {arr.shape}", "as_batch")
    return arr, False


def restore(batch: np.ndarray, was_single: bool) -> np.ndarray:
    """Undo as_batch on an output batch."""
    return batch[0] if was_single else batch


def norms(batch: np.ndarray) -> np.ndarray:
    return np.linalg.norm(batch, axis=-1)


# =============================================================================
# Spheres
# =============================================================================

@dataclass(frozen=True)
class Sphere:
    """Sphere S(center, radius) with radius >= 0."""
    dimension: int
    radius: float
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.dimension < MIN_DIMENSION:
            raise DomainError(f"dimension must be >= {MIN_DIMENSION}", "Sphere")
        if not math.isfinite(self.radius) or self.radius < 0:
            raise DomainError(f"sphere radius must be finite and >= 0, got {self.radius}", "Sphere")

    @property
    def center_array(self) -> np.ndarray:
        if self.center is None:
            return np.zeros(self.dimension)
        return np.asarray(self.center, dtype=float)

    def sample(self, count: int, seed: int = HIGH_DIMENSION_GRID_SEED) -> np.ndarray:
        return sphere_grid(self.dimension, count, self.radius, self.center_array, seed)

    def contains(self, x: PointLike, tol: float = 1e-12) -> np.ndarray:
        batch, single = as_batch(x)
        dist = np.abs(norms(batch - self.center_array) - self.radius)
        inside = dist <= tol * max(1.0, self.radius)
        return inside[0] if single else inside


def unit_sphere_grid(dimension: int, count: int, seed: int = HIGH_DIMENSION_GRID_SEED) -> np.ndarray:
    """
    Deterministic quasi-uniform points on the unit sphere S^{n-1}.

    n=2 uses equally spaced angles, n=3 a Fibonacci lattice and higher
    dimensions normalised Gaussian samples from a seeded generator.
    """
    if count < 1:
        raise DomainError(f"sample count must be positive, got {count}", "sphere_grid")
    if dimension == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dimension == 3:
        i = np.arange(count)
        z = 1.0 - (2.0 * i + 1.0) / count
        radial = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        phi = i * GOLDEN_ANGLE
        return np.column_stack([radial * np.cos(phi), radial * np.sin(phi), z])
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, dimension))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_grid(
    dimension: int,
    count: int,
    radius: float,
    center: Optional[np.ndarray] = None,
    seed: int = HIGH_DIMENSION_GRID_SEED,
) -> np.ndarray:
    """Sample grid on S(center, radius); radius 0 collapses to the center."""
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}", "sphere_grid")
    pts = radius * unit_sphere_grid(dimension, count, seed)
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def unit_sphere_area(dimension: int) -> float:
    """Surface measure of S^{n-1} in R^n."""
    return 2.0 * math.pi ** (dimension / 2.0) / math.gamma(dimension / 2.0)


def grid_spacing(dimension: int, count: int, radius: float) -> float:
    """Typical distance between neighbouring grid points on S(radius)."""
    if dimension == 2:
        return 2.0 * math.pi * radius / count
    return radius * (unit_sphere_area(dimension) / count) ** (1.0 / (dimension - 1))


# =============================================================================
# Star surfaces
# =============================================================================

class SurfaceKind(str, Enum):
    EUCLIDEAN_SPHERE = "euclidean-sphere"
    SUP_NORM_CUBE = "sup-norm-cube"
    CONVEX_POLYTOPE = "convex-polytope"


@dataclass(frozen=True, eq=False)
class StarSurface:
    """
    Closed surface that is star-shaped about the origin.

    Each ray from the origin meets it exactly once, at distance
    radius(u) for the unit direction u. Cubes carry a scale so that
    Q(s) = {max |x_i| = s}; polytopes are given by their vertices and
    must contain the origin in their interior.
    """
    kind: SurfaceKind
    dimension: int
    scale: float = 1.0
    vertices: Optional[np.ndarray] = None
    _equations: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dimension < MIN_DIMENSION:
            raise DomainError(f"dimension must be >= {MIN_DIMENSION}", "StarSurface")
        if self.scale <= 0:
            raise DomainError(f"surface scale must be positive, got {self.scale}", "StarSurface")
        if self.kind == SurfaceKind.CONVEX_POLYTOPE:
            if self.vertices is None:
                raise ValidationError("convex polytope needs vertices", field="vertices")
            verts = np.asarray(self.vertices, dtype=float)
            if verts.ndim != 2 or verts.shape[1] != self.dimension:
                raise ValidationError(f"vertices must have shape (k, {self.dimension})", field="vertices")
            hull = ConvexHull(verts)
            # scipy convention: normal . x + offset <= 0 inside
            if np.any(hull.equations[:, -1] >= 0):
                raise ValidationError("polytope must contain the origin in its interior", field="vertices")
            object.__setattr__(self, "vertices", verts)
            object.__setattr__(self, "_equations", hull.equations)

    @classmethod
    def euclidean_sphere(cls, dimension: int) -> 'StarSurface':
        return cls(SurfaceKind.EUCLIDEAN_SPHERE, dimension)

    @classmethod
    def sup_norm_cube(cls, dimension: int, scale: float = 1.0) -> 'StarSurface':
        return cls(SurfaceKind.SUP_NORM_CUBE, dimension, scale=scale)

    @classmethod
    def convex_polytope(cls, vertices: Sequence[Sequence[float]]) -> 'StarSurface':
        verts = np.asarray(vertices, dtype=float)
        return cls(SurfaceKind.CONVEX_POLYTOPE, verts.shape[1], vertices=verts)

    @classmethod
    def default_polytope(cls, dimension: int) -> 'StarSurface':
        """Sup-norm cube scaled so that its farthest points lie on S(1)."""
        return cls.sup_norm_cube(dimension, scale=1.0 / math.sqrt(dimension))

    def _facet_radii(self, u: np.ndarray) -> np.ndarray:
        if self.kind == SurfaceKind.SUP_NORM_CUBE:
            with np.errstate(divide="ignore"):
                return self.scale / np.abs(u)
        normals = self._equations[:, :-1]
        offsets = self._equations[:, -1]
        dots = u @ normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            radii = np.where(dots > 0, -offsets / dots, np.inf)
        return radii

    def radius(self, u: np.ndarray) -> np.ndarray:
        """Distance from the origin to the surface along unit directions u (N, n)."""
        u = np.atleast_2d(u)
        if self.kind == SurfaceKind.EUCLIDEAN_SPHERE:
            return np.full(u.shape[0], self.scale)
        return np.min(self._facet_radii(u), axis=1)

    def ridge_gap(self, u: np.ndarray) -> np.ndarray:
        """
        Relative gap between the two closest facets along u.

        Small values mean u points near a ridge where the surface is not smooth.
        Smooth surfaces report infinity.
        """
        u = np.atleast_2d(u)
        if self.kind == SurfaceKind.EUCLIDEAN_SPHERE:
            return np.full(u.shape[0], np.inf)
        radii = np.sort(self._facet_radii(u), axis=1)
        return radii[:, 1] / radii[:, 0] - 1.0


def radial_star_map(surface: StarSurface, x: PointLike) -> np.ndarray:
    """Map S(1) onto the surface radially, extended by x -> |x| * alpha(x/|x|)."""
    batch, single = as_batch(x)
    r = norms(batch)
    out = np.zeros_like(batch)
    nz = r > 0
    u = batch[nz] / r[nz, None]
    out[nz] = batch[nz] * surface.radius(u)[:, None]
    return restore(out, single)


def radial_star_inverse(surface: StarSurface, y: PointLike) -> np.ndarray:
    """Inverse of radial_star_map."""
    batch, single = as_batch(y)
    r = norms(batch)
    out = np.zeros_like(batch)
    nz = r > 0
    u = batch[nz] / r[nz, None]
    out[nz] = batch[nz] / surface.radius(u)[:, None]
    return restore(out, single)


# =============================================================================
# Spatial index
# =============================================================================

class SpatialIndex:
    """Exact nearest-neighbour index over a finite point set (scipy cKDTree)."""

    def __init__(self, points: np.ndarray):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValidationError("spatial index needs a non-empty (k, n) point array", field="points")
        self.points = pts
        self.tree = cKDTree(pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def query(
        self, y: np.ndarray, upper_bound: float = np.inf
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Distances and witness indices; misses beyond upper_bound return inf and len(self)."""
        return self.tree.query(y, k=1, distance_upper_bound=upper_bound)


def nearest_distance(index: SpatialIndex, y: PointLike) -> Tuple[Union[float, np.ndarray], np.ndarray]:
    """
    Exact distance from y to the indexed set, with the witness point.

    Returns:
        (distance, witness) with scalar/1-D layout for a single query
    """
    batch, single = as_batch(y)
    if batch.shape[1] != index.dimension:
        raise DomainError(f"query dimension {batch.shape[1]} != index dimension {index.dimension}", "nearest_distance")
    dist, idx = index.query(batch)
    witness = index.points[idx]
    if single:
        return float(dist[0]), witness[0]
    return dist, witness


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """
    Hausdorff distance between two non-empty finite point sets.

    Raises:
        ValidationError: either set is empty
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("hausdorff distance needs two non-empty point sets", field="points")
    a = a.reshape(-1, b.shape[-1]) if a.ndim == 1 else a
    b = b.reshape(-1, a.shape[-1]) if b.ndim == 1 else b
    d_ab, _ = cKDTree(b).query(a, k=1)
    d_ba, _ = cKDTree(a).query(b, k=1)
    return float(max(d_ab.max(), d_ba.max()))


# =============================================================================
# Finite differences
# =============================================================================

def fd_jacobian(fn, x: np.ndarray, step: float) -> np.ndarray:
    """
    Central-difference Jacobian of a batch map.

    Args:
        fn: callable taking (N, n) and returning (N, m)
        x: base points, shape (N, n)
        step: difference step

    Returns:
        Array of shape (N, m, n)
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    columns = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        columns.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * step))
    return np.stack(columns, axis=-1)


@dataclass
class StarDistortion:
    """Local linear distortion of a radial star map at points of S(1)."""
    values: np.ndarray
    excluded: int

    @property
    def maximum(self) -> float:
        return float(np.max(self.values)) if self.values.size else math.nan


def radial_star_distortion(
    surface: StarSurface,
    count: int = 2000,
    step: float = 1e-6,
    ridge_exclusion: float = 1e-3,
) -> StarDistortion:
    """
    Ratio of extreme singular values of the radial star map on S(1).

    Directions within ridge_exclusion (relative facet gap) of a ridge are
    skipped because the map has a kink there.
    """
    u = unit_sphere_grid(surface.dimension, count)
    keep = surface.ridge_gap(u) > ridge_exclusion
    jac = fd_jacobian(lambda pts: radial_star_map(surface, pts), u[keep], step)
    sv = np.linalg.svd(jac, compute_uv=False)
    return StarDistortion(values=sv[:, 0] / sv[:, -1], excluded=int(np.count_nonzero(~keep)))

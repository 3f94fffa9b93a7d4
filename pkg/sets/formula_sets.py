"""
Closed sets given by exact formulas.

Distances are exact up to floating point: closed forms for full space,
rays, cones and origin spheres, and a dense log-radius scan followed by
vectorised golden-section refinement for logarithmic spirals.
"""
import logging
import math
from typing import Any, Dict, Sequence

import numpy as np

from core_geom import PointLike, as_batch, norms, unit_sphere_grid
from sets.base import ClosedSetOracle, OracleMode, SetFactory, SetKind
from utils.error_handler import ConfigError

logger = logging.getLogger(__name__)

SPIRAL_DEPTH = 30.0            # log-radius window below |x|; e^-30 bounds the truncation error
SPIRAL_CHUNK = 1024
GOLDEN_ITERATIONS = 80
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _unit_vector(values: Sequence[float], dimension: int, field: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape != (dimension,):
        raise ConfigError(f"{field} must have {dimension} components", fields=[field])
    length = np.linalg.norm(v)
    if not np.isfinite(length) or length == 0:
        raise ConfigError(f"{field} must be a finite non-zero vector", fields=[field])
    return v / length


def _mode(params: Dict[str, Any]) -> OracleMode:
    try:
        return OracleMode(params.get("mode", OracleMode.EXACT.value))
    except ValueError:
        raise ConfigError(f"unknown set mode {params.get('mode')!r}", fields=["set.mode"])


class FullSpaceSet(ClosedSetOracle):
    """T = R^n."""

    kind = SetKind.FULL_SPACE

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'FullSpaceSet':
        return cls(dimension, _mode(params))

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        dist = np.zeros(batch.shape[0])
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        return r * unit_sphere_grid(self.dimension, count)

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mode": self.mode.value}


class RadialRaySet(ClosedSetOracle):
    """T = {a * v : a >= 0} for a unit direction v."""

    kind = SetKind.RADIAL_RAY

    def __init__(self, direction: Sequence[float], dimension: int, mode: OracleMode = OracleMode.EXACT):
        super().__init__(dimension, mode)
        self.direction = _unit_vector(direction, dimension, "set.direction")

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'RadialRaySet':
        if "direction" not in params:
            raise ConfigError("radial-ray needs a direction", fields=["set.direction"])
        return cls(params["direction"], dimension, _mode(params))

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        proj = batch @ self.direction
        perp = norms(batch - proj[:, None] * self.direction)
        dist = np.where(proj >= 0, perp, norms(batch))
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        return (r * self.direction)[None, :]

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mode": self.mode.value, "direction": self.direction.tolist()}


class LogSpiralSet(ClosedSetOracle):
    """
    Logarithmic spiral in the plane, closed by the origin.

    T = {r (cos(w ln r), sin(w ln r)) : r > 0} U {0}
    """

    kind = SetKind.LOG_SPIRAL

    def __init__(self, omega: float, dimension: int = 2, mode: OracleMode = OracleMode.EXACT):
        if dimension != 2:
            raise ConfigError("log-spiral sets live in the plane (dimension 2)", fields=["dimension"])
        if not math.isfinite(omega):
            raise ConfigError("spiral omega must be finite", fields=["set.omega"])
        super().__init__(dimension, mode)
        self.omega = float(omega)
        self._step = min(0.02, 0.1 / abs(self.omega)) if self.omega != 0 else 0.02
        self._offsets = np.arange(-SPIRAL_DEPTH, math.log(2.0) + self._step, self._step)

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'LogSpiralSet':
        return cls(float(params.get("omega", 1.0)), dimension, _mode(params))

    def point_at(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        angle = self.omega * np.log(r)
        return np.stack([r * np.cos(angle), r * np.sin(angle)], axis=-1)

    def _gap2(self, u: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        rho = np.exp(u)
        angle = self.omega * u
        return (x1 - rho * np.cos(angle)) ** 2 + (x2 - rho * np.sin(angle)) ** 2

    def _chunk_distance(self, pts: np.ndarray) -> np.ndarray:
        r = norms(pts)
        x1 = pts[:, 0:1]
        x2 = pts[:, 1:2]
        u = np.log(r)[:, None] + self._offsets[None, :]
        gap = self._gap2(u, x1, x2)
        j = np.argmin(gap, axis=1)
        rows = np.arange(pts.shape[0])
        center = u[rows, j][:, None]
        lo = center - self._step
        hi = center + self._step
        for _ in range(GOLDEN_ITERATIONS):
            c = hi - INV_PHI * (hi - lo)
            d = lo + INV_PHI * (hi - lo)
            left = self._gap2(c, x1, x2) < self._gap2(d, x1, x2)
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
        refined = self._gap2(0.5 * (lo + hi), x1, x2)[:, 0]
        best = np.minimum(refined, gap[rows, j])
        return np.minimum(np.sqrt(best), r)

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        dist = norms(batch)
        nz = np.flatnonzero(dist > 0)
        for start in range(0, nz.size, SPIRAL_CHUNK):
            idx = nz[start:start + SPIRAL_CHUNK]
            dist[idx] = self._chunk_distance(batch[idx])
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        return self.point_at(np.array([r]))

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mode": self.mode.value, "omega": self.omega}


class ConeSet(ClosedSetOracle):
    """Closed cone {x : angle(x, axis) <= half_angle} (contains the origin)."""

    kind = SetKind.CONE

    def __init__(
        self,
        axis: Sequence[float],
        half_angle: float,
        dimension: int,
        mode: OracleMode = OracleMode.EXACT,
    ):
        super().__init__(dimension, mode)
        if not 0 < half_angle < math.pi:
            raise ConfigError("cone half_angle must lie in (0, pi)", fields=["set.half_angle"])
        self.axis = _unit_vector(axis, dimension, "set.axis")
        self.half_angle = float(half_angle)

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'ConeSet':
        axis = params.get("axis")
        if axis is None:
            axis = [0.0] * (dimension - 1) + [1.0]
        if "half_angle" not in params:
            raise ConfigError("cone needs half_angle", fields=["set.half_angle"])
        return cls(axis, float(params["half_angle"]), dimension, _mode(params))

    def angle_to_axis(self, batch: np.ndarray) -> np.ndarray:
        along = batch @ self.axis
        across = norms(batch - along[:, None] * self.axis)
        return np.arctan2(across, along)

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        r = norms(batch)
        excess = self.angle_to_axis(batch) - self.half_angle
        dist = np.where(
            excess <= 0,
            0.0,
            np.where(excess >= math.pi / 2, r, r * np.sin(np.clip(excess, 0.0, math.pi / 2))),
        )
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        grid = r * unit_sphere_grid(self.dimension, count)
        inside = grid[self.angle_to_axis(grid) <= self.half_angle]
        return np.vstack([(r * self.axis)[None, :], inside])

    @property
    def is_polar(self) -> bool:
        """Axis is +e_n or -e_n."""
        return bool(np.allclose(np.abs(self.axis[-1]), 1.0, atol=1e-15, rtol=0.0))

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "mode": self.mode.value,
            "axis": self.axis.tolist(),
            "half_angle": self.half_angle,
        }


class OriginSphereSet(ClosedSetOracle):
    """T = S(rho). It does not contain the origin and fails sphere validation."""

    kind = SetKind.SPHERE

    def __init__(self, radius: float, dimension: int, mode: OracleMode = OracleMode.EXACT):
        super().__init__(dimension, mode)
        if not radius > 0 or not math.isfinite(radius):
            raise ConfigError("sphere radius must be positive and finite", fields=["set.radius"])
        self.radius = float(radius)

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'OriginSphereSet':
        return cls(float(params.get("radius", 1.0)), dimension, _mode(params))

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        dist = np.abs(norms(batch) - self.radius)
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        if abs(r - self.radius) > self.tolerance * max(1.0, self.radius):
            return np.empty((0, self.dimension))
        return r * unit_sphere_grid(self.dimension, count)

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mode": self.mode.value, "radius": self.radius}


SetFactory.register(SetKind.FULL_SPACE.value, FullSpaceSet)
SetFactory.register(SetKind.RADIAL_RAY.value, RadialRaySet)
SetFactory.register(SetKind.LOG_SPIRAL.value, LogSpiralSet)
SetFactory.register(SetKind.CONE.value, ConeSet)
SetFactory.register(SetKind.SPHERE.value, OriginSphereSet)

"""
Sampled and composite closed sets: point clouds and finite unions.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from core_geom import PointLike, SpatialIndex, as_batch, norms
from sets.base import ClosedSetOracle, OracleMode, SetFactory, SetKind
from utils.error_handler import ConfigError, ValidationError

logger = logging.getLogger(__name__)


class PointCloudSet(ClosedSetOracle):
    """
    Finite sample of a closed set with a declared resolution.

    Membership and sphere sections are answered within the resolution;
    distances are exact distances to the sample.
    """

    kind = SetKind.POINT_CLOUD

    def __init__(self, points: np.ndarray, resolution: float, include_origin: bool = True):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValidationError("point cloud must be a non-empty (k, n) array", field="set.points")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("point cloud contains non-finite coordinates", field="set.points")
        if not resolution > 0:
            raise ConfigError("point-cloud resolution must be positive", fields=["set.resolution"])
        if include_origin and not np.any(norms(pts) == 0):
            pts = np.vstack([np.zeros((1, pts.shape[1])), pts])
        super().__init__(pts.shape[1], OracleMode.SAMPLED)
        self.points = pts
        self.resolution = float(resolution)
        self.index = SpatialIndex(pts)
        self._radii = norms(pts)
        self.source = None

    @classmethod
    def from_csv(cls, path: Union[str, Path], resolution: float) -> 'PointCloudSet':
        """Load a comma separated point list; lines starting with '#' are comments."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"point cloud file not found: {path}", fields=["set.csv"])
        points = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        cloud = cls(points, resolution)
        cloud.source = str(path)
        logger.info(f"[PointCloud] loaded {points.shape[0]} points from {path}")
        return cloud

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'PointCloudSet':
        resolution = float(params.get("resolution", 0.01))
        if "csv" in params:
            cloud = cls.from_csv(params["csv"], resolution)
        elif "points" in params:
            cloud = cls(np.asarray(params["points"], dtype=float), resolution)
        else:
            raise ConfigError("point-cloud needs 'csv' or 'points'", fields=["set.csv"])
        if cloud.dimension != dimension:
            raise ConfigError(
                f"point cloud has dimension {cloud.dimension}, config says {dimension}",
                fields=["set.csv", "dimension"],
            )
        return cloud

    @property
    def tolerance(self) -> float:
        return self.resolution

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        dist, _ = self.index.query(batch)
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        shell = np.abs(self._radii - r) <= self.resolution
        pts = self.points[shell & (self._radii > 0)]
        return r * pts / norms(pts)[:, None]

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "mode": self.mode.value,
            "points": int(self.points.shape[0]),
            "resolution": self.resolution,
            "source": self.source,
        }


class UnionSet(ClosedSetOracle):
    """Finite union of closed sets."""

    kind = SetKind.UNION

    def __init__(self, children: Sequence[ClosedSetOracle]):
        children = list(children)
        if not children:
            raise ConfigError("union needs at least one child set", fields=["set.children"])
        dims = {child.dimension for child in children}
        if len(dims) != 1:
            raise ConfigError(f"union children disagree on dimension: {sorted(dims)}", fields=["set.children"])
        exact = all(child.mode == OracleMode.EXACT for child in children)
        super().__init__(dims.pop(), OracleMode.EXACT if exact else OracleMode.SAMPLED)
        self.children: List[ClosedSetOracle] = children

    @classmethod
    def from_params(cls, params: Dict[str, Any], dimension: int) -> 'UnionSet':
        blocks = params.get("children") or []
        return cls([SetFactory.create(block, dimension) for block in blocks])

    @property
    def tolerance(self) -> float:
        return max(child.tolerance for child in self.children)

    def distance_to_set(self, x: PointLike):
        batch, single = as_batch(x)
        self._check_dimension(batch)
        dist = np.min(
            np.vstack([np.atleast_1d(child.distance_to_set(batch)) for child in self.children]),
            axis=0,
        )
        return float(dist[0]) if single else dist

    def _section_points(self, r: float, count: int) -> np.ndarray:
        parts = [child._section_points(r, count) for child in self.children]
        return np.vstack(parts) if parts else np.empty((0, self.dimension))

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "mode": self.mode.value,
            "children": [child.describe() for child in self.children],
        }


SetFactory.register(SetKind.POINT_CLOUD.value, PointCloudSet)
SetFactory.register(SetKind.UNION.value, UnionSet)

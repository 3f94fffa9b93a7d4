"""
Map expressions: callables on R^n with the metadata verification needs.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np

from core_geom import PointLike, as_batch, restore
from utils.error_handler import DomainError

BatchFn = Callable[[np.ndarray], np.ndarray]


class MapKind(str, Enum):
    POLYNOMIAL = "polynomial"
    TRANSCENDENTAL = "transcendental"
    BUILDING_BLOCK = "building-block"


_KIND_RANK = {MapKind.BUILDING_BLOCK: 0, MapKind.POLYNOMIAL: 1, MapKind.TRANSCENDENTAL: 2}


@dataclass
class MapExpr:
    """
    A map R^n -> R^n evaluated on batches of shape (N, n).

    Attributes:
        name: label used in reports
        dimension: n
        fn: batch evaluator
        kind: polynomial, transcendental or building-block
        claimed_degree: topological degree when finite
        claimed_distortion: known bound on the linear distortion, if any
        nonsmooth_distance: distance to loci where the map is not differentiable
    """
    name: str
    dimension: int
    fn: BatchFn
    kind: MapKind = MapKind.BUILDING_BLOCK
    claimed_degree: Optional[int] = None
    claimed_distortion: Optional[float] = None
    nonsmooth_distance: Optional[BatchFn] = None

    def __call__(self, x: PointLike) -> np.ndarray:
        batch, single = as_batch(x)
        if batch.shape[1] != self.dimension:
            raise DomainError(f"{self.name} expects dimension {self.dimension}, got {batch.shape[1]}", self.name)
        return restore(np.asarray(self.fn(batch), dtype=float), single)

    def compose(self, inner: 'MapExpr', name: Optional[str] = None) -> 'MapExpr':
        """self o inner."""
        if inner.dimension != self.dimension:
            raise DomainError("cannot compose maps of different dimensions", "MapExpr.compose")
        outer_fn, inner_fn = self.fn, inner.fn
        degree = None
        if self.claimed_degree is not None and inner.claimed_degree is not None:
            degree = self.claimed_degree * inner.claimed_degree
        kind = max(self.kind, inner.kind, key=lambda k: _KIND_RANK[k])
        smooth_parts = [f for f in (inner.nonsmooth_distance,) if f is not None]
        if self.nonsmooth_distance is not None:
            outer_smooth = self.nonsmooth_distance
            smooth_parts.append(lambda x: outer_smooth(inner_fn(x)))
        nonsmooth = None
        if smooth_parts:
            def nonsmooth(x, parts=tuple(smooth_parts)):
                return np.min(np.vstack([p(x) for p in parts]), axis=0)
        return MapExpr(
            name=name or f"{self.name} o {inner.name}",
            dimension=self.dimension,
            fn=lambda x: outer_fn(inner_fn(x)),
            kind=kind,
            claimed_degree=degree,
            nonsmooth_distance=nonsmooth,
        )

    def metadata(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "kind": self.kind.value,
            "claimed_degree": self.claimed_degree,
            "claimed_distortion": self.claimed_distortion,
        }


def identity_map(dimension: int) -> MapExpr:
    return MapExpr("identity", dimension, lambda x: np.array(x, dtype=float, copy=True), claimed_degree=1)


def sup_square_map(dimension: int) -> MapExpr:
    """x -> max|x_i| * x, sending the cube Q(r) onto Q(r^2)."""
    def fn(x):
        return np.max(np.abs(x), axis=1)[:, None] * x
    return MapExpr("sup-square", dimension, fn)

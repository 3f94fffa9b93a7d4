"""
Zorich map and the power-type map built from it.

The Zorich map Z: R^n -> R^n \\ {0} is the n-dimensional analogue of the
exponential. Writing x = (x', t) with x' in R^{n-1}:

    Z(x) = e^t * h(fold(x'))

where fold reduces each coordinate of x' into the beam cell [-1, 1] with a
period-4 tent map and h maps the cell onto the closed upper hemisphere,
reflected to the lower hemisphere when the fold used an odd number of
reflections. Z is invariant under the group generated by translations by
4 e_i and rotations by pi about the cell edges (pairs of reflections).

The power map P = Z o A o Z^-1 with A a dilation by d is well defined,
has degree d^(n-1) and sends S(r) onto S(r^d).
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config.constants import (
    BRANCH_TOLERANCE,
    LIFT_AMBIGUITY_RATIO,
    LIFT_MAX_DEPTH,
    LIFT_MAX_STEP,
    MIN_DIMENSION,
    ZORICH_PERIOD,
)
from core_geom import PointLike, as_batch, norms, restore
from map_expr import MapExpr, MapKind
from utils.error_handler import BranchSetError, DomainError, RefinementError

logger = logging.getLogger(__name__)

EQUATOR_TOLERANCE = 1e-12


@dataclass
class FoldResult:
    """Folded cell coordinates of x' with the group element data that produced them."""
    xi: np.ndarray
    parity: np.ndarray
    translations: np.ndarray
    reflections: np.ndarray


@dataclass(frozen=True)
class GroupElement:
    """Generator of the Zorich group: a translation by 4 e_i or a rotation about an edge."""
    kind: str
    axes: Tuple[int, ...]

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.array(x, dtype=float, copy=True)
        if self.kind == "translation":
            out[..., self.axes[0]] += ZORICH_PERIOD
        else:
            for axis in self.axes:
                out[..., axis] = 2.0 - out[..., axis]
        return out


@dataclass
class LiftResult:
    points: np.ndarray
    refinements: int


@dataclass
class PreimageResult:
    points: np.ndarray
    degenerate: bool = False

    def __len__(self) -> int:
        return int(self.points.shape[0])


def fold_coordinates(s: np.ndarray) -> FoldResult:
    """
    Period-4 tent fold of each coordinate into [-1, 1].

    m = (s + 1) mod 4; m <= 2 gives xi = m - 1, otherwise xi = 3 - m and
    the coordinate counts as one reflection. Parity is the number of
    reflections mod 2.
    """
    s = np.asarray(s, dtype=float)
    shifted = s + 1.0
    k = np.floor(shifted / ZORICH_PERIOD)
    m = shifted - ZORICH_PERIOD * k
    refl = m > 2.0
    xi = np.where(refl, 3.0 - m, m - 1.0)
    parity = np.sum(refl, axis=-1) % 2
    return FoldResult(xi=xi, parity=parity, translations=k.astype(int), reflections=refl)


def distance_to_odd(s: np.ndarray) -> np.ndarray:
    """Distance from each coordinate to the nearest odd integer (cell faces)."""
    q = np.mod(np.asarray(s, dtype=float) - 1.0, 2.0)
    return np.minimum(q, 2.0 - q)


class ZorichMap:
    """Zorich map in dimension n >= 2."""

    def __init__(self, dimension: int):
        if dimension < MIN_DIMENSION:
            raise DomainError(f"Zorich map needs n >= {MIN_DIMENSION}, got {dimension}", "ZorichMap")
        self.dimension = dimension
        self._combos = np.array(list(itertools.product((0, 1), repeat=dimension - 1)), dtype=bool)
        self._combo_parity = self._combos.sum(axis=1) % 2

    def __repr__(self) -> str:
        return f"ZorichMap(n={self.dimension})"

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    def fold(self, x_prime: PointLike) -> FoldResult:
        batch, single = as_batch(x_prime)
        if batch.shape[1] != self.dimension - 1:
            raise DomainError(f"fold expects {self.dimension - 1} coordinates", "zorich_fold")
        result = fold_coordinates(batch)
        if single:
            return FoldResult(
                xi=result.xi[0],
                parity=result.parity[0],
                translations=result.translations[0],
                reflections=result.reflections[0],
            )
        return result

    def hemisphere(self, xi: np.ndarray, parity: np.ndarray) -> np.ndarray:
        """Unit vectors h(xi), reflected through the equator where parity is odd."""
        xi = np.atleast_2d(xi)
        rho = np.max(np.abs(xi), axis=1)
        length = norms(xi)
        u = np.zeros_like(xi)
        nz = length > 0
        u[nz] = xi[nz] / length[nz, None]
        angle = 0.5 * math.pi * rho
        sign = np.where(np.asarray(parity) % 2 == 1, -1.0, 1.0)
        return np.column_stack([u * np.sin(angle)[:, None], sign * np.cos(angle)])

    def evaluate(self, x: PointLike) -> np.ndarray:
        """Z(x) = e^{x_n} * h(fold(x'))."""
        batch, single = as_batch(x)
        self._check(batch, "zorich_eval")
        folded = fold_coordinates(batch[:, :-1])
        direction = self.hemisphere(folded.xi, folded.parity)
        return restore(np.exp(batch[:, -1])[:, None] * direction, single)

    __call__ = evaluate

    def invert(self, y: PointLike) -> np.ndarray:
        """
        Canonical preimage of y != 0.

        The preimage lies in the beam cell [-1, 1]^(n-1) x R for the closed
        upper hemisphere, and in its reflection across x_1 = 1 for the open
        lower hemisphere.
        """
        batch, single = as_batch(y)
        self._check(batch, "zorich_invert")
        r = norms(batch)
        if np.any(r == 0):
            raise DomainError("the origin has no Zorich preimage", "zorich_invert")
        w = batch / r[:, None]
        wp = w[:, :-1]
        wn = w[:, -1]
        length = norms(wp)
        rho = (2.0 / math.pi) * np.arctan2(length, np.abs(wn))
        sup = np.max(np.abs(wp), axis=1)
        xi = np.zeros_like(wp)
        nz = sup > 0
        xi[nz] = rho[nz, None] * wp[nz] / sup[nz, None]
        south = wn < 0
        xi[south, 0] = 2.0 - xi[south, 0]
        return restore(np.column_stack([xi, np.log(r)]), single)

    def canonical_representative(self, x: PointLike) -> np.ndarray:
        """Point of the canonical cells with the same Z-image as x."""
        batch, single = as_batch(x)
        self._check(batch, "canonical_representative")
        folded = fold_coordinates(batch[:, :-1])
        xi = folded.xi.copy()
        odd = folded.parity == 1
        xi[odd, 0] = 2.0 - xi[odd, 0]
        return restore(np.column_stack([xi, batch[:, -1]]), single)

    def _check(self, batch: np.ndarray, operation: str) -> None:
        if batch.shape[1] != self.dimension:
            raise DomainError(f"expected dimension {self.dimension}, got {batch.shape[1]}", operation)

    # -------------------------------------------------------------------------
    # Group and orbits
    # -------------------------------------------------------------------------

    def group_generators(self) -> List[GroupElement]:
        """Translations by 4 e_i and rotations by pi about the edges through (1, 1)."""
        gens = [GroupElement("translation", (i,)) for i in range(self.dimension - 1)]
        for i, j in itertools.combinations(range(self.dimension - 1), 2):
            gens.append(GroupElement("double-reflection", (i, j)))
        return gens

    def _parity_mask(self, parity: int, both: bool) -> np.ndarray:
        if both:
            return np.ones(len(self._combos), dtype=bool)
        return self._combo_parity == parity

    @staticmethod
    def on_equator(xi: np.ndarray) -> bool:
        return bool(np.max(np.abs(xi)) >= 1.0 - EQUATOR_TOLERANCE)

    def orbit_distance(self, s: np.ndarray, xi: np.ndarray, parity: int) -> np.ndarray:
        """
        Distance in R^(n-1) from each row of s to the orbit {s : fold(s) = (xi, parity)}.

        Points of the equator have both parities in their fiber.
        """
        s = np.atleast_2d(s)
        xi = np.asarray(xi, dtype=float)
        d0 = np.abs(np.mod(s - xi + 2.0, ZORICH_PERIOD) - 2.0)
        d1 = np.abs(np.mod(s - (2.0 - xi) + 2.0, ZORICH_PERIOD) - 2.0)
        mask = self._parity_mask(int(parity), self.on_equator(xi))
        best = np.full(s.shape[0], np.inf)
        for combo in self._combos[mask]:
            gap = np.where(combo, d1, d0)
            best = np.minimum(best, np.sum(gap * gap, axis=1))
        return np.sqrt(best)

    def _orbit_candidates(
        self, s: np.ndarray, xi: np.ndarray, parity: int, per_type: List[np.ndarray]
    ) -> np.ndarray:
        """Combine per-coordinate candidate values (value, type) into orbit points."""
        both = self.on_equator(xi)
        options = per_type
        rows = []
        for choice in itertools.product(*options):
            values = np.array([c[0] for c in choice])
            types = np.array([c[1] for c in choice], dtype=int)
            if not both and int(types.sum()) % 2 != int(parity):
                continue
            rows.append(values)
        if not rows:
            return np.empty((0, len(s)))
        pts = np.unique(np.round(np.array(rows), 12), axis=0)
        return pts

    def nearest_orbit_points(
        self, s: np.ndarray, xi: np.ndarray, parity: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Orbit points near s sorted by distance.

        Returns:
            (points, distances) with the nearest first
        """
        s = np.asarray(s, dtype=float)
        xi = np.asarray(xi, dtype=float)
        per_coord = []
        for i in range(len(s)):
            opts = []
            for kind, base in ((0, xi[i]), (1, 2.0 - xi[i])):
                k0 = np.round((s[i] - base) / ZORICH_PERIOD)
                for dk in (-1, 0, 1):
                    opts.append((base + ZORICH_PERIOD * (k0 + dk), kind))
            per_coord.append(opts)
        pts = self._orbit_candidates(s, xi, parity, per_coord)
        dist = norms(pts - s)
        order = np.argsort(dist, kind="stable")
        return pts[order], dist[order]

    def orbit_points_within(
        self, s: np.ndarray, xi: np.ndarray, parity: int, radius: float
    ) -> np.ndarray:
        """All orbit points within `radius` of s."""
        s = np.asarray(s, dtype=float)
        xi = np.asarray(xi, dtype=float)
        per_coord = []
        for i in range(len(s)):
            opts = []
            for kind, base in ((0, xi[i]), (1, 2.0 - xi[i])):
                k_lo = math.ceil((s[i] - radius - base) / ZORICH_PERIOD)
                k_hi = math.floor((s[i] + radius - base) / ZORICH_PERIOD)
                opts.extend((base + ZORICH_PERIOD * k, kind) for k in range(k_lo, k_hi + 1))
            if not opts:
                return np.empty((0, len(s)))
            per_coord.append(opts)
        pts = self._orbit_candidates(s, xi, parity, per_coord)
        if pts.shape[0] == 0:
            return pts
        return pts[norms(pts - s) <= radius]

    # -------------------------------------------------------------------------
    # Branch set
    # -------------------------------------------------------------------------

    def branch_distance(self, x: PointLike) -> np.ndarray:
        """
        Distance from x to the branch set (cell edges: two coordinates of x' odd).

        Infinite for n = 2, where Z is a local homeomorphism everywhere.
        """
        batch, single = as_batch(x)
        self._check(batch, "branch_distance")
        if self.dimension == 2:
            out = np.full(batch.shape[0], np.inf)
        else:
            gaps = np.sort(distance_to_odd(batch[:, :-1]), axis=1)
            out = np.sqrt(gaps[:, 0] ** 2 + gaps[:, 1] ** 2)
        return out[0] if single else out

    def nonsmooth_distance(self, x: np.ndarray) -> np.ndarray:
        """Distance to cell faces and to the sup-norm ties of the folded coordinates (n >= 3)."""
        x = np.atleast_2d(x)
        if self.dimension == 2:
            return np.full(x.shape[0], np.inf)
        faces = np.min(distance_to_odd(x[:, :-1]), axis=1)
        mags = -np.sort(-np.abs(fold_coordinates(x[:, :-1]).xi), axis=1)
        ties = (mags[:, 0] - mags[:, 1]) / math.sqrt(2.0)
        return np.minimum(faces, ties)

    def local_preimage_count(self, x: PointLike, radius: float) -> int:
        """Number of preimages of Z(x) inside the ball B(x, radius)."""
        point = np.asarray(x, dtype=float)
        folded = fold_coordinates(point[:-1])
        return int(self.orbit_points_within(point[:-1], folded.xi, int(folded.parity), radius).shape[0])

    # -------------------------------------------------------------------------
    # Path lifting
    # -------------------------------------------------------------------------

    def lift_path(
        self,
        path: np.ndarray,
        start_lift: np.ndarray,
        max_depth: int = LIFT_MAX_DEPTH,
    ) -> LiftResult:
        """
        Lift a polyline in R^n \\ {0} through Z starting at a given preimage.

        Each vertex is lifted to the orbit point nearest the previous lift.
        Segments whose lift is ambiguous are bisected in the image until the
        nearest candidate clearly wins.

        Raises:
            DomainError: path touches the origin or start_lift is not a preimage
            BranchSetError: the path runs through the image of the branch set
            RefinementError: bisection depth exhausted
        """
        path = np.atleast_2d(np.asarray(path, dtype=float))
        start = np.asarray(start_lift, dtype=float)
        self._check(path, "lift_path")
        if np.any(norms(path) == 0):
            raise DomainError("path passes through the origin", "lift_path")
        image = self.evaluate(start)
        if np.linalg.norm(image - path[0]) > 1e-9 * max(1.0, np.linalg.norm(path[0])):
            raise DomainError("start_lift is not a preimage of the first path point", "lift_path")

        counter = [0]
        lifted = [start]
        last = len(path) - 1
        for i in range(1, len(path)):
            lifted.append(self._lift_segment(lifted[-1], path[i - 1], path[i], 0, max_depth, i == last, counter))
        logger.debug(f"[Zorich] lifted {len(path)} vertices with {counter[0]} bisections")
        return LiftResult(points=np.array(lifted), refinements=counter[0])

    def as_expr(self) -> MapExpr:
        return MapExpr(
            name="zorich",
            dimension=self.dimension,
            fn=self.evaluate,
            nonsmooth_distance=self.nonsmooth_distance,
        )

    def _lift_point(self, w_prev: np.ndarray, y: np.ndarray, final: bool) -> Optional[np.ndarray]:
        v = self.invert(y)
        if self.dimension > 2 and not final and self.branch_distance(v) < BRANCH_TOLERANCE:
            raise BranchSetError("path runs through the image of the branch set", point=y)
        folded = fold_coordinates(v[:-1])
        pts, dist = self.nearest_orbit_points(w_prev[:-1], folded.xi, int(folded.parity))
        best = pts[0]
        step = math.hypot(dist[0], v[-1] - w_prev[-1])
        clear = len(dist) == 1 or dist[0] <= LIFT_AMBIGUITY_RATIO * dist[1]
        at_branch = self.dimension > 2 and self.branch_distance(v) < BRANCH_TOLERANCE
        if step <= LIFT_MAX_STEP and (clear or (final and at_branch)):
            return np.append(best, v[-1])
        return None

    def _lift_segment(
        self,
        w_prev: np.ndarray,
        a: np.ndarray,
        b: np.ndarray,
        depth: int,
        max_depth: int,
        final: bool,
        counter: List[int],
    ) -> np.ndarray:
        w = self._lift_point(w_prev, b, final)
        if w is not None:
            return w
        if depth >= max_depth:
            raise RefinementError("step too large to disambiguate the branch", depth=depth)
        mid = 0.5 * (a + b)
        if np.linalg.norm(mid) <= 1e-12 * max(np.linalg.norm(a), np.linalg.norm(b)):
            raise DomainError("path segment passes through the origin", "lift_path")
        counter[0] += 1
        w_mid = self._lift_segment(w_prev, a, mid, depth + 1, max_depth, False, counter)
        return self._lift_segment(w_mid, mid, b, depth + 1, max_depth, final, counter)


class PowerMap:
    """
    Power-type map P = Z o A o Z^-1 of degree d^(n-1).

    A(x) = d (x - c) + c. The centre c is the origin, except for even d with
    n >= 3 where it is the cell edge (1, ..., 1, 0); dilating about an edge
    keeps the Zorich group invariant for every d.
    """

    def __init__(self, zorich: ZorichMap, degree: int):
        if int(degree) != degree or degree < 2:
            raise DomainError(f"power map degree must be an integer >= 2, got {degree}", "PowerMap")
        self.zorich = zorich
        self.degree = int(degree)
        self.center = np.zeros(zorich.dimension)
        if zorich.dimension >= 3 and self.degree % 2 == 0:
            self.center[:-1] = 1.0

    @property
    def dimension(self) -> int:
        return self.zorich.dimension

    @property
    def topological_degree(self) -> int:
        return self.degree ** (self.dimension - 1)

    def dilate(self, w: np.ndarray) -> np.ndarray:
        return self.degree * (np.asarray(w, dtype=float) - self.center) + self.center

    def contract(self, w: np.ndarray) -> np.ndarray:
        return (np.asarray(w, dtype=float) - self.center) / self.degree + self.center

    def evaluate(self, x: PointLike) -> np.ndarray:
        """P(x) = Z(A(Z^-1(x))), P(0) = 0; independent of the chosen preimage."""
        batch, single = as_batch(x)
        out = np.zeros_like(batch)
        nz = norms(batch) > 0
        if np.any(nz):
            out[nz] = self.zorich.evaluate(self.dilate(self.zorich.invert(batch[nz])))
        return restore(out, single)

    __call__ = evaluate

    def nonsmooth_distance(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = np.full(x.shape[0], np.inf)
        nz = norms(x) > 0
        if np.any(nz):
            w = self.zorich.invert(x[nz])
            # loci are measured in the cell chart; |x| converts back to the range
            out[nz] = norms(x[nz]) * np.minimum(
                self.zorich.nonsmooth_distance(w),
                self.zorich.nonsmooth_distance(self.dilate(w)) / self.degree,
            )
        return out

    def as_expr(self) -> MapExpr:
        return MapExpr(
            name=f"power(d={self.degree})",
            dimension=self.dimension,
            fn=self.evaluate,
            kind=MapKind.POLYNOMIAL,
            claimed_degree=self.topological_degree,
            nonsmooth_distance=self.nonsmooth_distance,
        )

    def preimages(self, y: PointLike) -> PreimageResult:
        """All solutions of P(x) = y: d^(n-1) points for y != 0, the origin for y = 0."""
        point = np.asarray(y.as_array() if hasattr(y, "as_array") else y, dtype=float)
        if np.linalg.norm(point) == 0:
            return PreimageResult(points=np.zeros((1, self.dimension)), degenerate=True)
        v = self.zorich.invert(point)
        folded = fold_coordinates(v[:-1])
        per_coord = []
        for i in range(self.dimension - 1):
            per_coord.append([
                (base + ZORICH_PERIOD * k, kind)
                for kind, base in ((0, folded.xi[i]), (1, 2.0 - folded.xi[i]))
                for k in range(self.degree)
            ])
        candidates = []
        both = self.zorich.on_equator(folded.xi)
        for choice in itertools.product(*per_coord):
            types = sum(c[1] for c in choice)
            if not both and types % 2 != int(folded.parity):
                continue
            candidates.append([c[0] for c in choice] + [v[-1]])
        lifted = self.contract(np.array(candidates))
        keys = {}
        refolded = fold_coordinates(lifted[:, :-1])
        for idx in range(lifted.shape[0]):
            key = (tuple(np.round(refolded.xi[idx], 9)), int(refolded.parity[idx]))
            keys.setdefault(key, idx)
        chosen = lifted[sorted(keys.values())]
        return PreimageResult(points=self.zorich.evaluate(chosen))


# =============================================================================
# Convenience functions
# =============================================================================

def zorich_eval(zorich: ZorichMap, x: PointLike) -> np.ndarray:
    return zorich.evaluate(x)


def zorich_fold(zorich: ZorichMap, x_prime: PointLike) -> FoldResult:
    return zorich.fold(x_prime)


def zorich_invert(zorich: ZorichMap, y: PointLike) -> np.ndarray:
    return zorich.invert(y)


def lift_path(zorich: ZorichMap, path: np.ndarray, start_lift: np.ndarray) -> LiftResult:
    return zorich.lift_path(path, start_lift)


def power_eval(power: PowerMap, x: PointLike) -> np.ndarray:
    return power.evaluate(x)


def power_preimages(power: PowerMap, y: PointLike) -> PreimageResult:
    return power.preimages(y)

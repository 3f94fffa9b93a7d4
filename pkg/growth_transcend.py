"""
Transcendental growth machinery and the planar annulus-gluing model.

A growth schedule is an increasing sequence r_1 < r_2 < ... together with
epsilon in (0, 1). It defines

    nu(t)   piecewise linear with nu(r_n) = n (constant outside [r_1, r_N])
    Psi(r)  = exp(integral_1^r nu(t) / t dt)
    E_eps   = union of the open intervals (eps * r_n, r_n)

The annulus gluing D~ is a concrete planar map that is a rigid power map
a_k z^k on the good annuli [r_k, eps * r_{k+1}] and raises the degree by
one across each blend annulus (eps * r_{k+1}, r_{k+1}). Composed with h1 it
gives a transcendental-type map whose maximum modulus set agrees with T
away from the circles over E_eps.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config.constants import DEFAULT_EPSILON, DEFAULT_SCHEDULE_COUNT, MAX_SCHEDULE_COUNT
from core_geom import PointLike, StarSurface, as_batch, norms, radial_star_inverse, radial_star_map, restore
from map_expr import MapExpr, MapKind
from shrink import ShrinkMap
from utils.error_handler import ConfigError, DomainError, ScopeError
from zorich import ZorichMap

logger = logging.getLogger(__name__)


# =============================================================================
# Growth schedule
# =============================================================================

@dataclass(frozen=True)
class GrowthSchedule:
    """
    Nodes (r_n, nu_n) of the degree function and the exceptional width epsilon.

    levels defaults to 1, 2, ..., N. Below r_1 nu equals levels[0]; beyond
    r_N it stays at levels[-1].
    """
    radii: Tuple[float, ...]
    epsilon: float = DEFAULT_EPSILON
    levels: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        levels = tuple(float(v) for v in self.levels) or tuple(float(k) for k in range(1, len(radii) + 1))
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "levels", levels)
        errors = []
        if not radii:
            errors.append("schedule needs at least one radius")
        elif len(radii) > MAX_SCHEDULE_COUNT:
            errors.append(f"schedule has {len(radii)} radii, at most {MAX_SCHEDULE_COUNT} supported")
        if not all(math.isfinite(r) and r > 0 for r in radii):
            errors.append("schedule radii must be finite and positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            errors.append("schedule radii must be strictly increasing")
        if not 0 < self.epsilon < 1:
            errors.append(f"epsilon must lie in (0, 1), got {self.epsilon}")
        elif any(self.epsilon * b <= a for a, b in zip(radii, radii[1:])):
            errors.append("exceptional intervals overlap: need eps * r_(n+1) > r_n")
        if len(levels) != len(radii):
            errors.append("levels and radii differ in length")
        elif any(b < a for a, b in zip(levels, levels[1:])):
            errors.append("levels must be non-decreasing")
        if errors:
            raise ConfigError("; ".join(errors), fields=["map.schedule", "map.epsilon"])

    @classmethod
    def exp_exp(cls, count: int = DEFAULT_SCHEDULE_COUNT, epsilon: float = DEFAULT_EPSILON) -> 'GrowthSchedule':
        """r_n = exp(e^n), n = 1..count."""
        if count < 1:
            raise ConfigError("schedule count must be >= 1", fields=["map.schedule.count"])
        with np.errstate(over="ignore"):
            radii = np.exp(np.exp(np.arange(1, count + 1, dtype=float)))
        return cls(tuple(radii), epsilon)

    @classmethod
    def explicit(cls, radii: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> 'GrowthSchedule':
        return cls(tuple(radii), epsilon)

    @classmethod
    def constant(cls, value: float, radii: Sequence[float] = (2.0, 8.0), epsilon: float = DEFAULT_EPSILON) -> 'GrowthSchedule':
        """Schedule with nu identically equal to value."""
        return cls(tuple(radii), epsilon, levels=tuple(value for _ in radii))

    @property
    def count(self) -> int:
        return len(self.radii)

    # -------------------------------------------------------------------------
    # nu and Psi
    # -------------------------------------------------------------------------

    def nu(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(arr <= 0):
            raise DomainError("nu is defined for t > 0", "nu")
        out = np.interp(arr, self.radii, self.levels)
        return float(out) if out.ndim == 0 else out

    def _segment_integral(self, lo: float, hi: float) -> float:
        """Integral of nu(t) / t over [lo, hi], exact per linear piece."""
        if hi <= lo:
            return 0.0
        nodes = np.asarray(self.radii)
        cuts = [lo] + [float(r) for r in nodes if lo < r < hi] + [hi]
        total = 0.0
        for a, b in zip(cuts, cuts[1:]):
            mid = 0.5 * (a + b)
            j = int(np.searchsorted(nodes, mid, side="right"))
            if j == 0:
                total += self.levels[0] * math.log(b / a)
            elif j == len(nodes):
                total += self.levels[-1] * math.log(b / a)
            else:
                slope = (self.levels[j] - self.levels[j - 1]) / (nodes[j] - nodes[j - 1])
                intercept = self.levels[j - 1] - slope * nodes[j - 1]
                total += slope * (b - a) + intercept * math.log(b / a)
        return total

    def log_psi(self, r: float) -> float:
        """log Psi(r)."""
        if r < 1:
            raise DomainError(f"Psi is defined for r >= 1, got {r}", "psi")
        return self._segment_integral(1.0, float(r))

    def psi(self, r: float) -> float:
        value = self.log_psi(r)
        return math.exp(value) if value < 709.0 else math.inf

    # -------------------------------------------------------------------------
    # Exceptional set
    # -------------------------------------------------------------------------

    def exceptional_intervals(self, upper: Optional[float] = None) -> List[Tuple[float, float]]:
        out = []
        for r in self.radii:
            lo = self.epsilon * r
            if upper is not None and lo >= upper:
                break
            out.append((lo, r))
        return out

    def in_exceptional(self, r):
        """True iff r lies in one of the open intervals (eps * r_n, r_n)."""
        arr = np.asarray(r, dtype=float)
        hit = np.zeros(arr.shape, dtype=bool)
        for lo, hi in self.exceptional_intervals():
            hit |= (arr > lo) & (arr < hi)
        return bool(hit) if hit.ndim == 0 else hit

    def in_exceptional_shell(self, x: PointLike):
        """Membership of points in S_eps, the union of spheres over E_eps."""
        batch, single = as_batch(x)
        hit = self.in_exceptional(norms(batch))
        return bool(hit[0]) if single else hit

    def exceptional_density(self, upper: float, logarithmic: bool = False) -> float:
        """
        Share of [0, R] (or of [1, R] in the measure dt / t) covered by E_eps.
        """
        if upper <= 0 or (logarithmic and upper <= 1):
            raise DomainError("density needs R > 0 (R > 1 for the logarithmic one)", "exceptional_density")
        covered = 0.0
        for lo, hi in self.exceptional_intervals(upper):
            hi = min(hi, upper)
            if logarithmic:
                lo = max(lo, 1.0)
                if hi > lo:
                    covered += math.log(hi / lo)
            else:
                covered += hi - lo
        return covered / (math.log(upper) if logarithmic else upper)

    def to_dict(self) -> dict:
        return {
            "radii": list(self.radii),
            "epsilon": self.epsilon,
            "levels": list(self.levels),
        }


# =============================================================================
# Annulus gluing
# =============================================================================

def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


class AnnulusGluing:
    """
    Planar transcendental-type model built on a growth schedule.

    Good annulus k carries a_k z^k with a_1 = 1 and a_{k+1} = a_k / r_{k+1};
    the degree-1 region is [0, eps * r_2]. The blend annulus
    (eps * r_{k+1}, r_{k+1}) carries a_k z^k ((1 - t) + t z / r_{k+1}) with
    t a smoothstep in log r. Moduli are assembled in log form so that
    large radii do not overflow before the final exponential.
    """

    def __init__(self, schedule: GrowthSchedule):
        if schedule.count < 2:
            raise ConfigError("annulus gluing needs at least two schedule radii", fields=["map.schedule"])
        self.schedule = schedule
        radii = np.asarray(schedule.radii)
        self._outer = radii[1:]
        self._log_coefficients = np.concatenate([[0.0], -np.cumsum(np.log(self._outer))])
        self._log_width = math.log(1.0 / schedule.epsilon)

    def __repr__(self) -> str:
        return f"AnnulusGluing(radii={len(self.schedule.radii)}, eps={self.schedule.epsilon})"

    @property
    def dimension(self) -> int:
        return 2

    def _locate(self, r: np.ndarray):
        """Degree k on the inner side and blend parameter t (0 on good annuli)."""
        k = 1 + np.searchsorted(self._outer, r, side="right")
        t = np.zeros_like(r)
        blend = k <= len(self._outer)
        outer = np.where(blend, self._outer[np.minimum(k, len(self._outer)) - 1], np.inf)
        inside = blend & (r > self.schedule.epsilon * outer)
        u = np.log(r[inside] / (self.schedule.epsilon * outer[inside])) / self._log_width
        t[inside] = smoothstep(u)
        return k, t, outer, inside

    def degree_at(self, r: float) -> int:
        """Power of the good annulus containing r; DomainError inside a blend annulus."""
        k, _, _, inside = self._locate(np.array([float(r)]))
        if inside[0]:
            raise DomainError(f"r = {r} lies in a blend annulus", "degree_at")
        return int(k[0])

    def evaluate(self, z: PointLike, log_scale: float = 0.0) -> np.ndarray:
        """D~(z), divided by exp(log_scale) before leaving log form."""
        batch, single = as_batch(z)
        if batch.shape[1] != 2:
            raise ScopeError("the annulus gluing is a planar model", "dtilde_eval")
        r = norms(batch)
        out = np.zeros_like(batch)
        nz = r > 0
        if np.any(nz):
            rr = r[nz]
            theta = np.arctan2(batch[nz, 1], batch[nz, 0])
            k, t, outer, inside = self._locate(rr)
            log_mod = self._log_coefficients[k - 1] + k * np.log(rr) - log_scale
            angle = k * theta
            if np.any(inside):
                w = (1.0 - t[inside]) + t[inside] * (rr[inside] / outer[inside]) * np.exp(1j * theta[inside])
                with np.errstate(divide="ignore"):
                    log_mod[inside] += np.log(np.abs(w))
                angle[inside] += np.angle(w)
            with np.errstate(over="ignore"):
                mod = np.exp(log_mod)
            out[nz] = np.column_stack([mod * np.cos(angle), mod * np.sin(angle)])
        return restore(out, single)

    __call__ = evaluate

    def log_max_modulus(self, r):
        """log M(r, D~); the maximum is attained on the positive real axis."""
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(arr <= 0):
            raise DomainError("max modulus in log form needs r > 0", "log_max_modulus")
        k, t, outer, inside = self._locate(arr)
        out = self._log_coefficients[k - 1] + k * np.log(arr)
        out[inside] += np.log((1.0 - t[inside]) + t[inside] * arr[inside] / outer[inside])
        return float(out[0]) if np.ndim(r) == 0 else out

    def max_modulus_exact(self, r):
        with np.errstate(over="ignore"):
            return np.exp(self.log_max_modulus(r))

    def blend_zero_radius(self, index: int) -> float:
        """
        Radius of the zero of the blend factor in blend annulus index
        (1-based, between degrees index and index + 1): (1 - t) R = t r.
        """
        if not 1 <= index <= len(self._outer):
            raise DomainError(f"blend annulus index {index} out of range", "blend_zero_radius")
        outer = float(self._outer[index - 1])
        lo = self.schedule.epsilon * outer

        def gap(r: float) -> float:
            t = float(smoothstep(math.log(r / lo) / self._log_width))
            return (1.0 - t) * outer - t * r

        return brentq(gap, lo, outer, xtol=1e-14 * outer, rtol=1e-15)

    def circle_degree_expected(self, r: float) -> int:
        """Winding number of D~ on S(r): k on good annuli, k + 1 past the blend zero."""
        k, _, _, inside = self._locate(np.array([float(r)]))
        k = int(k[0])
        if inside[0] and r > self.blend_zero_radius(k):
            return k + 1
        return k

    def as_expr(self) -> MapExpr:
        return MapExpr(
            name="dtilde",
            dimension=2,
            fn=self.evaluate,
            kind=MapKind.TRANSCENDENTAL,
        )


def dtilde_eval(gluing: AnnulusGluing, z: PointLike) -> np.ndarray:
    return gluing.evaluate(z)


# =============================================================================
# Conjugation and composite
# =============================================================================

def smooth_conjugate(inner: MapExpr, surf_in: StarSurface, surf_out: StarSurface) -> MapExpr:
    """alpha_out^-1 o map o alpha_in for the radial star maps of two surfaces."""
    if not surf_in.dimension == surf_out.dimension == inner.dimension:
        raise DomainError("surface and map dimensions differ", "smooth_conjugate")
    fn = inner.fn

    def conjugated(x: np.ndarray) -> np.ndarray:
        return radial_star_inverse(surf_out, fn(radial_star_map(surf_in, x)))

    return MapExpr(
        name=f"conj({inner.name})",
        dimension=inner.dimension,
        fn=conjugated,
        kind=inner.kind,
        claimed_degree=inner.claimed_degree,
    )


def transcendental_composite(gluing: AnnulusGluing, shrink: ShrinkMap, zorich: ZorichMap) -> MapExpr:
    """h = D~ o h1 for planar targets."""
    if zorich.dimension != 2 or shrink.dimension != 2:
        raise ScopeError(
            "transcendental composites are modelled in the plane only "
            "(annulus gluing replaces the higher-dimensional construction)",
            "transcendental_composite",
        )
    composite = gluing.as_expr().compose(shrink.h1_expr(zorich), name="dtilde o h1")
    logger.info(f"[Transcend] composite built on {gluing!r}")
    return composite

"""Constructive Denjoy models: minimal Cantor circle systems over a rotation.

A model is built from a rotation number (continued fraction), a list of
holes (orbits of gaps with prescribed projections and lengths) and the mass
left to the Cantor set.  Everything is exact rational arithmetic: gap
positions live on the rotation orbit of each hole projection, the staircase
H accumulates gap lengths, and the semi-conjugacy h collapses each gap to
its orbit point.  Exactness is what lets the conjugacy identity
h(f(x)) = h(x) + alpha hold to machine zero instead of drifting.

Truncation: each hole keeps the gaps |k| <= K_gap and the residual tail mass
is redistributed proportionally into the retained gaps, so retained masses
plus cantor_mass sum to 1 exactly.  On a full-gap-measure model (cantor_mass
0) the closures of the retained gaps tile the circle; iterating a gap past
the truncation window collapses it to a point, which keeps the wandering and
order-preservation properties intact.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arithmetic import Angle, ContinuedFraction, as_fraction, frac
from .errors import InvalidHolesError, InvalidInputError, InvalidMassError

ORBIT_DISTINCTNESS_BOUND = 10**4


class HoleSpec:
    """One orbit of gaps: projection beta plus gap lengths ell_k.

    Lengths are either explicit (map k -> length) or geometric
    C * Delta**|k| for |k| <= K_gap.  With the hyperbolic flag set, explicit
    lengths must respect the geometric envelope.
    """

    def __init__(
        self,
        beta: Angle,
        C: Angle = Fraction(1),
        Delta: Angle = Fraction(1, 2),
        K_gap: int = 200,
        lengths: dict | None = None,
        hyperbolic: bool = True,
    ):
        self.beta = frac(as_fraction(beta))
        self.C = as_fraction(C)
        self.Delta = as_fraction(Delta)
        self.K_gap = int(K_gap)
        self.hyperbolic = bool(hyperbolic)
        if not 0 < self.Delta < 1:
            raise InvalidInputError(f"Delta must lie in (0,1), got {Delta}")
        if self.C <= 0:
            raise InvalidInputError("C must be positive")
        if self.K_gap < 0:
            raise InvalidInputError("K_gap must be >= 0")
        if lengths is not None:
            self.lengths = {int(k): as_fraction(v) for k, v in lengths.items()}
            if any(v <= 0 for v in self.lengths.values()):
                raise InvalidInputError("gap lengths must be positive")
            if self.hyperbolic:
                for k, v in self.lengths.items():
                    if v > self.C * self.Delta ** abs(k):
                        raise InvalidInputError(
                            f"length at k={k} exceeds the geometric envelope"
                        )
        else:
            self.lengths = None

    def ks(self):
        if self.lengths is not None:
            return sorted(self.lengths)
        return range(-self.K_gap, self.K_gap + 1)

    def raw_length(self, k: int) -> Fraction:
        if self.lengths is not None:
            return self.lengths[k]
        return self.C * self.Delta ** abs(k)

    def to_dict(self) -> dict:
        d = {"beta": str(self.beta), "C": str(self.C), "Delta": str(self.Delta),
             "K_gap": self.K_gap, "hyperbolic": self.hyperbolic}
        if self.lengths is not None:
            d["lengths"] = {str(k): str(v) for k, v in self.lengths.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HoleSpec":
        lengths = d.get("lengths")
        if lengths is not None:
            lengths = {int(k): Fraction(v) for k, v in lengths.items()}
        return cls(
            Fraction(d["beta"]),
            C=Fraction(str(d.get("C", 1))),
            Delta=Fraction(str(d.get("Delta", "1/2"))),
            K_gap=d.get("K_gap", 200),
            lengths=lengths,
            hyperbolic=d.get("hyperbolic", True),
        )


CANTOR = "cantor"
GAP = "gap"


@dataclass(frozen=True)
class CantorPoint:
    """Point on the model circle with its staircase classification.

    ``theta``, when set, records which rotation coordinate the point
    represents.  A finite truncation collapses the infinitely many Cantor
    points between retained gaps onto shared endpoints, so the coordinate
    alone cannot distinguish them; points produced by the model itself keep
    the tag and the semi-conjugacy stays exact through it.
    """

    x: Fraction
    kind: str
    hole: int | None = None
    k: int | None = None
    rel: Fraction | None = None
    theta: Fraction | None = None


@dataclass(frozen=True)
class Gap:
    hole: int
    k: int
    t: Fraction        # orbit position {beta_j + k*alpha}
    left: Fraction
    right: Fraction
    length: Fraction


def _same_orbit_index(diff: Fraction, alpha: Fraction, bound: int) -> int | None:
    """Smallest |k| <= bound with diff - k*alpha integer, or None.

    Solved exactly by one modular inversion on the common denominator; the
    candidate k is unique modulo den/gcd which vastly exceeds the bound.
    """
    den = math.lcm(diff.denominator, alpha.denominator)
    d = diff.numerator * (den // diff.denominator) % den
    p = alpha.numerator * (den // alpha.denominator) % den
    g = math.gcd(p, den)
    if d % g != 0:
        return None
    m = den // g
    k0 = (d // g) * pow(p // g, -1, m) % m
    for k in (k0, k0 - m):
        if abs(k) <= bound:
            return k
    return None


class DenjoyModel:
    """Cantor circle system with prescribed holes, semi-conjugate to R_alpha."""

    def __init__(
        self,
        cf: ContinuedFraction,
        holes: Sequence[HoleSpec],
        cantor_mass: Angle = Fraction(0),
        orbit_check_bound: int = ORBIT_DISTINCTNESS_BOUND,
    ):
        self.cf = cf
        self.holes = list(holes)
        self.cantor_mass = as_fraction(cantor_mass)
        if not 0 <= self.cantor_mass <= 1:
            raise InvalidMassError(f"cantor_mass must lie in [0,1], got {cantor_mass}")
        gap_mass = 1 - self.cantor_mass
        if not self.holes and gap_mass != 0:
            raise InvalidMassError("no holes: cantor_mass must be 1")
        if self.holes and gap_mass == 0:
            raise InvalidMassError("holes present but no gap mass to distribute")
        alpha = cf.alpha

        for i in range(len(self.holes)):
            for j in range(i + 1, len(self.holes)):
                diff = frac(self.holes[i].beta - self.holes[j].beta)
                k = _same_orbit_index(diff, alpha, orbit_check_bound)
                if k is not None:
                    raise InvalidHolesError(
                        f"holes {i} and {j} lie on one orbit (beta_i - beta_j = "
                        f"{k}*alpha mod 1)"
                    )

        raw_total = Fraction(0)
        entries = []
        for j, hole in enumerate(self.holes):
            for k in hole.ks():
                cf.require_depth_for(k)
                raw = hole.raw_length(k)
                raw_total += raw
                entries.append((j, k, frac(hole.beta + k * alpha), raw))
        if self.holes:
            scale = gap_mass / raw_total
        self.total_gap_mass = gap_mass

        entries.sort(key=lambda e: e[2])
        ts = [e[2] for e in entries]
        if any(ts[i] == ts[i + 1] for i in range(len(ts) - 1)):
            raise InvalidHolesError("two gaps share an orbit position")

        slope = self.cantor_mass  # 1 - total gap mass
        gaps = []
        prefix = Fraction(0)
        self._prefix = [Fraction(0)]
        for (j, k, t, raw) in entries:
            length = raw * scale
            left = slope * t + prefix
            prefix += length
            gaps.append(Gap(hole=j, k=k, t=t, left=left, right=left + length,
                            length=length))
            self._prefix.append(prefix)
        self.gaps = gaps
        self._ts = ts
        self._lefts = [g.left for g in gaps]
        self._rights = [g.right for g in gaps]
        self._by_orbit = {(g.hole, g.k): i for i, g in enumerate(gaps)}
        # float tables for fast approximate evaluation (quadrature, plots)
        self._ts_f = np.array([float(t) for t in ts])
        self._prefix_f = np.array([float(p) for p in self._prefix])

    @property
    def alpha(self) -> Fraction:
        return self.cf.alpha

    def gap(self, hole: int, k: int) -> Gap:
        return self.gaps[self._by_orbit[(hole, k)]]

    def staircase(self, theta: Angle) -> Fraction:
        """H(theta) = cantor_mass*theta + sum of gap lengths at positions <= theta."""
        t = frac(as_fraction(theta))
        i = bisect_right(self._ts, t)
        return self.cantor_mass * t + self._prefix[i]

    def staircase_float(self, theta: np.ndarray) -> np.ndarray:
        """Vectorized float64 staircase for quadrature and export."""
        t = np.asarray(theta, dtype=float) % 1.0
        idx = np.searchsorted(self._ts_f, t, side="right")
        return float(self.cantor_mass) * t + self._prefix_f[idx]

    def classify(self, x: Angle | CantorPoint) -> CantorPoint:
        """Attach the staircase classification to a model-circle point."""
        if isinstance(x, CantorPoint):
            return x
        v = frac(as_fraction(x))
        i = bisect_left(self._rights, v)
        if i < len(self.gaps) and self._lefts[i] <= v:
            g = self.gaps[i]
            return CantorPoint(v, GAP, hole=g.hole, k=g.k,
                               rel=(v - g.left) / g.length)
        return CantorPoint(v, CANTOR)

    def h(self, x: Angle | CantorPoint) -> Fraction:
        """Semi-conjugacy to the rotation: collapses gap (j,k) to {beta_j + k*alpha}."""
        p = self.classify(x)
        if p.theta is not None:
            return p.theta
        if p.kind == GAP:
            return self.gap(p.hole, p.k).t
        if self.cantor_mass == 0:
            raise InvalidInputError(
                "point off the gap closure in a full-gap-measure model"
            )
        i = bisect_left(self._rights, p.x)
        return (p.x - self._prefix[i]) / self.cantor_mass

    def h_inv(self, theta: Angle) -> CantorPoint:
        """Right-continuous section of h; orbit positions map to right gap endpoints."""
        t = frac(as_fraction(theta))
        i = bisect_left(self._ts, t)
        if i < len(self._ts) and self._ts[i] == t:
            g = self.gaps[i]
            return CantorPoint(frac(g.right), GAP, hole=g.hole, k=g.k,
                               rel=Fraction(1))
        # off the orbit the image is a genuine Cantor point of the infinite
        # model; its truncated coordinate may coincide with a retained gap
        # endpoint, so keep the rotation coordinate on the point
        p = self.classify(self.staircase(t))
        return CantorPoint(p.x, p.kind, hole=p.hole, k=p.k, rel=p.rel, theta=t)

    def map(self, x: Angle | CantorPoint) -> CantorPoint:
        """The induced circle map f: h(f(x)) = h(x) + alpha.

        Gaps map affinely onto the next gap of their orbit; past the
        truncation window the image is the collapsed point at the image
        orbit position.
        """
        p = self.classify(x)
        if p.theta is not None:
            return self.h_inv(frac(p.theta + self.alpha))
        if p.kind == GAP:
            succ = self._by_orbit.get((p.hole, p.k + 1))
            if succ is not None:
                g = self.gaps[succ]
                return CantorPoint(frac(g.left + p.rel * g.length), GAP,
                                   hole=g.hole, k=g.k, rel=p.rel)
            return self.h_inv(frac(self.gap(p.hole, p.k).t + self.alpha))
        return self.h_inv(frac(self.h(p) + self.alpha))

    def map_inverse(self, x: Angle | CantorPoint) -> CantorPoint:
        """Inverse of the induced map: gaps shift to the previous orbit index."""
        p = self.classify(x)
        if p.theta is not None:
            return self.h_inv(frac(p.theta - self.alpha))
        if p.kind == GAP:
            pred = self._by_orbit.get((p.hole, p.k - 1))
            if pred is not None:
                g = self.gaps[pred]
                return CantorPoint(frac(g.left + p.rel * g.length), GAP,
                                   hole=g.hole, k=g.k, rel=p.rel)
            return self.h_inv(frac(self.gap(p.hole, p.k).t - self.alpha))
        return self.h_inv(frac(self.h(p) - self.alpha))

    def map_iter(self, x: Angle | CantorPoint, m: int) -> CantorPoint:
        p = self.classify(x)
        step = self.map if m >= 0 else self.map_inverse
        for _ in range(abs(m)):
            p = step(p)
        return p

    def to_json(self) -> str:
        return json.dumps({
            "cf": {"partial_quotients": list(self.cf.partial_quotients),
                   "depth": self.cf.depth},
            "holes": [h.to_dict() for h in self.holes],
            "cantor_mass": str(self.cantor_mass),
        })

    @classmethod
    def from_json(cls, text: str) -> "DenjoyModel":
        spec = json.loads(text)
        cf = ContinuedFraction(spec["cf"]["partial_quotients"])
        holes = [HoleSpec.from_dict(h) for h in spec["holes"]]
        return cls(cf, holes, Fraction(str(spec.get("cantor_mass", 0))))


def build_denjoy(
    cf: ContinuedFraction,
    holes: Sequence[HoleSpec],
    cantor_mass: Angle = Fraction(0),
) -> DenjoyModel:
    """Build a Denjoy model; validates hole orbits and mass normalization."""
    return DenjoyModel(cf, holes, cantor_mass)


def semiconj_h(model: DenjoyModel, x: Angle | CantorPoint) -> Fraction:
    return model.h(x)


def semiconj_h_inv(model: DenjoyModel, theta: Angle) -> CantorPoint:
    return model.h_inv(theta)


def denjoy_map(model: DenjoyModel, x: Angle | CantorPoint) -> CantorPoint:
    return model.map(x)


def invariant_measure_cdf(model: DenjoyModel, x: Angle | CantorPoint) -> float:
    """Cumulative mass of the unique invariant measure up to x.

    The invariant measure is the pullback of Lebesgue under h, so the cdf is
    h itself; gaps carry zero mass.
    """
    return float(model.h(x))


def integrate_invariant(model: DenjoyModel, psi: Callable, n: int = 4096) -> float:
    """Midpoint quadrature of psi against the invariant measure.

    Computed in rotation coordinates: integral of psi(h_inv(theta)) d theta.
    """
    theta = (np.arange(n) + 0.5) / n
    x = model.staircase_float(theta)
    return float(np.mean([psi(v) for v in x]))


def integrate_invariant_exact_steps(model: DenjoyModel, psi: Callable) -> float:
    """Exact step quadrature of psi d(mu) for full-gap-measure models.

    With cantor_mass 0 the section h_inv is piecewise constant between orbit
    positions, so the integral is a finite sum of psi values times interval
    widths.
    """
    if model.cantor_mass != 0:
        raise InvalidInputError("exact step quadrature requires cantor_mass 0")
    total = 0.0
    ts = model._ts
    n = len(ts)
    for i in range(n):
        width = (ts[i + 1] if i + 1 < n else ts[0] + 1) - ts[i]
        total += psi(float(model.gaps[i].right)) * float(width)
    return total


@dataclass
class GapDecayFit:
    C_est: float
    Delta_est: float
    r_squared: float


def gap_decay_fit(lengths, hole: int = 0) -> GapDecayFit:
    """Least-squares fit of log(length) against |k|: geometric decay rate.

    ``lengths`` is a DenjoyModel (fits the lengths of one hole against |k|),
    a mapping k -> length, or a plain sequence (indexed 0,1,2,...).
    """
    if isinstance(lengths, DenjoyModel):
        pairs = [(abs(g.k), float(g.length)) for g in lengths.gaps if g.hole == hole]
    elif isinstance(lengths, dict):
        pairs = [(abs(int(k)), float(v)) for k, v in lengths.items()]
    else:
        pairs = [(i, float(v)) for i, v in enumerate(lengths)]
    if len(pairs) < 10:
        raise InvalidInputError("need at least 10 lengths to fit")
    if any(v <= 0 for _, v in pairs):
        raise InvalidInputError("lengths must be positive")
    k = np.array([p[0] for p in pairs], dtype=float)
    y = np.log([p[1] for p in pairs])
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2) / ss_tot)
    return GapDecayFit(C_est=float(np.exp(intercept)),
                       Delta_est=float(np.exp(slope)), r_squared=r2)


def staircase_rows(model: DenjoyModel, resolution: int = 1024):
    """(theta, H(theta)) rows for CSV export, including both sides of jumps."""
    thetas = [Fraction(i, resolution) for i in range(resolution)]
    for t in sorted(set(thetas) | set(model._ts)):
        yield float(t), float(model.staircase(t))

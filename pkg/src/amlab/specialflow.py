"""Special flows over circle rotations and Denjoy bases.

A special flow moves vertically with unit speed under a positive ceiling and
jumps (x, ceiling(x)) -> (base_map(x), 0).  Eigenvalues of the flow show up
as non-decaying ergodic averages (1/N)|sum exp(i lam S_m chi)|; weak mixing
shows up as their decay plus Cesaro decay of correlations.  Everything here
evaluates ceiling Birkhoff sums at exact orbit points (step ceilings compare
integer numerators against rational breakpoints), never at float-accumulated
multiples of alpha.

Verdicts are evidence-grade by design: a scan reports magnitudes and
thresholds, not theorems.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .arithmetic import (
    Angle,
    ContinuedFraction,
    RotationOrbit,
    as_fraction,
    frac,
    search_reciprocal_relation,
)
from .cocycle import JumpSequence, bv_from_jumps, phi_values_on_orbit
from .denjoy import CantorPoint, DenjoyModel
from .errors import InvalidInputError

TWO_PI = 2.0 * math.pi

DECAY_EVIDENCE = "decay-evidence"
EIGENVALUE_EVIDENCE = "eigenvalue-evidence"
INCONCLUSIVE = "inconclusive"


class Ceiling:
    """Strictly positive suspension function over the base circle."""

    def value(self, x: Angle) -> float:
        raise NotImplementedError

    def values_on_orbit(self, orbit: RotationOrbit, n0: int, count: int) -> np.ndarray:
        """Ceiling values at orbit points n0..n0+count-1 (float64)."""
        return np.array([self.value(orbit.point(n)) for n in range(n0, n0 + count)],
                        dtype=float)

    def mean(self) -> float:
        raise NotImplementedError

    def min_bound(self) -> float:
        """Certified positive lower bound."""
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class ConstantCeiling(Ceiling):
    def __init__(self, c: float = 1.0):
        if not c > 0:
            raise InvalidInputError("constant ceiling must be positive")
        self.c = c

    def value(self, x):
        return float(self.c)

    def values_on_orbit(self, orbit, n0, count):
        return np.full(count, float(self.c))

    def mean(self):
        return float(self.c)

    def min_bound(self):
        return float(self.c)

    def describe(self):
        return {"kind": "constant", "c": float(self.c)}


class StepCeiling(Ceiling):
    """Right-continuous step function with rational breakpoints.

    Value is values[i] on [breakpoints[i], breakpoints[i+1]) and values[-1]
    on the wrap interval [breakpoints[-1], breakpoints[0] + 1).
    """

    def __init__(self, breakpoints: Sequence[Angle], values: Sequence[float]):
        bps = [frac(as_fraction(b)) for b in breakpoints]
        if sorted(bps) != bps or len(set(bps)) != len(bps):
            raise InvalidInputError("breakpoints must be sorted and distinct")
        if len(bps) != len(values) or not bps:
            raise InvalidInputError("need one value per breakpoint")
        if any(not float(v) > 0 for v in values):
            raise InvalidInputError("step values must be positive")
        self.breakpoints = bps
        self.values = list(values)

    def value(self, x):
        v = frac(as_fraction(x))
        i = bisect_right(self.breakpoints, v) - 1  # -1 wraps to the last plateau
        return float(self.values[i])

    def values_on_orbit(self, orbit, n0, count):
        nums = orbit.numerators(n0, count)
        out = np.full(count, float(self.values[-1]))
        below_prev = None
        # region i is [b_i, b_{i+1}): indicator below(b_{i+1}) & ~below(b_i)
        for i in range(len(self.breakpoints) - 1, -1, -1):
            below_i = orbit.below(nums, self.breakpoints[i])
            if below_prev is None:
                region = ~below_i
            else:
                region = below_prev & ~below_i
            out[region] = float(self.values[i])
            below_prev = below_i
        # anything below b_0 belongs to the wrap plateau (already the default
        # only when values[-1] was prefilled); set it explicitly
        out[below_prev] = float(self.values[-1])
        return out

    def mean(self):
        b = self.breakpoints
        total = 0.0
        for i, v in enumerate(self.values):
            width = (b[i + 1] - b[i]) if i + 1 < len(b) else (b[0] + 1 - b[i])
            total += float(v) * float(width)
        return total

    def min_bound(self):
        return float(min(self.values))

    def two_values(self) -> tuple | None:
        """(low, high) when the step takes exactly two distinct values."""
        vals = sorted(set(float(v) for v in self.values))
        return (vals[0], vals[1]) if len(vals) == 2 else None

    def describe(self):
        return {"kind": "step",
                "breakpoints": [str(b) for b in self.breakpoints],
                "values": [float(v) for v in self.values]}


class JumpBVCeiling(Ceiling):
    """BV ceiling reconstructed from a jump sequence over the orbit of 0.

    Positivity is certified by mean > 2 * sum|sigma_k| (the reconstruction
    deviates from its mean by at most sum|sigma_k|).
    """

    def __init__(self, jumps: JumpSequence, cf: ContinuedFraction):
        self.jumps = jumps
        self.cf = cf
        self._sigma_abs = jumps.sigma().abs_sum()
        if not float(jumps.mean) > 2 * self._sigma_abs:
            raise InvalidInputError(
                f"positivity not certified: mean {float(jumps.mean)} <= "
                f"2*sum|sigma| = {2 * self._sigma_abs}"
            )

    def value(self, x):
        return float(bv_from_jumps(self.jumps, self.cf, x))

    def values_on_orbit(self, orbit, n0, count):
        return phi_values_on_orbit(self.jumps, orbit, n0, count)

    def mean(self):
        return float(self.jumps.mean)

    def min_bound(self):
        return float(self.jumps.mean) - self._sigma_abs

    def describe(self):
        return {"kind": "jump-bv", "mean": float(self.jumps.mean),
                "sigma_abs_sum": self._sigma_abs}


class SampledCeiling(Ceiling):
    """Ceiling interpolated from samples (base point, value) on the circle.

    Float-grade: exactness guarantees do not apply to sampled data.
    """

    def __init__(self, points: Sequence[float], values: Sequence[float],
                 interpolation: str = "linear"):
        pts = np.asarray(points, dtype=float) % 1.0
        vals = np.asarray(values, dtype=float)
        if pts.size != vals.size or pts.size < 2:
            raise InvalidInputError("need matching points/values, at least 2")
        if np.any(vals <= 0):
            raise InvalidInputError("sampled values must be positive")
        if interpolation not in ("linear", "nearest"):
            raise InvalidInputError(f"unknown interpolation {interpolation!r}")
        order = np.argsort(pts)
        self.points = pts[order]
        self.values = vals[order]
        self.interpolation = interpolation

    def _interp(self, x: np.ndarray) -> np.ndarray:
        # periodic extension with one wrapped node on each side
        xp = np.concatenate([[self.points[-1] - 1.0], self.points,
                             [self.points[0] + 1.0]])
        fp = np.concatenate([[self.values[-1]], self.values, [self.values[0]]])
        if self.interpolation == "nearest":
            idx = np.searchsorted(xp, x)
            lo = np.clip(idx - 1, 0, len(xp) - 1)
            hi = np.clip(idx, 0, len(xp) - 1)
            pick_hi = (xp[hi] - x) < (x - xp[lo])
            return np.where(pick_hi, fp[hi], fp[lo])
        return np.interp(x, xp, fp)

    def value(self, x):
        return float(self._interp(np.array([float(frac(as_fraction(x)))]))[0])

    def values_on_orbit(self, orbit, n0, count):
        return self._interp(orbit.floats(n0, count))

    def mean(self):
        # trapezoid over the circle
        xp = np.concatenate([self.points, [self.points[0] + 1.0]])
        fp = np.concatenate([self.values, [self.values[0]]])
        return float(np.trapezoid(fp, xp))

    def min_bound(self):
        return float(self.values.min())

    def describe(self):
        return {"kind": "sampled", "n": int(self.points.size),
                "interpolation": self.interpolation}


def make_step_ceiling(epsilon: float, beta: Angle) -> StepCeiling:
    """The two-value ceiling: 1-eps on [0, beta), 1+eps on [beta, 1)."""
    if not 0 < float(epsilon) < 1:
        raise InvalidInputError(f"epsilon must lie in (0,1), got {epsilon}")
    b = as_fraction(beta)
    if not 0 < b < 1:
        raise InvalidInputError(f"beta must lie in (0,1), got {beta}")
    return StepCeiling([Fraction(0), b], [1 - epsilon, 1 + epsilon])


@dataclass(frozen=True)
class SpecialFlowPoint:
    base: object  # Fraction (rotation base) or CantorPoint (Denjoy base)
    height: float = 0.0


class _RotationBase:
    def __init__(self, cf: ContinuedFraction, x0, ceiling: Ceiling):
        self.orbit = RotationOrbit(cf, as_fraction(x0))
        self.ceiling = ceiling

    def values(self, n0, count):
        return self.ceiling.values_on_orbit(self.orbit, n0, count)

    def point(self, n):
        return self.orbit.point(n)


class _ModelBase:
    def __init__(self, model: DenjoyModel, x0, ceiling: Ceiling):
        self.model = model
        self.ceiling = ceiling
        self.p0 = model.classify(x0) if not isinstance(x0, CantorPoint) else x0
        self._cache = {0: self.p0}
        self._lo = 0
        self._hi = 0

    def _extend(self, n):
        while self._hi < n:
            self._cache[self._hi + 1] = self.model.map(self._cache[self._hi])
            self._hi += 1
        while self._lo > n:
            self._cache[self._lo - 1] = self.model.map_inverse(self._cache[self._lo])
            self._lo -= 1

    def values(self, n0, count):
        self._extend(n0)
        self._extend(n0 + count - 1)
        return np.array([self.ceiling.value(self._cache[n].x)
                         for n in range(n0, n0 + count)])

    def point(self, n):
        self._extend(n)
        return self._cache[n]


def _make_base(base, x0, ceiling):
    if isinstance(base, ContinuedFraction):
        return _RotationBase(base, x0, ceiling)
    if isinstance(base, DenjoyModel):
        return _ModelBase(base, x0, ceiling)
    raise InvalidInputError("base must be a ContinuedFraction or DenjoyModel")


def flow_advance(base, ceiling: Ceiling, p: SpecialFlowPoint, t: float,
                 block: int = 4096) -> SpecialFlowPoint:
    """Advance the special flow by time t (either sign).

    The crossing index is located by monotone search through Birkhoff sums of
    the ceiling along the base orbit; cost is linear in the number of base
    crossings.
    """
    mean_c = ceiling.mean()
    if abs(t) > 1e9 * mean_c:
        raise InvalidInputError(f"|t| <= 1e9 * mean ceiling required, got {t}")
    walker = _make_base(base, p.base, ceiling)
    c0 = float(walker.values(0, 1)[0])
    if not -1e-12 <= p.height < c0 + 1e-12:
        raise InvalidInputError(
            f"height {p.height} outside [0, ceiling(base)={c0})"
        )
    total = p.height + t
    if 0 <= total < c0:
        return SpecialFlowPoint(base=p.base, height=total)
    if total >= 0:
        m, acc = 0, 0.0
        while True:
            chi = walker.values(m, block)
            c = np.cumsum(chi)
            if acc + c[-1] > total:
                j = int(np.searchsorted(c, total - acc, side="right"))
                s = total - acc - (c[j - 1] if j > 0 else 0.0)
                m += j
                break
            acc += c[-1]
            m += block
    else:
        m, acc = 0, 0.0
        while True:
            chi = walker.values(m - block, block)
            rev = np.cumsum(chi[::-1])
            if acc - rev[-1] <= total:
                j = int(np.searchsorted(rev, acc - total, side="left"))
                s = total - (acc - rev[j])
                m = m - j - 1
                break
            acc -= rev[-1]
            m -= block
    chi_m = float(walker.values(m, 1)[0])
    if not -1e-12 <= s < chi_m + 1e-12:
        raise AssertionError(f"height invariant violated: s={s}, ceiling={chi_m}")
    return SpecialFlowPoint(base=walker.point(m), height=max(s, 0.0))


def ceiling_sums(cf: ContinuedFraction, ceiling: Ceiling, x: Angle,
                 N: int) -> np.ndarray:
    """S_m = sum_{i<m} ceiling(x_i) for m = 0..N-1 (S_0 = 0)."""
    orbit = RotationOrbit(cf, x)
    chi = ceiling.values_on_orbit(orbit, 0, N)
    S = np.empty(N)
    S[0] = 0.0
    np.cumsum(chi[:-1], out=S[1:])
    return S


def weyl_sum(cf: ContinuedFraction, ceiling: Ceiling, lam: float, x: Angle,
             N: int) -> float:
    """(1/N)|sum_{m<N} exp(i lam S_m)|: near 1 at an eigenvalue, decaying
    under weak mixing."""
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    S = ceiling_sums(cf, ceiling, x, N)
    return float(abs(np.exp(1j * lam * S).sum()) / N)


def default_base_points(count: int = 5, seed: int = 7) -> list:
    """Deterministic base points for scans (exact binary rationals)."""
    rng = np.random.default_rng(seed)
    return [as_fraction(float(v)) for v in rng.random(count)]


#: irrational sweep offset (1/golden^2): keeps every sweep point off exact
#: rational multiples of pi and of the grid spacing, for any grid size
SWEEP_OFFSET = (3.0 - math.sqrt(5.0)) / 2.0


def default_lambda_grid(ceiling: Ceiling | None = None, count: int = 400,
                        lam_max: float = 8 * math.pi,
                        suspect_count: int = 20) -> np.ndarray:
    """Offset uniform sweep on (0, lam_max] plus ceiling-specific suspects.

    The sweep points (k - offset) * lam_max / count carry an irrational
    offset so the generic sample never lands exactly on the measure-zero
    pi-lattice, where step-ceiling Weyl sums are known to decay only
    logarithmically even though the step lemma excludes those frequencies
    as eigenvalues (the resonance is narrower than 1e-3, far below the grid
    spacing).  The analytically suspect frequencies are appended
    explicitly: l*pi/eps for a two-value step ceiling (the only candidates
    the exclusion argument leaves open), multiples of 2*pi/mean otherwise
    (the eigenvalues of the constant suspension the ceiling perturbs).
    """
    sweep = (np.arange(1, count + 1) - SWEEP_OFFSET) * (lam_max / count)
    suspects = []
    eps = None
    if isinstance(ceiling, StepCeiling):
        two = ceiling.two_values()
        if two is not None:
            eps = (two[1] - two[0]) / 2
    if eps is not None:
        suspects = [l * math.pi / eps for l in range(1, suspect_count + 1)]
    elif ceiling is not None:
        c = ceiling.mean()
        suspects = [TWO_PI * l / c for l in range(1, suspect_count + 1)]
    return np.concatenate([sweep, np.array(suspects)]) if suspects else sweep


@dataclass
class WeylReport:
    lam: float
    magnitudes: list           # max over base points, one per N in the schedule
    magnitudes_min: list       # min over base points
    verdict: str
    monotone: bool

    def to_dict(self):
        return {"lambda": self.lam, "magnitudes": self.magnitudes,
                "magnitudes_min": self.magnitudes_min, "verdict": self.verdict,
                "monotone": self.monotone}


@dataclass
class ScanResult:
    reports: list
    verdict: str
    monotone_fraction: float
    N_schedule: tuple
    base_points: list
    theta_decay: float
    theta_eig: float
    magnitudes: np.ndarray = field(repr=False)  # (n_lambda, n_N, n_x)

    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.reports])

    def evidence(self) -> list:
        return [r.to_dict() for r in self.reports if r.verdict != DECAY_EVIDENCE]

    def csv_rows(self):
        for i, r in enumerate(self.reports):
            for j, n in enumerate(self.N_schedule):
                for k in range(len(self.base_points)):
                    yield r.lam, n, k, self.magnitudes[i, j, k]

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "thresholds": {"decay": self.theta_decay, "eigenvalue": self.theta_eig},
            "monotone_fraction": self.monotone_fraction,
            "N_schedule": list(self.N_schedule),
            "evidence": self.evidence(),
        }


def eigenvalue_scan(
    cf: ContinuedFraction,
    ceiling: Ceiling,
    lambda_grid: np.ndarray | None = None,
    N_schedule: Sequence[int] = (10**3, 10**4, 10**5),
    x_samples: int | Sequence[Angle] = 5,
    theta_decay: float = 0.2,
    theta_eig: float = 0.6,
    seed: int = 7,
    chunk: int = 16,
) -> ScanResult:
    """Weyl-magnitude scan over a frequency grid at increasing orbit lengths.

    decay-evidence: every magnitude at the largest N falls below theta_decay
    and the per-frequency maxima decrease along the schedule for >= 95% of
    the grid.  eigenvalue-evidence: some frequency stays above theta_eig for
    every N and every sampled base point.
    """
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(ceiling)
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size == 0 or np.any(lams == 0.0):
        raise InvalidInputError("lambda grid must be non-empty and exclude 0")
    Ns = tuple(int(n) for n in N_schedule)
    if list(Ns) != sorted(Ns) or Ns[0] < 1:
        raise InvalidInputError("N_schedule must be increasing positive ints")
    if isinstance(x_samples, int):
        points = default_base_points(x_samples, seed=seed)
    else:
        points = [as_fraction(x) for x in x_samples]
    mags = np.zeros((lams.size, len(Ns), len(points)))
    for xi, x0 in enumerate(points):
        S = ceiling_sums(cf, ceiling, x0, Ns[-1])
        for c0 in range(0, lams.size, chunk):
            lam = lams[c0:c0 + chunk]
            Z = np.exp(1j * lam[:, None] * S[None, :])
            acc = np.zeros(lam.size, dtype=complex)
            prev = 0
            for j, n in enumerate(Ns):
                acc = acc + Z[:, prev:n].sum(axis=1)
                prev = n
                mags[c0:c0 + chunk, j, xi] = np.abs(acc) / n
    max_x = mags.max(axis=2)   # (n_lambda, n_N)
    min_x = mags.min(axis=2)
    reports = []
    monotone_flags = np.all(np.diff(max_x, axis=1) <= 0, axis=1)
    for i, lam in enumerate(lams):
        stable_min = float(min_x[i].min())
        if stable_min >= theta_eig:
            v = EIGENVALUE_EVIDENCE
        elif max_x[i, -1] < theta_decay:
            v = DECAY_EVIDENCE
        else:
            v = INCONCLUSIVE
        reports.append(WeylReport(
            lam=float(lam),
            magnitudes=[float(m) for m in max_x[i]],
            magnitudes_min=[float(m) for m in min_x[i]],
            verdict=v,
            monotone=bool(monotone_flags[i]),
        ))
    monotone_fraction = float(np.mean(monotone_flags))
    if any(r.verdict == EIGENVALUE_EVIDENCE for r in reports):
        overall = EIGENVALUE_EVIDENCE
    elif (all(r.verdict == DECAY_EVIDENCE for r in reports)
          and monotone_fraction >= 0.95):
        overall = DECAY_EVIDENCE
    else:
        overall = INCONCLUSIVE
    return ScanResult(reports=reports, verdict=overall,
                      monotone_fraction=monotone_fraction, N_schedule=Ns,
                      base_points=points, theta_decay=theta_decay,
                      theta_eig=theta_eig, magnitudes=mags)


EXCLUDED_BY_STEP_LEMMA = "excluded-by-step-lemma"
REQUIRES_RELATION = "requires-relation"
NOT_EXCLUDED = "not-excluded"


@dataclass
class ExclusionResult:
    """Arithmetic eigenvalue exclusion for the two-value step ceiling.

    A measurable eigenfunction at lam forces lam*eps = l*pi for an integer l
    (two-value multiplicative equations over an irrational rotation admit no
    solutions otherwise); when lam*eps is an integer multiple of pi, the
    candidate survives only if l + l/eps = k*alpha + 2p holds at integer
    height, which the relation search settles up to its bound.
    """

    status: str
    l: int | None = None
    relation: object = None

    def to_dict(self):
        return {"status": self.status, "l": self.l,
                "relation": self.relation.to_dict() if self.relation else None}


def eigenvalue_exclusion(epsilon: float, cf: ContinuedFraction, lam: float,
                         bound: int = 50,
                         integer_tol: float = 1e-9) -> ExclusionResult:
    if lam == 0.0:
        return ExclusionResult(status=NOT_EXCLUDED, l=0)
    ratio = lam * float(epsilon) / math.pi
    l = round(ratio)
    if abs(ratio - l) > integer_tol or l == 0:
        return ExclusionResult(status=EXCLUDED_BY_STEP_LEMMA)
    rel = _relation_at_height(l, epsilon, cf, bound)
    if rel.found:
        return ExclusionResult(status=NOT_EXCLUDED, l=l, relation=rel)
    return ExclusionResult(status=REQUIRES_RELATION, l=l, relation=rel)


def _relation_at_height(l: int, epsilon, cf: ContinuedFraction, bound: int):
    """Search |k|,|p| <= bound for l + l/eps = k*alpha + 2p at fixed l."""
    from .arithmetic import RELATION_FOUND, NO_RELATION, RelationSearchResult

    eps = as_fraction(epsilon)
    tol = 1e-12 * bound
    target = l + l / float(eps)
    ks = np.arange(-bound, bound + 1)
    vals = target - ks * cf.alpha_float
    ps = np.rint(vals / 2.0)
    resid = np.abs(vals - 2.0 * ps)
    hits = np.nonzero((resid < 10 * tol) & (np.abs(ps) <= bound))[0]
    for idx in hits:
        k = int(ks[idx])
        p = int(ps[idx])
        exact = l + Fraction(l) / eps - k * cf.alpha - 2 * p
        if abs(exact) <= Fraction(tol).limit_denominator(10**18):
            return RelationSearchResult(status=RELATION_FOUND, witness=(l, k, p),
                                        bound=bound, tolerance=tol,
                                        residual=float(exact))
    return RelationSearchResult(status=NO_RELATION, witness=None, bound=bound,
                                tolerance=tol)


# ---------------------------------------------------------------------------
# observables and correlations on the suspended space


def height_phase(freq: float = 1.0) -> Callable:
    """exp(2 pi i freq s): the continuous eigenfunction of a constant suspension."""
    return lambda x, s: np.exp(2j * np.pi * freq * s)


def base_indicator(a: float, b: float) -> Callable:
    """Indicator of a base arc [a, b), constant in the fibre."""
    return lambda x, s: ((x >= a) & (x < b)).astype(float)


def box_indicator(a: float, b: float, s0: float, s1: float) -> Callable:
    """Indicator of a box: base arc [a,b) times height window [s0, s1)."""
    return lambda x, s: (((x >= a) & (x < b)) & ((s >= s0) & (s < s1))).astype(float)


def _sample_orbit_series(cf, ceiling, x0, n_samples, dt):
    """Uniform-time samples (x_j, s_j) along one flow orbit, j < n_samples."""
    need_time = n_samples * dt
    m_max = int(need_time / ceiling.min_bound()) + 8
    orbit = RotationOrbit(cf, x0)
    chi = ceiling.values_on_orbit(orbit, 0, m_max)
    S = np.concatenate([[0.0], np.cumsum(chi)])
    while S[-1] <= need_time:
        extra = ceiling.values_on_orbit(orbit, len(chi), m_max // 2)
        chi = np.concatenate([chi, extra])
        S = np.concatenate([[0.0], np.cumsum(chi)])
    taus = np.arange(n_samples) * dt
    idx = np.searchsorted(S, taus, side="right") - 1
    heights = taus - S[idx]
    xs = orbit.floats(0, int(idx.max()) + 1)[idx]
    return xs, heights


def correlation(cf: ContinuedFraction, ceiling: Ceiling, F: Callable, G: Callable,
                t: float, T_avg: float, sample_dt: float | None = None,
                x0: Angle = Fraction(1, 7)):
    """Single-orbit estimate of <F o T^t, G> - <F><G> under the normalized
    invariant measure (unique ergodicity makes one orbit enough).

    Returns a float when both observables are real-valued, complex otherwise.
    """
    mean_c = ceiling.mean()
    if T_avg < 10**3 * mean_c:
        raise InvalidInputError(f"T_avg >= 1e3 * mean ceiling required, got {T_avg}")
    if sample_dt is None:
        sample_dt = mean_c / 16
    k = int(round(t / sample_dt))
    J = int(T_avg / sample_dt)
    xs, ss = _sample_orbit_series(cf, ceiling, x0, J + k + 1, sample_dt)
    Fv = np.asarray(F(xs, ss))
    Gv = np.asarray(G(xs[:J], ss[:J]))
    est = np.mean(Fv[k:k + J] * np.conj(Gv))
    est -= np.mean(Fv[k:k + J]) * np.conj(np.mean(Gv))
    if not (np.iscomplexobj(Fv) or np.iscomplexobj(Gv)):
        return float(np.real(est))
    return complex(est)


@dataclass
class MixingReport:
    ts: np.ndarray = field(repr=False)
    curves: list = field(repr=False)   # one M(T) array per observable pair
    verdict: str = INCONCLUSIVE
    threshold: float = 0.05

    def csv_rows(self):
        for j, T in enumerate(self.ts):
            yield (T, *[float(c[j]) for c in self.curves])


def cesaro_mixing_test(cf: ContinuedFraction, ceiling: Ceiling,
                       pairs: Sequence[tuple], t_max: float,
                       resolution: int = 50, T_avg: float | None = None,
                       sample_dt: float | None = None, threshold: float = 0.05,
                       x0: Angle = Fraction(1, 7)) -> MixingReport:
    """Cesaro average M(T) = (1/T) integral of |corr(t)|^2 over [0, T].

    weak-mixing-evidence when every pair's curve drops below
    threshold * M(first point) and keeps decreasing; a flat positive curve
    (an eigenfunction pair) reports no-decay.
    """
    if t_max < 10**2:
        raise InvalidInputError("t_max >= 100 required")
    mean_c = ceiling.mean()
    if T_avg is None:
        T_avg = max(10**3 * mean_c, 4 * t_max)
    if sample_dt is None:
        sample_dt = mean_c / 16
    K = int(t_max / sample_dt)
    J = int(T_avg / sample_dt)
    xs, ss = _sample_orbit_series(cf, ceiling, x0, J + K + 1, sample_dt)
    t_points = np.linspace(t_max / resolution, t_max, resolution)
    curves = []
    scales = []
    for F, G in pairs:
        Fv = np.asarray(F(xs, ss), dtype=complex)
        Gv = np.asarray(G(xs[:J], ss[:J]), dtype=complex)
        c = fftconvolve(Fv, np.conj(Gv[::-1]), mode="valid")[: K + 1] / J
        corr = c - Fv.mean() * np.conj(Gv.mean())
        sq = np.abs(corr) ** 2
        cum = np.cumsum(sq) / np.arange(1, K + 2)
        idx = np.minimum((t_points / sample_dt).astype(int), K)
        curves.append(cum[idx])
        # the natural squared-correlation scale for the pair
        var_f = float(np.mean(np.abs(Fv - Fv.mean()) ** 2))
        var_g = float(np.mean(np.abs(Gv - Gv.mean()) ** 2))
        scales.append(var_f * var_g)
    decayed, flat = [], []
    for curve, scale in zip(curves, scales):
        final = float(curve[-1])
        mid = float(curve[len(curve) // 2])
        floor = max(threshold * scale, 1e-18)
        decayed.append(final < floor and final <= mid + 1e-18)
        flat.append(final >= 0.5 * scale > 0)
    if all(decayed):
        verdict = "weak-mixing-evidence"
    elif any(flat):
        verdict = "no-decay-evidence"
    else:
        verdict = INCONCLUSIVE
    return MixingReport(ts=t_points, curves=curves, verdict=verdict,
                        threshold=threshold)

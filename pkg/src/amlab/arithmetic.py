"""Exact continued-fraction arithmetic and circle-rotation orbits.

The rotation number alpha is always specified through its partial quotients,
never as a decimal: the relevant arithmetic (best approximations, parity of
denominators, general position of a second point) lives in the integers a_n.
Internally alpha is represented by its deepest convergent p_N/q_N as an exact
``fractions.Fraction``; every operation that needs more precision than the
stored depth can certify raises :class:`InsufficientDepthError` instead of
silently degrading.

Convention used throughout: q_{-1} = q_0 = 1 and q_n = a_n q_{n-1} + q_{n-2},
with p_{-1} = 0, p_0 = 1 under the same recurrence.  The limit of p_n/q_n
then lies in (1/2, 1) and the q_n are exactly the best-approximation
denominators of that limit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .errors import InsufficientDepthError, InvalidInputError

Angle = Union[Fraction, float, int]

#: absolute error guaranteed by orbit_point, per unit of |m|
ORBIT_PRECISION = Fraction(1, 10**15)

MAX_ORBIT_INDEX = 10**9


def frac(x: Angle) -> Angle:
    """Fractional part {x} in [0, 1), right-continuous ({0} = 0).

    Exact for Fraction input, float otherwise.
    """
    if isinstance(x, Fraction):
        return x - (x.numerator // x.denominator)
    if isinstance(x, int):
        return 0
    return x - math.floor(x)


def circle_norm(x: Angle) -> Angle:
    """Distance of x to the nearest integer, in [0, 1/2]."""
    f = frac(x)
    return min(f, 1 - f)


def circle_dist(x: Angle, y: Angle) -> Angle:
    """Circle distance between two angles."""
    return circle_norm(x - y)


def as_fraction(x: Angle) -> Fraction:
    """Coerce an angle to an exact Fraction (floats are binary rationals)."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


#: virtual partial quotients appended to define the working value of alpha;
#: any tail >= 1 stays inside the interval the stored quotients determine,
#: and a tail of 2s keeps ||q_n alpha|| strictly decreasing at every stored
#: index (the bare deepest convergent would tie the last norms when a_N = 1)
VIRTUAL_TAIL = (2, 2)


class ContinuedFraction:
    """An irrational in (1/2, 1) given by positive partial quotients.

    Stores the exact convergents (p_n, q_n) for n = 0..depth.  The working
    value of alpha is the exact rational obtained by extending the stored
    quotients with a short canonical tail: it lies within
    1/(q_N (q_N + q_{N-1})) of every irrational sharing the stored
    quotients, and against it the stored convergents keep all their
    best-approximation properties strictly.
    """

    def __init__(self, partial_quotients: Sequence[int]):
        pq = [int(a) for a in partial_quotients]
        if len(pq) < 1:
            raise InvalidInputError("need at least one partial quotient")
        if any(a < 1 for a in pq):
            raise InvalidInputError(f"partial quotients must be >= 1, got {pq}")
        self.partial_quotients = tuple(pq)
        p = [0, 1]  # p_{-1}, p_0
        q = [1, 1]  # q_{-1}, q_0
        for a in pq:
            p.append(a * p[-1] + p[-2])
            q.append(a * q[-1] + q[-2])
        # drop the n = -1 seed; index i now holds (p_i, q_i)
        self.p = tuple(p[1:])
        self.q = tuple(q[1:])
        for a in VIRTUAL_TAIL:
            p.append(a * p[-1] + p[-2])
            q.append(a * q[-1] + q[-2])
        self._alpha = Fraction(p[-1], q[-1])

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    @property
    def alpha(self) -> Fraction:
        """Working value of alpha (exact rational, virtual-tail extension)."""
        return self._alpha

    @property
    def value_approx(self) -> Fraction:
        """Deepest stored convergent: within 1/(q_N q_{N+1}) of any true limit."""
        return Fraction(self.p[-1], self.q[-1])

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    def convergent(self, n: int) -> Fraction:
        """p_n/q_n for 0 <= n <= depth."""
        return Fraction(self.p[n], self.q[n])

    def norm_q_alpha(self, n: int) -> Fraction:
        """Exact ||q_n * alpha|| = |q_n*alpha - p_n| relative to the working alpha."""
        return abs(self.q[n] * self.alpha - self.p[n])

    def resolution(self) -> int:
        """Lower bound on 1/|alpha_true - alpha| valid for any continuation."""
        return self.q[-1] * (self.q[-1] + self.q[-2]) if self.depth >= 1 else 1

    def max_orbit_index(self) -> int:
        """Largest |m| for which orbit_point can certify its error bound."""
        return int(self.resolution() * ORBIT_PRECISION)

    def require_depth_for(self, m: int) -> None:
        if abs(m) > self.max_orbit_index():
            raise InsufficientDepthError(
                f"depth {self.depth} certifies orbit indices up to "
                f"{self.max_orbit_index()}, requested {m}"
            )

    def to_json(self) -> str:
        return json.dumps(
            {"partial_quotients": list(self.partial_quotients), "depth": self.depth}
        )

    @classmethod
    def from_json(cls, text: str) -> "ContinuedFraction":
        spec = json.loads(text)
        pq = spec["partial_quotients"]
        depth = spec.get("depth", len(pq))
        if depth > len(pq):
            raise InvalidInputError("declared depth exceeds the listed quotients")
        return cls(pq[:depth])

    def __repr__(self) -> str:
        head = ",".join(str(a) for a in self.partial_quotients[:6])
        tail = ",..." if self.depth > 6 else ""
        return f"ContinuedFraction([{head}{tail}], depth={self.depth})"


def build_cf(partial_quotients: Sequence[int]) -> ContinuedFraction:
    """Build a continued fraction from partial quotients (all >= 1)."""
    return ContinuedFraction(partial_quotients)


def golden_cf(depth: int = 60) -> ContinuedFraction:
    """The golden rotation number [1,1,1,...] ~ 0.618034 at the given depth."""
    return ContinuedFraction([1] * depth)


def orbit_point(cf: ContinuedFraction, x0: Angle, m: int) -> Fraction:
    """Exact {x0 + m*alpha}, certified within 1e-15 of any true continuation.

    Raises InsufficientDepthError when the stored depth cannot certify the
    requested iterate, InvalidInputError beyond |m| = 1e9.
    """
    m = int(m)
    if abs(m) > MAX_ORBIT_INDEX:
        raise InvalidInputError(f"|m| <= {MAX_ORBIT_INDEX} required, got {m}")
    x = as_fraction(x0)
    if m == 0:
        return frac(x)
    cf.require_depth_for(m)
    return frac(x + m * cf.alpha)


class RotationOrbit:
    """Batch generator of exact orbit numerators for {x0 + n*alpha}.

    All points share the denominator ``den``; the numerator of point n is
    ``(A0 + n*P) % den``.  Integer arithmetic keeps indicator comparisons
    against rational breakpoints exact, which is what long Birkhoff sums of
    step functions need (float accumulation of alpha drifts past the
    discontinuity after ~1e4 iterates).
    """

    def __init__(self, cf: ContinuedFraction, x0: Angle):
        self.cf = cf
        x = as_fraction(x0)
        alpha = cf.alpha
        den = math.lcm(x.denominator, alpha.denominator)
        self.den = den
        self.a0 = x.numerator * (den // x.denominator) % den
        self.step = alpha.numerator * (den // alpha.denominator) % den

    def numerators(self, n_start: int, count: int) -> list:
        """Numerators of points n_start, ..., n_start+count-1 (exact ints)."""
        self.cf.require_depth_for(n_start)
        self.cf.require_depth_for(n_start + count - 1)
        den = self.den
        a = (self.a0 + n_start * self.step) % den
        step = self.step
        out = [0] * count
        for i in range(count):
            out[i] = a
            a += step
            if a >= den:
                a -= den
        return out

    def floats(self, n_start: int, count: int) -> np.ndarray:
        """Orbit points as float64, each correctly rounded from the exact value."""
        den = self.den
        return np.array([a / den for a in self.numerators(n_start, count)])

    def point(self, n: int) -> Fraction:
        """Exact single orbit point {x0 + n*alpha}."""
        self.cf.require_depth_for(n)
        return Fraction((self.a0 + n * self.step) % self.den, self.den)

    def below(self, numerators: list, beta: Angle) -> np.ndarray:
        """Exact indicator array of {x0 + n*alpha} < beta for rational beta."""
        b = as_fraction(frac(as_fraction(beta)))
        lhs_scale = b.denominator
        rhs = b.numerator * self.den
        return np.array([a * lhs_scale < rhs for a in numerators], dtype=bool)


VERDICT_HOLDS = "evidence-holds"
VERDICT_FAILS = "evidence-fails"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass
class GeneralPositionReport:
    """Finite-depth evidence about ||q_n * beta|| staying away from zero."""

    beta: Angle
    depth: int
    norms: list = field(repr=False)
    alpha_norms: list = field(repr=False)
    q: list = field(repr=False)
    tail_window: int
    tail_min: float
    tail_max: float
    fail_threshold: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "beta": str(self.beta),
            "depth": self.depth,
            "tail_window": self.tail_window,
            "tail_min": self.tail_min,
            "tail_max": self.tail_max,
            "fail_threshold": self.fail_threshold,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_rows(self):
        """Rows (n, q_n, norm_qn_alpha, norm_qn_beta) for export."""
        for n, (qn, na, nb) in enumerate(zip(self.q, self.alpha_norms, self.norms)):
            yield n, qn, na, nb


def general_position(
    cf: ContinuedFraction,
    beta: Angle,
    depth: int | None = None,
    fail_threshold: float = 1e-3,
) -> GeneralPositionReport:
    """Graded evidence for ||q_n*beta|| not tending to 0 along the convergents.

    The limsup is estimated by the maximum over the last third of the
    indices; below ``fail_threshold`` with a non-increasing tail the verdict
    is evidence-fails, otherwise inconclusive.
    """
    if depth is None:
        depth = cf.depth
    if depth > cf.depth:
        raise InvalidInputError(f"depth {depth} exceeds stored depth {cf.depth}")
    b = as_fraction(beta)
    norms = []
    alpha_norms = []
    for n in range(depth + 1):
        norms.append(float(circle_norm(cf.q[n] * b)))
        alpha_norms.append(float(cf.norm_q_alpha(n)))
    window = max(1, (depth + 1) // 3)
    tail = norms[-window:]
    tail_max = max(tail)
    tail_min = min(tail)
    if tail_max > fail_threshold:
        verdict = VERDICT_HOLDS
    elif all(tail[i + 1] <= tail[i] for i in range(len(tail) - 1)):
        verdict = VERDICT_FAILS
    else:
        verdict = VERDICT_INCONCLUSIVE
    return GeneralPositionReport(
        beta=beta,
        depth=depth,
        norms=norms,
        alpha_norms=alpha_norms,
        q=list(cf.q[: depth + 1]),
        tail_window=window,
        tail_min=tail_min,
        tail_max=tail_max,
        fail_threshold=fail_threshold,
        verdict=verdict,
    )


def parity_certificate(cf: ContinuedFraction, depth: int | None = None) -> list:
    """Indices n <= depth with q_n odd; hits every consecutive pair {n, n+1}.

    Consecutive denominators are coprime, so at least one of q_n, q_{n+1} is
    odd: the returned set certifies ||q_n * (1/2)|| = 1/2 along a subsequence
    meeting every pair.  Also asserts the coprimality it relies on.
    """
    if depth is None:
        depth = cf.depth
    if depth < 2:
        raise InvalidInputError("parity certificate needs depth >= 2")
    if depth > cf.depth:
        raise InvalidInputError(f"depth {depth} exceeds stored depth {cf.depth}")
    odd = [n for n in range(depth + 1) if cf.q[n] % 2 == 1]
    for n in range(depth):
        if math.gcd(cf.q[n], cf.q[n + 1]) != 1:
            raise AssertionError(f"consecutive q_{n}, q_{n+1} not coprime")
    odd_set = set(odd)
    for n in range(depth):
        if n not in odd_set and n + 1 not in odd_set:
            raise AssertionError(f"pair {{{n},{n + 1}}} misses the certificate")
    return odd


NO_RELATION = "no-relation-found"
RELATION_FOUND = "relation-found"


@dataclass
class RelationSearchResult:
    """Outcome of the exhaustive search for l + l/eps = k*alpha + 2p."""

    status: str
    witness: tuple | None
    bound: int
    tolerance: float
    residual: float | None = None

    @property
    def found(self) -> bool:
        return self.status == RELATION_FOUND

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "witness": list(self.witness) if self.witness else None,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "residual": self.residual,
        }


def search_reciprocal_relation(
    epsilon: Angle, cf: ContinuedFraction, bound: int
) -> RelationSearchResult:
    """Search |l|,|k|,|p| <= bound for l + l/eps = k*alpha + 2p.

    A hit means 1/eps lands in Q + alpha*Q at the searched height, which
    excludes eps from the step-ceiling weak-mixing construction; absence of a
    relation is only certified up to the bound (logged in the result).
    Candidates from the float scan are confirmed in exact rational
    arithmetic (float inputs are exact binary rationals).
    """
    eps = as_fraction(epsilon)
    if not 0 < eps < 1:
        raise InvalidInputError(f"epsilon must lie in (0,1), got {epsilon}")
    bound = int(bound)
    if bound < 1:
        raise InvalidInputError("bound must be >= 1")
    tol = 1e-12 * bound
    alpha_f = cf.alpha_float
    inv_eps = 1.0 / float(eps)
    ks = np.arange(-bound, bound + 1)
    alpha_exact = cf.alpha
    tol_exact = Fraction(tol).limit_denominator(10**18)
    for l in range(1, bound + 1):
        vals = l + l * inv_eps - ks * alpha_f
        ps = np.rint(vals / 2.0)
        resid = np.abs(vals - 2.0 * ps)
        hits = np.nonzero((resid < 10 * tol) & (np.abs(ps) <= bound))[0]
        for idx in hits:
            k = int(ks[idx])
            p = int(ps[idx])
            exact = l + Fraction(l, 1) / eps - k * alpha_exact - 2 * p
            if abs(exact) <= tol_exact:
                return RelationSearchResult(
                    status=RELATION_FOUND,
                    witness=(l, k, p),
                    bound=bound,
                    tolerance=tol,
                    residual=float(exact),
                )
    return RelationSearchResult(
        status=NO_RELATION, witness=None, bound=bound, tolerance=tol
    )

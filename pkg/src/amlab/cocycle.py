"""Jump sequences, coboundary solutions and uniform Birkhoff-sum bounds.

A bounded-variation function on the circle whose variation is concentrated
on the orbit {k*alpha} is encoded by its jumps Delta_k.  Writing
sigma_k = sum_{j<=k} Delta_j, the function decomposes over the elementary
jump functions e_k(x) = {x-(k+1)alpha} - {x-k alpha}, whose Birkhoff sums
telescope and stay bounded by 1 in sup norm.  That yields both the uniform
spread bound sum(1+|i|)|Delta_i| and an explicit continuous solution of the
cohomological equation xi - xi o R_alpha = phi - mean(phi), evaluated
pointwise here rather than through an abstract existence argument.

All evaluations at orbit points go through exact integer numerators from
:class:`RotationOrbit`; the window reconstruction
phi(x) = mean - sum_j Delta_j ({x-j alpha} - 1/2) is used on hot paths (it
telescopes to the sigma_k e_k sum up to the truncated tail).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .arithmetic import (
    Angle,
    ContinuedFraction,
    RotationOrbit,
    as_fraction,
    frac,
)
from .denjoy import DenjoyModel
from .errors import (
    InvalidInputError,
    NotFullGapMeasureError,
    NotOneHoleError,
    UnbalancedJumpsError,
)

BALANCE_TOLERANCE = 1e-12


def _as_alpha(alpha) -> Fraction:
    if isinstance(alpha, ContinuedFraction):
        return alpha.alpha
    return as_fraction(alpha)


class JumpSequence:
    """Finitely supported jumps Delta_k with zero total and a mean level.

    ``support`` maps k to Delta_k (Fraction or float).  ``tail`` optionally
    records the geometric family (C, Delta, K) the support was truncated
    from, which gives certified bounds on everything discarded.
    """

    def __init__(self, support: dict, mean: Angle = 0.0, tail: tuple | None = None,
                 tolerance: float = BALANCE_TOLERANCE):
        self.support = {int(k): v for k, v in support.items() if v != 0}
        self.mean = mean
        self.tail = tail
        total = sum(self.support.values())
        if abs(total) > tolerance:
            raise UnbalancedJumpsError(
                f"jumps sum to {float(total):.3e}, beyond tolerance {tolerance:.1e}"
            )
        self.imbalance = total

    @classmethod
    def from_support(cls, pairs, mean: Angle = 0.0,
                     tolerance: float = BALANCE_TOLERANCE) -> "JumpSequence":
        """Build from (k, Delta_k) pairs; enforces the zero-sum constraint."""
        if isinstance(pairs, dict):
            pairs = pairs.items()
        return cls({k: v for k, v in pairs}, mean=mean, tolerance=tolerance)

    @classmethod
    def geometric(cls, C: Angle = Fraction(1, 4), Delta: Angle = Fraction(1, 2),
                  K_jump: int = 60, mean: Angle = 0.0) -> "JumpSequence":
        """Alternating geometric jumps C*(-1)^k Delta^|k|, truncated at K_jump.

        Delta_0 = 2*C*Delta/(1+Delta) balances the full infinite family, so
        the truncated imbalance is below 2*C*Delta^(K+1) (far below the
        tolerance for the defaults).
        """
        C = as_fraction(C)
        Delta = as_fraction(Delta)
        if not 0 < Delta < 1:
            raise InvalidInputError(f"Delta must lie in (0,1), got {Delta}")
        if C <= 0:
            raise InvalidInputError("C must be positive")
        support = {0: 2 * C * Delta / (1 + Delta)}
        for k in range(1, K_jump + 1):
            v = C * (-Delta) ** k  # = C*(-1)^k Delta^k
            support[k] = v
            support[-k] = v
        return cls(support, mean=mean, tail=(C, Delta, K_jump),
                   tolerance=float(2 * C * Delta**K_jump) + BALANCE_TOLERANCE)

    def ks(self) -> list:
        return sorted(self.support)

    def window(self) -> tuple:
        ks = self.ks()
        return (ks[0], ks[-1]) if ks else (0, 0)

    def weighted_mass(self) -> float:
        """sum |k * Delta_k| over the support."""
        return float(sum(abs(k * v) for k, v in self.support.items()))

    def spread_bound(self) -> float:
        """sum (1+|i|) |Delta_i|, the uniform Birkhoff-spread bound."""
        return float(sum((1 + abs(k)) * abs(v) for k, v in self.support.items()))

    def sigma(self) -> "SigmaSequence":
        return sigma_from_jumps(self)

    def sigma_tail_bound(self) -> float:
        """Bound on sum of |sigma_k| over |k| beyond the truncation window."""
        if self.tail is None:
            return 0.0
        C, Delta, K = self.tail
        return float(2 * C * Delta ** (K + 1) / ((1 + Delta) * (1 - Delta)))

    def to_json(self) -> str:
        d = {
            "support": [[k, float(v)] for k, v in sorted(self.support.items())],
            "mean": float(self.mean),
        }
        if self.tail is not None:
            C, Delta, K = self.tail
            d["tail"] = {"C": float(C), "Delta": float(Delta), "K": K}
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "JumpSequence":
        d = json.loads(text)
        tail = d.get("tail")
        if tail is not None:
            tail = (tail["C"], tail["Delta"], tail["K"])
        return cls({int(k): v for k, v in d["support"]}, mean=d.get("mean", 0.0),
                   tail=tail, tolerance=1e-9)


@dataclass
class SigmaSequence:
    """Partial sums sigma_k = sum_{j<=k} Delta_j over the truncation window."""

    ks: list
    values: list = field(repr=False)

    def __getitem__(self, k: int):
        if k < self.ks[0]:
            return 0
        if k > self.ks[-1]:
            return self.values[-1]
        return self.values[k - self.ks[0]]

    def abs_sum(self) -> float:
        return float(sum(abs(v) for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def sigma_from_jumps(J: JumpSequence) -> SigmaSequence:
    """Accumulate sigma_k left to right; checks the two defining formulas agree."""
    ks = J.ks()
    if not ks:
        return SigmaSequence(ks=[0], values=[0])
    lo, hi = ks[0], ks[-1]
    values = []
    acc = 0
    for k in range(lo, hi + 1):
        acc = acc + J.support.get(k, 0)
        values.append(acc)
    # right-to-left formula: sigma_k = -sum_{j>k} Delta_j
    acc = 0
    for i, k in enumerate(range(hi, lo - 1, -1)):
        alt = -acc
        if abs(values[hi - lo - i] - alt) > 1e-12:
            raise UnbalancedJumpsError(
                f"sigma formulas disagree at k={k}: forward {values[hi - lo - i]}"
                f" vs backward {alt}"
            )
        acc = acc + J.support.get(k, 0)
    return SigmaSequence(ks=list(range(lo, hi + 1)), values=values)


def jump_basis_eval(k: int, x: Angle, alpha) -> Angle:
    """e_k(x) = {x-(k+1)alpha} - {x-k alpha}: zero mean, jump +1 at {k alpha},
    jump -1 at {(k+1)alpha}, right-continuous."""
    a = _as_alpha(alpha)
    x = as_fraction(x)
    return frac(x - (k + 1) * a) - frac(x - k * a)


def bv_from_jumps(J: JumpSequence, alpha, x: Angle):
    """phi(x) = mean + sum_k sigma_k e_k(x), the BV function with jumps Delta_k."""
    a = _as_alpha(alpha)
    sig = J.sigma()
    total = J.mean
    for k, s in zip(sig.ks, sig.values):
        total = total + s * (frac(x - (k + 1) * a) - frac(x - k * a))
    return total


def transfer_function(J: JumpSequence, alpha, x: Angle):
    """xi(x) = sum_k sigma_k ({x-(k+1)alpha} - 1/2).

    Satisfies xi(x) - xi(x+alpha) = phi(x) - mean off the orbit of 0, up to
    the truncated tail.
    """
    a = _as_alpha(alpha)
    sig = J.sigma()
    total = 0
    for k, s in zip(sig.ks, sig.values):
        total = total + s * (frac(x - (k + 1) * a) - Fraction(1, 2))
    return total


def transfer_function_grid(J: JumpSequence, alpha, x: np.ndarray) -> np.ndarray:
    """Vectorized float evaluation of the transfer function on an array."""
    a = float(_as_alpha(alpha))
    sig = J.sigma()
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k, s in zip(sig.ks, sig.values):
        out += float(s) * ((x - (k + 1) * a) % 1.0 - 0.5)
    return out


def eigenfunction_integral(J: JumpSequence, alpha, lam: float,
                           n: int = 1 << 16) -> float:
    """Quadrature oracle |integral of exp(-i lam xi(x)) dx| on a midpoint grid.

    Independent of the Birkhoff-sum path: this is the limit the Weyl
    magnitudes of the suspension at lam = 2*pi/mean must approach when the
    ceiling is a coboundary plus a constant.
    """
    g = (np.arange(n) + 0.5) / n
    xi = transfer_function_grid(J, alpha, g)
    return float(abs(np.exp(-1j * lam * xi).mean()))


def phi_values_on_orbit(J: JumpSequence, orbit: RotationOrbit, n0: int,
                        count: int) -> np.ndarray:
    """phi at orbit points n0..n0+count-1 via the window reconstruction.

    phi(x_i) = mean - sum_j Delta_j ({x_i - j alpha} - 1/2); the orbit shifts
    x_i - j*alpha = x_{i-j}, so one exact orbit sweep serves every term.
    """
    lo, hi = J.window()
    v = orbit.floats(n0 - hi, count + (hi - lo)) - 0.5
    out = np.full(count, float(J.mean))
    base = hi  # v index of orbit point n0 - 0 shift: v[base + (i - n0) - j]
    idx = np.arange(count)
    for j, d in J.support.items():
        out -= float(d) * v[base + idx - j]
    return out


def birkhoff_sum(f: Callable, cf: ContinuedFraction, x: Angle, m: int) -> float:
    """S_m f(x) = sum_{i<m} f({x + i alpha}) at exact orbit points."""
    if m < 0:
        raise InvalidInputError("m must be >= 0")
    orbit = RotationOrbit(cf, x)
    den = orbit.den
    return math.fsum(f(Fraction(a, den)) for a in orbit.numerators(0, m))


@dataclass
class SpreadReport:
    """Measured Birkhoff spread of the reconstructed BV function vs its bounds."""

    spread: float
    sigma_abs_sum: float
    bound: float
    m_max: int
    grid_size: int
    per_m: np.ndarray = field(repr=False)

    def csv_rows(self):
        for m, s in enumerate(self.per_m, start=1):
            yield m, s, self.bound


def birkhoff_spread(J: JumpSequence, cf: ContinuedFraction, m_max: int,
                    grid_size: int, slack: float = 1e-8) -> SpreadReport:
    """max over m<=m_max, grid pairs of |S_m phi(x) - S_m phi(x')|, mean-free.

    Asserts the proposition chain spread <= 2 sum|sigma_k| <= 2 sum(1+|i|)|Delta_i|.
    """
    if m_max < 1 or grid_size < 2:
        raise InvalidInputError("need m_max >= 1 and grid_size >= 2")
    lo, hi = J.window()
    ks = J.ks()
    deltas = np.array([float(J.support[k]) for k in ks])
    smax = np.full(m_max, -np.inf)
    smin = np.full(m_max, np.inf)
    for g in range(grid_size):
        orbit = RotationOrbit(cf, Fraction(g, grid_size))
        # need orbit points i-k for 0 <= i < m_max, lo <= k <= hi
        v = orbit.floats(-hi, m_max + hi - lo) - 0.5
        # prefix[t] = sum of the first t window values; orbit n sits at n+hi
        prefix = np.concatenate([[0.0], np.cumsum(v)])
        S = np.zeros(m_max)
        ms = np.arange(1, m_max + 1)
        for k, d in zip(ks, deltas):
            # sum_{i<m} v_{i-k} = prefix[m-k+hi] - prefix[hi-k]
            S -= d * (prefix[ms - k + hi] - prefix[hi - k])
        np.maximum(smax, S, out=smax)
        np.minimum(smin, S, out=smin)
    per_m = smax - smin
    spread = float(per_m.max())
    sig = J.sigma().abs_sum()
    bound = J.spread_bound()
    if spread > 2 * sig + slack or sig > bound + slack:
        raise AssertionError(
            f"spread chain violated: {spread} <= {2 * sig} <= {2 * bound}"
        )
    return SpreadReport(spread=spread, sigma_abs_sum=sig, bound=bound,
                        m_max=m_max, grid_size=grid_size, per_m=per_m)


def coboundary_residual(J: JumpSequence, cf: ContinuedFraction,
                        samples: np.ndarray) -> np.ndarray:
    """|xi(x) - xi(x+alpha) - (phi(x) - mean)| at float sample points."""
    a = float(cf.alpha)
    xi_x = transfer_function_grid(J, cf, samples)
    xi_xa = transfer_function_grid(J, cf, (samples + a) % 1.0)
    ks = J.ks()
    phi0 = np.zeros_like(samples)
    for k in ks:
        phi0 -= float(J.support[k]) * ((samples - k * a) % 1.0 - 0.5)
    return np.abs(xi_x - xi_xa - phi0)


def jumps_from_ceiling(model: DenjoyModel, psi: Callable,
                       require_balanced: bool = True,
                       tolerance: float = 1e-9) -> JumpSequence:
    """Jumps of the rotation-side function induced by a Lipschitz ceiling.

    Requires a one-hole model whose gaps carry full measure: the variation of
    psi then concentrates on the gap endpoints, Delta_k = psi(right_k) -
    psi(left_k), and the mean is the exact step quadrature of psi against
    the invariant measure.  For a function continuous across the circle cut
    the jumps telescope to zero exactly; a cut-open function (identity
    coordinate) telescopes to the total gap mass instead, which
    ``require_balanced=False`` admits for inspection.
    """
    if len(model.holes) != 1:
        raise NotOneHoleError(f"model has {len(model.holes)} holes, need exactly 1")
    if model.cantor_mass != 0:
        raise NotFullGapMeasureError(
            f"cantor_mass = {model.cantor_mass}, gaps must carry full measure"
        )
    support = {}
    for g in model.gaps:
        support[g.k] = psi(g.right) - psi(g.left)
    total = 0.0
    ts = model._ts
    n = len(ts)
    for i in range(n):
        width = (ts[i + 1] if i + 1 < n else ts[0] + 1) - ts[i]
        total += psi(model.gaps[i].right) * float(width)
    tol = tolerance if require_balanced else float("inf")
    return JumpSequence(support, mean=total, tolerance=tol)

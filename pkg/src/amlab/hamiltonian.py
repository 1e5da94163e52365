"""Near-integrable Hamiltonian systems, their twist sections and minimizing orbits.

The family u + r^2/2 + eps*H(theta, r, s) has unit speed in s, so the s = 0
section map is the time-1 flow of the reduced (theta, r) dynamics and the
perturbation strength eps controls how far it sits from the integrable twist
(theta + r, r).  H and the time-change factor are specified as trigonometric
polynomials (exact symbolic derivatives via sympy, compiled once per system),
which keeps the integrator, the variational equations and the twist checks
consistent to integrator tolerance.

Minimal ordered orbits come from minimizing the discrete action sum of the
section map's generating function; segments are evaluated by shooting, so no
closed-form generating function is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from .arithmetic import Angle, ContinuedFraction, as_fraction
from .errors import (
    IntegrationFailureError,
    InvalidInputError,
    MinimizationFailedError,
)

_THETA, _R, _S, _U = sp.symbols("theta r s u", real=True)


@dataclass(frozen=True)
class TrigTerm:
    """coef * r**r_pow * u**u_pow * trig(2 pi theta_mode theta) * trig(2 pi s_mode s)."""

    coef: float
    r_pow: int = 0
    u_pow: int = 0
    theta_mode: int = 0
    theta_kind: str = "cos"
    s_mode: int = 0
    s_kind: str = "cos"

    def to_sympy(self):
        if self.theta_kind not in ("cos", "sin") or self.s_kind not in ("cos", "sin"):
            raise InvalidInputError("trig kinds must be 'cos' or 'sin'")
        expr = sp.Rational(1)
        expr *= _R ** self.r_pow
        expr *= _U ** self.u_pow
        tfun = sp.cos if self.theta_kind == "cos" else sp.sin
        sfun = sp.cos if self.s_kind == "cos" else sp.sin
        expr *= tfun(2 * sp.pi * self.theta_mode * _THETA)
        expr *= sfun(2 * sp.pi * self.s_mode * _S)
        return self.coef * expr

    def to_dict(self):
        return {"coef": self.coef, "r_pow": self.r_pow, "u_pow": self.u_pow,
                "theta_mode": self.theta_mode, "theta_kind": self.theta_kind,
                "s_mode": self.s_mode, "s_kind": self.s_kind}


class TrigPoly:
    """Finite trig-polynomial in (theta, s), polynomial in (r, u)."""

    def __init__(self, terms: Sequence[TrigTerm]):
        self.terms = tuple(terms)
        self.expr = sum((t.to_sympy() for t in self.terms), sp.Integer(0))
        self._value = sp.lambdify((_THETA, _R, _S, _U), self.expr, modules="math")

    def __call__(self, theta: float, r: float, s: float, u: float = 0.0) -> float:
        return float(self._value(theta, r, s, u))

    def lower_bound(self, r_max: float, u_max: float = 1.0) -> float:
        """Crude certified lower bound on |r| <= r_max, |u| <= u_max."""
        lb = 0.0
        for t in self.terms:
            mag = abs(t.coef) * r_max**t.r_pow * u_max**t.u_pow
            if (t.r_pow == t.u_pow == t.theta_mode == t.s_mode == 0
                    and t.theta_kind == "cos" and t.s_kind == "cos"):
                lb += t.coef
            else:
                lb -= mag
        return lb

    def to_dict(self):
        return {"terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls([TrigTerm(**t) for t in d["terms"]])

    @classmethod
    def constant(cls, c: float) -> "TrigPoly":
        return cls([TrigTerm(coef=c)])


def builtin_kick(c: float = 0.3) -> TrigPoly:
    """H(theta, r, s) = cos(2 pi theta) * (1 + c cos(2 pi s)): the standard
    kick family used in the experiment pipeline."""
    return TrigPoly([
        TrigTerm(coef=1.0, theta_mode=1, theta_kind="cos"),
        TrigTerm(coef=c, theta_mode=1, theta_kind="cos", s_mode=1, s_kind="cos"),
    ])


class TwoLevelTimeChange:
    """Time change taking two constant values split by a theta interval.

    Mimics a factor that is locally constant on two separating neighborhoods;
    it has no derivatives at the interface, so it is admitted only where the
    flow samples values (ceiling quadrature), not for reparametrized
    integration.
    """

    def __init__(self, split: tuple, value_inside: float, value_outside: float):
        self.a = as_fraction(split[0])
        self.b = as_fraction(split[1])
        if not 0 <= self.a < self.b <= 1:
            raise InvalidInputError("split must satisfy 0 <= a < b <= 1")
        if value_inside <= 0 or value_outside <= 0:
            raise InvalidInputError("time change must be strictly positive")
        self.value_inside = float(value_inside)
        self.value_outside = float(value_outside)

    def __call__(self, theta: float, r: float = 0.0, s: float = 0.0,
                 u: float = 0.0) -> float:
        th = theta % 1.0
        return self.value_inside if float(self.a) <= th < float(self.b) \
            else self.value_outside

    def lower_bound(self, r_max: float = 0.0, u_max: float = 0.0) -> float:
        return min(self.value_inside, self.value_outside)


class HamiltonianSystem:
    """u + r^2/2 + eps*H with an optional strictly positive time change."""

    def __init__(self, H: TrigPoly, epsilon: float, H0: float = 0.0,
                 phi: TrigPoly | TwoLevelTimeChange | None = None):
        self.H = H
        self.epsilon = float(epsilon)
        self.H0 = float(H0)
        self.phi = phi
        e = sp.Float(self.epsilon)
        Hs = H.expr
        hamiltonian = _U + _R**2 / 2 + e * Hs
        self._energy = sp.lambdify((_THETA, _R, _S, _U), hamiltonian, "math")
        ham_r = sp.diff(hamiltonian, _R)
        ham_th = sp.diff(hamiltonian, _THETA)
        ham_s = sp.diff(hamiltonian, _S)
        self._base_rhs = sp.lambdify(
            (_THETA, _R, _S, _U), [ham_r, -ham_th, sp.Integer(1), -ham_s], "math")
        # variational matrix of the reduced (theta, r) dynamics
        self._var_rhs = sp.lambdify(
            (_THETA, _R, _S),
            [sp.diff(ham_r, _THETA), sp.diff(ham_r, _R),
             -sp.diff(ham_th, _THETA), -sp.diff(ham_th, _R)],
            "math")
        # action integrand r*thetadot - (r^2/2 + eps H)
        lag = _R * ham_r - (_R**2 / 2 + e * Hs)
        self._lagrangian = sp.lambdify((_THETA, _R, _S), lag, "math")
        if isinstance(phi, TrigPoly):
            ph = phi.expr
            full = ph * (hamiltonian - sp.Float(self.H0))
            rhs = [sp.diff(full, _R), -sp.diff(full, _THETA),
                   sp.diff(full, _U), -sp.diff(full, _S)]
            self._reparam_rhs = sp.lambdify((_THETA, _R, _S, _U), rhs, "math")
            self._phi_value = sp.lambdify((_THETA, _R, _S, _U), ph, "math")
        elif phi is not None:
            self._reparam_rhs = None
            self._phi_value = lambda th, r, s, u: phi(th, r, s, u)
        else:
            self._reparam_rhs = None
            self._phi_value = None

    def energy(self, state) -> float:
        return float(self._energy(*state))

    def section_u(self, theta: float, r: float) -> float:
        """u making (theta, r, 0, u) land on the H0 energy surface."""
        return self.H0 - r**2 / 2 - self.epsilon * self.H(theta, r, 0.0)

    def section_state(self, theta: float, r: float) -> np.ndarray:
        return np.array([theta, r, 0.0, self.section_u(theta, r)])

    def to_dict(self):
        d = {"H": self.H.to_dict(), "epsilon": self.epsilon, "H0": self.H0}
        if isinstance(self.phi, TrigPoly):
            d["phi"] = self.phi.to_dict()
        return d


MAX_TIME = 10**6
_IVP_OPTS = dict(method="DOP853", rtol=1e-13, atol=1e-13)


def _solve(fun, t_span, y0, **kw):
    opts = dict(_IVP_OPTS)
    opts.update(kw)
    sol = solve_ivp(fun, t_span, y0, **opts)
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise IntegrationFailureError(sol.message)
    return sol


def integrate(sys: HamiltonianSystem, state, t: float,
              reparametrized: bool | None = None) -> np.ndarray:
    """Flow the 4D state for time t (unreparametrized unless phi is present)."""
    if abs(t) > MAX_TIME:
        raise InvalidInputError(f"|t| <= {MAX_TIME} required")
    y0 = np.asarray(state, dtype=float)
    if y0.shape != (4,):
        raise InvalidInputError("state must be (theta, r, s, u)")
    if t == 0:
        return y0.copy()
    if reparametrized is None:
        reparametrized = sys.phi is not None
    if reparametrized:
        if sys._reparam_rhs is None:
            raise InvalidInputError(
                "reparametrized integration needs a trig-polynomial time change"
            )
        fun = lambda tt, y: sys._reparam_rhs(*y)
    else:
        fun = lambda tt, y: sys._base_rhs(*y)
    return _solve(fun, (0.0, t), y0).y[:, -1]


def energy_drift(sys: HamiltonianSystem, state, t: float) -> float:
    out = integrate(sys, state, t)
    return abs(sys.energy(out) - sys.energy(np.asarray(state, dtype=float)))


def poincare_map(sys: HamiltonianSystem, theta: float, r: float,
                 lift: bool = True) -> tuple:
    """Return map of the s = 0 section on the H0 energy surface.

    Unit s-speed makes it the time-1 map; with a time change present the
    return is located by event detection on s = 1.
    """
    y0 = sys.section_state(theta, r)
    if sys.phi is None:
        y = integrate(sys, y0, 1.0)
    else:
        if sys._reparam_rhs is None:
            raise InvalidInputError(
                "reparametrized section map needs a trig-polynomial time change"
            )
        lb = sys.phi.lower_bound(abs(r) + 2.0, abs(y0[3]) + 2.0)
        if lb <= 0:
            raise InvalidInputError("time change lower bound not positive")
        event = lambda tt, y: y[2] - 1.0
        event.terminal = True
        event.direction = 1.0
        sol = _solve(lambda tt, y: sys._reparam_rhs(*y), (0.0, 2.0 / lb), y0,
                     events=[event])
        if not sol.t_events[0].size:
            raise IntegrationFailureError("section return not reached")
        y = sol.y_events[0][0]
    th = y[0] if lift else y[0] % 1.0
    return th, y[1]


def poincare_tangent(sys: HamiltonianSystem, theta: float, r: float) -> tuple:
    """Section map value and its 2x2 tangent from the variational equations."""
    def fun(tt, y):
        th, rr = y[0], y[1]
        a00, a01, a10, a11 = sys._var_rhs(th, rr, tt)
        dth, dr, _, _ = sys._base_rhs(th, rr, tt, 0.0)
        j00, j01, j10, j11 = y[2:]
        return [dth, dr,
                a00 * j00 + a01 * j10, a00 * j01 + a01 * j11,
                a10 * j00 + a11 * j10, a10 * j01 + a11 * j11]

    y = _solve(fun, (0.0, 1.0), [theta, r, 1.0, 0.0, 0.0, 1.0]).y[:, -1]
    return (y[0], y[1]), np.array([[y[2], y[3]], [y[4], y[5]]])


@dataclass
class TwistReport:
    min_slope: float
    verdict: str
    slopes: np.ndarray = field(repr=False)


def twist_check(sys: HamiltonianSystem, r_range: tuple = (0.0, 1.0),
                grid: tuple = (10, 10), delta: float = 1e-5) -> TwistReport:
    """Finite-difference d theta'/dr over a (theta, r) grid."""
    n_th, n_r = grid
    if n_th < 10 or n_r < 10:
        raise InvalidInputError("grid must be at least 10x10")
    thetas = np.linspace(0, 1, n_th, endpoint=False)
    rs = np.linspace(r_range[0], r_range[1], n_r)
    slopes = np.empty((n_th, n_r))
    for i, th in enumerate(thetas):
        for j, r in enumerate(rs):
            up, _ = poincare_map(sys, th, r + delta)
            dn, _ = poincare_map(sys, th, r - delta)
            slopes[i, j] = (up - dn) / (2 * delta)
    mn = float(slopes.min())
    return TwistReport(min_slope=mn,
                       verdict="monotone-twist" if mn > 0 else "not-monotone",
                       slopes=slopes)


def jacobian_determinant(sys: HamiltonianSystem, theta: float, r: float,
                         delta: float = 1e-3) -> float:
    """Section-map Jacobian determinant by 4th-order central differences."""
    def col(dv_th, dv_r):
        pts = []
        for c in (-2, -1, 1, 2):
            th, rr = poincare_map(sys, theta + c * dv_th, r + c * dv_r)
            pts.append(np.array([th, rr]))
        return (pts[0] - 8 * pts[1] + 8 * pts[2] - pts[3]) / (12 * delta)

    d_th = col(delta, 0.0)
    d_r = col(0.0, delta)
    return float(d_th[0] * d_r[1] - d_r[0] * d_th[1])


@dataclass
class OrbitConfiguration:
    """Periodic minimizing configuration for rotation number p/q."""

    rotation_target: Fraction
    thetas: np.ndarray = field(repr=False)   # lifted, length q
    momenta: np.ndarray = field(repr=False)  # departing momentum per site
    action: float = 0.0
    gradient_norm: float = 0.0
    monotone: bool = True

    def points(self):
        return [(th % 1.0, r) for th, r in zip(self.thetas, self.momenta)]


class _Shooter:
    """Solves theta'(theta_a, r) = theta_b for r, with tangent and action."""

    def __init__(self, sys: HamiltonianSystem):
        self.sys = sys

    def segment(self, th_a: float, th_b: float, r_init: float | None = None):
        r = th_b - th_a if r_init is None else r_init
        sys = self.sys

        def fun(tt, y):
            th, rr = y[0], y[1]
            dth, dr, _, _ = sys._base_rhs(th, rr, tt, 0.0)
            a00, a01, a10, a11 = sys._var_rhs(th, rr, tt)
            j00, j01, j10, j11 = y[2:6]
            return [dth, dr,
                    a00 * j00 + a01 * j10, a00 * j01 + a01 * j11,
                    a10 * j00 + a11 * j10, a10 * j01 + a11 * j11,
                    sys._lagrangian(th, rr, tt)]

        for _ in range(40):
            y = _solve(fun, (0.0, 1.0),
                       [th_a, r, 1.0, 0.0, 0.0, 1.0, 0.0]).y[:, -1]
            miss = th_b - y[0]
            dthdr = y[3]
            if dthdr <= 0:
                raise MinimizationFailedError(
                    "segment shooting lost the twist property"
                )
            if abs(miss) < 1e-12:
                M = np.array([[y[2], y[3]], [y[4], y[5]]])
                return {"r_dep": r, "r_arr": y[1], "M": M, "action": y[6]}
            r += miss / dthdr
        raise MinimizationFailedError("segment shooting did not converge")


def _action_and_grad(shooter, thetas, p, warm):
    q = len(thetas)
    segs = []
    for i in range(q):
        th_a = thetas[i]
        th_b = thetas[(i + 1) % q] + (p if i == q - 1 else 0.0)
        seg = shooter.segment(th_a, th_b, warm[i])
        warm[i] = seg["r_dep"]
        segs.append(seg)
    action = sum(s["action"] for s in segs)
    grad = np.array([segs[i - 1]["r_arr"] - segs[i]["r_dep"] for i in range(q)])
    return action, grad, segs


def _gradient_hessian(segs, q):
    """Cyclic tridiagonal Jacobian of the gradient from segment tangents."""
    H = np.zeros((q, q))
    for i in range(q):
        M = segs[i]["M"]
        # r_dep(th_a, th_b): d/dth_a = -M00/M01, d/dth_b = 1/M01
        # r_arr(th_a, th_b): d/dth_a = M10 - M11*M00/M01, d/dth_b = M11/M01
        dd_a = -M[0, 0] / M[0, 1]
        dd_b = 1.0 / M[0, 1]
        da_a = M[1, 0] + M[1, 1] * dd_a
        da_b = M[1, 1] * dd_b
        ip1 = (i + 1) % q
        # g_{i+1} gains from segment i (arrival), g_i loses departure
        H[ip1, i] += da_a
        H[ip1, ip1] += da_b
        H[i, i] -= dd_a
        H[i, ip1] -= dd_b
    return H


def am_minimize(sys: HamiltonianSystem, target, restarts: int = 3,
                seed: int = 0, gtol: float = 1e-10) -> OrbitConfiguration:
    """Minimize the discrete action over periodic configurations of type p/q.

    Gradient descent (BFGS) plus Newton polish on the criticality equations;
    the result is a critical point with gradient norm below gtol whose
    consecutive lifts increase by amounts in (0, 1).
    """
    t = as_fraction(target) if not isinstance(target, tuple) else \
        Fraction(target[0], target[1])
    p, q = t.numerator, t.denominator
    if not 0 < p < q:
        raise InvalidInputError(f"rotation target must lie in (0,1), got {t}")
    if q > 10**4:
        raise InvalidInputError("q <= 1e4 required")
    shooter = _Shooter(sys)
    rng = np.random.default_rng(seed)
    rho = p / q
    last_error = None
    for attempt in range(restarts):
        thetas = np.arange(q) * rho
        if attempt > 0:
            thetas = thetas + rng.normal(scale=0.1 / q, size=q)
        warm = [None] * q
        try:
            action, grad, segs = _action_and_grad(shooter, thetas, p, warm)
            if np.linalg.norm(grad, np.inf) > gtol:
                from scipy.optimize import minimize as _minimize

                def obj(v):
                    a, g, _ = _action_and_grad(shooter, v, p, warm)
                    return a, g

                res = _minimize(obj, thetas, jac=True, method="BFGS",
                                options={"gtol": 1e-8, "maxiter": 200})
                thetas = res.x
                action, grad, segs = _action_and_grad(shooter, thetas, p, warm)
            for _ in range(25):
                if np.linalg.norm(grad, np.inf) <= gtol:
                    break
                H = _gradient_hessian(segs, q)
                try:
                    step = np.linalg.solve(H, -grad)
                except np.linalg.LinAlgError:
                    step, *_ = np.linalg.lstsq(H, -grad, rcond=None)
                thetas = thetas + step
                action, grad, segs = _action_and_grad(shooter, thetas, p, warm)
            gnorm = float(np.linalg.norm(grad, np.inf))
            if gnorm > gtol:
                last_error = f"gradient norm {gnorm} above tolerance"
                continue
            lifted = np.append(thetas, thetas[0] + p)
            diffs = np.diff(lifted)
            monotone = bool(np.all((diffs > 0) & (diffs < 1)))
            if not monotone:
                last_error = "critical point is not monotone"
                continue
            return OrbitConfiguration(
                rotation_target=t, thetas=thetas,
                momenta=np.array([s["r_dep"] for s in segs]),
                action=float(action), gradient_norm=gnorm, monotone=True)
        except MinimizationFailedError as exc:
            last_error = str(exc)
            continue
    raise MinimizationFailedError(
        f"no monotone critical point for {t} after {restarts} restarts: "
        f"{last_error}"
    )


def rotation_residual(sys: HamiltonianSystem, config: OrbitConfiguration) -> float:
    """|lift displacement under q section maps - p| for a configuration."""
    p = config.rotation_target.numerator
    q = config.rotation_target.denominator
    th, r = config.thetas[0], config.momenta[0]
    for _ in range(q):
        th, r = poincare_map(sys, th, r)
    return abs(th - config.thetas[0] - p)


def uniform_configuration_action(sys: HamiltonianSystem, target,
                                 theta0: float = 0.0) -> float:
    """Action of the equally spaced configuration (reference upper bound)."""
    t = as_fraction(target) if not isinstance(target, tuple) else \
        Fraction(target[0], target[1])
    p, q = t.numerator, t.denominator
    shooter = _Shooter(sys)
    thetas = theta0 + np.arange(q) * (p / q)
    action, _, _ = _action_and_grad(shooter, thetas, p, [None] * q)
    return float(action)


@dataclass
class AMCloud:
    """Union of minimizing orbits along convergent rotation numbers."""

    levels: list                       # (target, OrbitConfiguration)
    points: np.ndarray = field(repr=False)  # sorted (theta mod 1, r)
    lipschitz: float = 0.0             # deepest level's graph estimate
    lipschitz_by_level: list = field(default_factory=list)
    gap_candidates: list = field(default_factory=list)  # (width, th_lo, th_hi)
    gap_ratio: float = 1.0             # largest/median spacing of deepest orbit
    gap_iterates: list = field(default_factory=list)    # widths along the orbit


def am_cantor_approx(sys: HamiltonianSystem, cf: ContinuedFraction,
                     n_levels: int, seed: int = 0,
                     gap_iterates: int = 24) -> AMCloud:
    """Approximate the minimal ordered set by convergent periodic orbits.

    Returns the ordered cloud, a Lipschitz estimate for the graph r(theta),
    and the largest complementary intervals of the deepest orbit together
    with the widths of the leading gap's forward/backward iterates (input
    for geometric-decay fits).
    """
    if n_levels < 1 or n_levels > cf.depth:
        raise InvalidInputError("need 1 <= n_levels <= cf depth")
    levels = []
    for n in range(1, n_levels + 1):
        target = Fraction(cf.p[n], cf.q[n])
        levels.append((target, am_minimize(sys, target, seed=seed)))
    pts = []
    for _, conf in levels:
        pts.extend(conf.points())
    pts.sort()
    points = np.array(pts)

    def graph_lipschitz(conf):
        # one orbit is one ordered graph; estimate its slope between
        # cyclically consecutive points
        ordered = sorted(conf.points())
        worst = 0.0
        for i in range(len(ordered)):
            (t0, r0), (t1, r1) = ordered[i], ordered[(i + 1) % len(ordered)]
            w = (t1 - t0) % 1.0
            if w > 1e-12:
                worst = max(worst, abs(r1 - r0) / w)
        return worst

    lipschitz_by_level = [graph_lipschitz(conf) for _, conf in levels]
    lip = lipschitz_by_level[-1]

    deepest = levels[-1][1]
    dpts = sorted(deepest.points())
    dth_sorted = [(dpts[(i + 1) % len(dpts)][0] - dpts[i][0]) % 1.0
                  for i in range(len(dpts))]
    order = np.argsort(dth_sorted)[::-1]
    candidates = [(dth_sorted[i], dpts[i], dpts[(i + 1) % len(dpts)])
                  for i in order[:5]]
    gap_ratio = float(np.max(dth_sorted) / np.median(dth_sorted))
    iterates = []
    if candidates:
        _, lo, hi = candidates[0]
        a = np.array(lo, dtype=float)
        b = np.array(hi, dtype=float)
        fwd = [abs((b[0] - a[0]) % 1.0)]
        aa, bb = a.copy(), b.copy()
        for _ in range(gap_iterates):
            aa = np.array(poincare_map(sys, aa[0], aa[1]))
            bb = np.array(poincare_map(sys, bb[0], bb[1]))
            w = abs(bb[0] - aa[0])
            fwd.append(min(w % 1.0, (-w) % 1.0))
        iterates = fwd
    return AMCloud(levels=levels, points=points, lipschitz=lip,
                   lipschitz_by_level=lipschitz_by_level,
                   gap_candidates=[(w, lo, hi) for w, lo, hi in candidates],
                   gap_ratio=gap_ratio, gap_iterates=iterates)


def lyapunov_exponent(sys: HamiltonianSystem, theta: float, r: float,
                      T: int) -> tuple:
    """Top exponent and QR-companion along the section-map orbit.

    Returns (top, second): the two exponents from QR-iterated tangent maps;
    area preservation makes their sum the log-determinant drift, near zero.
    """
    if T < 10**3:
        raise InvalidInputError("T >= 1e3 section iterates required")
    Q = np.eye(2)
    th, rr = theta, r
    acc = np.zeros(2)
    for _ in range(T):
        (th, rr), M = poincare_tangent(sys, th, rr)
        Q, R = np.linalg.qr(M @ Q)
        acc += np.log(np.abs(np.diag(R)))
    return float(acc[0] / T), float(acc[1] / T)


def reparam_ceiling(sys: HamiltonianSystem, theta: float, r: float) -> float:
    """Return time of the reparametrized flow over the section point:
    quadrature of 1/phi along the unreparametrized orbit from s=0 to s=1."""
    if sys._phi_value is None:
        raise InvalidInputError("system has no time change")
    y0 = np.append(sys.section_state(theta, r), 0.0)

    def fun(tt, y):
        dth, dr, ds, du = sys._base_rhs(y[0], y[1], y[2], y[3])
        val = sys._phi_value(y[0], y[1], y[2], y[3])
        if not val > 0:
            raise IntegrationFailureError("time change not positive on orbit")
        return [dth, dr, ds, du, 1.0 / val]

    return float(_solve(fun, (0.0, 1.0), y0).y[-1, -1])

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amlab.arithmetic import RotationOrbit, build_cf, frac
from amlab.cocycle import (
    JumpSequence,
    birkhoff_spread,
    birkhoff_sum,
    bv_from_jumps,
    coboundary_residual,
    eigenfunction_integral,
    jump_basis_eval,
    jumps_from_ceiling,
    phi_values_on_orbit,
    sigma_from_jumps,
    transfer_function,
    transfer_function_grid,
)
from amlab.denjoy import HoleSpec, build_denjoy
from amlab.errors import (
    InvalidInputError,
    NotFullGapMeasureError,
    NotOneHoleError,
    UnbalancedJumpsError,
)


class TestJumpSequence:
    def test_two_term_sigma(self):
        sg = sigma_from_jumps(JumpSequence.from_support({0: 1, 1: -1}))
        assert (sg[-1], sg[0], sg[1]) == (0, 1, 0)

    def test_zero_jumps(self):
        sg = sigma_from_jumps(JumpSequence.from_support({}))
        assert sg.abs_sum() == 0

    def test_unbalanced_rejected(self):
        with pytest.raises(UnbalancedJumpsError):
            JumpSequence.from_support({0: 1, 1: -0.5})

    def test_geometric_closed_forms(self):
        J = JumpSequence.geometric(C=1, Delta=Fraction(1, 2), K_jump=60)
        assert abs(float(J.imbalance)) < 1e-12
        sg = J.sigma()
        # alternating tails: |sigma_k| = C*Delta^(k+1)/(1+Delta) for k >= 0
        # and C*Delta^|k|/(1+Delta) for k < 0
        half = Fraction(1, 2)
        for k in (0, 3, 7):
            assert abs(abs(sg[k]) - half ** (k + 1) / (1 + half)) < 1e-15
        for k in (-1, -4):
            assert abs(abs(sg[k]) - half ** (-k) / (1 + half)) < 1e-15
        assert abs(sg.abs_sum() - 4 / 3) < 1e-12
        assert abs(J.spread_bound() - 20 / 3) < 1e-12

    def test_sigma_weighted_bound(self):
        J = JumpSequence.geometric(C=Fraction(1, 4))
        assert J.sigma().abs_sum() <= J.spread_bound() + 1e-15

    @given(st.lists(st.integers(min_value=-8, max_value=8), min_size=1,
                    max_size=8))
    @settings(max_examples=30, deadline=None)
    def test_sigma_increments_are_jumps(self, vals):
        support = {k: Fraction(v) for k, v in enumerate(vals)}
        support[len(vals)] = -sum(support.values())
        J = JumpSequence.from_support(support)
        sg = J.sigma()
        for k in range(-2, len(vals) + 3):
            assert sg[k] - sg[k - 1] == J.support.get(k, 0)

    def test_json_round_trip(self):
        J = JumpSequence.geometric(mean=1.0)
        again = JumpSequence.from_json(J.to_json())
        assert float(again.mean) == 1.0
        assert set(again.support) == set(J.support)


class TestJumpBasis:
    def test_pointwise_value(self):
        assert abs(float(jump_basis_eval(0, 0.5, 0.3)) + 0.3) < 1e-12

    def test_zero_mean(self, cf80):
        # midpoint quadrature of a two-jump BV function converges at O(1/n)
        means = []
        for n in (2048, 8192):
            grid = [Fraction(2 * i + 1, 2 * n) for i in range(n)]
            total = sum(jump_basis_eval(3, x, cf80) for x in grid)
            means.append(abs(float(total) / n))
            assert means[-1] < 3.0 / n
        assert means[1] < means[0]

    def test_telescoping_bound(self, cf80):
        # |S_m e_k| <= 1 via direct summation at exact orbit points
        orbit = RotationOrbit(cf80, Fraction(1, 7))
        for k in (0, 2, -3):
            e = np.array([float(jump_basis_eval(k, orbit.point(i), cf80))
                          for i in range(600)])
            S = np.cumsum(e)
            assert np.max(np.abs(S)) <= 1 + 1e-12

    def test_jump_locations(self, cf80):
        # e_k jumps +1 at {k alpha} and -1 at {(k+1) alpha}
        a = cf80.alpha
        for k in (0, 2, -3):
            t = frac(k * a)
            delta = Fraction(1, 10**20)
            up = jump_basis_eval(k, t, cf80) - jump_basis_eval(k, t - delta, cf80)
            assert abs(up - 1) < 1e-15
            t2 = frac((k + 1) * a)
            dn = jump_basis_eval(k, t2, cf80) - jump_basis_eval(k, t2 - delta, cf80)
            assert abs(dn + 1) < 1e-15


class TestBvReconstruction:
    def test_two_term_equals_basis(self):
        J = JumpSequence.from_support({0: 1, 1: -1})
        assert abs(float(bv_from_jumps(J, 0.3, 0.5)) + 0.3) < 1e-12

    def test_zero_jumps_constant(self, cf80):
        J = JumpSequence.from_support({}, mean=2.5)
        for x in (0.1, 0.5, 0.9):
            assert bv_from_jumps(J, cf80, x) == 2.5

    def test_jumps_realized(self, cf80):
        J = JumpSequence.geometric(C=Fraction(1, 4), mean=1.0)
        a = cf80.alpha
        delta = Fraction(1, 10**18)
        for k in (0, 1, -1, 5, -5):
            t = frac(k * a)
            jump = bv_from_jumps(J, cf80, t) - bv_from_jumps(J, cf80, t - delta)
            assert abs(float(jump - J.support[k])) < 1e-10

    def test_orbit_values_match_pointwise(self, cf80):
        J = JumpSequence.geometric(C=Fraction(1, 4), mean=1.0)
        orbit = RotationOrbit(cf80, Fraction(3, 13))
        fast = phi_values_on_orbit(J, orbit, -5, 40)
        for i, n in enumerate(range(-5, 35)):
            slow = float(bv_from_jumps(J, cf80, orbit.point(n)))
            assert abs(fast[i] - slow) < 1e-9


class TestTransferFunction:
    def test_hand_example(self):
        J = JumpSequence.from_support({0: 1, 1: -1})
        assert abs(float(transfer_function(J, 0.3, 0.5)) + 0.3) < 1e-12
        assert abs(float(transfer_function(J, 0.3, 0.8))) < 1e-12

    def test_zero_jumps(self, cf80):
        J = JumpSequence.from_support({})
        assert transfer_function(J, cf80, 0.37) == 0

    def test_coboundary_residual(self, cf80):
        J = JumpSequence.geometric(C=1, Delta=Fraction(1, 2), K_jump=60, mean=1.0)
        rng = np.random.default_rng(11)
        res = coboundary_residual(J, cf80, rng.random(10**4))
        assert res.max() < 1e-9

    def test_grid_matches_scalar(self, cf80):
        J = JumpSequence.geometric(C=Fraction(1, 4))
        xs = np.array([0.123, 0.456, 0.789])
        grid = transfer_function_grid(J, cf80, xs)
        for x, g in zip(xs, grid):
            assert abs(g - float(transfer_function(J, cf80, x))) < 1e-12

    def test_eigenfunction_integral_resolutions(self, cf80):
        J = JumpSequence.geometric(C=Fraction(1, 4), mean=1.0)
        a = eigenfunction_integral(J, cf80, 2 * math.pi, n=1 << 14)
        b = eigenfunction_integral(J, cf80, 2 * math.pi, n=1 << 16)
        assert abs(a - b) < 1e-4
        assert b > 0.3


class TestBirkhoff:
    def test_constant_function(self, cf80):
        assert birkhoff_sum(lambda x: 1.0, cf80, Fraction(1, 3), 137) == 137

    def test_single_term(self, cf80):
        f = lambda x: float(jump_basis_eval(0, x, cf80))
        x = Fraction(2, 7)
        assert abs(birkhoff_sum(f, cf80, x, 1) - f(x)) < 1e-15

    def test_half_indicator_discrepancy(self, cf80):
        # S_m of the centered half indicator at m = q_n stays small
        f = lambda x: (1.0 if x < Fraction(1, 2) else 0.0) - 0.5
        for n in (6, 9, 12):
            m = cf80.q[n]
            direct = birkhoff_sum(f, cf80, Fraction(1, 7), m)
            assert abs(direct) < 3.0

    def test_negative_m_rejected(self, cf80):
        with pytest.raises(InvalidInputError):
            birkhoff_sum(lambda x: 1.0, cf80, 0, -1)


class TestSpread:
    def test_two_term_example(self, cf80):
        J = JumpSequence.from_support({0: 1, 1: -1})
        rep = birkhoff_spread(J, cf80, m_max=3000, grid_size=40)
        assert rep.bound == 3.0
        assert rep.sigma_abs_sum == 1.0
        assert rep.spread <= 2.0 + 1e-9

    def test_zero_jumps(self, cf80):
        rep = birkhoff_spread(JumpSequence.from_support({}), cf80, 100, 10)
        assert rep.spread == 0.0

    def test_geometric_chain(self, cf80):
        J = JumpSequence.geometric(C=1, Delta=Fraction(1, 2), K_jump=60)
        rep = birkhoff_spread(J, cf80, m_max=5000, grid_size=50)
        assert rep.spread <= 2 * rep.sigma_abs_sum <= 2 * rep.bound
        assert rep.spread > 0.1  # sums genuinely move

    def test_csv_rows(self, cf80):
        J = JumpSequence.from_support({0: 1, 1: -1})
        rep = birkhoff_spread(J, cf80, m_max=50, grid_size=10)
        rows = list(rep.csv_rows())
        assert len(rows) == 50
        assert rows[0][2] == rep.bound

    def test_validates_inputs(self, cf80):
        J = JumpSequence.from_support({0: 1, 1: -1})
        with pytest.raises(InvalidInputError):
            birkhoff_spread(J, cf80, m_max=0, grid_size=10)


@pytest.fixture(scope="module")
def model(cf80):
    return build_denjoy(cf80, [HoleSpec(0, C=1, Delta=Fraction(1, 2),
                                        K_gap=50)], cantor_mass=0)


class TestJumpsFromCeiling:
    def test_constant_gives_zero_jumps(self, model):
        J = jumps_from_ceiling(model, lambda x: 4.2)
        assert all(v == 0 for v in J.support.values())
        assert abs(float(J.mean) - 4.2) < 1e-12

    def test_identity_telescopes_to_gap_mass(self, model):
        J = jumps_from_ceiling(model, lambda x: float(x), require_balanced=False)
        assert abs(float(J.imbalance) - 1.0) < 1e-12
        for g in model.gaps:
            assert abs(J.support[g.k] - float(g.length)) < 1e-15

    def test_lipschitz_envelope(self, model):
        lip = 2 * math.pi
        J = jumps_from_ceiling(model, lambda x: math.sin(2 * math.pi * float(x)))
        for g in model.gaps:
            assert abs(J.support.get(g.k, 0.0)) <= lip * float(g.length) + 1e-12

    def test_smooth_ceiling_balanced_and_positive_mean(self, model):
        psi = lambda x: 1.0 + 0.3 * math.cos(2 * math.pi * float(x))
        J = jumps_from_ceiling(model, psi)
        assert abs(float(J.imbalance)) < 1e-12
        assert 0.5 < float(J.mean) < 1.5

    def test_multi_hole_rejected(self, cf80):
        m2 = build_denjoy(cf80, [HoleSpec(0, K_gap=10),
                                 HoleSpec(Fraction(1, 2), K_gap=10)],
                          cantor_mass=Fraction(1, 2))
        with pytest.raises(NotOneHoleError):
            jumps_from_ceiling(m2, float)

    def test_positive_cantor_mass_rejected(self, cf80):
        m = build_denjoy(cf80, [HoleSpec(0, K_gap=10)],
                         cantor_mass=Fraction(1, 3))
        with pytest.raises(NotFullGapMeasureError):
            jumps_from_ceiling(m, float)

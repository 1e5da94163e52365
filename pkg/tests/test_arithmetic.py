import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from amlab.arithmetic import (
    ContinuedFraction,
    RotationOrbit,
    build_cf,
    circle_norm,
    frac,
    general_position,
    golden_cf,
    orbit_point,
    parity_certificate,
    search_reciprocal_relation,
    VERDICT_FAILS,
    VERDICT_HOLDS,
)
from amlab.errors import InsufficientDepthError, InvalidInputError

quotient_lists = st.lists(st.integers(min_value=1, max_value=9),
                          min_size=2, max_size=30)


class TestBuildCf:
    def test_golden_denominators(self):
        cf = golden_cf(30)
        assert cf.q[:6] == (1, 2, 3, 5, 8, 13)
        assert abs(cf.alpha_float - 0.618034) < 1e-6

    def test_single_quotient(self):
        cf = build_cf([2])
        assert cf.q[1] == 3
        assert cf.convergent(1) == Fraction(2, 3)

    def test_liouville_growth(self):
        cf = build_cf([10**n for n in range(1, 6)])
        ratios = [cf.q[n + 1] / cf.q[n] for n in range(1, 5)]
        assert all(ratios[i + 1] > 5 * ratios[i] for i in range(3))

    def test_rejects_bad_quotients(self):
        with pytest.raises(InvalidInputError):
            build_cf([1, 0, 1])
        with pytest.raises(InvalidInputError):
            build_cf([])
        with pytest.raises(InvalidInputError):
            build_cf([1, -3])

    @given(quotient_lists)
    @settings(max_examples=30, deadline=None)
    def test_recurrence_and_coprimality(self, pq):
        cf = ContinuedFraction(pq)
        q = (1,) + cf.q  # prepend q_{-1}
        p = (0,) + cf.p
        for n in range(1, cf.depth + 1):
            assert cf.q[n] == pq[n - 1] * q[n] + q[n - 1]
            assert cf.p[n] == pq[n - 1] * p[n] + p[n - 1]
            assert math.gcd(cf.p[n], cf.q[n]) == 1
            assert math.gcd(cf.q[n], cf.q[n - 1]) == 1

    @given(quotient_lists)
    @settings(max_examples=30, deadline=None)
    def test_norms_strictly_decreasing(self, pq):
        cf = ContinuedFraction(pq)
        norms = [cf.norm_q_alpha(n) for n in range(cf.depth + 1)]
        assert all(norms[n + 1] < norms[n] for n in range(cf.depth))

    def test_best_approximation_brute_force(self):
        # ||q_n alpha|| beats every smaller k, checked by exhaustive search
        cf = build_cf([2, 1, 3, 1, 2, 1, 1, 4])
        alpha = cf.alpha
        n = 0
        while n + 1 <= cf.depth and cf.q[n + 1] <= 1500:
            best = circle_norm(cf.q[n] * alpha)
            for k in range(1, cf.q[n + 1]):
                if k != cf.q[n]:
                    assert circle_norm(k * alpha) > best
            n += 1
        assert n >= 3

    def test_json_round_trip(self):
        cf = build_cf([1, 2, 3, 4])
        again = ContinuedFraction.from_json(cf.to_json())
        assert again.partial_quotients == cf.partial_quotients
        assert again.q == cf.q


class TestCircleNorm:
    @pytest.mark.parametrize("x,expect", [(0, 0), (0.5, 0.5), (0.8, 0.2),
                                          (Fraction(4, 5), Fraction(1, 5))])
    def test_values(self, x, expect):
        assert abs(circle_norm(x) - expect) < 1e-15

    @given(st.floats(min_value=-10, max_value=10, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_range_and_symmetry(self, x):
        v = circle_norm(x)
        assert 0 <= v <= 0.5
        assert abs(circle_norm(-x) - v) < 1e-12

    def test_frac_right_continuous_at_zero(self):
        assert frac(Fraction(0)) == 0
        assert frac(0.0) == 0.0
        assert frac(Fraction(3)) == 0


class TestOrbitPoint:
    def test_m_zero_is_identity(self, cf80):
        assert orbit_point(cf80, Fraction(1, 3), 0) == Fraction(1, 3)

    def test_best_approximation_return(self, cf80):
        for n in (5, 10, 20):
            pt = orbit_point(cf80, 0, cf80.q[n])
            assert circle_norm(pt) == cf80.norm_q_alpha(n)

    def test_two_steps_value(self, cf80):
        assert abs(float(orbit_point(cf80, 0, 2)) - 0.236068) < 1e-6

    def test_additivity_exact(self, cf80):
        x = Fraction(1, 7)
        for m in (1, 17, 301, 12345):
            one_shot = orbit_point(cf80, x, m + 1)
            stepped = orbit_point(cf80, orbit_point(cf80, x, m), 1)
            assert one_shot == stepped

    def test_insufficient_depth(self):
        cf = build_cf([1, 1, 1])
        with pytest.raises(InsufficientDepthError):
            orbit_point(cf, 0, 10**6)

    def test_rejects_huge_m(self, cf80):
        with pytest.raises(InvalidInputError):
            orbit_point(cf80, 0, 10**10)

    def test_orbit_batch_matches_single(self, cf80):
        orb = RotationOrbit(cf80, Fraction(2, 11))
        nums = orb.numerators(-3, 10)
        for i, n in enumerate(range(-3, 7)):
            assert Fraction(nums[i], orb.den) == orbit_point(cf80, Fraction(2, 11), n)

    def test_orbit_floats_correctly_rounded(self, cf80):
        orb = RotationOrbit(cf80, 0)
        vals = orb.floats(0, 50)
        for i in range(50):
            assert abs(vals[i] - float(orb.point(i))) < 1e-15

    def test_indicator_exact(self, cf80):
        orb = RotationOrbit(cf80, Fraction(1, 7))
        nums = orb.numerators(0, 200)
        ind = orb.below(nums, Fraction(1, 2))
        for i in range(200):
            assert ind[i] == (orb.point(i) < Fraction(1, 2))


class TestGeneralPosition:
    def test_half_holds(self, cf80):
        report = general_position(cf80, Fraction(1, 2))
        assert report.verdict == VERDICT_HOLDS
        assert report.tail_max == 0.5

    def test_alpha_fails(self, cf80):
        report = general_position(cf80, cf80.alpha)
        assert report.verdict == VERDICT_FAILS
        assert report.tail_max < 1e-3

    def test_zero_fails(self, cf80):
        assert general_position(cf80, 0).verdict == VERDICT_FAILS

    def test_rational_beta_brute_force(self, cf80):
        beta = Fraction(3, 7)
        report = general_position(cf80, beta, depth=30)
        for n in range(31):
            q = cf80.q[n]
            num = (q * 3) % 7
            exact = min(Fraction(num, 7), 1 - Fraction(num, 7))
            assert abs(report.norms[n] - float(exact)) < 1e-15

    def test_depth_cap(self, cf80):
        with pytest.raises(InvalidInputError):
            general_position(cf80, Fraction(1, 2), depth=cf80.depth + 1)

    def test_csv_rows_shape(self, cf80):
        report = general_position(cf80, Fraction(1, 2), depth=10)
        rows = list(report.csv_rows())
        assert len(rows) == 11
        n, qn, na, nb = rows[4]
        assert qn == cf80.q[4]


class TestParityCertificate:
    def test_golden_pairs_covered(self, cf80):
        odd = parity_certificate(cf80, 12)
        odd_set = set(odd)
        for n in range(12):
            assert n in odd_set or (n + 1) in odd_set
        for n in odd:
            assert cf80.q[n] % 2 == 1
            assert circle_norm(Fraction(cf80.q[n], 2)) == Fraction(1, 2)

    def test_even_quotients(self):
        cf = build_cf([2] * 12)
        odd = parity_certificate(cf)
        assert odd  # parity recurrence keeps odd terms appearing

    @given(quotient_lists)
    @settings(max_examples=25, deadline=None)
    def test_every_pair_hit(self, pq):
        cf = ContinuedFraction(pq)
        odd = set(parity_certificate(cf))
        for n in range(cf.depth):
            assert n in odd or (n + 1) in odd

    def test_needs_depth_two(self, cf80):
        with pytest.raises(InvalidInputError):
            parity_certificate(cf80, 1)


class TestReciprocalRelation:
    def test_half_found(self, cf80):
        res = search_reciprocal_relation(Fraction(1, 2), cf80, 50)
        assert res.found
        l, k, p = res.witness
        assert l + 2 * l == 2 * p and k == 0

    def test_alpha_itself_found(self, cf80):
        res = search_reciprocal_relation(cf80.alpha, cf80, 50)
        assert res.found
        assert res.witness[1] != 0  # needs the alpha direction

    def test_one_over_pi_not_found(self, cf80):
        res = search_reciprocal_relation(1 / math.pi, cf80, 50)
        assert not res.found
        assert res.bound == 50

    def test_rejects_out_of_range(self, cf80):
        with pytest.raises(InvalidInputError):
            search_reciprocal_relation(1.5, cf80, 10)
        with pytest.raises(InvalidInputError):
            search_reciprocal_relation(0.5, cf80, 0)

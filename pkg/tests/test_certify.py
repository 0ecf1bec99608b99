"""Certificates against direct multiplication, literal enumeration, mpmath."""

from fractions import Fraction

import mpmath as mp
import pytest

from dmlab.certify import (
    Conclusion,
    LimitVerdict,
    PackingVerdict,
    certify_fat_thick,
    certify_thin_porous,
    combine_fatness_constants,
    cutout_lower_bound,
    inflated_remainder_check,
    interval_packing_verdict,
    logfloor_schedule_mass,
    logfloor_vanishing_stage,
    power_tail_lower,
    power_tail_upper,
    product_bracket,
    solve_inflation_exponent,
    tail_domination_start,
)
from dmlab.doubling import doubling_scan
from dmlab.enclosure import pow_bounds
from dmlab.errors import (
    LengthMismatch,
    NotInEllT,
    PreconditionViolated,
    SeriesConverges,
)
from dmlab.geom import CutOutConfig, closed
from dmlab.measure import BinomialWeights, TreeMeasure
from dmlab.seq import Constant, ExplicitFinite, Geometric, LogFloor, Power, term

from helpers import direct_product, logfloor_mass_oracle

mp.mp.prec = 250


def mpf(x: Fraction):
    return mp.mpf(x.numerator) / mp.mpf(x.denominator)


class TestProductBracket:
    def test_partial_matches_direct_multiplication(self):
        g = Geometric(Fraction(1, 2), Fraction(1, 2))
        pb = product_bracket(g, 100)
        oracle = direct_product([term(g, n) for n in range(1, 101)])
        assert pb.partial == oracle
        assert pb.lower_value <= oracle  # the infinite tail only shrinks it
        assert pb.upper_value >= pb.lower_value

    def test_encloses_q_pochhammer_limit(self):
        pb = product_bracket(Geometric(Fraction(1, 2), Fraction(1, 2)), 60)
        limit = mp.qp(mp.mpf(1) / 2)  # prod_{n>=1}(1 - 2^-n)
        assert mpf(pb.lower_value) <= limit <= mpf(pb.upper_value)
        assert pb.width < Fraction(1, 10**12)

    def test_telescoping_family_encloses_half(self):
        pb = product_bracket(Power(Fraction(1), 2, 1), 200)
        assert pb.encloses(Fraction(1, 2))
        assert pb.width < Fraction(1, 20)

    def test_finite_family_is_exact(self):
        f = ExplicitFinite((Fraction(1, 2), Fraction(1, 3)))
        pb = product_bracket(f, 2)
        assert pb.lower_value == pb.upper_value == Fraction(1, 3)

    def test_divergent_family_floors_at_zero(self):
        pb = product_bracket(Constant(Fraction(1, 2)), 20)
        assert pb.lower_value == 0
        assert pb.upper_value <= pb.partial

    def test_rejects_terms_at_one(self):
        with pytest.raises(PreconditionViolated):
            product_bracket(Power(Fraction(1), 1, 0), 5)  # first term is 1


class TestFatCertificates:
    def test_positive_with_unit_scale(self):
        cert = certify_fat_thick(
            Geometric(Fraction(1, 2), Fraction(1, 2)), Fraction(1), Fraction(1)
        )
        assert cert.conclusion is Conclusion.POSITIVE
        assert cert.n0 == 1
        # frozen reference value, accurate to ten decimal places
        frozen = Fraction("2887880951") / 10**10
        tol = Fraction(1, 10**8)
        assert abs(cert.bound.lower_value - frozen) <= tol
        assert abs(cert.bound.upper_value - frozen) <= tol
        # the true limit sits strictly inside the certified bracket
        limit = mp.qp(mp.mpf(1) / 2)
        assert mpf(cert.bound.lower_value) <= limit <= mpf(cert.bound.upper_value)

    def test_larger_scale_shifts_start(self):
        cert = certify_fat_thick(
            Geometric(Fraction(1, 2), Fraction(1, 2)), Fraction(1), Fraction(4)
        )
        assert cert.n0 == 3  # first stage with 4 * 2^-n < 1
        assert cert.conclusion is Conclusion.POSITIVE

    def test_divergent_family_rejected(self):
        with pytest.raises(NotInEllT):
            certify_fat_thick(Constant(Fraction(1, 2)), Fraction(1), Fraction(1))

    def test_combine_constants_exact_case(self):
        got = combine_fatness_constants(
            c=Fraction(1, 2), t=Fraction(2), c1=Fraction(3), c2=Fraction(5),
            doubling_c=Fraction(2), m=3,
        )
        assert got == 4 * 3 * 5 * 8  # (1/2)^-2 * c1 * c2 * C^m


class TestThinCertificates:
    def test_constant_half_decays_dyadically(self):
        cert = certify_thin_porous(
            Constant(Fraction(1, 2)), Fraction(1), Fraction(1), Fraction(1, 1000)
        )
        assert cert.n_star == 10
        assert cert.decay_curve == tuple(Fraction(1, 1 << n) for n in range(1, 11))

    def test_harmonic_telescopes(self):
        cert = certify_thin_porous(
            Power(Fraction(1), 1, 0), Fraction(1), Fraction(1), Fraction(1, 10)
        )
        assert cert.n_star == 11
        assert cert.skipped_stages == (1,)  # the stage with factor 1 - 1 = 0
        # after the skip the curve telescopes to exactly 1/n
        assert cert.decay_curve[-1] == Fraction(1, 11)
        for n in range(2, 12):
            assert cert.decay_curve[n - 1] == Fraction(1, n)

    def test_convergent_holes_refused(self):
        with pytest.raises(SeriesConverges):
            certify_thin_porous(
                Geometric(Fraction(1, 2), Fraction(1, 2)),
                Fraction(1),
                Fraction(1),
                Fraction(1, 10),
            )

    def test_scale_constant_validated(self):
        with pytest.raises(PreconditionViolated):
            certify_thin_porous(
                Constant(Fraction(1, 2)), Fraction(1), Fraction(2), Fraction(1, 10)
            )


class TestInflationExponent:
    def test_frozen_grid_values(self):
        got = solve_inflation_exponent(Fraction(1), Fraction(1), Fraction(1), Fraction(6))
        assert got == Fraction(166, 64)
        got = solve_inflation_exponent(Fraction(1), Fraction(1), Fraction(1), Fraction(12))
        assert got == Fraction(102, 64)

    def test_grid_minimality(self):
        big_lam, t, d, eps = Fraction(1), Fraction(1), Fraction(1), Fraction(1, 2)
        q = solve_inflation_exponent(big_lam, t, d, eps)
        threshold = eps / 6

        def lhs(exponent: Fraction):
            return pow_bounds(Fraction(2), 1 - t * exponent, 256)

        assert big_lam * 3 * lhs(q).hi < threshold
        assert big_lam * 3 * lhs(q - Fraction(1, 64)).lo >= threshold


class TestPowerTails:
    def test_tail_sandwich_against_reference(self):
        up = power_tail_upper(Fraction(2), 10)
        lo = power_tail_lower(Fraction(2), 10)
        true = mp.nsum(lambda m: 1 / m**2, [10, mp.inf])
        assert mpf(lo) <= true <= mpf(up)
        assert up - lo < Fraction(1, 50)

    def test_domination_start_small_case(self):
        # tail of m^-2 must drop below eps * N^-gamma
        assert tail_domination_start(Fraction(1), Fraction(2), Fraction(1, 2)) == 2
        # N = 1 certifiably fails: the full tail already exceeds eps * 1
        assert power_tail_lower(Fraction(2), 1) > 1
        # every N in the certified range keeps holding
        for n in range(2, 9):
            tail = power_tail_upper(Fraction(2), n)
            assert tail < pow_bounds(Fraction(n), Fraction(-1, 2), 256).lo

    def test_domination_start_tight_case(self):
        got = tail_domination_start(Fraction(1, 10), Fraction(3), Fraction(1))
        assert got == 6
        # reference check on both sides of the boundary
        for n, should_hold in ((5, False), (6, True)):
            tail = mp.nsum(lambda m: 1 / m**3, [n, mp.inf])
            assert (tail < mp.mpf(1) / 10 / n) == should_hold

    def test_exponent_gap_required(self):
        with pytest.raises(PreconditionViolated):
            tail_domination_start(Fraction(1), Fraction(3, 2), Fraction(1))


def nested_ball_config(count: int = 64) -> CutOutConfig:
    balls = [closed(0, Fraction(1, 1 << i)) for i in range(1, count + 1)]
    return CutOutConfig(balls, diam_family=Geometric(Fraction(1, 2), Fraction(1, 2)))


@pytest.fixture(scope="module")
def scan():
    return doubling_scan(TreeMeasure(BinomialWeights(Fraction(1, 2))), 6)


class TestCutoutBound:

    def test_enough_balls_certify_survival(self, scan):
        bound = cutout_lower_bound(nested_ball_config(), scan, Fraction(1), 18, Fraction(1, 4))
        assert bound.conclusion is Conclusion.POSITIVE
        assert Fraction(7, 1000) < bound.value < Fraction(72, 10000)
        assert bound.gap.lo == Fraction(1, 2) and bound.gap_diameter == Fraction(1, 2)

    def test_few_balls_stay_inconclusive(self, scan):
        bound = cutout_lower_bound(nested_ball_config(), scan, Fraction(1), 4, Fraction(1, 4))
        assert bound.conclusion is Conclusion.INCONCLUSIVE
        assert bound.value < 0

    def test_diameter_power_sum_matches_geometric_series(self, scan):
        bound = cutout_lower_bound(nested_ball_config(), scan, Fraction(1), 18, Fraction(1, 4))
        true = 1 / (mp.power(2, mp.mpf(1) / 4) - 1)  # sum of 2^(-i/4)
        assert true <= mpf(bound.diam_power_sum_upper) <= true + mp.mpf(1) / 1000

    def test_window_fit_required(self, lebesgue):
        bare = doubling_scan(lebesgue, 4, fit=False)
        with pytest.raises(PreconditionViolated):
            cutout_lower_bound(nested_ball_config(), bare, Fraction(1), 8, Fraction(1, 4))

    def test_exponent_window_must_open(self, scan):
        from dmlab.errors import ExponentWindowEmpty

        with pytest.raises(ExponentWindowEmpty):
            cutout_lower_bound(nested_ball_config(), scan, Fraction(1), 8, Fraction(1))

    def test_inflated_remainder_survives(self, scan, lebesgue):
        q = solve_inflation_exponent(
            scan.mass_window.big_lam, scan.mass_window.t, Fraction(1), Fraction(1, 2)
        )
        check = inflated_remainder_check(
            lebesgue, nested_ball_config(), 18, q, Fraction(1, 2), 20
        )
        assert check.passed
        assert check.remaining_lower > check.slack_required


class TestRemovalSchedule:
    def test_literal_enumeration_agrees(self):
        # third route: simulate surviving words explicitly (stages <= 7)
        for p in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
            for stages in (1, 3, 5, 7):
                report = logfloor_schedule_mass(p, stages)
                assert report.match_exact
                assert report.stage_partials[-1] == logfloor_mass_oracle(p, stages)

    def test_stage_four_known_value(self):
        report = logfloor_schedule_mass(Fraction(1, 3), 4)
        assert report.stage_partials[-1] == Fraction(256, 729)

    def test_brute_force_skipped_above_limit(self):
        report = logfloor_schedule_mass(Fraction(1, 3), 600)
        assert report.brute_force is None and report.match_exact is None

    def test_verdicts_split_at_half(self):
        assert logfloor_schedule_mass(Fraction(1, 3), 4).verdict is LimitVerdict.POSITIVE_LIMIT
        assert logfloor_schedule_mass(Fraction(2, 3), 4).verdict is LimitVerdict.ZERO_LIMIT

    def test_vanishing_stage_for_heavy_weight(self):
        stage, value = logfloor_vanishing_stage(Fraction(2, 3), Fraction(1, 10**6))
        assert stage == 51
        assert value < Fraction(1, 10**6)
        # the previous stage was still above the threshold
        prior = logfloor_schedule_mass(Fraction(2, 3), 50).stage_partials[-1]
        assert prior >= Fraction(1, 10**6)


class TestPackings:
    def test_disjoint_is_thin(self):
        lengths = ExplicitFinite((Fraction(1, 2), Fraction(1, 2)))
        ivs = [closed(0, Fraction(1, 2)), closed(Fraction(1, 2), 1)]
        assert interval_packing_verdict(ivs, lengths, Fraction(1)) is PackingVerdict.THIN

    def test_overlap_is_fat(self):
        lengths = ExplicitFinite((Fraction(1, 2), Fraction(1, 2)))
        ivs = [closed(0, Fraction(1, 2)), closed(Fraction(1, 4), Fraction(3, 4))]
        assert interval_packing_verdict(ivs, lengths, Fraction(1)) is PackingVerdict.FAT

    def test_empty_is_fat(self):
        lengths = ExplicitFinite((Fraction(1, 2), Fraction(1, 2)))
        assert interval_packing_verdict([], lengths, Fraction(1)) is PackingVerdict.FAT

    def test_wrong_length_rejected(self):
        lengths = ExplicitFinite((Fraction(1, 2), Fraction(1, 2)))
        ivs = [closed(0, Fraction(1, 3)), closed(Fraction(1, 2), 1)]
        with pytest.raises(LengthMismatch):
            interval_packing_verdict(ivs, lengths, Fraction(1))

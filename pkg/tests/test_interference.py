"""Effective SNR, interferer MI and its derivative, MI additivity, and the
capacity-region corner points for all three interference regimes.

Expected rate values are pinned against high-precision mpmath evaluations of
the closed-form expressions.
"""

import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giclab.dists import Discrete, Gaussian, Mixture, bpsk, pam
from giclab.immse import mutual_information
from giclab.interference import (
    InterferenceParams,
    RatePair,
    chain_rule_check,
    corner_point_mixed,
    corner_point_z,
    corner_points_weak,
    corner_report,
    effective_snr,
    interference_mi,
    interference_mi_derivative,
    mmse_w,
    tin_optimal_b_interval,
    zero_mmse_threshold,
)
from giclab.mmse import mmse

mpmath.mp.dps = 40

P = InterferenceParams(10.0, 10.0, 0.5, 0.0)
# unit variance: 0.6 * 0.5 + 0.4 * 1.75 = 1
_C = math.sqrt(1.75)
GAUSS_MIX = Mixture(((0.6, Gaussian(0.0, 0.5)),
                     (0.4, Discrete((-_C, _C), (0.5, 0.5)))))


def half_log1p(x) -> float:
    return float(0.5 * mpmath.log(1 + mpmath.mpf(x)))


class TestEffectiveSnr:
    def test_hand_value(self):
        assert effective_snr(1.0, P) == pytest.approx(5 / 11, abs=1e-15)

    def test_zero(self):
        assert effective_snr(0.0, P) == 0.0

    def test_large_gamma_asymptote(self):
        asym = P.a * P.snr2 / P.snr1
        got = effective_snr(1e6, P)
        assert abs(got - asym) / asym < 1e-4

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            effective_snr(-0.1, P)


class TestZeroMmseThreshold:
    def test_value(self):
        assert zero_mmse_threshold(P) == pytest.approx(5 / 11, abs=1e-15)

    def test_linear_in_a(self):
        t1 = zero_mmse_threshold(InterferenceParams(10, 10, 0.1))
        t2 = zero_mmse_threshold(InterferenceParams(10, 10, 0.2))
        assert t2 == pytest.approx(2 * t1, rel=1e-12)

    def test_large_snr1_limit(self):
        p = InterferenceParams(1e6, 10.0, 0.5)
        expected = float(mpmath.mpf("0.5") * 10 / (1 + mpmath.mpf(1e6)))
        assert zero_mmse_threshold(p) == pytest.approx(expected, rel=1e-9)


class TestInterferenceMi:
    def test_gaussian_at_transition(self):
        # half log(16/11); the independent high-precision value
        assert interference_mi(Gaussian(0, 1), 1.0, P) == pytest.approx(
            half_log1p(mpmath.mpf(5) / 11), abs=1e-9)

    def test_zero_gamma(self):
        for z in (Gaussian(0, 1), bpsk()):
            assert interference_mi(z, 0.0, P) == 0.0

    @pytest.mark.parametrize("z", [Gaussian(0, 1), bpsk()])
    def test_flat_above_transition(self, z):
        assert interference_mi(z, 3.0, P) == interference_mi(z, 1.0, P)

    @pytest.mark.parametrize("z", [Gaussian(0, 1), bpsk(), pam(4)])
    def test_matches_clean_channel_at_threshold(self, z):
        via_gamma = interference_mi(z, 1.0, P)
        via_threshold = mutual_information(z, zero_mmse_threshold(P))
        assert abs(via_gamma - via_threshold) < 1e-9

    @pytest.mark.parametrize("z", [Gaussian(0, 1), bpsk()])
    def test_nondecreasing_in_gamma(self, z):
        grid = np.linspace(0.0, 1.4, 20)
        vals = [interference_mi(z, float(g), P) for g in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_gaussian_maximizes_at_transition(self):
        best = interference_mi(Gaussian(0, 1), 1.0, P)
        for z in (bpsk(), pam(4), GAUSS_MIX):
            assert interference_mi(z, 1.0, P) <= best + 1e-12


class TestDerivative:
    def test_gamma_zero_gaussian(self):
        # mmse at snr 0 is the unit variance; scale a*snr2 = 5
        assert interference_mi_derivative(Gaussian(0, 1), 0.0, P) == pytest.approx(
            2.5, abs=1e-12)

    def test_deterministic_interferer(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            got = interference_mi_derivative(Discrete((0.0,), (1.0,)), 0.5, P)
        assert got == 0.0

    def test_bpsk_formula_and_finite_difference(self):
        gamma = 0.5
        direct = interference_mi_derivative(bpsk(), gamma, P)
        expected = 0.5 * mmse(bpsk(), 5 / 12) * 5 / 36
        assert direct == pytest.approx(expected, rel=1e-12)
        h = 1e-4
        fd = (interference_mi(bpsk(), gamma + h, P)
              - interference_mi(bpsk(), gamma - h, P)) / (2 * h)
        assert abs(fd - direct) < 1e-5

    @pytest.mark.parametrize("z", [Gaussian(0, 1), bpsk(), pam(4)])
    @pytest.mark.parametrize("gamma", [0.3, 0.7])
    def test_finite_difference_spot_checks(self, z, gamma):
        h = 1e-4
        fd = (interference_mi(z, gamma + h, P) - interference_mi(z, gamma - h, P)) / (2 * h)
        assert abs(fd - interference_mi_derivative(z, gamma, P)) < 1e-5

    def test_rejects_gamma_at_or_above_one(self):
        for g in (1.0, 1.5):
            with pytest.raises(ValueError):
                interference_mi_derivative(Gaussian(0, 1), g, P)

    def test_warns_on_non_unit_variance(self):
        with pytest.warns(UserWarning):
            interference_mi_derivative(Gaussian(0, 2.0), 0.5, P)


class TestMmseW:
    def test_deterministic_interferer_gamma_zero(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            got = mmse_w(Discrete((0.0,), (1.0,)), 0.0, P)
        assert got == pytest.approx(10.0, abs=1e-12)

    def test_gaussian_gamma_zero(self):
        assert mmse_w(Gaussian(0, 1), 0.0, P) == pytest.approx(15.0, abs=1e-12)

    def test_gaussian_near_transition(self):
        # closed form: 10/11 + (5/121) * (11/16)
        expected = float(mpmath.mpf(10) / 11 + mpmath.mpf(5) / 176)
        assert mmse_w(Gaussian(0, 1), 1.0 - 1e-12, P) == pytest.approx(
            expected, abs=1e-9)

    def test_rejects_gamma_one(self):
        with pytest.raises(ValueError):
            mmse_w(Gaussian(0, 1), 1.0, P)

    @pytest.mark.parametrize("z", [Gaussian(0, 1), bpsk(), pam(4)])
    @pytest.mark.parametrize("gamma", [0.0, 0.25, 0.6, 0.95])
    def test_derivative_identity(self, z, gamma):
        # the combined-signal MSE splits into the interferer derivative part
        # plus the intended-code part; identical algebra on both sides
        lhs = 2 * interference_mi_derivative(z, gamma, P) + P.snr1 / (1 + gamma * P.snr1)
        assert abs(lhs - mmse_w(z, gamma, P)) < 1e-9


class TestChainRule:
    def test_at_transition(self):
        rep = chain_rule_check(Gaussian(0, 1), 1.0, P)
        assert rep.passed and rep.max_abs_error < 1e-9
        # both sides equal half log 16
        assert rep.rows[0]["joint_closed_form"] == pytest.approx(
            half_log1p(15), abs=1e-12)

    def test_at_zero(self):
        rep = chain_rule_check(Gaussian(0, 1), 0.0, P)
        assert rep.passed and rep.rows[0]["joint_closed_form"] == 0.0

    def test_generic_parameters(self):
        p = InterferenceParams(4.0, 8.0, 0.75, 0.0)
        rep = chain_rule_check(Gaussian(0, 1), 0.25, p)
        assert rep.passed and rep.max_abs_error < 1e-9

    def test_rejects_non_gaussian(self):
        with pytest.raises(ValueError):
            chain_rule_check(bpsk(), 0.5, P)
        with pytest.raises(ValueError):
            chain_rule_check(Gaussian(0, 2.0), 0.5, P)


class TestCornerPoints:
    def test_z_corner_values(self):
        corner = corner_point_z(P)
        assert corner.rx == pytest.approx(half_log1p(10), abs=1e-9)
        assert corner.rz == pytest.approx(half_log1p(mpmath.mpf(5) / 11), abs=1e-9)

    def test_z_corner_vanishing_interference(self):
        p = InterferenceParams(10.0, 1e-9, 0.5)
        assert corner_point_z(p).rz < 1e-9

    def test_z_corner_near_unity_a(self):
        p = InterferenceParams(1.0, 1.0, 0.999)
        corner = corner_point_z(p)
        assert corner.rx == pytest.approx(half_log1p(1), abs=1e-12)
        assert corner.rz == pytest.approx(half_log1p(0.999 / 2), abs=1e-12)

    def test_z_corner_warns_with_b(self):
        with pytest.warns(UserWarning):
            corner_point_z(InterferenceParams(10, 10, 0.5, 0.3))

    def test_weak_second_corner(self):
        p = InterferenceParams(10, 10, 0.5, 0.3)
        _, second = corner_points_weak(p)
        assert second.rx == pytest.approx(half_log1p(mpmath.mpf(3) / 11), abs=1e-9)
        assert second.rz == pytest.approx(half_log1p(10), abs=1e-9)

    def test_weak_first_equals_z_corner(self):
        p = InterferenceParams(10, 10, 0.5, 0.3)
        first, _ = corner_points_weak(p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            z = corner_point_z(p)
        assert first == z

    def test_weak_symmetry_mirror(self):
        p = InterferenceParams(7.0, 7.0, 0.5, 0.5)
        first, second = corner_points_weak(p)
        assert first.rx == second.rz and first.rz == second.rx

    def test_weak_rejects_bad_b(self):
        for b in (0.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                corner_points_weak(InterferenceParams(10, 10, 0.5, b))

    def test_mixed_corner_and_mac(self):
        p = InterferenceParams(10, 10, 0.5, 1.5)
        corner, mac = corner_point_mixed(p)
        assert corner.rz == pytest.approx(half_log1p(mpmath.mpf(5) / 11), abs=1e-9)
        expected_mac = float(0.5 * mpmath.log(mpmath.mpf(26) / 11))
        assert mac.rz == pytest.approx(expected_mac, abs=1e-9)

    def test_mixed_rejects_weak_b(self):
        with pytest.raises(ValueError):
            corner_point_mixed(InterferenceParams(10, 10, 0.5, 0.5))

    def test_mixed_corner_below_mac_on_random_grid(self):
        rng = np.random.Generator(np.random.Philox(key=77))
        for _ in range(1000):
            p = InterferenceParams(
                snr1=float(rng.uniform(0.01, 100.0)),
                snr2=float(rng.uniform(0.01, 100.0)),
                a=float(rng.uniform(1e-6, 1.0 - 1e-6)),
                b=float(rng.uniform(1.0, 10.0)),
            )
            corner, mac = corner_point_mixed(p)
            assert corner.rz <= mac.rz + 1e-12

    def test_mixed_gap_closes_as_a_approaches_one(self):
        gaps = []
        for a in (0.9, 0.99, 0.999, 1 - 1e-6):
            p = InterferenceParams(5.0, 5.0, a, 1.0)
            corner, mac = corner_point_mixed(p)
            gaps.append(mac.rz - corner.rz)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-6

    def test_tin_interval(self):
        assert tin_optimal_b_interval(P) == (1.0, pytest.approx(2.1, rel=1e-12))


class TestReportsAndTypes:
    def test_report_z(self):
        rep = corner_report(P, "z", "nats")
        assert rep["regime"] == "z" and rep["units"] == "nats"
        assert rep["corner"][0] == pytest.approx(half_log1p(10), abs=1e-9)

    def test_report_weak_carries_both_corners(self):
        rep = corner_report(InterferenceParams(10, 10, 0.5, 0.3), "weak")
        assert "corner" in rep and "corner2" in rep

    def test_report_mixed_units_bits(self):
        rep = corner_report(InterferenceParams(10, 10, 0.5, 1.5), "mixed", "bits")
        assert rep["corner"][0] == pytest.approx(half_log1p(10) / math.log(2), abs=1e-9)
        assert "mac_bound" in rep and "tin_optimal_b_interval" in rep

    def test_report_rejects_unknown_regime(self):
        with pytest.raises(ValueError):
            corner_report(P, "strong")

    def test_params_validation(self):
        for kwargs in (
            dict(snr1=0.0, snr2=1.0, a=0.5),
            dict(snr1=1.0, snr2=-1.0, a=0.5),
            dict(snr1=1.0, snr2=1.0, a=0.0),
            dict(snr1=1.0, snr2=1.0, a=1.0),
            dict(snr1=1.0, snr2=1.0, a=0.5, b=-0.1),
            dict(snr1=math.inf, snr2=1.0, a=0.5),
        ):
            with pytest.raises(ValueError):
                InterferenceParams(**kwargs)

    def test_rate_pair(self):
        r = RatePair(math.log(2), 2 * math.log(2))
        bits = r.in_bits()
        assert bits.rx == pytest.approx(1.0) and bits.rz == pytest.approx(2.0)
        with pytest.raises(ValueError):
            RatePair(-0.1, 0.0)


@given(
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=0.01, max_value=100.0),
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
    st.floats(min_value=0.0, max_value=1e-3),
)
@settings(max_examples=60)
def test_weak_first_corner_always_matches_z(snr1, snr2, a, _):
    pz = InterferenceParams(snr1, snr2, a, 0.0)
    pw = InterferenceParams(snr1, snr2, a, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert corner_points_weak(pw)[0] == corner_point_z(pz)

import cmath
import math

import numpy as np
import pytest

from phasim.errors import BudgetTooSmallError, ZeroBeatError, ZeroDetuningError
from phasim.perturbation import (
    FourLevelParams,
    first_order_full,
    first_order_resonant,
    nonresonant_amplitude_general,
    quadrature_oracle,
    sample_validity_regime,
    second_order_amplitude,
    second_order_factors,
)
from perturbref import exact_first_order


def plus_params(delta1=1000.0, delta2=1300.0, delta=90.0, t=1.0, k_plus=1.0, k_minus=0.97):
    return FourLevelParams.from_plus_branch(
        omega_s=1e-3, omega_d=1e-3, delta1=delta1, delta2=delta2,
        delta=delta, k_plus=k_plus, k_minus=k_minus, t=t,
    )


def opposite_params(detuning=50.0, omega_d=1.0, omega_s=1.0, t=1.0):
    """Opposite one-photon detunings on both transitions (beat = -2 detuning)."""
    return FourLevelParams(
        omega_s=omega_s,
        omega_d=omega_d,
        delta1_plus=detuning,
        delta1_minus=-detuning,
        delta2_plus=detuning,
        delta2_minus=-detuning,
        delta=-2.0 * detuning,
        k_plus=1.0,
        k_minus=0.97,
        t=t,
    )


class TestFourLevelParams:
    def test_consistent_construction(self):
        p = plus_params()
        assert p.delta1_minus - p.delta1_plus == pytest.approx(p.delta)
        assert p.delta2_minus - p.delta2_plus == pytest.approx(p.delta)

    def test_inconsistent_beat_rejected(self):
        with pytest.raises(ValueError):
            FourLevelParams(
                omega_s=1.0, omega_d=1.0,
                delta1_plus=100.0, delta1_minus=150.0,
                delta2_plus=200.0, delta2_minus=200.5,
                delta=50.0, k_plus=1.0, k_minus=1.0, t=1.0,
            )

    def test_regime_flags(self):
        assert plus_params().deep_detuned
        assert not plus_params(delta1=1.0, delta2=1.0, delta=0.5).deep_detuned


class TestFirstOrderResonant:
    def test_two_path_amplitude_at_origin(self):
        p = opposite_params(omega_s=1e-3, omega_d=1e-3)
        # equal branch products: amplitude 2i omega_s^2 omega_d t / (d1 d2)
        amp = first_order_resonant(p, 0.0)
        expected = 2j * p.omega_s**2 * p.omega_d * p.t / (p.delta1_plus * p.delta2_plus)
        assert amp == pytest.approx(expected, rel=1e-12)
        prob = abs(amp) ** 2
        two_path_scale = abs(p.omega_s**2 * p.omega_d * p.t / (p.delta1_plus * p.delta2_plus)) ** 2
        assert prob == pytest.approx(2.0 * two_path_scale * (1.0 + math.cos(0.0)), rel=1e-12)

    def test_fringe_null(self):
        p = opposite_params(omega_s=1e-3, omega_d=1e-3)
        x = 0.5 * math.pi / (p.k_plus - p.k_minus)  # (k+ - k-) x = pi/2
        assert abs(first_order_resonant(p, x)) ** 2 == pytest.approx(0.0, abs=1e-40)

    def test_fringe_periodicity_and_extrema(self):
        p = opposite_params(omega_s=1e-3, omega_d=1e-3)
        period = math.pi / (p.k_plus - p.k_minus)
        xs = np.linspace(0.0, period, 64, endpoint=False)
        probs = np.array([abs(first_order_resonant(p, x)) ** 2 for x in xs])
        shifted = np.array([abs(first_order_resonant(p, x + period)) ** 2 for x in xs])
        assert np.allclose(probs, shifted, rtol=1e-9, atol=1e-40)
        top = 4.0 * abs(p.omega_s**2 * p.omega_d * p.t / (p.delta1_plus * p.delta2_plus)) ** 2
        assert probs.max() == pytest.approx(top, rel=1e-3)
        assert probs.min() <= 1e-3 * top

    def test_linear_in_time(self):
        p = plus_params(t=2.0)
        p_scaled = plus_params(t=7.0)
        ratio = first_order_resonant(p_scaled, 0.3) / first_order_resonant(p, 0.3)
        assert ratio == pytest.approx(3.5, rel=1e-12)

    def test_zero_detuning_raises(self):
        p = FourLevelParams(
            omega_s=1.0, omega_d=1.0,
            delta1_plus=0.0, delta1_minus=50.0,
            delta2_plus=10.0, delta2_minus=60.0,
            delta=50.0, k_plus=1.0, k_minus=1.0, t=1.0,
        )
        with pytest.raises(ZeroDetuningError):
            first_order_resonant(p, 0.0)


class TestFirstOrderFull:
    def test_cross_terms_vanish_at_full_beats(self):
        # beat-time an exact multiple of 2 pi: every (e^{ij dt} - 1) factor dies
        t = 1.0
        delta = 6.0 * math.pi / t
        p = plus_params(delta1=2000.0, delta2=2600.0, delta=delta, t=t)
        for x in (0.0, 0.4, 1.9):
            full = first_order_full(p, x)
            res = first_order_resonant(p, x)
            assert abs(full - res) / abs(res) < 1e-12

    def test_beat_suppression_of_cross_terms(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            d1 = rng.uniform(1e6, 2e6)
            p = plus_params(delta1=d1, delta2=d1 * rng.uniform(0.9, 1.1), delta=1000.0)
            x = rng.uniform(0.0, math.pi)
            full = first_order_full(p, x)
            res = first_order_resonant(p, x)
            assert abs(full - res) / abs(res) < 10.0 / (p.delta * p.t)

    def test_suppression_scales_with_beat(self):
        worst = {}
        for dt in (1e2, 1e3, 1e4):
            rng = np.random.default_rng(11)
            ratios = []
            for _ in range(100):
                x = rng.uniform(0.0, math.pi)
                p = plus_params(delta1=3e6, delta2=3.3e6, delta=dt, t=1.0)
                full = first_order_full(p, x)
                res = first_order_resonant(p, x)
                ratios.append(abs(full - res) / abs(res))
            worst[dt] = max(ratios)
        # at-least-linear decay: the scaled deviation stays bounded while
        # the raw deviation keeps falling (the oscillating prefactor alone
        # fluctuates between 0 and 2, so pointwise ratios are not exact)
        for dt, value in worst.items():
            assert value * dt <= 4.0
        assert worst[1e4] < worst[1e3] < worst[1e2]

    def test_matches_exact_integral_in_regime(self):
        for params, x in sample_validity_regime(seed=414, count=3):
            closed = first_order_full(params, x)
            exact = exact_first_order(params, x)
            assert abs(closed - exact) / abs(exact) < 1e-6

    def test_zero_beat_raises(self):
        p = FourLevelParams(
            omega_s=1.0, omega_d=1.0,
            delta1_plus=100.0, delta1_minus=100.0,
            delta2_plus=130.0, delta2_minus=130.0,
            delta=0.0, k_plus=1.0, k_minus=1.0, t=1.0,
        )
        with pytest.raises(ZeroBeatError):
            first_order_full(p, 0.0)


class TestQuadratureOracle:
    def test_zero_coupling_gives_zero(self):
        p = FourLevelParams(
            omega_s=0.0, omega_d=1.0,
            delta1_plus=100.0, delta1_minus=150.0,
            delta2_plus=130.0, delta2_minus=180.0,
            delta=50.0, k_plus=1.0, k_minus=1.0, t=1.0,
        )
        assert quadrature_oracle(p, 0.0) == 0.0

    def test_matches_exact_integral(self):
        # moderate detunings keep the oracle cheap; the analytic nested
        # integral is exact there, closed forms are not
        rng = np.random.default_rng(12)
        for _ in range(6):
            d1 = rng.uniform(1e3, 1e4)
            p = plus_params(
                delta1=d1, delta2=d1 * rng.uniform(0.8, 1.3), delta=rng.uniform(30.0, 90.0)
            )
            x = rng.uniform(0.0, math.pi)
            oracle = quadrature_oracle(p, x)
            exact = exact_first_order(p, x)
            assert abs(oracle - exact) / abs(exact) < 1e-10

    def test_matches_closed_form_in_regime(self):
        for params, x in sample_validity_regime(seed=414, count=2):
            closed = first_order_full(params, x)
            oracle = quadrature_oracle(params, x, nodes_per_period=20)
            assert abs(closed - oracle) / abs(oracle) < 1e-6

    def test_budget_doubling_converged(self):
        rng = np.random.default_rng(13)
        for _ in range(3):
            d1 = rng.uniform(5e3, 2e4)
            p = plus_params(delta1=d1, delta2=1.1 * d1, delta=60.0)
            x = rng.uniform(0.0, math.pi)
            base = quadrature_oracle(p, x, nodes_per_period=20)
            doubled = quadrature_oracle(p, x, nodes_per_period=40)
            assert abs(base - doubled) / abs(doubled) < 1e-8

    def test_budget_floor(self):
        with pytest.raises(BudgetTooSmallError):
            quadrature_oracle(plus_params(), 0.0, nodes_per_period=19)

    def test_higher_orders_rejected(self):
        with pytest.raises(ValueError):
            quadrature_oracle(plus_params(), 0.0, order=2)


class TestSecondOrder:
    def test_opposite_detunings_cancel(self):
        r1, r2, r3 = second_order_factors(opposite_params())
        assert r1 == 0.0
        assert r2 == 0.0
        assert abs(r1) <= 1e-15 and abs(r2) <= 1e-15
        assert r3 != 0.0

    def test_zero_drive_kills_r3(self):
        p = opposite_params(omega_d=0.0)
        assert second_order_factors(p)[2] == 0.0

    def test_hand_value(self):
        p = FourLevelParams(
            omega_s=1.0, omega_d=1.0,
            delta1_plus=100.0, delta1_minus=150.0,
            delta2_plus=200.0, delta2_minus=250.0,
            delta=50.0, k_plus=1.0, k_minus=1.0, t=1.0,
        )
        r1, r2, r3 = second_order_factors(p)
        assert r1 == pytest.approx(1.0 / 100.0 + 1.0 / 150.0, rel=1e-12)
        assert r2 == pytest.approx(1.0 / 200.0 + 1.0 / 250.0, rel=1e-12)
        assert r3 == pytest.approx(121.0 / 720000.0, rel=1e-12)

    def test_opposite_limit_of_r3(self):
        # with opposite detunings the averaged exchange terms give 4/3 / d^2
        p = opposite_params(detuning=50.0, omega_d=1.0)
        r3 = second_order_factors(p)[2]
        assert r3 == pytest.approx((4.0 / 3.0) / 2500.0, rel=1e-12)

    def test_amplitude_ratio_suppressed(self):
        p = opposite_params(detuning=50.0, omega_d=1.0, omega_s=1.0)
        assert p.omega_d**2 / abs(p.delta1_plus * p.delta2_plus) < 1e-3
        first = first_order_resonant(p, 0.0)
        second = second_order_amplitude(p, 2.0 * p.k_plus * 0.0, 2.0 * p.k_minus * 0.0)
        assert abs(second) / abs(first) < 2e-3

    def test_factorization(self):
        p = plus_params(delta1=120.0, delta2=170.0, delta=40.0)
        r1, r2, r3 = second_order_factors(p)
        phi, fb = 0.8, 2.1
        second = second_order_amplitude(p, phi, fb)
        two_path = abs(
            1j * p.omega_s**2 * p.omega_d * p.t * (
                cmath.exp(2j * phi) / (p.delta1_plus * p.delta2_plus)
                + cmath.exp(2j * fb) / (p.delta1_minus * p.delta2_minus)
            )
        )
        assert abs(second) == pytest.approx(two_path * abs(complex(-r3, r1 - r2)), rel=1e-12)


class TestGeneralNonresonantAmplitude:
    def test_large_beat_reduces_to_two_paths(self):
        omega_eff, t = 1e-4, 1.0
        for n in (2, 4, 8):
            for diff in (0.3, 1.1, 2.0):
                amp = nonresonant_amplitude_general(n, omega_eff, t, 1e8, diff, 0.0)
                target = 2.0 * (omega_eff * t) ** 2 * (1.0 + math.cos(n * diff))
                assert abs(abs(amp) ** 2 - target) / target < 1e-6

    def test_two_photon_peak_value(self):
        omega_eff, t, delta = 2e-4, 1.0, 100.0
        q = (cmath.exp(1j * delta * t) - 1.0) / (1j * delta * t)
        amp = nonresonant_amplitude_general(2, omega_eff, t, delta, 0.7, 0.7)
        expected = omega_eff * t * abs(2.0 + 4.0 * q)
        assert abs(amp) == pytest.approx(expected, rel=1e-12)

    def test_probability_matches_expansion(self):
        # |amplitude|^2 equals the expanded fringe up to the squared
        # exchange term, bounded by 8 (n / dt)^2 (omega_eff t)^2
        rng = np.random.default_rng(14)
        omega_eff, t, delta = 1e-4, 1.0, 100.0
        dt = delta * t
        for n in (2, 4):
            bound = 8.0 * (n / dt) ** 2 * (omega_eff * t) ** 2
            for _ in range(500):
                phi, fb = rng.uniform(0.0, 2.0 * math.pi, size=2)
                amp = nonresonant_amplitude_general(n, omega_eff, t, delta, phi, fb)
                diff = phi - fb
                braces = (
                    1.0
                    + math.cos(n * diff)
                    + 4.0 * (n * math.sin(dt) / dt)
                    * math.cos(0.5 * n * diff)
                    * math.cos(0.5 * (n - 2) * diff)
                )
                expanded = 2.0 * (omega_eff * t) ** 2 * braces
                assert abs(abs(amp) ** 2 - expanded) <= bound

    def test_zero_beat_raises(self):
        with pytest.raises(ZeroBeatError):
            nonresonant_amplitude_general(2, 1e-4, 1.0, 0.0, 0.1, 0.2)

"""Tests for closed-form and quadrature area fractions."""

import itertools
import math

import numpy as np
import pytest

from los_coverage.analytic import (
    AreaFraction,
    GammaVariant,
    IntegrandForm,
    Method,
    QuadratureError,
    QuadratureSettings,
    additive_error_gamma,
    additive_rsu_fraction,
    linear_fraction,
    relay_gain_ratio,
    relay_miss_integral,
    road_area_fraction,
    theorem1_area_fraction,
    theorem2_area_fraction,
    theorem2_printed_display,
)

KM = 1e-3


def relay_fraction_reference(lambda_l, mu, gamma, eta):
    """Relay coverage with the per-line integral in closed form (I = 3 gamma)."""
    return 1 - math.exp(-lambda_l * eta * (1 - math.exp(-3 * mu * gamma)))


class TestClosedForms:
    """Tests for the closed-form fractions."""

    @pytest.mark.parametrize(
        "lambda_per_km, eta, expected",
        [(5, 100, 0.39347), (3, 100, 0.25918), (10, 100, 0.63212), (3, 200, 0.45119)],
    )
    def test_road_fraction(self, lambda_per_km, eta, expected):
        fraction = road_area_fraction(lambda_per_km * KM, eta)
        assert fraction.value == pytest.approx(expected, abs=5e-5)
        assert fraction.method is Method.CLOSED_FORM

    def test_linear_fraction(self):
        """4 RSUs/km with gamma = 100 m cover 55% of a road."""
        assert linear_fraction(4 * KM, 100) == pytest.approx(0.5507, abs=1e-4)

    @pytest.mark.parametrize(
        "lambda_per_km, mu_per_km, gamma, eta, expected",
        [(3, 4, 50, 100, 0.09417), (5, 4, 100, 100, 0.24072), (3, 4, 150, 100, 0.1891)],
    )
    def test_theorem1(self, lambda_per_km, mu_per_km, gamma, eta, expected):
        value = theorem1_area_fraction(lambda_per_km * KM, mu_per_km * KM, gamma, eta).value
        assert value == pytest.approx(expected, abs=1e-4)

    def test_theorem1_degenerate(self):
        """No roads, no RSUs or no LOS give zero coverage."""
        assert theorem1_area_fraction(0.0, 0.004, 100, 100).value == 0.0
        assert theorem1_area_fraction(0.005, 0.0, 100, 100).value == 0.0
        assert theorem1_area_fraction(0.005, 0.004, 0.0, 100).value == 0.0

    def test_additive(self):
        """The additive approximation overestimates and is not clamped."""
        assert additive_rsu_fraction(3 * KM, 4 * KM, 50, 100) == pytest.approx(0.0989, abs=1e-4)
        assert additive_rsu_fraction(30 * KM, 4 * KM, 100, 100) > 1.0

    def test_additive_error(self):
        value = additive_error_gamma(5 * KM, 2 * KM, 100, 100)
        assert value == pytest.approx(0.01287, abs=1e-5)

    def test_additive_error_variants_differ(self):
        consistent = additive_error_gamma(5 * KM, 2 * KM, 100, 100, GammaVariant.THEOREM1_CONSISTENT)
        printed = additive_error_gamma(5 * KM, 2 * KM, 100, 100, GammaVariant.AS_PRINTED)
        assert printed > consistent

    def test_additive_error_grows_with_roads(self):
        values = [additive_error_gamma(lam * KM, 4 * KM, 100, 100) for lam in (1, 3, 5, 10, 20)]
        assert values == sorted(values)

    @pytest.mark.parametrize("axis", ["gamma", "mu"])
    def test_additive_error_grows_with_los_and_rsus(self, axis):
        """The additive error is nondecreasing in gamma and mu."""
        grid = {"gamma": [25, 50, 100, 150, 200, 300], "mu": [1, 2, 4, 6, 8]}[axis]
        for lam in (1, 5, 15):
            if axis == "gamma":
                values = [additive_error_gamma(lam * KM, 4 * KM, gamma, 100) for gamma in grid]
            else:
                values = [additive_error_gamma(lam * KM, mu * KM, 100, 100) for mu in grid]
            assert values == sorted(values)

    def test_negative_input_rejected(self):
        with pytest.raises(ValueError, match="lambda_l"):
            theorem1_area_fraction(-0.001, 0.004, 100, 100)

    def test_area_fraction_range(self):
        with pytest.raises(ValueError, match="value"):
            AreaFraction(1.5, Method.CLOSED_FORM)


class TestRelayIntegral:
    """Tests for the quadrature of the per-line relay integral."""

    def test_scales_with_gamma(self):
        """I equals three mean LOS distances."""
        assert relay_miss_integral(100.0).value == pytest.approx(300.0, rel=1e-4)
        assert relay_miss_integral(66.0).value == pytest.approx(198.0, rel=1e-4)

    def test_error_covers_truncation(self):
        """The reported error includes the tail cut off beyond the x cutoff."""
        for gamma in (1.0, 100.0):
            integral = relay_miss_integral(gamma)
            assert abs(integral.value - 3 * gamma) <= integral.error
        assert relay_miss_integral(1.0).error >= 14 * math.exp(-12)

    def test_zero_gamma(self):
        assert relay_miss_integral(0.0).value == 0.0

    def test_brute_force_oracle(self):
        """Quadrature agrees with direct sampling of W, V, the relay and its W', V'."""
        rng = np.random.default_rng(17)
        n, cutoff = 1_000_000, 12.0
        x = rng.uniform(-cutoff, cutoff, n)
        w, v, w2, v2 = rng.exponential(1.0, (4, n))
        relay = x - w + rng.random(n) * (w + v)
        covered = ((x - w <= 0) & (x + v >= 0)) | ((relay - w2 <= 0) & (relay + v2 >= 0))
        estimate = 2 * cutoff * covered.mean()
        std_error = 2 * cutoff * covered.std() / math.sqrt(n)
        assert abs(relay_miss_integral(1.0).value - estimate) < 4 * std_error

    def test_non_convergence_raises(self):
        """Exhausting the subdivision budget is reported with the achieved error."""
        settings = QuadratureSettings(rel_tol=1e-12, abs_tol=1e-14, max_subdivisions=1)
        with pytest.raises(QuadratureError) as excinfo:
            relay_miss_integral(100.0, settings)
        assert excinfo.value.subdivisions >= 1
        assert excinfo.value.achieved_error >= 0

    @pytest.mark.parametrize(
        "field, value",
        [("x_cutoff_multiplier", 0.0), ("rel_tol", 0.0), ("abs_tol", -1.0), ("max_subdivisions", 0)],
    )
    def test_settings_validation(self, field, value):
        with pytest.raises(ValueError, match=field):
            QuadratureSettings(**{field: value})


class TestTheorem2:
    """Tests for RSU-plus-relay coverage."""

    def test_reference_value(self):
        value = theorem2_area_fraction(5 * KM, 2 * KM, 100, 100)
        assert value.value == pytest.approx(0.20197, abs=1e-4)
        assert value.value == pytest.approx(relay_fraction_reference(5 * KM, 2 * KM, 100, 100), abs=1e-5)
        assert value.method is Method.QUADRATURE
        assert 0 <= value.error_bound < 1e-4

    def test_degenerate_inputs(self):
        assert theorem2_area_fraction(0.0, 2 * KM, 100, 100).value == 0.0
        assert theorem2_area_fraction(5 * KM, 0.0, 100, 100).value == 0.0
        assert theorem2_area_fraction(5 * KM, 2 * KM, 0.0, 100).value == 0.0

    def test_bounds(self):
        """RSU-only coverage <= relay coverage <= road area."""
        grid = itertools.product((1, 3, 5, 15), (1, 2, 4, 10), (25, 66, 100, 300), (25, 100, 200))
        for lam, mu, gamma, eta in grid:
            args = (lam * KM, mu * KM, gamma, eta)
            relay = theorem2_area_fraction(*args)
            assert theorem1_area_fraction(*args).value <= relay.value + relay.error_bound
            assert relay.value <= road_area_fraction(lam * KM, eta).value + relay.error_bound

    @pytest.mark.parametrize("axis", range(4))
    def test_monotone(self, axis):
        """Both fractions are nondecreasing in every parameter."""
        base = [5 * KM, 2 * KM, 100.0, 100.0]
        steps = [0.5, 1.0, 2.0, 4.0]
        thm1, thm2 = [], []
        for step in steps:
            args = list(base)
            args[axis] *= step
            thm1.append(theorem1_area_fraction(*args).value)
            thm2.append(theorem2_area_fraction(*args).value)
        assert thm1 == sorted(thm1)
        assert all(b >= a - 1e-9 for a, b in zip(thm2, thm2[1:]))

    def test_printed_display_is_not_a_fraction(self):
        """The printed integrand tends to -1, so its truncation leaves [0, 1]."""
        assert theorem2_printed_display(5 * KM, 2 * KM, 100, 100) < 0

    def test_printed_integral_depends_on_cutoff(self):
        short = relay_miss_integral(1.0, QuadratureSettings(x_cutoff_multiplier=6.0), IntegrandForm.PRINTED)
        long = relay_miss_integral(1.0, QuadratureSettings(x_cutoff_multiplier=12.0), IntegrandForm.PRINTED)
        assert long.value < short.value


class TestRelayGainRatio:
    """Tests for the analytic relay gain."""

    @pytest.mark.parametrize("eta, expected", [(25, 1.42), (50, 1.39), (100, 1.36)])
    def test_urban_ratios(self, eta, expected):
        ratio = relay_gain_ratio(5 * KM, 2 * KM, 66, eta)
        assert ratio.defined
        assert ratio.value == pytest.approx(expected, abs=0.08)

    def test_ratio_decreases_with_width(self):
        values = [relay_gain_ratio(5 * KM, 2 * KM, 66, eta).value for eta in (25, 50, 100)]
        assert values[0] > values[1] > values[2]
        assert values[0] == pytest.approx(1.401, abs=1e-3)
        assert values[2] == pytest.approx(1.377, abs=1e-3)

    def test_undefined_without_rsus(self):
        """No RSU coverage gives an undefined ratio with a note."""
        ratio = relay_gain_ratio(5 * KM, 0.0, 66, 25)
        assert not ratio.defined
        assert "undefined" in ratio.note

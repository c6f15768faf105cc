"""Antenna patterns against hand values and direct-summation / mpmath oracles."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uavntn.antenna import (
    ReflectorPattern,
    SectorArrayPattern,
    array_factor_db,
    array_gain,
    element_gain,
    reflector_gain,
    wrap_azimuth,
)

P = SectorArrayPattern()


def ula_power_direct(theta, p=P):
    """|sum_n w_n a_n(theta)|^2 / N with steering weights toward the tilted boresight."""
    total = 0j
    for n in range(p.n_elements):
        phase = 2 * math.pi * p.element_spacing * n * (
            math.cos(math.radians(theta)) - math.cos(math.radians(p.boresight_theta))
        )
        total += complex(math.cos(phase), math.sin(phase))
    return abs(total) ** 2 / p.n_elements


def airy_db(off_axis, p):
    x = mpmath.mpf(p.ka) * mpmath.sin(mpmath.radians(off_axis))
    if x == 0:
        return p.max_gain
    return float(p.max_gain + 20 * mpmath.log10(abs(2 * mpmath.besselj(1, x) / x)))


class TestSectorArray:
    def test_boresight_gain(self):
        # 8 dBi element + 10 log10(10) array gain on the tilted boresight
        assert array_gain(102.0, 0.0) == pytest.approx(18.0, abs=1e-12)

    def test_element_hand_values(self):
        assert element_gain(90.0, 0.0) == pytest.approx(8.0)
        assert element_gain(90.0, 32.5) == pytest.approx(5.0)  # half the horizontal HPBW
        assert element_gain(90.0 + 32.5, 0.0) == pytest.approx(5.0)
        assert element_gain(90.0, 180.0) == pytest.approx(-22.0)  # front-to-back floor

    def test_backlobe_of_composite(self):
        assert array_gain(102.0, 180.0) == pytest.approx(-12.0)

    @given(st.floats(min_value=0.0, max_value=180.0))
    def test_array_factor_matches_direct_sum(self, theta):
        direct = ula_power_direct(theta)
        if direct < 1e-9:
            return  # deep null, both are floored
        assert array_factor_db(theta) == pytest.approx(10 * math.log10(direct), abs=1e-7)

    @given(st.floats(min_value=0.0, max_value=180.0), st.floats(min_value=-720.0, max_value=720.0))
    def test_gain_bounded_by_peak(self, theta, phi):
        assert array_gain(theta, phi) <= 18.0 + 1e-9

    @given(st.floats(min_value=-1e4, max_value=1e4))
    def test_wrap_azimuth_range(self, phi):
        w = float(wrap_azimuth(phi))
        assert -180.0 < w <= 180.0
        assert math.isclose(math.cos(math.radians(w)), math.cos(math.radians(phi)), abs_tol=1e-9)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            SectorArrayPattern(n_elements=0)
        with pytest.raises(ValueError):
            SectorArrayPattern(downtilt=95.0)


class TestReflector:
    def test_half_power_at_half_hpbw(self):
        p = ReflectorPattern(30.0, 4.41)
        assert reflector_gain(2.205, p) == pytest.approx(27.0, abs=1e-9)
        assert reflector_gain(0.0, p) == 30.0

    def test_electrical_size(self):
        assert ReflectorPattern().ka == pytest.approx(41.94257911883664, rel=1e-10)

    @pytest.mark.parametrize(
        "angle,expected",
        [(0.5, 29.854140236701044), (1.0, 29.41159499423669), (2.0, 27.559422469982022), (3.0, 24.103221490654422)],
    )
    def test_frozen_values(self, angle, expected):
        assert reflector_gain(angle) == pytest.approx(expected, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=30.0), st.floats(min_value=1.0, max_value=10.0))
    def test_matches_mpmath_bessel(self, angle, hpbw):
        p = ReflectorPattern(30.0, hpbw)
        ref = airy_db(angle, p)
        if ref < -150.0:
            return  # near a null, clipped by the amplitude floor
        assert reflector_gain(angle, p) == pytest.approx(ref, abs=1e-7)

    def test_first_null(self):
        p = ReflectorPattern()
        assert reflector_gain(p.first_null, p) < -100.0

    def test_rejects_bad_hpbw(self):
        with pytest.raises(ValueError):
            ReflectorPattern(hpbw=0.0)

    @given(st.floats(min_value=0.0, max_value=180.0))
    def test_never_exceeds_peak(self, angle):
        assert reflector_gain(angle) <= 30.0 + 1e-12
        assert np.isfinite(reflector_gain(angle))


class TestPatternSweeps:
    def test_element_one_hpbw_off_axis(self):
        assert element_gain(90.0, 65.0) == pytest.approx(-4.0)

    def test_element_peak_location(self):
        th, ph = np.meshgrid(np.arange(0.0, 181.0), np.arange(-179.0, 181.0), indexing="ij")
        g = element_gain(th, ph)
        i = np.unravel_index(np.argmax(g), g.shape)
        assert (th[i], ph[i]) == (90.0, 0.0)

    def test_array_peak_at_downtilt(self):
        th = np.arange(0.0, 180.01, 0.1)
        g = array_gain(th, 0.0)
        assert abs(th[np.argmax(g)] - 102.0) <= 1.0

    def test_first_array_null_above_boresight(self):
        th = np.arange(60.0, 102.0, 0.01)
        af = array_factor_db(th)
        # first local minimum when moving up from boresight
        rev = af[::-1]
        k = np.flatnonzero((rev[1:-1] < rev[:-2]) & (rev[1:-1] < rev[2:]))[0] + 1
        assert rev[k] - 10.0 <= -30.0

    def test_all_gains_finite(self):
        th, ph = np.meshgrid(np.arange(0.0, 180.5, 0.5), np.arange(-180.0, 180.5, 0.5), indexing="ij")
        assert np.isfinite(array_gain(th, ph)).all()
        assert np.isfinite(reflector_gain(np.arange(0.0, 90.01, 0.01))).all()

    def test_reflector_monotone_to_first_null(self):
        p = ReflectorPattern()
        psi = np.linspace(0.0, p.first_null, 2000)
        assert (np.diff(reflector_gain(psi, p)) <= 1e-12).all()

    def test_reflector_sidelobes(self):
        # Airy value at 10 deg and the -17.57 dB first-sidelobe bound outside the main lobe
        assert reflector_gain(10.0) == pytest.approx(-3.393324878644272, abs=1e-9)
        p = ReflectorPattern()
        psi = np.arange(p.first_null, 90.0, 0.001)
        assert reflector_gain(psi, p).max() - p.max_gain <= -17.57

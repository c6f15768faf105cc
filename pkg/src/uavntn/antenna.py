"""Radiation patterns: sector element, downtilted ULA and circular-aperture reflector.

All functions take angles in degrees, broadcast over numpy arrays and return
gains in dBi. Users are isotropic (0 dBi) and need no function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq
from scipy.special import j1

# gains below this floor are clipped so every pattern stays finite at nulls
_AMPLITUDE_FLOOR = 1e-12


@dataclass(frozen=True)
class SectorArrayPattern:
    element_max_gain: float = 8.0
    horiz_hpbw: float = 65.0
    vert_hpbw: float = 65.0
    front_back_ratio: float = 30.0
    side_lobe_limit: float = 30.0
    n_elements: int = 10
    element_spacing: float = 0.5  # wavelengths
    downtilt: float = 12.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be > 0")
        if not 0.0 <= self.downtilt < 90.0:
            raise ValueError("downtilt must lie in [0, 90) degrees")

    @property
    def boresight_theta(self) -> float:
        return 90.0 + self.downtilt


def wrap_azimuth(phi):
    """Map azimuths onto (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(phi, dtype=float), 360.0)


def element_gain(theta, phi, p: SectorArrayPattern = SectorArrayPattern()):
    """Parabolic 3GPP element pattern with boresight at (90, 0)."""
    theta = np.asarray(theta, dtype=float)
    phi = wrap_azimuth(phi)
    a_v = -np.minimum(12.0 * ((theta - 90.0) / p.vert_hpbw) ** 2, p.side_lobe_limit)
    a_h = -np.minimum(12.0 * (phi / p.horiz_hpbw) ** 2, p.front_back_ratio)
    return p.element_max_gain - np.minimum(-(a_v + a_h), p.front_back_ratio)


def array_factor_db(theta, p: SectorArrayPattern = SectorArrayPattern()):
    """Normalised ULA power gain, peaking at 10*log10(N) on the tilted boresight.

    Equivalent to |sum_n exp(j*n*psi)|^2 / N with the closed form used to
    avoid materialising the element axis.
    """
    theta = np.asarray(theta, dtype=float)
    n = p.n_elements
    psi = 2.0 * np.pi * p.element_spacing * (
        np.cos(np.radians(theta)) - np.cos(np.radians(p.boresight_theta))
    )
    half = 0.5 * psi
    den = np.sin(half)
    num = np.sin(n * half)
    with np.errstate(divide="ignore", invalid="ignore"):
        af = num**2 / (n * den**2)
    af = np.where(np.abs(den) < 1e-12, float(n), af)
    return 10.0 * np.log10(np.maximum(af, _AMPLITUDE_FLOOR**2))


def array_gain(theta, phi, p: SectorArrayPattern = SectorArrayPattern()):
    """Composite sector gain: co-tilted element pattern plus array factor."""
    theta = np.asarray(theta, dtype=float)
    return element_gain(theta - p.downtilt, phi, p) + array_factor_db(theta, p)


def _airy_half_power_argument() -> float:
    target = 10.0 ** (-3.0 / 20.0)
    return brentq(lambda x: 2.0 * j1(x) / x - target, 0.5, 3.0, xtol=1e-15)


@dataclass(frozen=True)
class ReflectorPattern:
    max_gain: float = 30.0
    hpbw: float = 4.41

    def __post_init__(self):
        if self.hpbw <= 0:
            raise ValueError("hpbw must be > 0")

    @cached_property
    def ka(self) -> float:
        """Electrical aperture radius k*a placing the -3 dB point at hpbw/2."""
        return _airy_half_power_argument() / math.sin(math.radians(self.hpbw / 2.0))

    @property
    def aperture_radius(self) -> float:
        """Aperture radius in wavelengths."""
        return self.ka / (2.0 * math.pi)

    @property
    def first_null(self) -> float:
        """Off-axis angle of the first pattern null (deg)."""
        return math.degrees(math.asin(min(1.0, 3.831705970207512 / self.ka)))


def reflector_gain(off_axis, p: ReflectorPattern = ReflectorPattern()):
    """Airy pattern 2*J1(x)/x of a uniformly illuminated circular aperture."""
    psi = np.radians(np.asarray(off_axis, dtype=float))
    x = p.ka * np.sin(psi)
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.where(np.abs(x) < 1e-9, 1.0, 2.0 * j1(x) / x)
    amp = np.maximum(np.abs(amp), _AMPLITUDE_FLOOR)
    return p.max_gain + 20.0 * np.log10(amp)

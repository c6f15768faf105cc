"""Large-scale gains and small-scale fading for TN and NTN links.

Scalar helpers (``los_probability``, ``tn_path_loss``, ``link_gain`` ...) are
numpy-broadcasting so the same code backs both unit checks and the per-drop
gain matrices built by :func:`tn_gain_matrix` and :func:`ntn_gain_matrix`.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .antenna import ReflectorPattern, SectorArrayPattern, array_factor_db, reflector_gain, wrap_azimuth
from .geometry import BeamGrid, EarthModel, TnLayout, User, UserDrop, UserKind, off_boresight_angle, slant_range

SPEED_OF_LIGHT = 299_792_458.0


class LinkClass(str, Enum):
    TN_GUE = "tn_gue"
    TN_UAV = "tn_uav"
    NTN_GUE = "ntn_gue"
    NTN_UAV = "ntn_uav"

    @property
    def is_ntn(self) -> bool:
        return self in (LinkClass.NTN_GUE, LinkClass.NTN_UAV)


def _coerce_class(link_class) -> LinkClass:
    try:
        return LinkClass(link_class)
    except ValueError:
        raise ValueError(f"unknown link class {link_class!r}; expected one of {[c.value for c in LinkClass]}")


class ChannelConstants:
    """Read-only view of the channel constants file."""

    def __init__(self, sections: dict[str, dict[str, object]], source: str = "<memory>"):
        self.sections = sections
        self.source = source

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ChannelConstants":
        parser = configparser.ConfigParser(inline_comment_prefixes=(";",))
        if path is None:
            text = resources.files("uavntn").joinpath("data/channel_constants.ini").read_text()
            source = "uavntn/data/channel_constants.ini"
        else:
            text = Path(path).read_text()
            source = str(path)
        parser.read_string(text, source=source)
        sections = {}
        for name in parser.sections():
            values = {}
            for key, raw in parser.items(name):
                values[key] = _parse_value(raw)
            sections[name] = values
        for required in ("tn_gue", "tn_uav", "o2i", "ntn"):
            if required not in sections:
                raise ValueError(f"{source}: missing section [{required}]")
        return cls(sections, source)

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def ntn_row(self, elevation) -> np.ndarray:
        """Index of the nearest tabulated NTN elevation."""
        table = np.asarray(self["ntn"]["elevations"], dtype=float)
        return np.abs(np.asarray(elevation, dtype=float)[..., None] - table).argmin(axis=-1)

    def ntn_lookup(self, key: str, elevation) -> np.ndarray:
        return np.asarray(self["ntn"][key], dtype=float)[self.ntn_row(elevation)]


def _parse_value(raw: str):
    raw = raw.strip()
    if "," in raw:
        return [float(v) for v in raw.split(",")]
    try:
        return float(raw)
    except ValueError:
        return raw


_DEFAULT: ChannelConstants | None = None


def default_constants() -> ChannelConstants:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = ChannelConstants.load()
    return _DEFAULT


# ---------------------------------------------------------------- LoS probability


def _uma_los_probability(d2d, rx_h, c):
    d2d = np.asarray(d2d, dtype=float)
    rx_h = np.asarray(rx_h, dtype=float)
    d1, p1 = c["los_d1"], c["los_p1"]
    safe = np.maximum(d2d, d1)
    base = d1 / safe + np.exp(-safe / p1) * (1.0 - d1 / safe)
    c_h = np.where(rx_h <= c["los_height_ref"], 0.0, (np.maximum(rx_h - c["los_height_ref"], 0.0) / 10.0) ** 1.5)
    corr = 1.0 + c_h * 1.25 * (safe / 100.0) ** 3 * np.exp(-safe / 150.0)
    return np.where(d2d <= d1, 1.0, np.clip(base * corr, 0.0, 1.0))


def _aerial_los_probability(d2d, rx_h, c):
    d2d = np.asarray(d2d, dtype=float)
    rx_h = np.asarray(rx_h, dtype=float)
    lh = np.log10(rx_h)
    d1 = np.maximum(c["los_d1_coeff"] * lh - c["los_d1_offset"], c["los_d1_min"])
    p1 = c["los_p1_coeff"] * lh - c["los_p1_offset"]
    safe = np.maximum(d2d, d1)
    p = d1 / safe + np.exp(-safe / p1) * (1.0 - d1 / safe)
    p = np.where(d2d <= d1, 1.0, p)
    return np.where(rx_h > c["los_full_height"], 1.0, p)


def los_probability(link_class, d2d=0.0, tx_h=25.0, rx_h=1.5, *, elevation=None, consts=None):
    """Probability that a link is in line of sight.

    TN classes use the horizontal distance and heights; NTN classes use the
    elevation angle (required for them).
    """
    lc = _coerce_class(link_class)
    consts = consts or default_constants()
    if np.any(np.asarray(d2d) < 0):
        raise ValueError("d2d must be >= 0")
    if np.any(np.asarray(rx_h) <= 0) or np.any(np.asarray(tx_h) <= 0):
        raise ValueError("heights must be > 0")
    if lc is LinkClass.TN_GUE:
        return _uma_los_probability(d2d, rx_h, consts["tn_gue"])
    if lc is LinkClass.TN_UAV:
        return _aerial_los_probability(d2d, rx_h, consts["tn_uav"])
    if elevation is None:
        raise ValueError("NTN LoS probability needs an elevation angle")
    if lc is LinkClass.NTN_UAV and consts["ntn"].get("uav_always_los", 0.0):
        return np.ones_like(np.asarray(elevation, dtype=float))
    return consts.ntn_lookup("los_probability", elevation)


# ---------------------------------------------------------------- path loss


def _check_heights(rx_h, lo, hi, lo_inclusive, name):
    rx_h = np.asarray(rx_h, dtype=float)
    bad = (rx_h < lo if lo_inclusive else rx_h <= lo) | (rx_h > hi)
    if np.any(bad):
        bracket = "[" if lo_inclusive else "("
        raise ValueError(f"{name} model valid for user height in {bracket}{lo}, {hi}] m, got {rx_h[bad].ravel()[0]}")


def _uma_path_loss(los, d3d, fc, tx_h, rx_h, d2d, c):
    he = c["effective_env_height"]
    d_bp = 4.0 * (tx_h - he) * (rx_h - he) * fc * 1e9 / SPEED_OF_LIGHT
    lf = np.log10(fc)
    pl1 = c["los_intercept"] + c["los_slope_near"] * np.log10(d3d) + c["los_freq_coeff"] * lf
    pl2 = (
        c["los_intercept"]
        + c["los_slope_far"] * np.log10(d3d)
        + c["los_freq_coeff"] * lf
        - c["los_breakpoint_coeff"] * np.log10(d_bp**2 + (tx_h - rx_h) ** 2)
    )
    pl_los = np.where(d2d <= d_bp, pl1, np.maximum(pl1, pl2))
    pl_nlos = (
        c["nlos_intercept"]
        + c["nlos_slope"] * np.log10(d3d)
        + c["nlos_freq_coeff"] * lf
        - c["nlos_height_coeff"] * (rx_h - 1.5)
    )
    return np.where(los, pl_los, np.maximum(pl_los, pl_nlos))


def _aerial_path_loss(los, d3d, fc, rx_h, c):
    lh = np.log10(rx_h)
    pl_los = (
        c["los_intercept"]
        + (c["los_slope"] - c["los_slope_height"] * lh) * np.log10(d3d)
        + c["los_freq_coeff"] * np.log10(fc)
    )
    pl_nlos = (
        c["nlos_intercept"]
        + (c["nlos_slope"] - c["nlos_slope_height"] * lh) * np.log10(d3d)
        + 20.0 * np.log10(40.0 * np.pi * fc / 3.0)
    )
    return np.where(los, pl_los, np.maximum(pl_los, pl_nlos))


def tn_path_loss(link_class, los, d3d, fc=2.0, tx_h=25.0, rx_h=1.5, *, d2d=None, consts=None):
    """Mean terrestrial path loss in dB (``fc`` in GHz, distances in m)."""
    lc = _coerce_class(link_class)
    if lc.is_ntn:
        raise ValueError(f"{lc.value} is not a terrestrial link class")
    consts = consts or default_constants()
    d3d = np.asarray(d3d, dtype=float)
    if np.any(d3d <= 0):
        raise ValueError("d3d must be > 0")
    tx_h = np.asarray(tx_h, dtype=float)
    rx_h = np.asarray(rx_h, dtype=float)
    los = np.asarray(los, dtype=bool)
    if lc is LinkClass.TN_GUE:
        c = consts["tn_gue"]
        _check_heights(rx_h, c["min_height"], c["max_height"], True, "urban-macro ground")
        if d2d is None:
            d2d = np.sqrt(np.maximum(d3d**2 - (tx_h - rx_h) ** 2, 0.0))
        d2d = np.maximum(np.asarray(d2d, dtype=float), c["min_distance_2d"])
        d3d = np.sqrt(d2d**2 + (tx_h - rx_h) ** 2)
        return _uma_path_loss(los, d3d, fc, tx_h, rx_h, d2d, c)
    c = consts["tn_uav"]
    _check_heights(rx_h, c["min_height"], c["max_height"], False, "aerial urban-macro")
    d3d = np.maximum(d3d, c["min_distance_3d"])
    return _aerial_path_loss(los, d3d, fc, rx_h, c)


def free_space_path_loss(distance, fc=2.0):
    """Friis loss in dB for ``distance`` in m and ``fc`` in GHz."""
    return 32.45 + 20.0 * np.log10(fc) + 20.0 * np.log10(np.asarray(distance, dtype=float))


def ntn_path_loss(elevation, fc=2.0, earth: EarthModel = EarthModel(), *, consts=None):
    """Mean satellite path loss: free space at the slant range plus gas and scintillation."""
    consts = consts or default_constants()
    if not 0.0 < elevation <= 90.0:
        raise ValueError(f"elevation must lie in (0, 90] degrees, got {elevation}")
    c = consts["ntn"]
    d = slant_range(elevation, earth)
    atm = c["atmospheric_zenith"] / math.sin(math.radians(elevation))
    return float(free_space_path_loss(d, fc)) + atm + c["scintillation"]


def o2i_penetration_mean(fc=2.0, indoor_distance=0.0, *, consts=None):
    """Mean low-loss building penetration (wall plus indoor distance), dB."""
    c = (consts or default_constants())["o2i"]
    l_glass = c["glass_base"] + c["glass_per_ghz"] * fc
    l_concrete = c["concrete_base"] + c["concrete_per_ghz"] * fc
    wall = c["wall_offset"] - 10.0 * np.log10(
        c["glass_share"] * 10.0 ** (-l_glass / 10.0) + c["concrete_share"] * 10.0 ** (-l_concrete / 10.0)
    )
    return wall + c["indoor_coeff"] * np.asarray(indoor_distance, dtype=float)


# ---------------------------------------------------------------- random draws


def shadow_sigma(link_class, los, *, rx_h=1.5, elevation=90.0, consts=None):
    lc = _coerce_class(link_class)
    consts = consts or default_constants()
    los = np.asarray(los, dtype=bool)
    if lc is LinkClass.TN_GUE:
        c = consts["tn_gue"]
        return np.where(los, c["sigma_los"], c["sigma_nlos"])
    if lc is LinkClass.TN_UAV:
        c = consts["tn_uav"]
        s_los = c["sigma_los_scale"] * np.exp(-c["sigma_los_decay"] * np.asarray(rx_h, dtype=float))
        return np.where(los, s_los, c["sigma_nlos"])
    return np.where(los, consts.ntn_lookup("sigma_los", elevation), consts.ntn_lookup("sigma_nlos", elevation))


def shadow_draw(link_class, los, rng, *, rx_h=1.5, elevation=90.0, size=None, consts=None, sigma=None):
    """Zero-mean lognormal shadowing in dB; ``sigma`` overrides the class table."""
    if sigma is None:
        sigma = shadow_sigma(link_class, los, rx_h=rx_h, elevation=elevation, consts=consts)
    sigma = np.asarray(sigma, dtype=float)
    shape = size if size is not None else sigma.shape
    return sigma * rng.standard_normal(shape)


def is_rayleigh(link_class) -> bool:
    return _coerce_class(link_class) is LinkClass.TN_GUE


def fading_draw(link_class, rng, size=None):
    """Small-scale coefficient h: unit-power Rayleigh on TN-GUE links, |h| = 1 otherwise."""
    if is_rayleigh(link_class):
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        return (re + 1j * im) / math.sqrt(2.0)
    return np.ones(size if size is not None else (), dtype=complex)


# ---------------------------------------------------------------- composite gain


@dataclass(frozen=True)
class LinkGain:
    path_loss: float
    shadow: float
    extra_losses: float
    tx_gain: float
    rx_gain: float = 0.0

    @property
    def composite_db(self) -> float:
        return self.tx_gain + self.rx_gain - self.path_loss - self.shadow - self.extra_losses

    @property
    def composite_g(self) -> float:
        return 10.0 ** (self.composite_db / 10.0)


@dataclass(frozen=True)
class Cell:
    """A TN sector (``azimuth`` set) or an NTN beam (``boresight`` set)."""

    kind: str  # "TN" or "NTN"
    position: np.ndarray
    power_dbm: float
    band: int = 0
    azimuth: float = 0.0
    boresight: np.ndarray | None = None


@dataclass(frozen=True)
class LinkDraws:
    los: bool = True
    shadow_db: float = 0.0
    o2i_db: float = 0.0  # random part of building penetration


def link_class_for(cell: Cell, user: User) -> LinkClass:
    uav = user.kind == UserKind.UAV
    if cell.kind == "TN":
        return LinkClass.TN_UAV if uav else LinkClass.TN_GUE
    return LinkClass.NTN_UAV if uav else LinkClass.NTN_GUE


def link_gain(
    cell: Cell,
    user: User,
    draws: LinkDraws = LinkDraws(),
    *,
    fc: float = 2.0,
    sector: SectorArrayPattern = SectorArrayPattern(),
    reflector: ReflectorPattern = ReflectorPattern(),
    earth: EarthModel = EarthModel(),
    consts=None,
) -> LinkGain:
    consts = consts or default_constants()
    lc = link_class_for(cell, user)
    pos = np.asarray(user.position, dtype=float)
    cpos = np.asarray(cell.position, dtype=float)
    extra = 0.0
    if user.indoor and user.kind == UserKind.GUE:
        extra += float(o2i_penetration_mean(fc, user.indoor_distance, consts=consts)) + draws.o2i_db
    if lc.is_ntn:
        d = float(np.linalg.norm(cpos - pos))
        elev = math.degrees(math.asin((cpos[2] - pos[2]) / d))
        c = consts["ntn"]
        pl = float(free_space_path_loss(d, fc))
        extra += c["atmospheric_zenith"] / math.sin(math.radians(elev)) + c["scintillation"]
        if not draws.los:
            extra += float(consts.ntn_lookup("clutter_loss", elev))
        psi = float(off_boresight_angle(cell.boresight, pos, cpos))
        tx = float(reflector_gain(psi, reflector))
    else:
        dx, dy = pos[0] - cpos[0], pos[1] - cpos[1]
        d2d = math.hypot(dx, dy)
        d3d = math.sqrt(d2d**2 + (cpos[2] - pos[2]) ** 2)
        pl = float(tn_path_loss(lc, draws.los, d3d, fc, cpos[2], pos[2], d2d=d2d, consts=consts))
        theta = 90.0 + math.degrees(math.atan2(cpos[2] - pos[2], d2d))
        phi = math.degrees(math.atan2(dy, dx)) - cell.azimuth
        tx = float(_sector_gain(np.array(theta), np.array(phi), sector))
    return LinkGain(path_loss=pl, shadow=draws.shadow_db, extra_losses=extra, tx_gain=tx, rx_gain=0.0)


def _sector_gain(theta, phi, p: SectorArrayPattern):
    a_v = -np.minimum(12.0 * ((theta - p.downtilt - 90.0) / p.vert_hpbw) ** 2, p.side_lobe_limit)
    a_h = -np.minimum(12.0 * (wrap_azimuth(phi) / p.horiz_hpbw) ** 2, p.front_back_ratio)
    return p.element_max_gain - np.minimum(-(a_v + a_h), p.front_back_ratio) + array_factor_db(theta, p)


# ---------------------------------------------------------------- per-drop matrices


def tn_gain_matrix(
    layout: TnLayout,
    users: UserDrop,
    rng_los: np.random.Generator,
    rng_shadow: np.random.Generator,
    rng_o2i: np.random.Generator,
    *,
    fc: float = 2.0,
    sector: SectorArrayPattern = SectorArrayPattern(),
    consts=None,
    shadowing: bool = True,
    shadow_per_cell: bool = False,
) -> np.ndarray:
    """Large-scale gain in dB between every user (rows) and TN cell (columns).

    LoS state and path loss are drawn once per (site, user) and shared by the
    three co-located sectors. Shadowing is shared the same way unless
    ``shadow_per_cell`` asks for an independent draw per (cell, user).
    """
    consts = consts or default_constants()
    n, n_sites = len(users), layout.n_sites
    pos = users.position
    dx = pos[:, 0:1] - layout.sites[None, :, 0]
    dy = pos[:, 1:2] - layout.sites[None, :, 1]
    d2d = np.hypot(dx, dy)
    dz = layout.bs_height - pos[:, 2:3]
    d3d = np.sqrt(d2d**2 + dz**2)
    rx_h = np.broadcast_to(pos[:, 2:3], d2d.shape)

    loss = np.empty((n, n_sites))
    sig = np.zeros((n, n_sites))
    u_los = rng_los.random((n, n_sites))
    z_sf = rng_shadow.standard_normal((n, layout.n_cells if shadow_per_cell else n_sites))
    for lc, rows in ((LinkClass.TN_GUE, ~users.is_uav), (LinkClass.TN_UAV, users.is_uav)):
        if not rows.any():
            continue
        d2 = d2d[rows]
        if lc is LinkClass.TN_GUE:
            d_out = np.maximum(d2 - users.indoor_distance[rows, None], 0.0)
            p_los = los_probability(lc, d_out, layout.bs_height, rx_h[rows], consts=consts)
        else:
            p_los = los_probability(lc, d2, layout.bs_height, rx_h[rows], consts=consts)
        los = u_los[rows] < p_los
        pl = tn_path_loss(lc, los, d3d[rows], fc, layout.bs_height, rx_h[rows], d2d=d2, consts=consts)
        sigma = shadow_sigma(lc, los, rx_h=rx_h[rows], consts=consts) if shadowing else np.zeros_like(pl)
        loss[rows] = pl
        sig[rows] = sigma

    o2i = np.zeros(n)
    gue_in = users.indoor & ~users.is_uav
    if gue_in.any():
        o2i[gue_in] = o2i_penetration_mean(fc, users.indoor_distance[gue_in], consts=consts)
        if shadowing:
            o2i[gue_in] += consts["o2i"]["sigma"] * rng_o2i.standard_normal(int(gue_in.sum()))
    loss += o2i[:, None]

    theta = 90.0 + np.degrees(np.arctan2(dz, d2d))
    vert = -np.minimum(12.0 * ((theta - sector.downtilt - 90.0) / sector.vert_hpbw) ** 2, sector.side_lobe_limit)
    site_term = array_factor_db(theta, sector) - loss  # (n, n_sites)
    az = np.degrees(np.arctan2(dy, dx))

    site = layout.cell_site
    phi = wrap_azimuth(az[:, site] - layout.cell_azimuth[None, :])
    horiz = -np.minimum(12.0 * (phi / sector.horiz_hpbw) ** 2, sector.front_back_ratio)
    elem = sector.element_max_gain - np.minimum(-(vert[:, site] + horiz), sector.front_back_ratio)
    shadow = sig[:, site] * (z_sf if shadow_per_cell else z_sf[:, site])
    return elem + site_term[:, site] - shadow


def ntn_gain_matrix(
    grid: BeamGrid,
    users: UserDrop,
    rng_los: np.random.Generator,
    rng_shadow: np.random.Generator,
    rng_o2i: np.random.Generator,
    *,
    fc: float = 2.0,
    reflector: ReflectorPattern = ReflectorPattern(),
    consts=None,
    shadowing: bool = True,
) -> np.ndarray:
    """Large-scale gain in dB between every user and satellite beam.

    All beams leave the same satellite, so LoS state and shadowing are drawn
    once per user and shared by every beam.
    """
    consts = consts or default_constants()
    n = len(users)
    pos = users.position
    sat = grid.satellite_position
    vec = sat[None, :] - pos
    d = np.linalg.norm(vec, axis=1)
    elev = np.degrees(np.arcsin(vec[:, 2] / d))
    c = consts["ntn"]

    p_los = np.where(
        users.is_uav,
        los_probability(LinkClass.NTN_UAV, elevation=elev, consts=consts),
        los_probability(LinkClass.NTN_GUE, elevation=elev, consts=consts),
    )
    los = rng_los.random(n) < p_los
    sigma = shadow_sigma(LinkClass.NTN_GUE, los, elevation=elev, consts=consts) if shadowing else 0.0
    loss = (
        free_space_path_loss(d, fc)
        + c["atmospheric_zenith"] / np.sin(np.radians(elev))
        + c["scintillation"]
        + np.where(los, 0.0, consts.ntn_lookup("clutter_loss", elev))
        + sigma * rng_shadow.standard_normal(n)
    )
    gue_in = users.indoor & ~users.is_uav
    if gue_in.any():
        o2i = o2i_penetration_mean(fc, users.indoor_distance[gue_in], consts=consts)
        if shadowing:
            o2i = o2i + consts["o2i"]["sigma"] * rng_o2i.standard_normal(int(gue_in.sum()))
        loss[gue_in] += o2i

    psi = off_boresight_angle(grid.boresights[None, :, :], pos[:, None, :], sat)
    return reflector_gain(psi, reflector) - loss[:, None]

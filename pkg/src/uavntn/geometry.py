"""Deployment geometry: hexagonal TN layout, LEO beam grid and user drops.

TN links live in a flat local tangent frame centred on the urban area
(x east, y north, z up, metres). The satellite is placed in the same frame
using a spherical Earth, which is where curvature actually matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SECTOR_AZIMUTHS_DEG = (30.0, 150.0, 270.0)


@dataclass(frozen=True)
class EarthModel:
    earth_radius: float = 6_371_000.0
    orbit_altitude: float = 600_000.0

    def __post_init__(self):
        if self.earth_radius <= 0:
            raise ValueError(f"earth_radius must be > 0, got {self.earth_radius}")
        if self.orbit_altitude <= 0:
            raise ValueError(f"orbit_altitude must be > 0, got {self.orbit_altitude}")


def tn_cell_area(isd: float) -> float:
    """Area of one sector cell for a given inter-site distance (m^2)."""
    return math.sqrt(3.0) * isd**2 / 6.0


@dataclass(frozen=True)
class TnLayout:
    isd: float
    sites: np.ndarray  # (n_sites, 2)
    cell_site: np.ndarray  # (n_cells,) site index of each sector
    cell_azimuth: np.ndarray  # (n_cells,) boresight azimuth, deg from +x
    bs_height: float
    area_radius: float  # users are dropped on a disc of this radius

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def n_cells(self) -> int:
        return len(self.cell_site)

    @property
    def cell_area(self) -> float:
        return tn_cell_area(self.isd)

    @property
    def area(self) -> float:
        return math.pi * self.area_radius**2

    def site_neighbors(self, tiers: int) -> np.ndarray:
        """(n_sites, n_sites) mask of sites within ``tiers`` hexagonal rings; 0 means all."""
        if tiers < 0:
            raise ValueError(f"tiers must be >= 0, got {tiers}")
        if tiers == 0:
            return np.ones((self.n_sites, self.n_sites), dtype=bool)
        d = np.hypot(*(self.sites[:, None, :] - self.sites[None, :, :]).transpose(2, 0, 1))
        return d <= tiers * self.isd * (1.0 + 1e-9)

    def cell_neighbors(self, tiers: int) -> np.ndarray:
        """Cell-level version of :meth:`site_neighbors`."""
        near = self.site_neighbors(tiers)
        return near[self.cell_site][:, self.cell_site]

    def cell_positions(self) -> np.ndarray:
        xy = self.sites[self.cell_site]
        return np.column_stack([xy, np.full(len(xy), self.bs_height)])


def _hex_points(isd: float, rings: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(-rings, rings + 1), np.arange(-rings, rings + 1))
    x = isd * (i + 0.5 * j)
    y = isd * math.sqrt(3.0) / 2.0 * j
    return np.column_stack([x.ravel(), y.ravel()])


def build_tn_layout(isd: float, area: float, bs_height: float = 25.0) -> TnLayout:
    """Tile a disc of the given area with three-sector hexagonal sites.

    The site count is the integer closest to ``area / (3 * A_TN)``; the sites
    are the lattice points nearest the centre (ties broken by polar angle).
    """
    if isd <= 0:
        raise ValueError(f"isd must be > 0, got {isd}")
    if area <= 0:
        raise ValueError(f"area must be > 0, got {area}")
    n_sites = max(1, round(area / (3.0 * tn_cell_area(isd))))
    radius = math.sqrt(area / math.pi)
    rings = int(math.ceil(radius / isd)) + 2
    pts = _hex_points(isd, rings)
    r = np.round(np.hypot(pts[:, 0], pts[:, 1]), 6)
    ang = np.round(np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi), 9)
    order = np.lexsort((ang, r))
    sites = pts[order[:n_sites]]
    n_sec = len(SECTOR_AZIMUTHS_DEG)
    cell_site = np.repeat(np.arange(n_sites), n_sec)
    cell_azimuth = np.tile(np.array(SECTOR_AZIMUTHS_DEG), n_sites)
    return TnLayout(
        isd=float(isd),
        sites=sites,
        cell_site=cell_site,
        cell_azimuth=cell_azimuth,
        bs_height=float(bs_height),
        area_radius=radius,
    )


def slant_range(elevation: float, earth: EarthModel = EarthModel()) -> float:
    """Ground-to-satellite distance seen under ``elevation`` degrees."""
    if not 0.0 < elevation <= 90.0:
        raise ValueError(f"elevation must lie in (0, 90] degrees, got {elevation}")
    if elevation == 90.0:
        return earth.orbit_altitude
    R, h = earth.earth_radius, earth.orbit_altitude
    s = math.sin(math.radians(elevation))
    return math.sqrt(R**2 * s**2 + h**2 + 2.0 * h * R) - R * s


def off_nadir_angle(elevation: float, earth: EarthModel = EarthModel()) -> float:
    """Angle at the satellite between nadir and a ground point at ``elevation``."""
    if not 0.0 < elevation <= 90.0:
        raise ValueError(f"elevation must lie in (0, 90] degrees, got {elevation}")
    R, h = earth.earth_radius, earth.orbit_altitude
    return math.degrees(math.asin(R * math.cos(math.radians(elevation)) / (R + h)))


@dataclass(frozen=True)
class BeamGrid:
    satellite_position: np.ndarray  # (3,) local frame
    elevation: float
    boresights: np.ndarray  # (7, 3) unit vectors; row 0 is the nadir beam
    hpbw: float
    frf: int
    bands: np.ndarray  # (7,) band index per beam
    earth: EarthModel = field(default_factory=EarthModel)

    @property
    def n_beams(self) -> int:
        return len(self.boresights)

    def co_band(self, beam: int) -> np.ndarray:
        """Indices of the other beams sharing ``beam``'s band."""
        same = np.flatnonzero(self.bands == self.bands[beam])
        return same[same != beam]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def build_beam_grid(
    elevation: float,
    hpbw: float = 4.41,
    frf: int = 1,
    earth: EarthModel = EarthModel(),
    area_center: tuple[float, float] = (0.0, 0.0),
    ring_azimuth: float = 0.0,
) -> BeamGrid:
    """Seven nadir-centred hexagonal beams from a satellite seen at ``elevation``.

    The satellite sits on the -x side of the ground track so that the urban
    area lies at ring azimuth 0; ``ring_azimuth`` rotates the six ring beams
    about the nadir beam.
    """
    if not 0.0 < elevation <= 90.0:
        raise ValueError(f"elevation must lie in (0, 90] degrees, got {elevation}")
    if hpbw <= 0:
        raise ValueError(f"hpbw must be > 0, got {hpbw}")
    if frf not in (1, 3):
        raise ValueError(f"frf must be 1 or 3, got {frf}")

    d = slant_range(elevation, earth)
    eps = math.radians(elevation)
    cx, cy = area_center
    sat = np.array([cx - d * math.cos(eps), cy, d * math.sin(eps)])
    earth_centre = np.array([cx, cy, -earth.earth_radius])
    nadir = _unit(earth_centre - sat)
    x_hat = np.array([1.0, 0.0, 0.0])
    u1 = _unit(x_hat - (x_hat @ nadir) * nadir)
    u2 = np.cross(u1, nadir)

    off = math.radians(hpbw)
    bores = [nadir]
    for k in range(6):
        phi = math.radians(ring_azimuth + 60.0 * k)
        b = math.cos(off) * nadir + math.sin(off) * (math.cos(phi) * u1 + math.sin(phi) * u2)
        bores.append(_unit(b))
    if frf == 1:
        bands = np.zeros(7, dtype=int)
    else:
        bands = np.array([0, 1, 2, 1, 2, 1, 2])
    return BeamGrid(
        satellite_position=sat,
        elevation=float(elevation),
        boresights=np.array(bores),
        hpbw=float(hpbw),
        frf=frf,
        bands=bands,
        earth=earth,
    )


def off_boresight_angle(boresight, user_position, satellite_position) -> np.ndarray:
    """Angle in degrees between the satellite-to-user ray and ``boresight``.

    Broadcasts: ``boresight`` (..., 3) against ``user_position`` (..., 3).
    """
    ray = np.asarray(user_position, dtype=float) - np.asarray(satellite_position, dtype=float)
    norm = np.linalg.norm(ray, axis=-1)
    if np.any(norm == 0.0):
        raise ValueError("user position coincides with the satellite")
    b = np.asarray(boresight, dtype=float)
    cross = np.linalg.norm(np.cross(ray, b), axis=-1)
    dot = np.sum(ray * b, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


@dataclass(frozen=True)
class TrafficParams:
    users_per_cell: float = 15.0
    uav_ratio: float = 0.071  # UAVs per GUE
    h_uav: float = 150.0
    indoor_fraction: float = 0.8
    min_floors: int = 4
    max_floors: int = 8
    h_outdoor: float = 1.5
    floor_height: float = 3.0
    max_indoor_distance: float = 25.0
    edge_width: float | None = None  # outer ring flagged as edge; defaults to one ISD


class UserKind:
    GUE = "GUE"
    UAV = "UAV"


@dataclass(frozen=True)
class User:
    kind: str
    position: np.ndarray
    indoor: bool = False
    floor: int = 0
    indoor_distance: float = 0.0


@dataclass(frozen=True)
class UserDrop:
    """Struct-of-arrays view of one drop's users."""

    position: np.ndarray  # (n, 3)
    is_uav: np.ndarray
    indoor: np.ndarray
    floor: np.ndarray  # 1-based, 0 when outdoor
    indoor_distance: np.ndarray  # horizontal distance inside the building (m)
    edge: np.ndarray  # lies in the outer ring of the area

    def __len__(self) -> int:
        return len(self.position)

    @property
    def n_uav(self) -> int:
        return int(self.is_uav.sum())

    def user(self, k: int) -> User:
        return User(
            kind=UserKind.UAV if self.is_uav[k] else UserKind.GUE,
            position=self.position[k],
            indoor=bool(self.indoor[k]),
            floor=int(self.floor[k]),
            indoor_distance=float(self.indoor_distance[k]),
        )

    def __iter__(self):
        return (self.user(k) for k in range(len(self)))

    def take(self, idx) -> "UserDrop":
        idx = np.asarray(idx)
        return UserDrop(
            position=self.position[idx],
            is_uav=self.is_uav[idx],
            indoor=self.indoor[idx],
            floor=self.floor[idx],
            indoor_distance=self.indoor_distance[idx],
            edge=self.edge[idx],
        )

    @classmethod
    def from_users(cls, users, edge=None) -> "UserDrop":
        users = list(users)
        n = len(users)
        return cls(
            position=np.array([u.position for u in users], dtype=float).reshape(n, 3),
            is_uav=np.array([u.kind == UserKind.UAV for u in users], dtype=bool),
            indoor=np.array([u.indoor for u in users], dtype=bool),
            floor=np.array([u.floor for u in users], dtype=int),
            indoor_distance=np.array([u.indoor_distance for u in users], dtype=float),
            edge=np.zeros(n, dtype=bool) if edge is None else np.asarray(edge, dtype=bool),
        )


def uav_count(total: int, uav_ratio: float) -> int:
    """UAVs among ``total`` users when ``uav_ratio`` counts UAVs per GUE."""
    return int(round(total * uav_ratio / (1.0 + uav_ratio)))


def drop_users(layout: TnLayout, traffic: TrafficParams, rng: np.random.Generator) -> UserDrop:
    if layout.area <= 0 or layout.n_cells == 0:
        raise ValueError("cannot drop users on an empty area")
    total = int(rng.poisson(traffic.users_per_cell * layout.n_cells))
    n_uav = uav_count(total, traffic.uav_ratio)

    r = layout.area_radius * np.sqrt(rng.random(total))
    theta = 2.0 * np.pi * rng.random(total)
    x, y = r * np.cos(theta), r * np.sin(theta)

    is_uav = np.zeros(total, dtype=bool)
    is_uav[:n_uav] = True
    indoor = ~is_uav & (rng.random(total) < traffic.indoor_fraction)
    n_floors = rng.integers(traffic.min_floors, traffic.max_floors + 1, size=total)
    floor = np.floor(rng.random(total) * n_floors).astype(int) + 1
    floor = np.where(indoor, floor, 0)
    d_in = np.where(indoor, traffic.max_indoor_distance * rng.random(total), 0.0)

    z = np.where(indoor, traffic.h_outdoor + traffic.floor_height * (floor - 1), traffic.h_outdoor)
    z = np.where(is_uav, traffic.h_uav, z)
    width = layout.isd if traffic.edge_width is None else traffic.edge_width
    edge = r > layout.area_radius - width
    return UserDrop(
        position=np.column_stack([x, y, z]),
        is_uav=is_uav,
        indoor=indoor,
        floor=floor,
        indoor_distance=d_in,
        edge=edge,
    )

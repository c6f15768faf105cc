"""Scenario configuration dataclasses, range validation and named presets.

Each numeric field carries its valid range in ``metadata`` so validation and
config-file parsing share one source of truth.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

MODES = ("standalone_tn", "tn_relief", "tn_ul_partition", "tn_ntn_offload")


class ConfigError(ValueError):
    """Invalid or incomplete scenario configuration."""


def _f(default, lo=-math.inf, hi=math.inf, bounds="[]", choices=None):
    return field(default=default, metadata={"range": (lo, hi, bounds), "choices": choices})


def describe_range(f: dataclasses.Field) -> str:
    if f.metadata.get("choices") is not None:
        return "one of " + ", ".join(str(c) for c in f.metadata["choices"])
    lo, hi, b = f.metadata.get("range", (-math.inf, math.inf, "[]"))
    return f"{b[0]}{lo:g}, {hi:g}{b[1]}"


def _check_field(section: str, f: dataclasses.Field, value) -> None:
    name = f"{section}.{f.name}"
    choices = f.metadata.get("choices")
    if choices is not None:
        if value not in choices:
            raise ConfigError(f"{name} = {value!r} is not {describe_range(f)}")
        return
    if "range" not in f.metadata:
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name} = {value} must be finite")
    lo, hi, b = f.metadata["range"]
    ok_lo = value >= lo if b[0] == "[" else value > lo
    ok_hi = value <= hi if b[1] == "]" else value < hi
    if not (ok_lo and ok_hi):
        raise ConfigError(f"{name} = {value:g} outside valid range {describe_range(f)}")


class _Section:
    section_name = ""

    def __post_init__(self):
        for f in dataclasses.fields(self):
            _check_field(self.section_name, f, getattr(self, f.name))


@dataclass(frozen=True)
class DeploymentConfig(_Section):
    section_name = "deployment"
    isd: float = _f(500.0, 0.0, 1e5, "(]")
    area: float = _f(52e6, 0.0, 1e10, "(]")  # m^2
    bs_height: float = _f(25.0, 0.0, 200.0, "(]")
    interference_tiers: int = _f(2, 0, 100)  # TN interferer rings around the serving site, 0 = all cells
    earth_radius: float = _f(6_371_000.0, 0.0, 1e8, "(]")
    orbit_altitude: float = _f(600_000.0, 0.0, 1e8, "(]")
    elevation: float = _f(90.0, 0.0, 90.0, "(]")  # deg, at the area centre
    hpbw: float = _f(4.41, 0.0, 60.0, "(]")
    frf: int = _f(1, choices=(1, 3))
    ring_azimuth: float = _f(30.0, -360.0, 360.0)  # rotation of the ring beams, deg
    sat_max_gain: float = _f(30.0, 0.0, 80.0)  # dBi


@dataclass(frozen=True)
class SpectrumConfig(_Section):
    section_name = "spectrum"
    fc: float = _f(2.0, 0.0, 100.0, "(]")  # GHz
    tn_dl_bw: float = _f(10e6, 0.0, 1e9, "(]")  # Hz per TN cell
    tn_ul_bw: float = _f(10e6, 0.0, 1e9, "(]")
    ntn_dl_bw: float = _f(30e6, 0.0, 1e9, "(]")  # Hz per beam
    ntn_ul_bw: float = _f(30e6, 0.0, 1e9, "(]")
    ul_prb_bw: float = _f(360e3, 0.0, 1e9, "(]")  # per scheduled UL user

    def __post_init__(self):
        super().__post_init__()
        for name in ("tn_ul_bw", "ntn_ul_bw"):
            if getattr(self, name) < self.ul_prb_bw:
                raise ConfigError(f"spectrum.{name} must be >= spectrum.ul_prb_bw")


@dataclass(frozen=True)
class TrafficConfig(_Section):
    section_name = "traffic"
    users_per_cell: float = _f(15.0, 0.0, 1000.0)
    uav_ratio: float = _f(0.071, 0.0, 100.0)  # UAVs per GUE
    h_uav: float = _f(150.0, 22.5, 300.0, "(]")
    indoor_fraction: float = _f(0.8, 0.0, 1.0)
    min_floors: int = _f(4, 1, 100)
    max_floors: int = _f(8, 1, 100)
    h_outdoor: float = _f(1.5, 1.5, 22.5)
    floor_height: float = _f(3.0, 0.0, 10.0)
    max_indoor_distance: float = _f(25.0, 0.0, 100.0)

    def __post_init__(self):
        super().__post_init__()
        if self.min_floors > self.max_floors:
            raise ConfigError("traffic.min_floors must be <= traffic.max_floors")
        top = self.h_outdoor + self.floor_height * (self.max_floors - 1)
        if top > 22.5:
            raise ConfigError(f"indoor users would sit at {top:g} m, above the 22.5 m ground-user limit")


@dataclass(frozen=True)
class PowerConfig(_Section):
    section_name = "power"
    tn_power: float = _f(46.0, -50.0, 80.0)  # dBm per TN cell
    ntn_density: float = _f(34.0, -100.0, 100.0)  # dBW/MHz per beam
    ntn_density_is_eirp: bool = field(default=True, metadata={"choices": (True, False)})
    p0: float = _f(-85.0, -200.0, 50.0)  # dBm
    alpha: float = _f(0.8, 0.0, 1.0)
    p_max: float = _f(23.0, -50.0, 50.0)  # dBm


@dataclass(frozen=True)
class NoiseConfig(_Section):
    section_name = "noise"
    density: float = _f(-174.0, -250.0, -100.0)  # dBm/Hz
    bs_noise_figure: float = _f(7.0, 0.0, 30.0)
    ue_noise_figure: float = _f(9.0, 0.0, 30.0)
    sat_g_over_t: float = _f(1.1, -50.0, 50.0)  # dB/K


@dataclass(frozen=True)
class SimulationConfig(_Section):
    section_name = "simulation"
    mode: str = _f("standalone_tn", choices=MODES)
    n_drops: int = _f(100, 1, 1e7)
    master_seed: int = _f(20240101, 0, 2**63 - 1)
    n_fading: int = _f(50, 1, 10_000)
    n_faded: int = _f(16, 1, 100_000)  # strongest interferers given their own fading draws
    sinr_threshold: float = _f(-5.0, -50.0, 50.0)  # dB, outage / relief target
    uav_target_rate: float = _f(100e3, 0.0, 1e9, "(]")  # bit/s, UL partition
    shadowing: bool = field(default=True, metadata={"choices": (True, False)})
    shadow_per_cell: bool = field(default=False, metadata={"choices": (True, False)})  # else per site
    fading: bool = field(default=True, metadata={"choices": (True, False)})
    # SINR samples include a fading draw; otherwise fading only enters the rate expectation
    sinr_cdf_fading: bool = field(default=False, metadata={"choices": (True, False)})
    exclude_edge: bool = field(default=False, metadata={"choices": (True, False)})
    edge_width: float = _f(1000.0, 0.0, 1e5)  # m, outer ring flagged as edge

    def __post_init__(self):
        super().__post_init__()
        for name in ("n_drops", "master_seed", "n_fading", "n_faded"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ConfigError(f"simulation.{name} must be an integer")


SECTIONS = {
    "deployment": DeploymentConfig,
    "spectrum": SpectrumConfig,
    "traffic": TrafficConfig,
    "power": PowerConfig,
    "noise": NoiseConfig,
    "simulation": SimulationConfig,
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    power: PowerConfig = field(default_factory=PowerConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    @property
    def mode(self) -> str:
        return self.simulation.mode

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        kwargs = {"name": d.get("name", "custom")}
        for sec, typ in SECTIONS.items():
            kwargs[sec] = typ(**d.get(sec, {}))
        return cls(**kwargs)

    def replace(self, **dotted) -> "ScenarioConfig":
        """Copy with ``section__key=value`` or ``{"section.key": value}`` overrides."""
        updates: dict[str, dict] = {}
        name = self.name
        for key, value in dotted.items():
            if key == "name":
                name = value
                continue
            sec, _, fld = key.replace("__", ".").partition(".")
            if sec not in SECTIONS or fld not in {f.name for f in dataclasses.fields(SECTIONS[sec])}:
                raise ConfigError(f"unknown config key {sec}.{fld}")
            updates.setdefault(sec, {})[fld] = value
        new = {sec: dataclasses.replace(getattr(self, sec), **vals) for sec, vals in updates.items()}
        return dataclasses.replace(self, name=name, **new)


# ---------------------------------------------------------------- presets

CASES = {"case2": 0.007, "case3": 0.071}
VARIANTS = (
    "standalone",
    "relief",
    "partition",
    "offload_90_frf1",
    "offload_90_frf3",
    "offload_87_frf1",
    "offload_87_frf3",
)


def preset_names() -> list[str]:
    return [f"{c}.{v}" for c in CASES for v in VARIANTS]


def preset(name: str) -> ScenarioConfig:
    """Table-level parameterisation of one experiment, e.g. ``case3.offload_87_frf1``."""
    case, _, variant = name.partition(".")
    if case not in CASES or variant not in VARIANTS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    base = ScenarioConfig(name=name, traffic=TrafficConfig(uav_ratio=CASES[case]))
    if variant == "standalone":
        return base.replace(**{"simulation.mode": "standalone_tn"})
    if variant == "relief":
        return base.replace(**{"simulation.mode": "tn_relief"})
    if variant == "partition":
        return base.replace(**{"simulation.mode": "tn_ul_partition"})
    _, elev, frf = variant.split("_")
    frf_n = int(frf[3:])
    per_beam = 30e6 / frf_n
    return base.replace(
        **{
            "simulation.mode": "tn_ntn_offload",
            "deployment.elevation": float(elev),
            "deployment.frf": frf_n,
            "spectrum.ntn_dl_bw": per_beam,
            "spectrum.ntn_ul_bw": per_beam,
        }
    )

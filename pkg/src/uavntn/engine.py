"""Monte Carlo campaign driver.

A drop is one independent realisation of user positions, shadowing, LoS
states, schedules and fading. Every random quantity of drop ``i`` comes from a
named substream ``SeedSequence(master_seed, spawn_key=(i, stream_id))`` so
any drop can be regenerated in isolation and results do not depend on how
drops are distributed over workers.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import radio
from .antenna import ReflectorPattern, SectorArrayPattern
from .channel import ChannelConstants, default_constants, ntn_gain_matrix, tn_gain_matrix
from .config import ScenarioConfig
from .geometry import EarthModel, TnLayout, TrafficParams, UserDrop, build_beam_grid, build_tn_layout, drop_users

STREAMS = {
    "users": 0,
    "tn_los": 1,
    "tn_shadow": 2,
    "o2i": 3,
    "ntn_los": 4,
    "ntn_shadow": 5,
    "tn_schedule": 6,
    "tn_dl_fading": 7,
    "tn_ul_fading": 8,
    "ntn_schedule": 9,
    "ntn_fading": 10,
    "partition": 11,
    "ntn_ul_fading": 12,
}

POPULATIONS = ("GUE", "UAV")
DIRECTIONS = ("DL", "UL")
WORKERS_ENV = "UAVNTN_WORKERS"
_CHUNK = 1024


def substream(master_seed: int, drop: int, name: str) -> np.random.Generator:
    """Generator for one named random quantity of one drop."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(drop), STREAMS[name]))
    return np.random.default_rng(ss)


# ---------------------------------------------------------------- records


@dataclass
class DropRecords:
    """Per-user outcomes of one drop, plus mode-specific extras."""

    drop: int
    is_uav: np.ndarray
    edge: np.ndarray
    ntn_served: np.ndarray
    dl_sinr_db: np.ndarray
    dl_rate: np.ndarray
    ul_sinr_db: np.ndarray
    ul_rate: np.ndarray
    muted_count: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))  # per TN-served UAV
    relief_sinr_db: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reserved_fraction: np.ndarray = field(default_factory=lambda: np.zeros(0))  # per cell with UAVs
    saturated: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __len__(self) -> int:
        return len(self.is_uav)


def _empty_records(drop: int) -> DropRecords:
    z = np.zeros(0)
    b = np.zeros(0, dtype=bool)
    return DropRecords(drop, b, b, b, z, z, z, z)


# ---------------------------------------------------------------- shared drop state


@dataclass
class _DropContext:
    config: ScenarioConfig
    drop: int
    layout: TnLayout
    users: UserDrop
    consts: ChannelConstants
    tn_gain_db: np.ndarray | None = None
    memo: dict = field(default_factory=dict)

    def rng(self, name: str) -> np.random.Generator:
        return substream(self.config.simulation.master_seed, self.drop, name)


@lru_cache(maxsize=8)
def _layout(isd: float, area: float, bs_height: float) -> TnLayout:
    return build_tn_layout(isd, area, bs_height)


@lru_cache(maxsize=8)
def _neighbors(isd: float, area: float, bs_height: float, tiers: int) -> np.ndarray:
    return _layout(isd, area, bs_height).cell_neighbors(int(tiers))


def _traffic(cfg: ScenarioConfig) -> TrafficParams:
    t = cfg.traffic
    return TrafficParams(
        users_per_cell=t.users_per_cell,
        uav_ratio=t.uav_ratio,
        h_uav=t.h_uav,
        indoor_fraction=t.indoor_fraction,
        min_floors=int(t.min_floors),
        max_floors=int(t.max_floors),
        h_outdoor=t.h_outdoor,
        floor_height=t.floor_height,
        max_indoor_distance=t.max_indoor_distance,
        edge_width=cfg.simulation.edge_width,
    )


def _geometry_key(cfg: ScenarioConfig) -> tuple:
    """Everything that determines users and TN gains of a drop."""
    d = cfg.deployment
    return (
        d.isd,
        d.area,
        d.bs_height,
        cfg.traffic,
        cfg.spectrum.fc,
        cfg.simulation.master_seed,
        cfg.simulation.shadowing,
        cfg.simulation.edge_width,
        cfg.simulation.shadow_per_cell,
    )


def _context(cfg: ScenarioConfig, drop: int, consts: ChannelConstants) -> _DropContext:
    d = cfg.deployment
    layout = _layout(d.isd, d.area, d.bs_height)
    rng = substream(cfg.simulation.master_seed, drop, "users")
    users = drop_users(layout, _traffic(cfg), rng)
    ctx = _DropContext(cfg, drop, layout, users, consts)
    ctx.tn_gain_db = tn_gain_matrix(
        layout,
        users,
        ctx.rng("tn_los"),
        ctx.rng("tn_shadow"),
        ctx.rng("o2i"),
        fc=cfg.spectrum.fc,
        sector=SectorArrayPattern(),
        consts=consts,
        shadowing=cfg.simulation.shadowing,
        shadow_per_cell=cfg.simulation.shadow_per_cell,
    )
    return ctx


def drop_state(config: ScenarioConfig, drop_index: int, *, consts: ChannelConstants | None = None):
    """Layout, users and TN gain matrix (dB) of one drop, as the engine sees them."""
    ctx = _context(config, drop_index, consts or default_constants())
    return ctx.layout, ctx.users, ctx.tn_gain_db


# ---------------------------------------------------------------- SINR evaluation helpers


def _evaluate(signal, terms, noise_mw, sim, rng, *, signal_rayleigh=False, term_rayleigh=False):
    """Per-PRB SINR sample and mean log2(1+SINR) per user.

    The sample is the first fading realisation when ``sinr_cdf_fading`` is set
    and the large-scale SINR (all |h| = 1) otherwise.
    """
    n = len(signal)
    n_samples = sim.n_fading if sim.fading else 1
    noise_mw = np.broadcast_to(np.asarray(noise_mw, dtype=float), (n,))
    sig_ray = np.broadcast_to(np.asarray(signal_rayleigh, dtype=bool), (n,)) & sim.fading
    term_ray = np.broadcast_to(np.asarray(term_rayleigh, dtype=bool), terms.shape) & sim.fading
    first = np.empty(n)
    se = np.empty(n)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        s = radio.sinr_realizations(
            signal[lo:hi],
            terms[lo:hi],
            noise_mw[lo:hi],
            n_samples if (sig_ray[lo:hi].any() or term_ray[lo:hi].any()) else 1,
            rng,
            signal_rayleigh=sig_ray[lo:hi],
            term_rayleigh=term_ray[lo:hi],
            n_faded=sim.n_faded,
        )
        if sim.sinr_cdf_fading:
            first[lo:hi] = s[:, 0]
        else:
            first[lo:hi] = signal[lo:hi] / (terms[lo:hi].sum(axis=1) + noise_mw[lo:hi])
        se[lo:hi] = np.log2(1.0 + s).mean(axis=1)
    return first, se


def _tn_noise(cfg: ScenarioConfig):
    nz = cfg.noise
    dl = radio.db_to_lin(radio.thermal_noise_dbm(cfg.spectrum.tn_dl_bw, nz.ue_noise_figure, nz.density))
    ul = radio.db_to_lin(radio.thermal_noise_dbm(cfg.spectrum.ul_prb_bw, nz.bs_noise_figure, nz.density))
    return float(dl), float(ul)


def _pc(cfg: ScenarioConfig) -> radio.PowerControl:
    p = cfg.power
    return radio.PowerControl(p0=p.p0, alpha=p.alpha, p_max=p.p_max)


@dataclass
class _TnDomain:
    """TN-side outcome for one set of TN-served users (standalone or offloaded)."""

    users: np.ndarray  # global user ids served by TN
    serving: np.ndarray  # local TN cell per served user
    gain_lin: np.ndarray  # (n_served, n_cells)
    dl_signal: np.ndarray
    dl_terms: np.ndarray
    dl_sinr: np.ndarray
    dl_se: np.ndarray
    dl_eta: np.ndarray
    ul_sinr: np.ndarray
    ul_se: np.ndarray
    ul_eta: np.ndarray
    ul_mw: np.ndarray
    load: np.ndarray


def _tn_domain(ctx: _DropContext, served: np.ndarray) -> _TnDomain:
    cfg = ctx.config
    sp, pw, nz, sim = cfg.spectrum, cfg.power, cfg.noise, cfg.simulation
    d = cfg.deployment
    key = (
        "tn", served.tobytes(), d.interference_tiers, sp.tn_dl_bw, sp.tn_ul_bw, sp.ul_prb_bw, pw.tn_power, pw.p0, pw.alpha,
        pw.p_max, nz.density, nz.bs_noise_figure, nz.ue_noise_figure, sim.n_fading, sim.n_faded, sim.fading,
        sim.sinr_cdf_fading,
    )
    if key in ctx.memo:
        return ctx.memo[key]
    sim = cfg.simulation
    is_uav = ctx.users.is_uav[served]
    g_db = ctx.tn_gain_db[served]
    g = radio.db_to_lin(g_db)
    n_cells = ctx.layout.n_cells
    cells = radio.CellSet(n_tn=n_cells)
    assoc = radio.associate_standalone_tn(g_db, cells) if len(served) else radio.Association(
        np.zeros(0, dtype=int), cells
    )
    serving = assoc.serving
    sched = radio.schedule(assoc, cfg.spectrum.tn_ul_bw, cfg.spectrum.ul_prb_bw, ctx.rng("tn_schedule"))
    noise_dl, noise_ul = _tn_noise(cfg)
    near = _neighbors(d.isd, d.area, d.bs_height, d.interference_tiers)[serving]  # (n, n_cells)

    # DL: every cell transmits at full power on the whole band
    p_dl = radio.db_to_lin(cfg.power.tn_power)
    signal, terms = radio.downlink_terms(p_dl * g, serving)
    terms *= near
    dl_sinr, dl_se = _evaluate(signal, terms, noise_dl, sim, ctx.rng("tn_dl_fading"),
                               signal_rayleigh=~is_uav, term_rayleigh=(~is_uav)[:, None])
    dl_eta = sched.dl_eta

    # UL: fractional power control, one co-scheduled user per other cell
    rows = np.arange(len(served))
    p_ul_dbm = radio.ul_power(g_db[rows, serving], False, _pc(cfg))
    ul_mw = radio.db_to_lin(p_ul_dbm)
    if len(served):
        s_ul, t_ul, ids = radio.uplink_terms(ul_mw, g, rows, serving, sched.ul_slot, sched.ul_cosched,
                                             np.arange(n_cells))
        t_ul *= near
        t_ray = (ids >= 0) & near & ~is_uav[np.maximum(ids, 0)]
    else:
        s_ul, t_ul, t_ray = np.zeros(0), np.zeros((0, n_cells)), np.zeros((0, n_cells), dtype=bool)
    ul_sinr, ul_se = _evaluate(s_ul, t_ul, noise_ul, sim, ctx.rng("tn_ul_fading"),
                               signal_rayleigh=~is_uav, term_rayleigh=t_ray)
    out = _TnDomain(
        users=served, serving=serving, gain_lin=g, dl_signal=signal, dl_terms=terms,
        dl_sinr=dl_sinr, dl_se=dl_se, dl_eta=dl_eta, ul_sinr=ul_sinr, ul_se=ul_se,
        ul_eta=sched.ul_eta, ul_mw=ul_mw, load=assoc.load(),
    )
    ctx.memo[key] = out
    return out


def ntn_beam_power_dbm(cfg: ScenarioConfig, bandwidth: float) -> float:
    """Conducted per-beam power in dBm over ``bandwidth`` Hz."""
    p = cfg.power
    dens = p.ntn_density + 30.0  # dBm/MHz
    if p.ntn_density_is_eirp:
        dens -= cfg.deployment.sat_max_gain
    return dens + 10.0 * math.log10(bandwidth / 1e6)


def _db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


# ---------------------------------------------------------------- modes


def _standalone(ctx: _DropContext) -> DropRecords:
    cfg = ctx.config
    n = len(ctx.users)
    served = np.arange(n)
    tn = _tn_domain(ctx, served)
    bw_dl, prb = cfg.spectrum.tn_dl_bw, cfg.spectrum.ul_prb_bw
    return DropRecords(
        drop=ctx.drop,
        is_uav=ctx.users.is_uav.copy(),
        edge=ctx.users.edge.copy(),
        ntn_served=np.zeros(n, dtype=bool),
        dl_sinr_db=_db(tn.dl_sinr),
        dl_rate=tn.dl_eta * bw_dl * tn.dl_se,
        ul_sinr_db=_db(tn.ul_sinr),
        ul_rate=tn.ul_eta * prb * tn.ul_se,
    )


def _relief(ctx: _DropContext) -> DropRecords:
    """Mute the dominant TN interferers of each UAV until it reaches the SINR target."""
    rec = _standalone(ctx)
    cfg = ctx.config
    tn = _tn_domain(ctx, np.arange(len(ctx.users)))
    uav = np.flatnonzero(ctx.users.is_uav)
    if len(uav) == 0:
        return rec
    noise_dl, _ = _tn_noise(cfg)
    mask, count, post = radio.relief_muting_counts(
        tn.dl_signal[uav], tn.dl_terms[uav], noise_dl, cfg.simulation.sinr_threshold
    )
    eta_uav = tn.dl_eta[uav]
    idle = np.minimum(mask.T.astype(float) @ eta_uav, 1.0)  # time share each cell stays silent
    gue = np.flatnonzero(~ctx.users.is_uav)
    rec.dl_rate[gue] *= 1.0 - idle[tn.serving[gue]]
    rec.dl_sinr_db[uav] = _db(post)
    rec.dl_rate[uav] = eta_uav * cfg.spectrum.tn_dl_bw * np.log2(1.0 + post)
    rec.muted_count = count
    rec.relief_sinr_db = _db(post)
    return rec


def _partition(ctx: _DropContext) -> DropRecords:
    """Orthogonal UL resources for UAVs, sized to meet the C&C target rate."""
    rec = _standalone(ctx)
    cfg = ctx.config
    sim = cfg.simulation
    tn = _tn_domain(ctx, np.arange(len(ctx.users)))
    n_cells = ctx.layout.n_cells
    cells = radio.CellSet(n_tn=n_cells)
    is_uav = ctx.users.is_uav
    rng = ctx.rng("partition")
    _, noise_ul = _tn_noise(cfg)
    prb, bw = cfg.spectrum.ul_prb_bw, cfg.spectrum.tn_ul_bw
    d = cfg.deployment

    def _ul_group(members, cell_bw):
        assoc = radio.Association(tn.serving[members], cells)
        sched = radio.schedule(assoc, cell_bw, prb, rng)
        local = np.arange(len(members))
        ul_mw = tn.ul_mw[members]
        g = tn.gain_lin[members]
        s, t, ids = radio.uplink_terms(ul_mw, g, local, assoc.serving, sched.ul_slot, sched.ul_cosched,
                                       np.arange(n_cells))
        near = _neighbors(d.isd, d.area, d.bs_height, d.interference_tiers)[assoc.serving]
        t = t * near
        t_ray = (ids >= 0) & near & ~is_uav[members][np.maximum(ids, 0)]
        sinr, se = _evaluate(s, t, noise_ul, sim, rng, signal_rayleigh=~is_uav[members], term_rayleigh=t_ray)
        return sched, sinr, se

    uav = np.flatnonzero(is_uav)
    gue = np.flatnonzero(~is_uav)
    frac = np.zeros(n_cells)
    if len(uav):
        _, u_sinr, u_se = _ul_group(uav, bw)
        part = radio.ul_resource_partition(tn.serving[uav], u_se, n_cells, bw, sim.uav_target_rate)
        frac = part.reserved_fraction
        rec.ul_sinr_db[uav] = _db(u_sinr)
        rec.ul_rate[uav] = part.uav_share * u_se
        has = np.bincount(tn.serving[uav], minlength=n_cells) > 0
        rec.reserved_fraction = frac[has]
        rec.saturated = part.saturated[has]
    if len(gue):
        gue_bw = np.maximum((1.0 - frac) * bw, 0.0)
        sched, g_sinr, g_se = _ul_group(gue, gue_bw)
        rec.ul_sinr_db[gue] = _db(g_sinr)
        rec.ul_rate[gue] = sched.ul_eta * prb * g_se
    return rec


def _offload(ctx: _DropContext) -> DropRecords:
    """GUEs stay on the TN; UAVs move to the satellite beams."""
    cfg = ctx.config
    sim = cfg.simulation
    users = ctx.users
    n = len(users)
    is_uav = users.is_uav
    gue = np.flatnonzero(~is_uav)
    uav = np.flatnonzero(is_uav)

    tn = _tn_domain(ctx, gue)
    dl_sinr = np.zeros(n)
    dl_rate = np.zeros(n)
    ul_sinr = np.zeros(n)
    ul_rate = np.zeros(n)
    dl_sinr[gue] = tn.dl_sinr
    dl_rate[gue] = tn.dl_eta * cfg.spectrum.tn_dl_bw * tn.dl_se
    ul_sinr[gue] = tn.ul_sinr
    ul_rate[gue] = tn.ul_eta * cfg.spectrum.ul_prb_bw * tn.ul_se

    if len(uav):
        d = cfg.deployment
        earth = EarthModel(d.earth_radius, d.orbit_altitude)
        grid = build_beam_grid(d.elevation, d.hpbw, int(d.frf), earth, ring_azimuth=d.ring_azimuth)
        refl = ReflectorPattern(max_gain=d.sat_max_gain, hpbw=d.hpbw)
        g_db = ntn_gain_matrix(
            grid, users.take(uav), ctx.rng("ntn_los"), ctx.rng("ntn_shadow"), ctx.rng("o2i"),
            fc=cfg.spectrum.fc, reflector=refl, consts=ctx.consts, shadowing=sim.shadowing,
        )
        g = radio.db_to_lin(g_db)
        cells = radio.CellSet(n_tn=0, ntn_bands=grid.bands)
        assoc = radio.Association(np.argmax(g_db, axis=1), cells)
        serving = assoc.serving
        co_band = grid.bands[None, :] == grid.bands[serving][:, None]
        nz = cfg.noise

        # DL: every beam transmits on its band at the configured density
        p_beam = radio.db_to_lin(ntn_beam_power_dbm(cfg, cfg.spectrum.ntn_dl_bw))
        signal, terms = radio.downlink_terms(p_beam * g, serving)
        terms = terms * co_band
        noise_dl = radio.db_to_lin(radio.thermal_noise_dbm(cfg.spectrum.ntn_dl_bw, nz.ue_noise_figure, nz.density))
        s_dl, se_dl = _evaluate(signal, terms, noise_dl, sim, ctx.rng("ntn_fading"))
        sched = radio.schedule(assoc, cfg.spectrum.ntn_ul_bw, cfg.spectrum.ul_prb_bw, ctx.rng("ntn_schedule"))
        dl_sinr[uav] = s_dl
        dl_rate[uav] = sched.dl_eta * cfg.spectrum.ntn_dl_bw * se_dl

        # UL: full power, interferers are co-scheduled UAVs of the other co-band beams
        ul_mw = np.full(len(uav), radio.db_to_lin(cfg.power.p_max))
        local = np.arange(len(uav))
        s_ul, t_ul, _ = radio.uplink_terms(ul_mw, g, local, serving, sched.ul_slot, sched.ul_cosched,
                                           np.arange(grid.n_beams))
        t_ul = t_ul * co_band
        noise = radio.NoiseParams(nz.density, nz.ue_noise_figure, nz.bs_noise_figure, nz.sat_g_over_t, d.sat_max_gain)
        noise_ul = radio.db_to_lin(radio.satellite_noise_dbm(cfg.spectrum.ul_prb_bw, noise))
        s_u, se_u = _evaluate(s_ul, t_ul, noise_ul, sim, ctx.rng("ntn_ul_fading"))
        ul_sinr[uav] = s_u
        ul_rate[uav] = sched.ul_eta * cfg.spectrum.ul_prb_bw * se_u

    return DropRecords(
        drop=ctx.drop,
        is_uav=is_uav.copy(),
        edge=users.edge.copy(),
        ntn_served=is_uav.copy(),
        dl_sinr_db=_db(dl_sinr),
        dl_rate=dl_rate,
        ul_sinr_db=_db(ul_sinr),
        ul_rate=ul_rate,
    )


_MODES = {
    "standalone_tn": _standalone,
    "tn_relief": _relief,
    "tn_ul_partition": _partition,
    "tn_ntn_offload": _offload,
}


def _run_group_drop(configs: tuple[ScenarioConfig, ...], drop: int, consts_path: str | None = None):
    consts = default_constants() if consts_path is None else ChannelConstants.load(consts_path)
    try:
        ctx = _context(configs[0], drop, consts)
        out = []
        for cfg in configs:
            ctx.config = cfg
            out.append(_MODES[cfg.mode](ctx) if len(ctx.users) else _empty_records(drop))
        return out
    except Exception as exc:  # annotate with the failing drop
        raise RuntimeError(f"drop {drop} failed: {exc}") from exc


def run_drop(config: ScenarioConfig, drop_index: int, *, consts_path: str | None = None) -> DropRecords:
    """One full pipeline pass; deterministic given (master_seed, drop_index)."""
    return _run_group_drop((config,), drop_index, consts_path)[0]


# ---------------------------------------------------------------- aggregation


def nearest_rank(sorted_values: np.ndarray, p: float) -> float:
    """Nearest-rank percentile of an ascending array (NaN when empty)."""
    n = len(sorted_values)
    if n == 0:
        return float("nan")
    rank = max(1, math.ceil(p / 100.0 * n))
    return float(sorted_values[rank - 1])


@dataclass
class PopulationStats:
    sinr_db: np.ndarray  # ascending
    rate_bps: np.ndarray  # ascending
    threshold_db: float = -5.0

    @property
    def n(self) -> int:
        return len(self.sinr_db)

    @property
    def outage(self) -> float:
        if self.n == 0:
            return float("nan")
        return float(np.count_nonzero(self.sinr_db < self.threshold_db)) / self.n

    @property
    def mean_rate(self) -> float:
        return float(self.rate_bps.mean()) if len(self.rate_bps) else float("nan")

    @property
    def p95_rate(self) -> float:
        return nearest_rank(self.rate_bps, 95.0)

    @property
    def median_sinr_db(self) -> float:
        return nearest_rank(self.sinr_db, 50.0)

    def scalars(self) -> dict:
        return {
            "n": self.n,
            "outage": self.outage,
            "mean_rate": self.mean_rate,
            "p95_rate": self.p95_rate,
            "median_sinr_db": self.median_sinr_db,
        }


@dataclass
class MetricsSummary:
    scenario: str
    config: ScenarioConfig
    n_drops: int
    stats: dict  # (population, direction) -> PopulationStats
    relief: dict = field(default_factory=dict)
    partition: dict = field(default_factory=dict)

    def __getitem__(self, key) -> PopulationStats:
        return self.stats[key]


def summarize(config: ScenarioConfig, records: list[DropRecords]) -> MetricsSummary:
    sim = config.simulation
    records = sorted(records, key=lambda r: r.drop)

    def cat(attr, dtype=float):
        parts = [getattr(r, attr) for r in records]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=dtype)

    is_uav = cat("is_uav", bool).astype(bool)
    keep = ~cat("edge", bool).astype(bool) if sim.exclude_edge else np.ones(len(is_uav), dtype=bool)
    stats = {}
    for pop in POPULATIONS:
        sel = keep & (is_uav if pop == "UAV" else ~is_uav)
        for direction in DIRECTIONS:
            s = cat(f"{direction.lower()}_sinr_db")[sel]
            r = cat(f"{direction.lower()}_rate")[sel]
            stats[(pop, direction)] = PopulationStats(np.sort(s), np.sort(r), sim.sinr_threshold)

    relief = {}
    if config.mode == "tn_relief":
        counts = cat("muted_count", int)
        post = cat("relief_sinr_db")
        relieved = counts[counts > 0]
        relief = {
            "n_uav": int(len(counts)),
            "n_relieved": int(len(relieved)),
            "mean_muted_relieved": float(relieved.mean()) if len(relieved) else 0.0,
            "mean_muted_all": float(counts.mean()) if len(counts) else 0.0,
            "min_post_sinr_db": float(post.min()) if len(post) else float("nan"),
        }
    partition = {}
    if config.mode == "tn_ul_partition":
        frac = cat("reserved_fraction")
        sat = cat("saturated", bool).astype(bool)
        partition = {
            "n_cells": int(len(frac)),
            "mean_reserved_fraction": float(frac.mean()) if len(frac) else 0.0,
            "p95_reserved_fraction": nearest_rank(np.sort(frac), 95.0),
            "saturated_fraction": float(sat.mean()) if len(sat) else 0.0,
        }
    return MetricsSummary(config.name, config, len(records), stats, relief, partition)


# ---------------------------------------------------------------- campaigns


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def _group(configs) -> list[list[int]]:
    groups: dict[tuple, list[int]] = {}
    for i, cfg in enumerate(configs):
        groups.setdefault(_geometry_key(cfg) + (cfg.simulation.n_drops,), []).append(i)
    return list(groups.values())


def run_campaigns(configs, workers: int | None = None, *, consts_path: str | None = None) -> list[MetricsSummary]:
    """Run several campaigns, sharing users and TN gains between compatible configs.

    Configs that differ only in mode, satellite geometry, spectrum or power
    see identical drops, which also pairs their samples for comparisons.
    """
    configs = list(configs)
    n_workers = worker_count(workers)
    results: list[list[DropRecords]] = [[] for _ in configs]
    for idx in _group(configs):
        group = tuple(configs[i] for i in idx)
        drops = range(int(group[0].simulation.n_drops))
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                outs = list(pool.map(_run_group_drop, [group] * len(drops), drops, [consts_path] * len(drops)))
        else:
            outs = [_run_group_drop(group, d, consts_path) for d in drops]
        for per_drop in outs:
            for j, rec in zip(idx, per_drop):
                results[j].append(rec)
    return [summarize(cfg, recs) for cfg, recs in zip(configs, results)]


def run_campaign(config: ScenarioConfig, workers: int | None = None, *, consts_path: str | None = None) -> MetricsSummary:
    if config.simulation.n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    return run_campaigns([config], workers, consts_path=consts_path)[0]


def with_drops(config: ScenarioConfig, n_drops: int) -> ScenarioConfig:
    return dataclasses.replace(config, simulation=dataclasses.replace(config.simulation, n_drops=n_drops))
